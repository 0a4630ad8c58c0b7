#pragma once

// Ray data U = D_-(r^{1/2} u) = (1/2)(d_r - d_t)(r^{1/2} u) along r = t + sigma, and the fits
// that compare it with the profile law: pointwise decay, energy decay, phase drift.

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlwave/fitting.hpp"
#include "nlwave/nonlinearity.hpp"
#include "nlwave/profile_ode.hpp"
#include "nlwave/wave_solver.hpp"

namespace nlwave {

struct RaySample {
    double sigma = 0.0;
    double omega = 0.0; ///< angle
    std::vector<double> times;
    std::vector<cplx> U;
    std::vector<Gradient> du;
};

/// t_{0,sigma} = max(2, -2 sigma)
[[nodiscard]] double ray_start_time(double sigma) noexcept;

/// Samples the ray at every snapshot time >= t_{0,sigma} by cubic interpolation in space.
/// Throws RangeError if a snapshot does not cover the interpolation stencil, or if no
/// snapshot lies on the ray.
[[nodiscard]] RaySample extract_ray(std::span<const FieldSnapshot> snapshots, double sigma, double omega);
[[nodiscard]] RaySample extract_ray(const RunResult& run, double sigma, double omega);

/// Ray whose U follows the explicit profile from p0 exactly (closed-loop checks).
[[nodiscard]] RaySample manufactured_ray(cplx f_hat, cplx p0, double sigma, double omega,
                                         std::span<const double> times);

inline constexpr double kDefaultMatchTime = 50.0;

/// P0 from the sample nearest t_match, flowed back from tau = log t_match to 0.
/// Throws RangeError if t_match is outside the ray window, DomainError as invert_profile.
[[nodiscard]] cplx fit_profile_p0(const RaySample& ray, cplx f_hat, double t_match = kDefaultMatchTime);

/// Window of a fit in t; non-positive bounds fall back to the documented defaults.
struct FitWindow {
    double t_lo = 0.0;
    double t_hi = 0.0;
};

/// A residual flatter than t^-0.05 over the window counts as not decaying.
inline constexpr double kMinResidualDecay = -0.05;
/// Power-law fit of |U(t) - P(log t)| over the window (default [10 t_{0,sigma}, last sample]).
/// PASS when the slope is at most kMinResidualDecay and the last residual is below 0.1 |P|;
/// a residual at the noise floor is a degenerate PASS.
[[nodiscard]] DecayFit verify_profile_convergence(const RaySample& ray, cplx p0, cplx f_hat, FitWindow window = {});

/// Regresses |du|^2 t against 1/log t (default window [1e2, last sample]). PASS needs
/// R^2 >= 0.95 and a positive slope. Throws WindowError if the window spans less than a
/// decade or has < 8 samples.
[[nodiscard]] DecayFit fit_pointwise_decay(const RaySample& ray, FitWindow window = {});

struct EnergyTrace {
    std::vector<double> times;
    std::vector<double> energy_sq;

    [[nodiscard]] static EnergyTrace from_run(const RunResult& run);
    /// Every value at most the previous one plus a few ulps.
    [[nodiscard]] bool non_increasing() const;
    [[nodiscard]] double max_relative_drift() const;
};

inline constexpr double kEnergySlack = 0.15;

/// Regresses log E against log log t over the window (default [1e2, end]). PASS when the
/// slope is at most -(1 - 2mu)/(2 - 2mu) + slack and the trace is non-increasing.
/// Throws WindowError if the trace ends before t = 1e3.
[[nodiscard]] DecayFit fit_energy_decay(const EnergyTrace& trace, double mu, double eps,
                                        double slack = kEnergySlack, FitWindow window = {});

/// Unwraps successive phase differences into (-pi, pi]. Throws UnwrapError if any jump
/// exceeds max_jump (sampling too coarse to follow the phase).
[[nodiscard]] std::vector<double> unwrap_phase(std::span<const cplx> values, double max_jump = 0.5 * 3.141592653589793);

inline constexpr double kPhaseTolerance = 0.15;

/// Fits the unwrapped arg U against log t (default window [10 t_{0,sigma}, end]); PASS when
/// the slope is within tol of -Im(f_hat)|p0|^2/2 (|p0|^2/2 for f_hat = -i).
[[nodiscard]] DecayFit fit_phase_slope(const RaySample& ray, cplx p0, cplx f_hat = cplx{0.0, -1.0},
                                       double tol = kPhaseTolerance, FitWindow window = {});

/// Power-law fit of |r^{1/2} du - hat{omega} U| along the ray; PASS when the slope is negative.
[[nodiscard]] DecayFit fit_route_discrepancy(const RaySample& ray, FitWindow window = {});

struct FreenessReport {
    bool modulus_conserved = false; ///< Re F(hat{omega}) = 0 wherever P0 != 0
    bool phase_drift = false;       ///< Im F(hat{omega}) |P0|^2 != 0 somewhere
    bool asymptotically_free = false;
    double max_phase_rate = 0.0;    ///< max |Im F| |P0|^2 / 2
    double l2_norm = 0.0;           ///< L^2(sigma, omega) norm of P0
};

[[nodiscard]] FreenessReport asymptotic_freeness_diagnostic(const ProfileFunction& profile,
                                                            const CubicNonlinearity& f, double tol = 1e-10);

[[nodiscard]] nlohmann::json to_json(const FreenessReport& report);
/// Columns t, re_U, im_U, abs_U, arg_U (unwrapped).
[[nodiscard]] std::string ray_csv(const RaySample& ray);

} // namespace nlwave
