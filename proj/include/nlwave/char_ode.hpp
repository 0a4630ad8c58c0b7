#pragma once

// Model ODE along a characteristic ray,
//     z'(t) = -(K / 2t)|z|^2 z + J(t),   z(t0) = z0,
// its (xi, eta) companion system, and the construction of the limiting profile p0
// for which z(t) - p(log t) -> 0, p solving p' = -(K/2)|p|^2 p.

#include <complex>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nlwave/fitting.hpp"
#include "nlwave/nonlinearity.hpp"

namespace nlwave {

/// Forcing term J(t).
class Forcing {
public:
    /// J == 0.
    static Forcing zero();
    /// J(t) = amplitude * t^{-rho}.
    static Forcing power_law(cplx amplitude, double rho);
    /// Tabulated samples, interpolated linearly in log t; zero after the last sample.
    /// Times must be strictly increasing and positive (throws ConfigError).
    static Forcing tabulated(std::vector<double> times, std::vector<cplx> values);
    /// Arbitrary callable.
    static Forcing custom(std::function<cplx(double)> fn, std::string description);

    [[nodiscard]] cplx operator()(double t) const { return fn_(t); }
    [[nodiscard]] const std::string& description() const noexcept { return description_; }
    [[nodiscard]] bool is_zero() const noexcept { return zero_; }
    /// J(t) = 0 for t > support_end() (infinity unless known).
    [[nodiscard]] double support_end() const noexcept { return support_end_; }

private:
    Forcing(std::function<cplx(double)> fn, std::string description, bool zero, double support_end)
        : fn_(std::move(fn)), description_(std::move(description)), zero_(zero), support_end_(support_end)
    {
    }
    std::function<cplx(double)> fn_;
    std::string description_;
    bool zero_ = false;
    double support_end_;
};

/// Constants of the decay hypotheses: |z0| <= E0 eps <sigma>^{-kappa-rho+1},
/// |J(t)| <= E0 eps <sigma>^{-kappa} t^{-rho}, c0^{-1}<sigma> < t0 < c0 <sigma>.
struct DecayBounds {
    double eps = 0.01;
    double sigma = 0.0;
    double rho = 2.0;
    double mu = 0.05;
    double kappa = 0.0;
    double E0 = 1.0;
    double c0 = 4.0;
};

struct CharOdeProblem {
    cplx K{1.0, 0.0};
    cplx z0{0.0, 0.0};
    double t0 = 2.0;
    Forcing J = Forcing::zero();
    DecayBounds bounds{};

    /// Throws DomainError if Re K < 0, t0 < 1, or the bound constants are out of range.
    void validate() const;
    /// E0 eps <sigma>^{-kappa} t^{-rho}
    [[nodiscard]] double envelope(double t) const;
};

struct HypothesisReport {
    bool z0_ok = false;
    bool forcing_ok = false;
    bool t0_ok = false;
    double z0_ratio = 0.0;      ///< |z0| / bound
    double forcing_ratio = 0.0; ///< max |J(t)| / envelope(t) over the samples
    [[nodiscard]] bool all_ok() const noexcept { return z0_ok && forcing_ok && t0_ok; }
};

[[nodiscard]] HypothesisReport check_hypotheses(const CharOdeProblem& prob,
                                                std::span<const double> sample_times);

struct ZPoint {
    double t;
    cplx z;
};

struct XiEtaState {
    cplx xi;
    double eta;
    double t;
};

/// RK4 with uniform steps in t (step <= dt, landing on t_end). Throws StepError.
[[nodiscard]] std::vector<ZPoint> solve_z(const CharOdeProblem& prob, double t_end, double dt);
/// RK4 with uniform steps h in log t.
[[nodiscard]] std::vector<ZPoint> solve_z_log(const CharOdeProblem& prob, double t_end, double h);
/// z at each of the given increasing times >= t0, integrating in log t with step <= h.
[[nodiscard]] std::vector<ZPoint> z_at_times(const CharOdeProblem& prob, std::span<const double> times,
                                             double h);

[[nodiscard]] std::vector<XiEtaState> solve_xi_eta(const CharOdeProblem& prob, double t_end, double dt);
[[nodiscard]] std::vector<XiEtaState> solve_xi_eta_log(const CharOdeProblem& prob, double t_end,
                                                       double h);

struct ExtractedProfile {
    cplx p0;
    cplx z_plus;
    double theta0 = 0.0;
    double eta_inf_at_one = 1.0; ///< eta_inf(1); must be >= 1/2
    double tail_bound = 0.0;     ///< bound on the p0 error from truncating at t_max
    double t_max = 0.0;
    double p0_constant = 0.0;    ///< |p0| / (eps <sigma>^{-kappa-rho+1})
};

inline constexpr double kDefaultTailTolerance = 1e-8;

/// Builds z_plus, Theta_0 and eta_inf by composite Simpson on a log-uniform grid of step
/// h up to t_max, and returns p0 = xi_inf(1) / sqrt(eta_inf(1)).
/// Throws TailError if the truncation bound exceeds tol, DomainError if eta_inf(1) < 1/2.
[[nodiscard]] ExtractedProfile extract_profile(const CharOdeProblem& prob, double t_max, double h,
                                               double tol = kDefaultTailTolerance);

/// Fits log|z(t) - p(log t)| against log t over the samples. PASS when the slope is at most
/// -rho + mu + 1 + slack; differences at the rounding floor give a degenerate PASS.
[[nodiscard]] DecayFit verify_asymptotic_bound(const CharOdeProblem& prob,
                                               const ExtractedProfile& profile,
                                               std::span<const double> samples, double slack = 0.05,
                                               double h = 1e-3);

/// Columns t, re_z, im_z, re_xi, im_xi, eta. Trajectories must share time stamps.
[[nodiscard]] std::string trajectory_csv(std::span<const ZPoint> z, std::span<const XiEtaState> xe);

/// Cumulative composite Simpson integral on a uniform grid (value at every node).
[[nodiscard]] std::vector<double> cumulative_simpson(std::span<const double> f, double h);
[[nodiscard]] std::vector<cplx> cumulative_simpson(std::span<const cplx> f, double h);

} // namespace nlwave
