#pragma once

// The asymptotic profile law dP/dtau = -(F(hat{omega})/2)|P|^2 P in slow time tau = log t:
// closed-form solution, its phase, a fixed-step integrator, and gridded profile data.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "nlwave/nonlinearity.hpp"

namespace nlwave {

struct ProfileParams {
    cplx f_hat; ///< F(hat{omega}) for the ray direction
    cplx p0;    ///< P(0)
};

/// P(tau) = p0 exp(-i Theta) / sqrt(1 + Re(f_hat) |p0|^2 tau).
/// Throws DomainError once the radicand is <= 0 (anti-dissipative blow-up reached).
[[nodiscard]] cplx explicit_profile(const ProfileParams& params, double tau);

/// Theta(tau) in closed form. Throws DomainError on a nonpositive log argument.
[[nodiscard]] double phase_theta(const ProfileParams& params, double tau);

/// Classical RK4 with uniform steps no larger than dt, landing exactly on tau_end.
/// Throws StepError if the state becomes non-finite.
[[nodiscard]] cplx integrate_profile(const ProfileParams& params, double tau_end, double dt);

/// |p0| / sqrt(1 + Re(f_hat) |p0|^2 tau); requires Re f_hat >= 0 (throws DomainError otherwise).
[[nodiscard]] double modulus_bound(const ProfileParams& params, double tau);

/// -1 / (Re(f_hat) |p0|^2) for anti-dissipative parameters, nullopt otherwise.
[[nodiscard]] std::optional<double> blowup_time(const ProfileParams& params);

/// Backward flow: the p0 whose explicit profile takes `value` at slow time tau.
/// Throws DomainError if 1 - Re(f_hat)|value|^2 tau <= 0.
[[nodiscard]] cplx invert_profile(cplx f_hat, cplx value, double tau);

/// P0(sigma, omega) on a tensor grid; values stored sigma-major.
struct ProfileFunction {
    std::vector<double> sigma_grid;
    std::vector<double> omega_grid; ///< angles
    std::vector<cplx> p0_values;    ///< size sigma_grid.size() * omega_grid.size()
    double tau = 0.0;

    [[nodiscard]] cplx p0(std::size_t i_sigma, std::size_t i_omega) const
    {
        return p0_values.at(i_sigma * omega_grid.size() + i_omega);
    }

    /// P(tau, sigma, omega) on the grid for the nonlinearity f.
    [[nodiscard]] std::vector<cplx> evolved(const CubicNonlinearity& f, double tau) const;

    /// Empirical sup of |P0| <sigma>^{1-mu} / eps.
    [[nodiscard]] double decay_constant(double eps, double mu) const;

    /// Columns sigma, theta, re_p0, im_p0.
    [[nodiscard]] std::string to_csv() const;
    [[nodiscard]] static ProfileFunction from_csv(const std::string& text);
};

} // namespace nlwave
