#include "nlwave/profile_ode.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nlwave/errors.hpp"
#include "nlwave/text_io.hpp"

namespace nlwave {

namespace {

double radicand(const ProfileParams& p, double tau)
{
    return 1.0 + p.f_hat.real() * std::norm(p.p0) * tau;
}

cplx rhs(cplx f_hat, cplx p) { return -0.5 * f_hat * std::norm(p) * p; }

} // namespace

double phase_theta(const ProfileParams& params, double tau)
{
    const double m2 = std::norm(params.p0);
    const double im = params.f_hat.imag();
    const double re = params.f_hat.real();
    const double x = re * m2 * tau;
    if (1.0 + x <= 0.0) {
        throw DomainError("phase_theta: log argument is nonpositive");
    }
    if (im == 0.0 || m2 == 0.0 || tau == 0.0) {
        return 0.0;
    }
    if (re == 0.0) {
        return 0.5 * im * m2 * tau;
    }
    return im / (2.0 * re) * std::log1p(x);
}

cplx explicit_profile(const ProfileParams& params, double tau)
{
    const double rad = radicand(params, tau);
    if (rad <= 0.0) {
        throw DomainError("explicit_profile: radicand is nonpositive (profile blow-up)");
    }
    if (params.p0 == cplx{}) {
        return {};
    }
    const double theta = phase_theta(params, tau);
    return params.p0 * std::polar(1.0, -theta) / std::sqrt(rad);
}

cplx integrate_profile(const ProfileParams& params, double tau_end, double dt)
{
    if (!(dt > 0.0) || !(tau_end >= 0.0)) {
        throw DomainError("integrate_profile: need dt > 0 and tau_end >= 0");
    }
    const auto n = static_cast<long>(std::ceil(tau_end / dt));
    if (n == 0) {
        return params.p0;
    }
    const double h = tau_end / static_cast<double>(n);
    cplx p = params.p0;
    const cplx f = params.f_hat;
    for (long k = 0; k < n; ++k) {
        const cplx k1 = rhs(f, p);
        const cplx k2 = rhs(f, p + 0.5 * h * k1);
        const cplx k3 = rhs(f, p + 0.5 * h * k2);
        const cplx k4 = rhs(f, p + h * k3);
        p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(p.real()) || !std::isfinite(p.imag())) {
            throw StepError("integrate_profile: non-finite state at tau=" + std::to_string((k + 1) * h));
        }
    }
    return p;
}

double modulus_bound(const ProfileParams& params, double tau)
{
    if (params.f_hat.real() < 0.0) {
        throw DomainError("modulus_bound requires Re F >= 0");
    }
    return std::abs(params.p0) / std::sqrt(radicand(params, tau));
}

std::optional<double> blowup_time(const ProfileParams& params)
{
    const double a = params.f_hat.real() * std::norm(params.p0);
    if (a < 0.0) {
        return -1.0 / a;
    }
    return std::nullopt;
}

cplx invert_profile(cplx f_hat, cplx value, double tau)
{
    if (value == cplx{}) {
        return {};
    }
    const double v2 = std::norm(value);
    const double denom = 1.0 - f_hat.real() * v2 * tau;
    if (denom <= 0.0) {
        throw DomainError("invert_profile: backward radicand is nonpositive");
    }
    const double p02 = v2 / denom;
    const double scale = std::sqrt(1.0 / denom); // sqrt(1 + Re F |p0|^2 tau)
    // The phase depends on p0 only through |p0|, so one evaluation suffices.
    const double theta = phase_theta({f_hat, cplx{std::sqrt(p02), 0.0}}, tau);
    return value * scale * std::polar(1.0, theta);
}

std::vector<cplx> ProfileFunction::evolved(const CubicNonlinearity& f, double t) const
{
    std::vector<cplx> out(p0_values.size());
    for (std::size_t j = 0; j < omega_grid.size(); ++j) {
        const cplx fh = null_trace(f, omega_grid[j]);
        for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
            out[i * omega_grid.size() + j] = explicit_profile({fh, p0(i, j)}, t);
        }
    }
    return out;
}

double ProfileFunction::decay_constant(double eps, double mu) const
{
    double best = 0.0;
    for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
        const double weight = std::pow(std::sqrt(1.0 + sigma_grid[i] * sigma_grid[i]), 1.0 - mu);
        for (std::size_t j = 0; j < omega_grid.size(); ++j) {
            best = std::max(best, std::abs(p0(i, j)) * weight / eps);
        }
    }
    return best;
}

std::string ProfileFunction::to_csv() const
{
    CsvTable table;
    table.header = {"sigma", "theta", "re_p0", "im_p0"};
    for (std::size_t i = 0; i < sigma_grid.size(); ++i) {
        for (std::size_t j = 0; j < omega_grid.size(); ++j) {
            const cplx v = p0(i, j);
            table.rows.push_back({sigma_grid[i], omega_grid[j], v.real(), v.imag()});
        }
    }
    return table.to_string();
}

ProfileFunction ProfileFunction::from_csv(const std::string& text)
{
    const CsvTable table = CsvTable::parse(text);
    const auto cs = table.column("sigma");
    const auto ct = table.column("theta");
    const auto cr = table.column("re_p0");
    const auto ci = table.column("im_p0");
    std::map<std::pair<double, double>, cplx> values;
    std::vector<double> sigmas;
    std::vector<double> thetas;
    for (const auto& row : table.rows) {
        values[{row[cs], row[ct]}] = {row[cr], row[ci]};
        sigmas.push_back(row[cs]);
        thetas.push_back(row[ct]);
    }
    auto uniq = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
    };
    uniq(sigmas);
    uniq(thetas);
    if (values.size() != sigmas.size() * thetas.size()) {
        throw IOError("profile CSV is not a full tensor grid");
    }
    ProfileFunction pf;
    pf.sigma_grid = sigmas;
    pf.omega_grid = thetas;
    pf.p0_values.reserve(values.size());
    for (double s : sigmas) {
        for (double t : thetas) {
            pf.p0_values.push_back(values.at({s, t}));
        }
    }
    return pf;
}

} // namespace nlwave
