#include "nlwave/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "nlwave/errors.hpp"
#include "nlwave/text_io.hpp"

namespace nlwave {

namespace {

struct Stencil {
    std::array<double, 4> w;  ///< value weights for nodes k-1 .. k+2
    std::array<double, 4> dw; ///< derivative weights (per unit spacing)
};

// Four-point Lagrange interpolation at fractional offset s in [0, 1) from node k.
Stencil lagrange(double s)
{
    Stencil st;
    st.w = {-s * (s - 1.0) * (s - 2.0) / 6.0, (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
            -(s + 1.0) * s * (s - 2.0) / 2.0, (s + 1.0) * s * (s - 1.0) / 6.0};
    st.dw = {-(3.0 * s * s - 6.0 * s + 2.0) / 6.0, (3.0 * s * s - 4.0 * s - 1.0) / 2.0,
             -(3.0 * s * s - 2.0 * s - 2.0) / 2.0, (3.0 * s * s - 1.0) / 6.0};
    return st;
}

struct PointSample {
    cplx u;
    cplx ut;
    cplx ux; ///< radial: u_r
    cplx uy;
};

PointSample sample_radial(const FieldSnapshot& s, double r)
{
    const double pos = (r - s.origin) / s.spacing;
    const auto k = static_cast<long>(std::floor(pos));
    const double frac = pos - static_cast<double>(k);
    const bool axis = s.origin == 0.0;
    const long n = static_cast<long>(s.nx);
    if (k + 2 >= n || (!axis && k - 1 < 0) || k < 0) {
        throw RangeError("ray point r=" + format_double(r) + " at t=" + format_double(s.t)
                         + " lies outside the stored window");
    }
    const Stencil st = lagrange(frac);
    PointSample out{};
    for (int m = 0; m < 4; ++m) {
        long idx = k - 1 + m;
        if (idx < 0) {
            idx = -idx; // even reflection through the axis
        }
        const auto i = static_cast<std::size_t>(idx);
        out.u += st.w[m] * s.u[i];
        out.ut += st.w[m] * s.ut[i];
        out.ux += st.dw[m] * s.u[i];
    }
    out.ux /= s.spacing;
    return out;
}

PointSample sample_cartesian(const FieldSnapshot& s, double x, double y)
{
    const double px = (x - s.origin) / s.spacing;
    const double py = (y - s.origin) / s.spacing;
    const auto i = static_cast<long>(std::floor(px));
    const auto j = static_cast<long>(std::floor(py));
    if (i - 1 < 0 || j - 1 < 0 || i + 2 >= static_cast<long>(s.nx) || j + 2 >= static_cast<long>(s.ny)) {
        throw RangeError("ray point (" + format_double(x) + ", " + format_double(y)
                         + ") lies outside the stored grid");
    }
    const Stencil sx = lagrange(px - static_cast<double>(i));
    const Stencil sy = lagrange(py - static_cast<double>(j));
    PointSample out{};
    for (int b = 0; b < 4; ++b) {
        const auto row = static_cast<std::size_t>(j - 1 + b) * s.nx;
        for (int a = 0; a < 4; ++a) {
            const std::size_t k = row + static_cast<std::size_t>(i - 1 + a);
            out.u += sy.w[b] * sx.w[a] * s.u[k];
            out.ut += sy.w[b] * sx.w[a] * s.ut[k];
            out.ux += sy.w[b] * sx.dw[a] * s.u[k];
            out.uy += sy.dw[b] * sx.w[a] * s.u[k];
        }
    }
    out.ux /= s.spacing;
    out.uy /= s.spacing;
    return out;
}

struct Window {
    std::vector<std::size_t> idx;
    double lo;
    double hi;
};

Window select(const std::vector<double>& times, double lo, double hi)
{
    Window w{{}, lo, hi};
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] >= lo * (1.0 - 1e-12) && times[k] <= hi * (1.0 + 1e-12)) {
            w.idx.push_back(k);
        }
    }
    return w;
}

double last_time(const RaySample& ray)
{
    if (ray.times.empty()) {
        throw WindowError("ray has no samples");
    }
    return ray.times.back();
}

DecayFit degenerate_pass(std::string model, std::string note, double lo, double hi)
{
    DecayFit fit;
    fit.model = std::move(model);
    fit.degenerate = true;
    fit.pass = true;
    fit.note = std::move(note);
    fit.t_lo = lo;
    fit.t_hi = hi;
    return fit;
}

} // namespace

double ray_start_time(double sigma) noexcept { return std::max(2.0, -2.0 * sigma); }

RaySample extract_ray(std::span<const FieldSnapshot> snapshots, double sigma, double omega)
{
    RaySample ray;
    ray.sigma = sigma;
    ray.omega = omega;
    const double t0 = ray_start_time(sigma);
    const double c = std::cos(omega);
    const double s = std::sin(omega);
    for (const auto& snap : snapshots) {
        if (snap.t < t0) {
            continue;
        }
        const double r = snap.t + sigma;
        PointSample p;
        Gradient du;
        if (snap.radial) {
            p = sample_radial(snap, r);
            du = {p.ut, c * p.ux, s * p.ux};
        } else {
            p = sample_cartesian(snap, r * c, r * s);
            du = {p.ut, p.ux, p.uy};
            p.ux = c * p.ux + s * p.uy;
        }
        const double sr = std::sqrt(r);
        ray.times.push_back(snap.t);
        ray.U.push_back(0.5 * (sr * p.ux + p.u / (2.0 * sr) - sr * p.ut));
        ray.du.push_back(du);
    }
    if (ray.times.empty()) {
        throw RangeError("no snapshot reaches the ray start t0 = " + format_double(t0));
    }
    return ray;
}

RaySample extract_ray(const RunResult& run, double sigma, double omega)
{
    return extract_ray(std::span<const FieldSnapshot>(run.ray_snapshots), sigma, omega);
}

RaySample manufactured_ray(cplx f_hat, cplx p0, double sigma, double omega, std::span<const double> times)
{
    RaySample ray;
    ray.sigma = sigma;
    ray.omega = omega;
    const Gradient hat{cplx{-1.0, 0.0}, cplx{std::cos(omega), 0.0}, cplx{std::sin(omega), 0.0}};
    for (double t : times) {
        const cplx P = explicit_profile({f_hat, p0}, std::log(t));
        const double scale = 1.0 / std::sqrt(t);
        ray.times.push_back(t);
        ray.U.push_back(P);
        ray.du.push_back({hat[0] * scale * P, hat[1] * scale * P, hat[2] * scale * P});
    }
    return ray;
}

cplx fit_profile_p0(const RaySample& ray, cplx f_hat, double t_match)
{
    const double end = last_time(ray);
    const double start = ray.times.front();
    // Samples sit on half levels, so allow a small relative slack at both ends.
    if (t_match < start * (1.0 - 1e-3) || t_match > end * (1.0 + 1e-3)) {
        throw RangeError("t_match = " + format_double(t_match) + " is outside the ray window ["
                         + format_double(start) + ", " + format_double(end) + "]");
    }
    std::size_t best = 0;
    for (std::size_t k = 1; k < ray.times.size(); ++k) {
        if (std::abs(ray.times[k] - t_match) < std::abs(ray.times[best] - t_match)) {
            best = k;
        }
    }
    return invert_profile(f_hat, ray.U[best], std::log(ray.times[best]));
}

DecayFit verify_profile_convergence(const RaySample& ray, cplx p0, cplx f_hat, FitWindow window)
{
    const double lo = window.t_lo > 0.0 ? window.t_lo : 10.0 * ray_start_time(ray.sigma);
    const double hi = window.t_hi > 0.0 ? window.t_hi : last_time(ray);
    const Window w = select(ray.times, lo, hi);
    std::vector<double> t;
    std::vector<double> res;
    double umax = 0.0;
    for (std::size_t k : w.idx) {
        const cplx P = explicit_profile({f_hat, p0}, std::log(ray.times[k]));
        t.push_back(ray.times[k]);
        res.push_back(std::abs(ray.U[k] - P));
        umax = std::max(umax, std::abs(ray.U[k]));
    }
    const double floor = 1e-12 * std::max(umax, std::abs(p0));
    DecayFit fit;
    try {
        fit = fit_power_law(t, res, floor);
    } catch (const FitError& e) {
        DecayFit d = degenerate_pass("power_law", std::string("residual at noise floor: ") + e.what(), lo, hi);
        d.criterion = "slope <= -0.05 and final residual < 0.1 |P|";
        return d;
    }
    const double p_last = std::abs(explicit_profile({f_hat, p0}, std::log(t.back())));
    fit.pass = fit.slope <= kMinResidualDecay && res.back() < 0.1 * p_last;
    fit.threshold = kMinResidualDecay;
    fit.criterion = "slope <= -0.05 and final residual < 0.1 |P|";
    fit.extra["final_residual"] = res.back();
    fit.extra["final_abs_P"] = p_last;
    return fit;
}

DecayFit fit_pointwise_decay(const RaySample& ray, FitWindow window)
{
    const double lo = window.t_lo > 0.0 ? window.t_lo : 1e2;
    const double hi = window.t_hi > 0.0 ? window.t_hi : last_time(ray);
    const Window w = select(ray.times, lo, hi);
    if (w.idx.size() < 8 || ray.times[w.idx.back()] < 10.0 * (1.0 - 1e-3) * ray.times[w.idx.front()]) {
        throw WindowError("pointwise decay fit needs at least a decade of samples (window ["
                          + format_double(lo) + ", " + format_double(hi) + "], "
                          + std::to_string(w.idx.size()) + " samples)");
    }
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t k : w.idx) {
        const double t = ray.times[k];
        const auto& q = ray.du[k];
        const double du2 = std::norm(q[0]) + std::norm(q[1]) + std::norm(q[2]);
        x.push_back(1.0 / std::log(t));
        y.push_back(du2 * t);
    }
    const LinearFit lf = fit_line(x, y);
    double xbar = 0.0;
    for (double v : x) {
        xbar += v;
    }
    xbar /= static_cast<double>(x.size());

    DecayFit fit;
    fit.model = "|du|^2 t = slope / log t + intercept";
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.r_squared = lf.r_squared;
    fit.residual_norm = lf.residual_norm;
    fit.n_points = lf.n;
    fit.t_lo = ray.times[w.idx.front()];
    fit.t_hi = ray.times[w.idx.back()];
    fit.threshold = 0.95;
    fit.criterion = "R^2 >= 0.95 and slope > 0";
    fit.pass = lf.r_squared >= 0.95 && lf.slope > 0.0;
    fit.extra["log_term_share"] = lf.slope * xbar / (std::abs(lf.slope * xbar) + std::abs(lf.intercept));
    return fit;
}

EnergyTrace EnergyTrace::from_run(const RunResult& run)
{
    return {run.energy_times, run.energy_values};
}

bool EnergyTrace::non_increasing() const
{
    for (std::size_t k = 1; k < energy_sq.size(); ++k) {
        if (energy_sq[k] > std::nextafter(energy_sq[k - 1], std::numeric_limits<double>::infinity())) {
            return false;
        }
    }
    return true;
}

double EnergyTrace::max_relative_drift() const
{
    if (energy_sq.empty() || energy_sq.front() == 0.0) {
        return 0.0;
    }
    double worst = 0.0;
    for (double e : energy_sq) {
        worst = std::max(worst, std::abs(e - energy_sq.front()) / std::abs(energy_sq.front()));
    }
    return worst;
}

DecayFit fit_energy_decay(const EnergyTrace& trace, double mu, double eps, double slack, FitWindow window)
{
    // Energy times sit half a step behind the run's end.
    if (trace.times.empty() || trace.times.back() < 1e3 * (1.0 - 1e-3)) {
        throw WindowError("energy trace must reach t >= 1e3 for a log-log-t fit");
    }
    const double lo = window.t_lo > 0.0 ? window.t_lo : 1e2;
    const double hi = window.t_hi > 0.0 ? window.t_hi : trace.times.back();
    const Window w = select(trace.times, lo, hi);
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t k : w.idx) {
        if (trace.energy_sq[k] > 0.0 && trace.times[k] > std::numbers::e) {
            x.push_back(std::log(std::log(trace.times[k])));
            y.push_back(std::log(trace.energy_sq[k]));
        }
    }
    if (x.size() < 8) {
        throw WindowError("energy decay window holds fewer than 8 positive samples");
    }
    const LinearFit lf = fit_line(x, y);
    const double theory = -(1.0 - 2.0 * mu) / (2.0 - 2.0 * mu);
    DecayFit fit;
    fit.model = "log E = slope * log log t + intercept";
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.r_squared = lf.r_squared;
    fit.residual_norm = lf.residual_norm;
    fit.n_points = lf.n;
    fit.t_lo = trace.times[w.idx.front()];
    fit.t_hi = trace.times[w.idx.back()];
    fit.threshold = theory + slack;
    fit.criterion = "slope <= -(1-2mu)/(2-2mu) + slack and energy non-increasing";
    const bool monotone = trace.non_increasing();
    fit.pass = lf.slope <= fit.threshold && monotone;
    fit.extra["theory_exponent"] = theory;
    fit.extra["non_increasing"] = monotone ? 1.0 : 0.0;
    if (eps > 0.0) {
        fit.extra["C_estimate"] = std::exp(lf.intercept) / std::pow(eps, 1.0 / (1.0 - mu));
    }
    if (!monotone) {
        fit.note = "energy trace increases somewhere";
    }
    return fit;
}

std::vector<double> unwrap_phase(std::span<const cplx> values, double max_jump)
{
    std::vector<double> out;
    out.reserve(values.size());
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double raw = std::arg(values[k]);
        if (k == 0) {
            out.push_back(raw);
            continue;
        }
        const double d = std::remainder(raw - out.back(), 2.0 * std::numbers::pi);
        if (std::abs(d) > max_jump) {
            throw UnwrapError("phase jump " + format_double(d) + " between samples " + std::to_string(k - 1)
                              + " and " + std::to_string(k) + " exceeds " + format_double(max_jump));
        }
        out.push_back(out.back() + d);
    }
    return out;
}

DecayFit fit_phase_slope(const RaySample& ray, cplx p0, cplx f_hat, double tol, FitWindow window)
{
    const double lo = window.t_lo > 0.0 ? window.t_lo : 10.0 * ray_start_time(ray.sigma);
    const double hi = window.t_hi > 0.0 ? window.t_hi : last_time(ray);
    const double expected = -f_hat.imag() * std::norm(p0) / 2.0;
    if (p0 == cplx{}) {
        DecayFit d = degenerate_pass("arg U = slope * log t + intercept", "p0 = 0: phase is flat", lo, hi);
        d.criterion = "|slope - expected| <= tol |expected|";
        return d;
    }
    const Window w = select(ray.times, lo, hi);
    std::vector<cplx> vals;
    std::vector<double> x;
    for (std::size_t k : w.idx) {
        vals.push_back(ray.U[k]);
        x.push_back(std::log(ray.times[k]));
    }
    if (vals.size() < 3) {
        throw WindowError("phase fit window holds fewer than 3 samples");
    }
    const std::vector<double> phase = unwrap_phase(vals);
    const LinearFit lf = fit_line(x, phase);
    DecayFit fit;
    fit.model = "arg U = slope * log t + intercept";
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.r_squared = lf.r_squared;
    fit.residual_norm = lf.residual_norm;
    fit.n_points = lf.n;
    fit.t_lo = ray.times[w.idx.front()];
    fit.t_hi = ray.times[w.idx.back()];
    fit.threshold = expected;
    fit.criterion = "|slope - expected| <= tol |expected|, expected = -Im F |p0|^2 / 2";
    fit.pass = std::abs(lf.slope - expected) <= tol * std::abs(expected);
    fit.extra["expected_slope"] = expected;
    fit.extra["relative_error"] = expected != 0.0 ? std::abs(lf.slope - expected) / std::abs(expected) : 0.0;
    fit.extra["tolerance"] = tol;
    return fit;
}

DecayFit fit_route_discrepancy(const RaySample& ray, FitWindow window)
{
    const double lo = window.t_lo > 0.0 ? window.t_lo : 10.0 * ray_start_time(ray.sigma);
    const double hi = window.t_hi > 0.0 ? window.t_hi : last_time(ray);
    const Window w = select(ray.times, lo, hi);
    const Gradient hat{cplx{-1.0, 0.0}, cplx{std::cos(ray.omega), 0.0}, cplx{std::sin(ray.omega), 0.0}};
    std::vector<double> t;
    std::vector<double> d;
    double scale = 0.0;
    for (std::size_t k : w.idx) {
        const double sr = std::sqrt(ray.times[k] + ray.sigma);
        double sum = 0.0;
        for (int a = 0; a < 3; ++a) {
            sum += std::norm(sr * ray.du[k][a] - hat[a] * ray.U[k]);
        }
        t.push_back(ray.times[k]);
        d.push_back(std::sqrt(sum));
        scale = std::max(scale, std::abs(ray.U[k]));
    }
    DecayFit fit;
    try {
        fit = fit_power_law(t, d, 1e-13 * scale);
    } catch (const FitError& e) {
        DecayFit dg = degenerate_pass("power_law", std::string("discrepancy at noise floor: ") + e.what(), lo, hi);
        dg.criterion = "slope < 0";
        return dg;
    }
    fit.pass = fit.slope < 0.0;
    fit.criterion = "slope < 0";
    return fit;
}

FreenessReport asymptotic_freeness_diagnostic(const ProfileFunction& profile, const CubicNonlinearity& f, double tol)
{
    FreenessReport rep;
    rep.modulus_conserved = true;
    const std::size_t ns = profile.sigma_grid.size();
    const std::size_t nw = profile.omega_grid.size();
    const double dsigma = ns > 1 ? (profile.sigma_grid.back() - profile.sigma_grid.front()) / static_cast<double>(ns - 1) : 1.0;
    const double domega = nw > 0 ? 2.0 * std::numbers::pi / static_cast<double>(nw) : 0.0;
    double sum = 0.0;
    for (std::size_t j = 0; j < nw; ++j) {
        const cplx F = null_trace(f, profile.omega_grid[j]);
        for (std::size_t i = 0; i < ns; ++i) {
            const double m2 = std::norm(profile.p0(i, j));
            sum += m2 * dsigma * domega;
            if (m2 == 0.0) {
                continue;
            }
            if (std::abs(F.real()) > tol) {
                rep.modulus_conserved = false;
            }
            rep.max_phase_rate = std::max(rep.max_phase_rate, std::abs(F.imag()) * m2 / 2.0);
        }
    }
    rep.phase_drift = rep.max_phase_rate > tol;
    rep.asymptotically_free = rep.modulus_conserved && !rep.phase_drift;
    rep.l2_norm = std::sqrt(sum);
    return rep;
}

nlohmann::json to_json(const FreenessReport& report)
{
    return {
        {"modulus_conserved", report.modulus_conserved},
        {"phase_drift", report.phase_drift},
        {"asymptotically_free", report.asymptotically_free},
        {"max_phase_rate", report.max_phase_rate},
        {"l2_norm", report.l2_norm},
    };
}

std::string ray_csv(const RaySample& ray)
{
    const std::vector<double> phase = unwrap_phase(ray.U, std::numbers::pi + 1e-9);
    CsvTable table;
    table.header = {"t", "re_U", "im_U", "abs_U", "arg_U"};
    for (std::size_t k = 0; k < ray.times.size(); ++k) {
        table.rows.push_back({ray.times[k], ray.U[k].real(), ray.U[k].imag(), std::abs(ray.U[k]), phase[k]});
    }
    return table.to_string();
}

} // namespace nlwave
