// Acceptance battery: one PASS/FAIL line per criterion, tolerances fixed below.
// Exit status is 0 only when every line passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "nlwave/asymptotics.hpp"
#include "nlwave/cli_runner.hpp"
#include "nlwave/nonlinearity.hpp"
#include "nlwave/text_io.hpp"
#include "nlwave/wave_solver.hpp"

using namespace nlwave;

namespace {

// Pinned tolerances.
constexpr double kConvergenceRatioLo = 3.5;
constexpr double kConvergenceRatioHi = 4.5;
constexpr double kConvergenceSeconds = 60.0;
constexpr double kLeakTol = 1e-10;
constexpr double kRotationalDriftTol = 1e-4;
constexpr double kEnergySlopeMax = -0.32;
constexpr double kLongRunSeconds = 600.0;
constexpr double kPointwiseR2 = 0.95;
constexpr double kPhaseRelTol = 0.15;
constexpr double kClosedLoopP0Tol = 1e-8;
constexpr double kClassC0Tol = 1e-10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail)
{
    std::printf("%s %2d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
}

std::string fmt(double v) { return format_double(v); }

// Errors against exact linear solutions for the convergence study.
double radial_standing_wave_error(double dr)
{
    const double k = 2.0;
    auto exact = [k](double t, double r, double) { return cplx{std::cyl_bessel_j(0.0, k * r) * std::cos(k * t), 0.0}; };
    SolverOptions so;
    so.boundary_value = exact;
    auto w = WaveField::from_exact(RadialGrid::make(6.0, dr, 0.5), CubicNonlinearity{}, exact, so);
    while (w.time() < 3.0 - 0.5 * w.dt()) {
        w.step();
    }
    const auto& g = std::get<RadialGrid>(w.grid());
    double err = 0.0;
    for (std::size_t j = 0; j <= g.n_r; ++j) {
        err = std::max(err, std::abs(w.current()[j] - exact(w.time(), g.r(j), 0.0)));
    }
    return err;
}

double cartesian_plane_wave_error(double dx)
{
    const double kx = std::numbers::pi;
    const double ky = 2.0 * std::numbers::pi;
    const double om = std::hypot(kx, ky);
    auto exact = [=](double t, double x, double y) { return std::exp(cplx{0.0, kx * x + ky * y - om * t}); };
    auto w = WaveField::from_exact(CartesianGrid2D::make(1.0, dx, 0.45, Boundary::Periodic), CubicNonlinearity{},
                                   exact);
    while (w.time() < 0.5 - 0.5 * w.dt()) {
        w.step();
    }
    const auto& g = std::get<CartesianGrid2D>(w.grid());
    double err = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        for (std::size_t i = 0; i < g.n; ++i) {
            err = std::max(err, std::abs(w.current()[j * g.n + i] - exact(w.time(), g.x(i), g.x(j))));
        }
    }
    return err;
}

void ode_criteria()
{
    const auto checks = run_ode_suite(1);
    const char* names[] = {"profile ODE oracle equivalence", "phase closed form", "forced decay-rate microcosm",
                           "xi/eta reconstruction"};
    for (std::size_t k = 0; k < checks.size() && k < 4; ++k) {
        const auto& c = checks[k];
        report(static_cast<int>(k) + 1, names[k], c.pass,
               fmt(c.value) + " vs " + fmt(c.threshold) + ", " + fmt(std::round(c.seconds * 100) / 100) + " s; "
                   + c.detail);
    }
}

void convergence_criterion()
{
    const auto t0 = Clock::now();
    std::vector<double> ratios;
    const double r1 = radial_standing_wave_error(1.0 / 16.0);
    const double r2 = radial_standing_wave_error(1.0 / 32.0);
    const double r3 = radial_standing_wave_error(1.0 / 64.0);
    const double c1 = cartesian_plane_wave_error(1.0 / 16.0);
    const double c2 = cartesian_plane_wave_error(1.0 / 32.0);
    const double c3 = cartesian_plane_wave_error(1.0 / 64.0);
    ratios = {r1 / r2, r2 / r3, c1 / c2, c2 / c3};
    const double secs = seconds_since(t0);
    bool ok = secs < kConvergenceSeconds;
    for (double q : ratios) {
        ok = ok && q >= kConvergenceRatioLo && q <= kConvergenceRatioHi;
    }
    report(5, "solver convergence", ok,
           "radial ratios " + fmt(ratios[0]) + ", " + fmt(ratios[1]) + "; cartesian ratios " + fmt(ratios[2]) + ", "
               + fmt(ratios[3]) + "; " + fmt(std::round(secs * 10) / 10) + " s");
}

// Default radial resolution (R = 1, dr = 1/32), eps = 0.3, t in [0, 100].
RunArtifact short_run(const std::string& nonlinearity)
{
    ExperimentConfig c;
    c.name = nonlinearity + "-short";
    c.nonlinearity = nonlinearity;
    c.eps = {0.3};
    c.t_end = 100.0;
    c.energy_every = 0.0;
    return run_experiment(c, {1, true, false}).front();
}

void finite_propagation_criterion()
{
    const auto a = short_run("dissipative");
    const double leak = a.result.support_leak;
    report(6, "finite propagation", a.result.status == RunStatus::Completed && leak < kLeakTol,
           "max |u| outside t+R+2dr relative to max |u|: " + fmt(leak) + " vs " + fmt(kLeakTol));
}

void rotational_energy_criterion()
{
    const auto a = short_run("rotational");
    const double drift = EnergyTrace::from_run(a.result).max_relative_drift();
    report(7, "rotational energy conservation", a.result.status == RunStatus::Completed && drift <= kRotationalDriftTol,
           "max relative drift " + fmt(drift) + " vs " + fmt(kRotationalDriftTol) + " over "
               + std::to_string(a.result.energy_times.size()) + " samples");
}

struct LongRun {
    RunArtifact art;
    double seconds = 0.0;
};

LongRun long_run(const std::string& preset)
{
    const auto t0 = Clock::now();
    auto c = preset_config(preset);
    LongRun out{run_experiment(c, {1, true, false}).front(), 0.0};
    out.seconds = seconds_since(t0);
    std::printf("     %s: %s, %zu steps, %.1f s\n", preset.c_str(), to_string(out.art.result.status).c_str(),
                out.art.result.steps, out.seconds);
    std::fflush(stdout);
    return out;
}

void closed_loop(cplx f_hat, cplx p0, bool& ok, std::string& detail)
{
    std::vector<double> times;
    for (int k = 0; k <= 160; ++k) {
        times.push_back(std::pow(10.0, 4.0 * k / 160.0));
    }
    const RaySample ray = manufactured_ray(f_hat, p0, 0.0, 0.0, times);
    const cplx fitted = fit_profile_p0(ray, f_hat, 5e3);
    const DecayFit fit = verify_profile_convergence(ray, fitted, f_hat, {10.0, 1250.0});
    const double err = std::abs(fitted - p0);
    ok = ok && fit.pass && err <= kClosedLoopP0Tol;
    detail += " closed loop |dp0| " + fmt(err) + (fit.degenerate ? " at noise floor" : ", slope " + fmt(fit.slope)) + ";";
}

void long_criteria()
{
    const LongRun diss = long_run("dissipative-radial-default");
    const LongRun rot = long_run("rotational-radial-default");
    const LongRun free = long_run("free-radial-default");
    const bool diss_done = diss.art.result.status == RunStatus::Completed && !diss.art.rays.empty();
    const bool rot_done = rot.art.result.status == RunStatus::Completed && !rot.art.rays.empty();
    const bool free_done = free.art.result.status == RunStatus::Completed && !free.art.rays.empty();

    // 8: energy decay
    {
        bool ok = diss.art.result.status == RunStatus::Completed && diss.seconds < kLongRunSeconds;
        std::string detail;
        try {
            const EnergyTrace trace = EnergyTrace::from_run(diss.art.result);
            const DecayFit fit = fit_energy_decay(trace, diss.art.config.mu, diss.art.eps);
            ok = ok && trace.non_increasing() && fit.slope <= kEnergySlopeMax;
            detail = std::string(trace.non_increasing() ? "non-increasing" : "INCREASES") + ", slope " + fmt(fit.slope)
                + " vs " + fmt(kEnergySlopeMax) + ", R^2 " + fmt(fit.r_squared) + ", "
                + fmt(std::round(diss.seconds)) + " s";
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        report(8, "dissipative energy decay", ok, detail);
    }

    // 9: pointwise log-improvement plus free negative control
    {
        bool ok = diss_done && free_done;
        std::string detail;
        try {
            const FitWindow w{1e2, 1e4};
            const DecayFit d = fit_pointwise_decay(diss.art.rays.at(0), w);
            const DecayFit f = fit_pointwise_decay(free.art.rays.at(0), w);
            ok = ok && d.pass && d.r_squared >= kPointwiseR2 && !f.pass;
            detail = "dissipative R^2 " + fmt(d.r_squared) + " slope " + fmt(d.slope) + (d.pass ? " PASS" : " FAIL")
                + "; free control R^2 " + fmt(f.r_squared) + " slope " + fmt(f.slope) + (f.pass ? " PASS" : " FAIL");
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        report(9, "pointwise log-improvement", ok, detail);
    }

    // 10: logarithmic phase correction
    {
        bool ok = rot_done;
        std::string detail;
        try {
            const cplx f_hat = null_trace(presets::rotational(), 0.0);
            const RaySample& ray = rot.art.rays.at(0);
            const cplx p0 = fit_profile_p0(ray, f_hat, 0.5 * rot.art.result.t_final);
            const DecayFit fit = fit_phase_slope(ray, p0, f_hat, kPhaseRelTol);
            ok = ok && fit.pass;
            detail = "slope " + fmt(fit.slope) + " vs |P0|^2/2 = " + fmt(fit.threshold) + ", relative error "
                + fmt(fit.extra.at("relative_error")) + " vs " + fmt(kPhaseRelTol);
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        report(10, "logarithmic phase correction", ok, detail);
    }

    // 11: profile conformance on both runs, plus manufactured closed loops
    {
        bool ok = diss_done && rot_done;
        std::string detail;
        try {
            for (const LongRun* lr : {&diss, &rot}) {
                const cplx f_hat = null_trace(lr->art.config.build_nonlinearity(), 0.0);
                const RaySample& ray = lr->art.rays.at(0);
                const double t_match = 0.5 * lr->art.result.t_final;
                const cplx p0 = fit_profile_p0(ray, f_hat, t_match);
                const DecayFit fit =
                    verify_profile_convergence(ray, p0, f_hat, {10.0 * ray_start_time(0.0), 0.25 * t_match});
                ok = ok && fit.pass && fit.slope < 0.0;
                detail += " " + lr->art.config.nonlinearity + " residual slope " + fmt(fit.slope) + ";";
            }
            closed_loop(null_trace(presets::dissipative(), 0.0), {0.4, -0.1}, ok, detail);
            closed_loop(null_trace(presets::rotational(), 0.0), {0.3, 0.2}, ok, detail);
        } catch (const std::exception& e) {
            ok = false;
            detail += std::string(" ") + e.what();
        }
        report(11, "profile conformance", ok, detail.substr(1));
    }
}

void blowup_criterion()
{
    const auto run_preset = [](const std::string& name) {
        auto c = preset_config(name);
        return run_experiment(c, {1, true, false}).front();
    };
    const auto bad = run_preset("antidissipative-blowup");
    const auto good = run_preset("dissipative-blowup-control");
    const bool ok = bad.eps == 0.5 && good.eps == 0.5 && bad.result.status == RunStatus::Blowup
        && good.result.status == RunStatus::Completed;
    report(12, "blow-up contrast", ok,
           "antidissipative " + to_string(bad.result.status) + " at t=" + fmt(bad.result.blowup_time)
               + ", dissipative " + to_string(good.result.status) + " at t=" + fmt(good.result.t_final));
}

void classifier_criterion()
{
    struct Row {
        const char* name;
        CubicNonlinearity f;
        std::function<bool(const NonlinearityClass&)> want;
        double c0;
    };
    const std::vector<Row> rows = {
        {"dissipative", presets::dissipative(),
         [](const NonlinearityClass& k) { return k.satisfies_agemi && k.strictly_dissipative; }, 1.0},
        {"rotational", presets::rotational(),
         [](const NonlinearityClass& k) { return k.satisfies_agemi && k.purely_rotational; }, 0.0},
        {"null-form", presets::null_form_a(0), [](const NonlinearityClass& k) { return k.satisfies_null_condition; },
         0.0},
        {"antidissipative", presets::antidissipative(),
         [](const NonlinearityClass& k) { return !k.satisfies_agemi; }, -1.0},
    };
    bool ok = true;
    std::string detail;
    for (const auto& row : rows) {
        const NonlinearityClass k = classify(row.f);
        const bool good = row.want(k) && std::abs(k.c0 - row.c0) <= kClassC0Tol;
        ok = ok && good;
        detail += std::string(detail.empty() ? "" : "; ") + row.name + " c0=" + fmt(k.c0) + (good ? "" : " (wrong)");
    }
    report(13, "classifier truth table", ok, detail);
}

} // namespace

int main()
{
    ode_criteria();
    convergence_criterion();
    finite_propagation_criterion();
    rotational_energy_criterion();
    long_criteria();
    blowup_criterion();
    classifier_criterion();
    std::printf("%d of 13 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
