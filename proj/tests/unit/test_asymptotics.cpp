#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "nlwave/asymptotics.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/text_io.hpp"

using namespace nlwave;

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI{0.0, 1.0};

std::vector<double> log_times(double lo, double hi, int per_decade)
{
    std::vector<double> t;
    const int n = static_cast<int>(std::round(std::log10(hi / lo) * per_decade));
    for (int k = 0; k <= n; ++k) {
        t.push_back(lo * std::pow(10.0, static_cast<double>(k) / per_decade));
    }
    return t;
}

// Outgoing field u = a(r - t) / sqrt(r): D_-(sqrt(r) u) = a'(r - t) exactly.
cplx a_fn(double s) { return std::exp(-s * s) * (1.0 + kI * s); }
cplx a_prime(double s) { return std::exp(-s * s) * (kI - 2.0 * s * (1.0 + kI * s)); }

FieldSnapshot outgoing_radial(double t, double r_lo, double r_hi, double h)
{
    FieldSnapshot s;
    s.radial = true;
    s.t = t;
    s.origin = r_lo;
    s.spacing = h;
    s.dt = 0.5 * h;
    s.nx = static_cast<std::size_t>((r_hi - r_lo) / h) + 1;
    for (std::size_t k = 0; k < s.nx; ++k) {
        const double r = r_lo + k * h;
        s.u.push_back(a_fn(r - t) / std::sqrt(r));
        s.ut.push_back(-a_prime(r - t) / std::sqrt(r));
    }
    return s;
}

FieldSnapshot outgoing_cartesian(double t, double half_width, double h)
{
    FieldSnapshot s;
    s.radial = false;
    s.t = t;
    s.origin = -half_width;
    s.spacing = h;
    s.dt = 0.5 * h;
    s.nx = s.ny = static_cast<std::size_t>(2.0 * half_width / h) + 1;
    for (std::size_t j = 0; j < s.ny; ++j) {
        for (std::size_t i = 0; i < s.nx; ++i) {
            const double r = std::max(std::hypot(s.origin + i * h, s.origin + j * h), 0.5);
            s.u.push_back(a_fn(r - t) / std::sqrt(r));
            s.ut.push_back(-a_prime(r - t) / std::sqrt(r));
        }
    }
    return s;
}

ProfileFunction grid_profile(cplx value)
{
    ProfileFunction pf;
    pf.sigma_grid = {-1.0, 0.0, 1.0};
    pf.omega_grid = {0.0, 2.0, 4.0};
    pf.p0_values.assign(9, value);
    return pf;
}

} // namespace

TEST(RayStart, Definition)
{
    EXPECT_EQ(ray_start_time(0.0), 2.0);
    EXPECT_EQ(ray_start_time(-3.0), 6.0);
    EXPECT_EQ(ray_start_time(5.0), 2.0);
}

TEST(ExtractRay, OutgoingRadialField)
{
    std::vector<FieldSnapshot> snaps;
    for (double t : {1.0, 3.0, 10.0, 30.0}) {
        snaps.push_back(outgoing_radial(t, t - 3.0 < 0.0 ? 0.0 : t - 3.0, t + 3.0, 1.0 / 64.0));
    }
    for (double sigma : {0.0, 0.4, -0.7}) {
        const auto ray = extract_ray(snaps, sigma, 0.3);
        // snapshot at t = 1 precedes t0 = 2
        ASSERT_EQ(ray.times.size(), 3u);
        for (std::size_t k = 0; k < ray.times.size(); ++k) {
            EXPECT_LT(std::abs(ray.U[k] - a_prime(sigma)), 1e-5) << "sigma=" << sigma << " t=" << ray.times[k];
            const double r = ray.times[k] + sigma;
            const cplx ur = a_prime(sigma) / std::sqrt(r) - a_fn(sigma) / (2.0 * r * std::sqrt(r));
            EXPECT_LT(std::abs(ray.du[k][0] + a_prime(sigma) / std::sqrt(r)), 1e-7);
            EXPECT_LT(std::abs(ray.du[k][1] - std::cos(0.3) * ur), 1e-5);
            EXPECT_LT(std::abs(ray.du[k][2] - std::sin(0.3) * ur), 1e-5);
        }
    }
}

TEST(ExtractRay, InterpolationConvergesAtThirdOrder)
{
    // same fractional node offset at every spacing, so the error constant is shared
    auto err = [](double h) {
        const double r = 10.3;
        const double lo = r - 64.5 * h;
        const std::vector<FieldSnapshot> snaps{outgoing_radial(10.0, lo, lo + 130.0 * h, h)};
        return std::abs(extract_ray(snaps, 0.3, 0.0).U[0] - a_prime(0.3));
    };
    const double ratio = err(1.0 / 32.0) / err(1.0 / 64.0);
    EXPECT_GT(ratio, 7.0);
    EXPECT_LT(ratio, 17.0);
}

TEST(ExtractRay, OutgoingCartesianField)
{
    const std::vector<FieldSnapshot> snaps{outgoing_cartesian(3.0, 5.0, 1.0 / 32.0),
                                           outgoing_cartesian(4.0, 5.0, 1.0 / 32.0)};
    for (double omega : {0.0, 0.9, 2.5, -2.0}) {
        const auto ray = extract_ray(snaps, 0.2, omega);
        ASSERT_EQ(ray.times.size(), 2u);
        for (std::size_t k = 0; k < 2; ++k) {
            EXPECT_LT(std::abs(ray.U[k] - a_prime(0.2)), 2e-4) << "omega=" << omega;
        }
    }
}

TEST(ExtractRay, RangeErrors)
{
    const std::vector<FieldSnapshot> snaps{outgoing_radial(10.0, 8.0, 12.0, 1.0 / 32.0)};
    EXPECT_THROW((void)extract_ray(snaps, 2.5, 0.0), RangeError);
    const std::vector<FieldSnapshot> early{outgoing_radial(1.0, 0.0, 3.0, 1.0 / 32.0)};
    EXPECT_THROW((void)extract_ray(early, 0.0, 0.0), RangeError);
}

TEST(ExtractRay, ZeroFieldRun)
{
    InitialData d;
    d.eps = 0.0;
    RunOptions o;
    o.t_end = 30.0;
    o.ray_sigmas = {0.0, -0.5};
    const auto r = run(d, RadialGrid::for_run(30.0, 1.0, 1.0 / 32.0, 0.5), presets::dissipative(), o);
    const auto ray = extract_ray(r, -0.5, 0.0);
    ASSERT_GT(ray.times.size(), 10u);
    for (const auto& u : ray.U) {
        EXPECT_EQ(u, cplx(0.0, 0.0));
    }
}

TEST(ExtractRay, FreeAndDissipativeRuns)
{
    InitialData d;
    d.eps = 0.3;
    d.support_radius = 2.0;
    RunOptions o;
    o.t_end = 300.0;
    o.energy_every = 10.0;
    o.ray_sigmas = {0.0};
    o.ray_per_decade = 20;
    // CFL 0.9 keeps the leapfrog dispersion along the ray small over this horizon
    const auto grid = RadialGrid::for_run(300.0, 2.0, 1.0 / 32.0, 0.9);

    // free waves: r^{1/2} du has a limit along the ray
    const auto free_ray = extract_ray(run(d, grid, CubicNonlinearity{}, o), 0.0, 0.0);
    const double late = std::abs(free_ray.U.back());
    for (std::size_t k = 0; k < free_ray.times.size(); ++k) {
        if (free_ray.times[k] >= 100.0) {
            EXPECT_NEAR(std::abs(free_ray.U[k]) / late, 1.0, 0.02) << "t=" << free_ray.times[k];
        }
    }

    const auto dis_ray = extract_ray(run(d, grid, presets::dissipative(), o), 0.0, 0.0);
    ASSERT_EQ(dis_ray.times.size(), free_ray.times.size());
    for (std::size_t k = 1; k < dis_ray.times.size(); ++k) {
        if (dis_ray.times[k - 1] >= 10.0) {
            EXPECT_LT(std::abs(dis_ray.U[k]), std::abs(dis_ray.U[k - 1])) << "t=" << dis_ray.times[k];
        }
    }
    // damping beyond what the free run loses to dispersion
    std::size_t first = 0;
    while (dis_ray.times[first] < 10.0) {
        ++first;
    }
    const double ratio_early = std::abs(dis_ray.U[first]) / std::abs(free_ray.U[first]);
    const double ratio_late = std::abs(dis_ray.U.back()) / std::abs(free_ray.U.back());
    EXPECT_LT(ratio_late, ratio_early);
}

TEST(FitProfileP0, Examples)
{
    const auto times = log_times(2.0, 200.0, 20);
    RaySample ray = manufactured_ray({1.0, 0.0}, {0.0, 0.0}, 0.0, 0.0, times);
    EXPECT_EQ(fit_profile_p0(ray, {1.0, 0.0}, 50.0), cplx(0.0, 0.0));

    // Re f_hat = 0: inverse of the pure rotation
    RaySample one;
    one.times = {std::exp(3.0)};
    one.U = {cplx{0.3, 0.4}};
    one.du = {Gradient{}};
    const cplx inv = fit_profile_p0(one, {0.0, -2.0}, std::exp(3.0));
    EXPECT_LT(std::abs(inv - cplx{0.3, 0.4} * std::exp(kI * (-1.0) * 0.25 * 3.0)), 1e-15);

    one.U = {cplx{0.5, 0.0}};
    EXPECT_NEAR(std::abs(fit_profile_p0(one, {1.0, 0.0}, std::exp(3.0))), 1.0, 1e-14);
}

TEST(FitProfileP0, Errors)
{
    RaySample one;
    one.times = {std::exp(4.0)};
    one.U = {cplx{0.5, 0.0}};
    one.du = {Gradient{}};
    EXPECT_THROW((void)fit_profile_p0(one, {1.0, 0.0}, std::exp(4.0)), DomainError);
    const auto ray = manufactured_ray({1.0, 0.0}, {0.1, 0.0}, 0.0, 0.0, log_times(2.0, 20.0, 10));
    EXPECT_THROW((void)fit_profile_p0(ray, {1.0, 0.0}, 50.0), RangeError);
}

TEST(ProfileConvergence, ClosedLoopReachesNoiseFloor)
{
    const auto times = log_times(2.0, 1e4, 40);
    for (cplx f : {cplx{1.0, 0.0}, cplx{0.0, -1.0}, cplx{0.5, 0.8}}) {
        const cplx p0{0.6, -0.3};
        const auto ray = manufactured_ray(f, p0, 0.0, 1.0, times);
        const cplx fitted = fit_profile_p0(ray, f);
        EXPECT_LT(std::abs(fitted - p0), 1e-14);
        const auto fit = verify_profile_convergence(ray, fitted, f);
        EXPECT_TRUE(fit.pass);
        EXPECT_TRUE(fit.degenerate);
    }
}

TEST(ProfileConvergence, DecayingPerturbationPassesConstantOneFails)
{
    const auto times = log_times(2.0, 1e4, 40);
    const cplx f{0.0, -1.0};
    const cplx p0{0.6, 0.0};
    auto ray = manufactured_ray(f, p0, 0.0, 0.0, times);
    auto offset = ray;
    for (std::size_t k = 0; k < ray.times.size(); ++k) {
        ray.U[k] += 0.5 / ray.times[k];
        offset.U[k] += 0.01;
    }
    const auto good = verify_profile_convergence(ray, p0, f);
    EXPECT_TRUE(good.pass);
    EXPECT_NEAR(good.slope, -1.0, 1e-3);
    const auto bad = verify_profile_convergence(offset, p0, f);
    EXPECT_FALSE(bad.pass);
}

TEST(PointwiseDecay, LogImprovedDecayFitsExactly)
{
    RaySample ray;
    for (double t : log_times(10.0, 1e4, 40)) {
        ray.times.push_back(t);
        ray.U.push_back({1.0, 0.0});
        const double m = 1.0 / std::sqrt(t * std::log(t));
        ray.du.push_back({cplx{-m, 0.0}, cplx{m, 0.0}, cplx{0.0, 0.0}});
    }
    const auto fit = fit_pointwise_decay(ray);
    EXPECT_TRUE(fit.pass);
    EXPECT_NEAR(fit.slope, 2.0, 1e-10); // |du|^2 = 2 / (t log t): both components
    EXPECT_NEAR(fit.intercept, 0.0, 1e-10);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(PointwiseDecay, FreeDecayIsRejected)
{
    RaySample ray;
    for (double t : log_times(10.0, 1e4, 40)) {
        ray.times.push_back(t);
        ray.U.push_back({1.0, 0.0});
        ray.du.push_back({cplx{1.0 / std::sqrt(t), 0.0}, cplx{}, cplx{}});
    }
    EXPECT_FALSE(fit_pointwise_decay(ray).pass);
    // free waves with a slowly vanishing transient still fail: the trend has the wrong sign
    for (std::size_t k = 0; k < ray.times.size(); ++k) {
        ray.du[k][0] *= std::sqrt(1.0 - 1.0 / std::log(ray.times[k]));
    }
    const auto fit = fit_pointwise_decay(ray);
    EXPECT_LT(fit.slope, 0.0);
    EXPECT_FALSE(fit.pass);
}

TEST(PointwiseDecay, ShortWindowRejected)
{
    const auto ray = manufactured_ray({1.0, 0.0}, {0.5, 0.0}, 0.0, 0.0, log_times(100.0, 500.0, 40));
    EXPECT_THROW((void)fit_pointwise_decay(ray), WindowError);
    const auto sparse = manufactured_ray({1.0, 0.0}, {0.5, 0.0}, 0.0, 0.0, log_times(100.0, 1e4, 3));
    EXPECT_THROW((void)fit_pointwise_decay(sparse), WindowError);
}

TEST(PointwiseDecay, ProfileLawFromManufacturedRay)
{
    // |du|^2 t = 2|P|^2 = 2 / (1/|p0|^2 + C0 log t): linear in 1/log t only asymptotically,
    // with local slope 2 / (C0 (1 + x / (C0 |p0|^2))^2) at x = 1/log t
    const auto ray = manufactured_ray({1.0, 0.0}, {0.8, 0.0}, 0.0, 0.0, log_times(2.0, 1e4, 40));
    const auto fit = fit_pointwise_decay(ray);
    EXPECT_TRUE(fit.pass);
    EXPECT_GT(fit.r_squared, 0.99);
    EXPECT_GT(fit.slope, 2.0 / std::pow(1.0 + 0.22 / 0.64, 2));
    EXPECT_LT(fit.slope, 2.0 / std::pow(1.0 + 0.10 / 0.64, 2));
}

TEST(EnergyDecay, ManufacturedInverseSqrtLog)
{
    EnergyTrace tr;
    for (double t : log_times(10.0, 1e4, 40)) {
        tr.times.push_back(t);
        tr.energy_sq.push_back(3.0 / std::sqrt(std::log(t)));
    }
    const auto fit = fit_energy_decay(tr, 0.0, 0.1);
    EXPECT_NEAR(fit.slope, -0.5, 1e-12);
    EXPECT_NEAR(fit.extra.at("theory_exponent"), -0.5, 1e-15);
    EXPECT_TRUE(fit.pass);
    EXPECT_NEAR(fit.threshold, -0.5 + kEnergySlack, 1e-15);
}

TEST(EnergyDecay, ConstantTraceFails)
{
    EnergyTrace tr;
    for (double t : log_times(1.0, 1e4, 20)) {
        tr.times.push_back(t);
        tr.energy_sq.push_back(0.25);
    }
    EXPECT_TRUE(tr.non_increasing());
    EXPECT_EQ(tr.max_relative_drift(), 0.0);
    const auto fit = fit_energy_decay(tr, 0.05, 0.3);
    EXPECT_NEAR(fit.slope, 0.0, 1e-12);
    EXPECT_FALSE(fit.pass);
}

TEST(EnergyDecay, IncreasingStepFailsMonotonicity)
{
    EnergyTrace tr;
    for (double t : log_times(10.0, 1e4, 40)) {
        tr.times.push_back(t);
        tr.energy_sq.push_back(1.0 / std::log(t));
    }
    tr.energy_sq[50] = tr.energy_sq[49] * (1.0 + 1e-9);
    EXPECT_FALSE(tr.non_increasing());
    const auto fit = fit_energy_decay(tr, 0.05, 0.3);
    EXPECT_LT(fit.slope, -0.9);
    EXPECT_FALSE(fit.pass);
    EXPECT_EQ(fit.extra.at("non_increasing"), 0.0);
}

TEST(EnergyDecay, ShortTraceRejected)
{
    EnergyTrace tr{{10.0, 100.0, 500.0}, {1.0, 0.9, 0.8}};
    EXPECT_THROW((void)fit_energy_decay(tr, 0.05, 0.3), WindowError);
    EnergyTrace sparse{{10.0, 100.0, 1000.0}, {1.0, 0.9, 0.8}};
    EXPECT_THROW((void)fit_energy_decay(sparse, 0.05, 0.3), WindowError);
}

TEST(Unwrap, FollowsSlowPhase)
{
    std::vector<cplx> v;
    for (int k = 0; k < 200; ++k) {
        v.push_back(std::polar(1.0, 0.3 * k));
    }
    const auto ph = unwrap_phase(v);
    for (int k = 0; k < 200; ++k) {
        EXPECT_NEAR(ph[k], 0.3 * k, 1e-12);
    }
}

TEST(Unwrap, CoarseSamplingRejected)
{
    const std::vector<cplx> v{std::polar(1.0, 0.0), std::polar(1.0, 2.0), std::polar(1.0, 4.0)};
    EXPECT_THROW((void)unwrap_phase(v), UnwrapError);
    EXPECT_NO_THROW((void)unwrap_phase(v, 2.5));
}

TEST(PhaseSlope, ManufacturedRotation)
{
    const cplx c{0.6, 0.5};
    const auto ray = manufactured_ray({0.0, -1.0}, c, 0.0, 0.0, log_times(2.0, 1e4, 40));
    for (std::size_t k = 0; k < ray.times.size(); ++k) {
        EXPECT_LT(std::abs(ray.U[k] - c * std::exp(kI * std::norm(c) * std::log(ray.times[k]) / 2.0)), 1e-14);
    }
    const auto fit = fit_phase_slope(ray, c);
    EXPECT_NEAR(fit.slope, std::norm(c) / 2.0, 1e-12);
    EXPECT_TRUE(fit.pass);
    const auto wrong = fit_phase_slope(ray, 1.3 * c);
    EXPECT_FALSE(wrong.pass);
}

TEST(PhaseSlope, GeneralFHat)
{
    const cplx f{0.4, 1.5};
    const cplx p0{0.9, 0.0};
    const auto ray = manufactured_ray(f, p0, 0.0, 0.0, log_times(2.0, 1e4, 40));
    const auto fit = fit_phase_slope(ray, p0, f, 1.0);
    EXPECT_LT(fit.slope, 0.0);
    EXPECT_NEAR(fit.extra.at("expected_slope"), -1.5 * 0.81 / 2.0, 1e-15);
}

TEST(PhaseSlope, ZeroProfileIsFlat)
{
    const auto ray = manufactured_ray({0.0, -1.0}, {0.0, 0.0}, 0.0, 0.0, log_times(2.0, 1e3, 10));
    const auto fit = fit_phase_slope(ray, {0.0, 0.0});
    EXPECT_TRUE(fit.pass);
    EXPECT_TRUE(fit.degenerate);
}

TEST(PhaseSlope, CoarseCadenceIsUnwrapError)
{
    // |c|^2/2 * ln(10)/4 is close to pi: each sample advances the phase by about half a turn
    const cplx c{3.3, 0.0};
    const auto ray = manufactured_ray({0.0, -1.0}, c, 0.0, 0.0, log_times(2.0, 1e4, 4));
    EXPECT_THROW((void)fit_phase_slope(ray, c), UnwrapError);
}

TEST(RouteDiscrepancy, DecaysOffTheLightCone)
{
    const auto ray = manufactured_ray({1.0, 0.0}, {0.5, 0.2}, 1.0, 0.4, log_times(2.0, 1e4, 40));
    const auto fit = fit_route_discrepancy(ray);
    EXPECT_TRUE(fit.pass);
    EXPECT_NEAR(fit.slope, -1.0 - 0.0, 0.1);
    const auto on_cone = manufactured_ray({1.0, 0.0}, {0.5, 0.2}, 0.0, 0.4, log_times(2.0, 1e4, 40));
    EXPECT_TRUE(fit_route_discrepancy(on_cone).pass);
}

TEST(Freeness, Classification)
{
    const auto null_rep = asymptotic_freeness_diagnostic(grid_profile({0.3, 0.1}), presets::null_form_a(0));
    EXPECT_TRUE(null_rep.asymptotically_free);
    EXPECT_TRUE(null_rep.modulus_conserved);
    EXPECT_FALSE(null_rep.phase_drift);

    const auto rot = asymptotic_freeness_diagnostic(grid_profile({0.3, 0.1}), presets::rotational());
    EXPECT_TRUE(rot.modulus_conserved);
    EXPECT_TRUE(rot.phase_drift);
    EXPECT_FALSE(rot.asymptotically_free);
    EXPECT_NEAR(rot.max_phase_rate, 0.1 / 2.0, 1e-15);

    const auto zero = asymptotic_freeness_diagnostic(grid_profile({0.0, 0.0}), presets::rotational());
    EXPECT_TRUE(zero.asymptotically_free);
    EXPECT_EQ(zero.l2_norm, 0.0);

    const auto dis = asymptotic_freeness_diagnostic(grid_profile({0.3, 0.1}), presets::dissipative());
    EXPECT_FALSE(dis.modulus_conserved);
    EXPECT_FALSE(dis.asymptotically_free);

    // |P0|^2 = 0.1 on a 3 x 3 grid, dsigma = 1, domega = 2 pi / 3
    EXPECT_NEAR(rot.l2_norm, std::sqrt(9.0 * 0.1 * 2.0 * kPi / 3.0), 1e-14);
    const auto j = to_json(rot);
    EXPECT_EQ(j.at("asymptotically_free"), false);
}

TEST(RayCsv, ColumnsAndUnwrappedPhase)
{
    const cplx c{1.5, 0.0};
    const auto ray = manufactured_ray({0.0, -1.0}, c, 0.0, 0.0, log_times(2.0, 1e3, 40));
    const auto table = CsvTable::parse(ray_csv(ray));
    ASSERT_EQ(table.header, (std::vector<std::string>{"t", "re_U", "im_U", "abs_U", "arg_U"}));
    const auto& last = table.rows.back();
    EXPECT_NEAR(last[4], 1.125 * std::log(ray.times.back()), 1e-12);
    EXPECT_GT(last[4], kPi);
    EXPECT_NEAR(last[3], 1.5, 1e-15);
}
