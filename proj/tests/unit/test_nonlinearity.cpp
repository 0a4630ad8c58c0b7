#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nlwave/errors.hpp"
#include "nlwave/nonlinearity.hpp"

using namespace nlwave;

namespace {

constexpr double kPi = std::numbers::pi;

Gradient on_circle(double theta)
{
    return {cplx{-1.0, 0.0}, cplx{std::cos(theta), 0.0}, cplx{std::sin(theta), 0.0}};
}

cplx random_complex(std::mt19937_64& rng)
{
    std::normal_distribution<double> n(0.0, 1.0);
    return {n(rng), n(rng)};
}

CubicNonlinearity random_tensor(std::mt19937_64& rng)
{
    std::array<cplx, 27> c{};
    for (auto& v : c) {
        v = random_complex(rng);
    }
    return CubicNonlinearity(c);
}

Gradient random_gradient(std::mt19937_64& rng)
{
    return {random_complex(rng), random_complex(rng), random_complex(rng)};
}

// Plain triple loop, kept separate from the library's evaluation.
cplx brute_force(const CubicNonlinearity& f, const Gradient& q)
{
    cplx s{0.0, 0.0};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c)
                s += f.coefficient(a, b, c) * q[a] * q[b] * std::conj(q[c]);
    return s;
}

} // namespace

TEST(Evaluate, SingleTimeCoefficient)
{
    CubicNonlinearity f;
    f.set_coefficient(0, 0, 0, {-1.0, 0.0});
    const cplx v = evaluate(f, on_circle(0.3));
    EXPECT_DOUBLE_EQ(v.real(), 1.0);
    EXPECT_DOUBLE_EQ(v.imag(), 0.0);

    CubicNonlinearity g;
    g.set_coefficient(0, 0, 0, {0.0, 1.0});
    const cplx w = evaluate(g, on_circle(1.7));
    EXPECT_DOUBLE_EQ(w.real(), 0.0);
    EXPECT_DOUBLE_EQ(w.imag(), -1.0);
}

TEST(Evaluate, NullFormsVanishOnTheCone)
{
    for (int a = 0; a < 3; ++a) {
        const auto fa = presets::null_form_a(a);
        const auto fb = presets::null_form_b(a);
        for (int k = 0; k < 97; ++k) {
            const double th = 2.0 * kPi * k / 97.0;
            EXPECT_LT(std::abs(evaluate(fa, on_circle(th))), 1e-12) << "a=" << a << " th=" << th;
            EXPECT_LT(std::abs(evaluate(fb, on_circle(th))), 1e-12) << "a=" << a << " th=" << th;
        }
    }
    const auto fc = presets::null_form_c(0, 1, 2);
    for (int k = 0; k < 50; ++k) {
        EXPECT_LT(std::abs(evaluate(fc, on_circle(0.1 * k))), 1e-12);
    }
}

TEST(Evaluate, NullFormIsNotIdenticallyZero)
{
    // off the cone the form is a genuine cubic
    const auto f = presets::null_form_a(0);
    const Gradient q{cplx{2.0, 0.0}, cplx{0.5, 0.0}, cplx{0.0, 0.0}};
    EXPECT_NEAR(evaluate(f, q).real(), 2.0 * (4.0 - 0.25), 1e-14);
}

TEST(Evaluate, MatchesBruteForce)
{
    std::mt19937_64 rng(11);
    for (int k = 0; k < 200; ++k) {
        const auto f = random_tensor(rng);
        const auto q = random_gradient(rng);
        const cplx ref = brute_force(f, q);
        EXPECT_LT(std::abs(evaluate(f, q) - ref), 1e-12 * (1.0 + std::abs(ref)));
    }
}

TEST(EvaluateProperty, HomogeneousOfDegreeThreeForRealScale)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lam(-3.0, 3.0);
    for (int k = 0; k < 500; ++k) {
        const auto f = random_tensor(rng);
        const auto q = random_gradient(rng);
        const double l = lam(rng);
        const Gradient lq{l * q[0], l * q[1], l * q[2]};
        const cplx lhs = evaluate(f, lq);
        const cplx rhs = l * l * l * evaluate(f, q);
        EXPECT_LT(std::abs(lhs - rhs), 1e-11 * (1.0 + std::abs(rhs)));
    }
}

TEST(EvaluateProperty, ComplexScaleGivesLambdaSquaredTimesConjugate)
{
    std::mt19937_64 rng(8);
    for (int k = 0; k < 200; ++k) {
        const auto f = random_tensor(rng);
        const auto q = random_gradient(rng);
        const cplx l = random_complex(rng);
        const Gradient lq{l * q[0], l * q[1], l * q[2]};
        const cplx rhs = l * l * std::conj(l) * evaluate(f, q);
        EXPECT_LT(std::abs(evaluate(f, lq) - rhs), 1e-11 * (1.0 + std::abs(rhs)));
    }
}

TEST(EvaluateProperty, AdditiveInCoefficients)
{
    std::mt19937_64 rng(9);
    for (int k = 0; k < 300; ++k) {
        const auto f = random_tensor(rng);
        const auto g = random_tensor(rng);
        const auto q = random_gradient(rng);
        const cplx sum = evaluate(f, q) + evaluate(g, q);
        EXPECT_LT(std::abs(evaluate(f + g, q) - sum), 1e-11 * (1.0 + std::abs(sum)));
    }
}

TEST(CircleTrace, ConstantTraces)
{
    for (int n : {4, 7, 64, 1000}) {
        const auto d = circle_trace(presets::dissipative(), n);
        const auto r = circle_trace(presets::rotational(), n);
        const auto z = circle_trace(presets::null_form_a(1), n);
        ASSERT_EQ(d.size(), static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            EXPECT_NEAR(d[k].angle, 2.0 * kPi * k / n, 1e-15);
            EXPECT_EQ(d[k].value, cplx(1.0, 0.0));
            EXPECT_EQ(r[k].value, cplx(0.0, -1.0));
            EXPECT_LT(std::abs(z[k].value), 1e-12);
        }
    }
}

TEST(CircleTrace, AgreesWithEvaluate)
{
    std::mt19937_64 rng(3);
    const auto f = random_tensor(rng);
    for (const auto& p : circle_trace(f, 33)) {
        EXPECT_EQ(p.value, evaluate(f, on_circle(p.angle)));
        EXPECT_EQ(p.value, null_trace(f, p.angle));
    }
}

TEST(CircleTrace, RejectsTooFewSamples)
{
    EXPECT_THROW((void)circle_trace(presets::dissipative(), 3), ConfigError);
}

TEST(Classify, CaseStudies)
{
    const auto d = classify(presets::dissipative());
    EXPECT_TRUE(d.satisfies_agemi);
    EXPECT_TRUE(d.strictly_dissipative);
    EXPECT_FALSE(d.purely_rotational);
    EXPECT_FALSE(d.satisfies_null_condition);
    EXPECT_NEAR(d.c0, 1.0, 1e-10);

    const auto r = classify(presets::rotational());
    EXPECT_TRUE(r.satisfies_agemi);
    EXPECT_FALSE(r.strictly_dissipative);
    EXPECT_TRUE(r.purely_rotational);
    EXPECT_FALSE(r.satisfies_null_condition);
    EXPECT_NEAR(r.c0, 0.0, 1e-10);

    const auto n = classify(presets::null_form_a(0));
    EXPECT_TRUE(n.satisfies_null_condition);
    EXPECT_TRUE(n.purely_rotational);
    EXPECT_TRUE(n.satisfies_agemi);
    EXPECT_FALSE(n.strictly_dissipative);
    EXPECT_NEAR(n.c0, 0.0, 1e-10);

    const auto a = classify(presets::antidissipative());
    EXPECT_FALSE(a.satisfies_agemi);
    EXPECT_FALSE(a.strictly_dissipative);
    EXPECT_NEAR(a.c0, -1.0, 1e-10);
}

TEST(Classify, RefinementFindsMinimumBetweenSamples)
{
    // Re F = 1 + cos^2(theta - phi): minimum 1 at phi + pi/2, off the 64-point lattice
    const double phi = 0.0123;
    CubicNonlinearity f = presets::dissipative();
    // -(w.q)^2 conj(q_t), w = (cos phi, sin phi)
    f.add_coefficient(1, 1, 0, {-std::cos(phi) * std::cos(phi), 0.0});
    f.add_coefficient(1, 2, 0, {-std::cos(phi) * std::sin(phi), 0.0});
    f.add_coefficient(2, 1, 0, {-std::sin(phi) * std::cos(phi), 0.0});
    f.add_coefficient(2, 2, 0, {-std::sin(phi) * std::sin(phi), 0.0});
    const auto c = classify(f, 64);
    EXPECT_NEAR(c.c0, 1.0, 1e-12);
    const double expected_angle = phi + 0.5 * kPi;
    EXPECT_NEAR(std::remainder(c.c0_angle - expected_angle, kPi), 0.0, 1e-6);
    EXPECT_TRUE(c.strictly_dissipative);
}

TEST(Classify, RejectsTooFewSamples)
{
    EXPECT_THROW((void)classify(presets::dissipative(), 63), ConfigError);
}

TEST(ClassifyProperty, FlagImplicationsOnRandomTensors)
{
    std::mt19937_64 rng(2024);
    int agemi_seen = 0;
    int dissipative_seen = 0;
    for (int k = 0; k < 300; ++k) {
        CubicNonlinearity f = random_tensor(rng);
        // bias some samples into the dissipative / rotational / null classes
        switch (k % 4) {
        case 1: f = f + cplx{10.0, 0.0} * presets::dissipative(); break;
        case 2: f = random_complex(rng) * presets::null_form_a(k % 3) + cplx{0.0, 3.0} * presets::rotational(); break;
        case 3: f = random_complex(rng) * presets::null_form_b(k % 3); break;
        default: break;
        }
        const auto c = classify(f);
        if (c.strictly_dissipative) {
            EXPECT_TRUE(c.satisfies_agemi);
            EXPECT_GT(c.c0, 0.0);
            ++dissipative_seen;
        }
        if (c.satisfies_null_condition) {
            EXPECT_TRUE(c.purely_rotational);
        }
        if (c.purely_rotational) {
            EXPECT_TRUE(c.satisfies_agemi);
            EXPECT_NEAR(c.c0, 0.0, 1e-9);
        }
        if (c.satisfies_agemi) {
            ++agemi_seen;
        }
        EXPECT_EQ(c.c0 > kDefaultZeroTolerance, c.strictly_dissipative);
        // c0 never exceeds any sampled value of Re F
        for (const auto& p : circle_trace(f, 256)) {
            EXPECT_LE(c.c0, p.value.real() + 1e-12);
        }
    }
    EXPECT_GT(dissipative_seen, 30);
    EXPECT_GT(agemi_seen, 100);
}

TEST(RadialCompatibility, CaseStudies)
{
    EXPECT_TRUE(is_radially_compatible(presets::dissipative()));
    EXPECT_TRUE(is_radially_compatible(presets::rotational()));
    EXPECT_TRUE(is_radially_compatible(presets::null_form_a(0)));
    EXPECT_FALSE(is_radially_compatible(presets::null_form_a(1)));
}

TEST(RadialCubic, MatchesFullEvaluation)
{
    std::mt19937_64 rng(5);
    const CubicNonlinearity f = presets::null_form_a(0) + cplx{0.3, 0.2} * presets::rotational();
    const RadialCubic rf(f);
    const SparseCubic sf(f);
    for (int k = 0; k < 100; ++k) {
        const cplx qt = random_complex(rng);
        const cplx qr = random_complex(rng);
        const Gradient q{qt, qr, cplx{0.0, 0.0}};
        EXPECT_LT(std::abs(rf(qt, qr) - evaluate(f, q)), 1e-12 * (1.0 + std::abs(evaluate(f, q))));
        const Gradient q3 = random_gradient(rng);
        EXPECT_LT(std::abs(sf(q3) - evaluate(f, q3)), 1e-12 * (1.0 + std::abs(evaluate(f, q3))));
    }
}

TEST(NonlinearityJson, RoundTrip)
{
    std::mt19937_64 rng(1);
    const auto f = random_tensor(rng);
    const auto j = to_json(f);
    EXPECT_EQ(j.size(), 27u);
    EXPECT_TRUE(j.contains("p012"));
    EXPECT_EQ(nonlinearity_from_json(j), f);
}

TEST(NonlinearityJson, MissingKeysAreZeroUnknownKeysRejected)
{
    const auto f = nonlinearity_from_json(nlohmann::json::parse(R"({"p000": [0, 1]})"));
    EXPECT_EQ(f, presets::rotational());
    EXPECT_THROW((void)nonlinearity_from_json(nlohmann::json::parse(R"({"p300": [1, 0]})")), ConfigError);
    EXPECT_THROW((void)nonlinearity_from_json(nlohmann::json::parse(R"({"p000": [1]})")), ConfigError);
    EXPECT_THROW((void)nonlinearity_from_json(nlohmann::json::parse(R"({"p000": "x"})")), ConfigError);
}

TEST(Construction, RejectsNonFinite)
{
    std::array<cplx, 27> c{};
    c[5] = {std::nan(""), 0.0};
    EXPECT_THROW((void)CubicNonlinearity(c), ConfigError);
    CubicNonlinearity f;
    EXPECT_THROW(f.set_coefficient(0, 0, 0, {INFINITY, 0.0}), ConfigError);
}

TEST(NullVector, UnitLengthEnforced)
{
    EXPECT_NO_THROW((void)NullVector(0.6, 0.8));
    EXPECT_THROW((void)NullVector(0.6, 0.81), DomainError);
    const auto w = NullVector::from_angle(2.0);
    EXPECT_NEAR(w.omega1 * w.omega1 + w.omega2 * w.omega2, 1.0, 1e-15);
}

TEST(Presets, ByName)
{
    EXPECT_EQ(presets::by_name("dissipative"), presets::dissipative());
    EXPECT_EQ(presets::by_name("null-form-b:2"), presets::null_form_b(2));
    EXPECT_TRUE(presets::by_name("free").is_zero());
    EXPECT_THROW((void)presets::by_name("quartic"), ConfigError);
}
