#include "nlwave/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nlwave/errors.hpp"

namespace nlwave {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

void check_index(int a, int b, int c)
{
    if (a < 0 || a > 2 || b < 0 || b > 2 || c < 0 || c > 2) {
        throw ConfigError("coefficient index out of range");
    }
}

std::string key_for(int a, int b, int c)
{
    return "p" + std::to_string(a) + std::to_string(b) + std::to_string(c);
}

} // namespace

CubicNonlinearity::CubicNonlinearity(const std::array<cplx, 27>& coeffs) : coeffs_(coeffs)
{
    for (const auto& z : coeffs_) {
        if (!finite(z)) {
            throw ConfigError("non-finite nonlinearity coefficient");
        }
    }
}

void CubicNonlinearity::set_coefficient(int a, int b, int c, cplx value)
{
    check_index(a, b, c);
    if (!finite(value)) {
        throw ConfigError("non-finite nonlinearity coefficient");
    }
    coeffs_[index(a, b, c)] = value;
}

bool CubicNonlinearity::is_zero() const noexcept
{
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](cplx z) { return z == cplx{}; });
}

cplx CubicNonlinearity::operator()(const Gradient& q) const noexcept
{
    cplx sum{0.0, 0.0};
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            const cplx qab = q[a] * q[b];
            for (int c = 0; c < 3; ++c) {
                sum += coeffs_[index(a, b, c)] * qab * std::conj(q[c]);
            }
        }
    }
    return sum;
}

CubicNonlinearity operator+(const CubicNonlinearity& lhs, const CubicNonlinearity& rhs)
{
    CubicNonlinearity out;
    for (std::size_t i = 0; i < 27; ++i) {
        out.coeffs_[i] = lhs.coeffs_[i] + rhs.coeffs_[i];
    }
    return out;
}

CubicNonlinearity operator*(cplx scale, const CubicNonlinearity& f)
{
    CubicNonlinearity out;
    for (std::size_t i = 0; i < 27; ++i) {
        out.coeffs_[i] = scale * f.coeffs_[i];
    }
    return out;
}

NullVector::NullVector(double w1, double w2) : omega1(w1), omega2(w2)
{
    if (std::abs(std::hypot(w1, w2) - 1.0) > 1e-12) {
        throw DomainError("null vector direction is not a unit vector");
    }
}

NullVector NullVector::from_angle(double theta)
{
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double n = std::hypot(c, s);
    return NullVector(c / n, s / n);
}

cplx null_trace(const CubicNonlinearity& f, double theta) noexcept
{
    return f(Gradient{cplx{-1.0, 0.0}, cplx{std::cos(theta), 0.0}, cplx{std::sin(theta), 0.0}});
}

std::vector<TracePoint> circle_trace(const CubicNonlinearity& f, int n_samples)
{
    if (n_samples < 4) {
        throw ConfigError("circle_trace needs at least 4 samples");
    }
    std::vector<TracePoint> out;
    out.reserve(static_cast<std::size_t>(n_samples));
    for (int k = 0; k < n_samples; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / n_samples;
        out.push_back({theta, null_trace(f, theta)});
    }
    return out;
}

NonlinearityClass classify(const CubicNonlinearity& f, int n_samples, double tol)
{
    if (n_samples < 64) {
        throw ConfigError("classify needs at least 64 samples");
    }
    const auto trace = circle_trace(f, n_samples);

    NonlinearityClass cls;
    double max_abs_re = 0.0;
    std::size_t kmin = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const cplx v = trace[k].value;
        cls.max_abs_trace = std::max(cls.max_abs_trace, std::abs(v));
        max_abs_re = std::max(max_abs_re, std::abs(v.real()));
        if (v.real() < trace[kmin].value.real()) {
            kmin = k;
        }
    }

    // Golden-section refinement of min Re F on the bracket around the sampled minimum.
    const double h = 2.0 * std::numbers::pi / n_samples;
    double lo = trace[kmin].angle - h;
    double hi = trace[kmin].angle + h;
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto re_at = [&f](double th) { return null_trace(f, th).real(); };
    double x1 = hi - invphi * (hi - lo);
    double x2 = lo + invphi * (hi - lo);
    double f1 = re_at(x1);
    double f2 = re_at(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-14; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = re_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = re_at(x2);
        }
    }
    const double mid = 0.5 * (lo + hi);
    const double refined = re_at(mid);
    cls.c0 = std::min(refined, trace[kmin].value.real());
    cls.c0_angle = refined <= trace[kmin].value.real() ? mid : trace[kmin].angle;

    cls.satisfies_null_condition = cls.max_abs_trace <= tol;
    cls.purely_rotational = max_abs_re <= tol;
    if (cls.purely_rotational && std::abs(cls.c0) <= tol) {
        cls.c0 = 0.0;
    }
    cls.strictly_dissipative = cls.c0 > tol;
    cls.satisfies_agemi = cls.purely_rotational || cls.c0 >= -tol;
    return cls;
}

nlohmann::json to_json(const NonlinearityClass& cls)
{
    return {
        {"satisfies_null_condition", cls.satisfies_null_condition},
        {"satisfies_agemi", cls.satisfies_agemi},
        {"strictly_dissipative", cls.strictly_dissipative},
        {"purely_rotational", cls.purely_rotational},
        {"c0", cls.c0},
        {"c0_angle", cls.c0_angle},
        {"max_abs_trace", cls.max_abs_trace},
    };
}

bool is_radially_compatible(const CubicNonlinearity& f, double tol)
{
    std::mt19937_64 rng(0x5eedu);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 8; ++trial) {
        const cplx qt{normal(rng), normal(rng)};
        const cplx qr{normal(rng), normal(rng)};
        const cplx ref = f(Gradient{qt, qr, cplx{}});
        const double scale = std::max(1.0, std::abs(ref));
        for (int k = 1; k < 7; ++k) {
            const double th = 0.9 * k;
            const cplx v = f(Gradient{qt, std::cos(th) * qr, std::sin(th) * qr});
            if (std::abs(v - ref) > tol * scale * 10.0) {
                return false;
            }
        }
    }
    return true;
}

namespace presets {

CubicNonlinearity dissipative()
{
    CubicNonlinearity f;
    f.set_coefficient(0, 0, 0, {-1.0, 0.0});
    return f;
}

CubicNonlinearity rotational()
{
    CubicNonlinearity f;
    f.set_coefficient(0, 0, 0, {0.0, 1.0});
    return f;
}

CubicNonlinearity antidissipative()
{
    CubicNonlinearity f;
    f.set_coefficient(0, 0, 0, {1.0, 0.0});
    return f;
}

CubicNonlinearity null_form_a(int a)
{
    CubicNonlinearity f;
    f.add_coefficient(a, 0, 0, {1.0, 0.0});
    f.add_coefficient(a, 1, 1, {-1.0, 0.0});
    f.add_coefficient(a, 2, 2, {-1.0, 0.0});
    return f;
}

CubicNonlinearity null_form_b(int a)
{
    CubicNonlinearity f;
    f.add_coefficient(0, 0, a, {1.0, 0.0});
    f.add_coefficient(1, 1, a, {-1.0, 0.0});
    f.add_coefficient(2, 2, a, {-1.0, 0.0});
    return f;
}

CubicNonlinearity null_form_c(int a, int b, int c)
{
    CubicNonlinearity f;
    f.add_coefficient(a, b, c, {1.0, 0.0});
    f.add_coefficient(a, c, b, {-1.0, 0.0});
    return f;
}

CubicNonlinearity by_name(const std::string& name)
{
    const auto colon = name.find(':');
    const std::string base = name.substr(0, colon);
    int index = 0;
    if (colon != std::string::npos) {
        try {
            index = std::stoi(name.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("bad nonlinearity index in '" + name + "'");
        }
        if (index < 0 || index > 2) {
            throw ConfigError("nonlinearity index must be 0, 1 or 2: '" + name + "'");
        }
    }
    if (base == "dissipative") {
        return dissipative();
    }
    if (base == "rotational") {
        return rotational();
    }
    if (base == "antidissipative") {
        return antidissipative();
    }
    if (base == "free") {
        return CubicNonlinearity{};
    }
    if (base == "null-form-a") {
        return null_form_a(index);
    }
    if (base == "null-form-b") {
        return null_form_b(index);
    }
    throw ConfigError("unknown nonlinearity preset '" + name + "'");
}

} // namespace presets

nlohmann::json to_json(const CubicNonlinearity& f)
{
    nlohmann::json j = nlohmann::json::object();
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            for (int c = 0; c < 3; ++c) {
                const cplx z = f.coefficient(a, b, c);
                j[key_for(a, b, c)] = {z.real(), z.imag()};
            }
        }
    }
    return j;
}

CubicNonlinearity nonlinearity_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw ConfigError("nonlinearity JSON must be an object");
    }
    CubicNonlinearity f;
    for (const auto& [key, value] : j.items()) {
        if (key.size() != 4 || key[0] != 'p') {
            throw ConfigError("unknown nonlinearity key '" + key + "'");
        }
        const int a = key[1] - '0';
        const int b = key[2] - '0';
        const int c = key[3] - '0';
        if (a < 0 || a > 2 || b < 0 || b > 2 || c < 0 || c > 2) {
            throw ConfigError("unknown nonlinearity key '" + key + "'");
        }
        if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number()) {
            throw ConfigError("entry '" + key + "' must be a [re, im] pair");
        }
        f.set_coefficient(a, b, c, {value[0].get<double>(), value[1].get<double>()});
    }
    return f;
}

RadialCubic::RadialCubic(const CubicNonlinearity& f)
{
    // Gradient (qt, qr, 0): only indices 0 (time) and 1 (radial) survive.
    c_ttt_ = f.coefficient(0, 0, 0);
    c_ttr_ = f.coefficient(0, 0, 1);
    c_trt_ = f.coefficient(0, 1, 0) + f.coefficient(1, 0, 0);
    c_trr_ = f.coefficient(0, 1, 1) + f.coefficient(1, 0, 1);
    c_rrt_ = f.coefficient(1, 1, 0);
    c_rrr_ = f.coefficient(1, 1, 1);
    const cplx zero{};
    const bool no_radial = c_ttr_ == zero && c_trt_ == zero && c_trr_ == zero && c_rrt_ == zero && c_rrr_ == zero;
    zero_ = no_radial && c_ttt_ == zero;
    time_only_ = no_radial && !zero_;
}

SparseCubic::SparseCubic(const CubicNonlinearity& f)
{
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            for (int c = 0; c < 3; ++c) {
                const cplx z = f.coefficient(a, b, c);
                if (z != cplx{}) {
                    terms_.push_back({z, a, b, c});
                }
            }
        }
    }
}

} // namespace nlwave
