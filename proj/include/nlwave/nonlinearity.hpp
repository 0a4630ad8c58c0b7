#pragma once

// Cubic derivative nonlinearities F(du) = sum p_abc (d_a u)(d_b u) conj(d_c u),
// their trace on the null circle {-1} x S^1, and structural classification.

#include <array>
#include <complex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nlwave {

using cplx = std::complex<double>;
using Gradient = std::array<cplx, 3>; ///< (d_t u, d_1 u, d_2 u)

class CubicNonlinearity {
public:
    /// The zero nonlinearity (free wave equation).
    CubicNonlinearity() { coeffs_.fill(cplx{0.0, 0.0}); }

    /// Throws ConfigError if any coefficient is non-finite.
    explicit CubicNonlinearity(const std::array<cplx, 27>& coeffs);

    [[nodiscard]] cplx coefficient(int a, int b, int c) const { return coeffs_[index(a, b, c)]; }
    void set_coefficient(int a, int b, int c, cplx value);
    void add_coefficient(int a, int b, int c, cplx value)
    {
        set_coefficient(a, b, c, coefficient(a, b, c) + value);
    }

    [[nodiscard]] const std::array<cplx, 27>& coefficients() const noexcept { return coeffs_; }
    [[nodiscard]] bool is_zero() const noexcept;

    /// sum p_abc q_a q_b conj(q_c)
    [[nodiscard]] cplx operator()(const Gradient& q) const noexcept;

    friend CubicNonlinearity operator+(const CubicNonlinearity& lhs, const CubicNonlinearity& rhs);
    friend CubicNonlinearity operator*(cplx scale, const CubicNonlinearity& f);
    friend bool operator==(const CubicNonlinearity&, const CubicNonlinearity&) = default;

    static constexpr int index(int a, int b, int c) noexcept { return 9 * a + 3 * b + c; }

private:
    std::array<cplx, 27> coeffs_{};
};

[[nodiscard]] inline cplx evaluate(const CubicNonlinearity& f, const Gradient& q) noexcept
{
    return f(q);
}

/// hat{omega} = (-1, omega_1, omega_2) with |omega| = 1.
struct NullVector {
    static constexpr double omega0 = -1.0;
    double omega1 = 1.0;
    double omega2 = 0.0;

    /// Throws DomainError if (omega1, omega2) is not a unit vector within 1e-12.
    NullVector(double w1, double w2);
    static NullVector from_angle(double theta);

    [[nodiscard]] Gradient as_gradient() const noexcept
    {
        return {cplx{omega0, 0.0}, cplx{omega1, 0.0}, cplx{omega2, 0.0}};
    }
};

/// F(hat{omega}) for the direction at angle theta.
[[nodiscard]] cplx null_trace(const CubicNonlinearity& f, double theta) noexcept;

struct TracePoint {
    double angle;
    cplx value;
};

/// Samples F(hat{omega}) at theta_k = 2 pi k / n_samples. Requires n_samples >= 4.
[[nodiscard]] std::vector<TracePoint> circle_trace(const CubicNonlinearity& f, int n_samples);

struct NonlinearityClass {
    bool satisfies_null_condition = false;
    bool satisfies_agemi = false;
    bool strictly_dissipative = false;
    bool purely_rotational = false;
    double c0 = 0.0;          ///< min over S^1 of Re F(hat{omega})
    double c0_angle = 0.0;    ///< angle attaining c0
    double max_abs_trace = 0; ///< max over samples of |F(hat{omega})|
};

inline constexpr double kDefaultZeroTolerance = 1e-10;
inline constexpr int kDefaultClassifySamples = 1024;

/// Requires n_samples >= 64. c0 is refined by golden-section search around the sampled minimum.
[[nodiscard]] NonlinearityClass classify(const CubicNonlinearity& f,
                                         int n_samples = kDefaultClassifySamples,
                                         double tol = kDefaultZeroTolerance);

[[nodiscard]] nlohmann::json to_json(const NonlinearityClass& cls);

/// True when F(q_t, cos(th) s, sin(th) s) does not depend on th, i.e. the radial
/// reduction of the equation is closed.
[[nodiscard]] bool is_radially_compatible(const CubicNonlinearity& f, double tol = 1e-12);

// Builders for the case-study nonlinearities.
namespace presets {
/// -|d_t u|^2 d_t u, F(hat{omega}) = 1.
[[nodiscard]] CubicNonlinearity dissipative();
/// i |d_t u|^2 d_t u, F(hat{omega}) = -i.
[[nodiscard]] CubicNonlinearity rotational();
/// |d_t u|^2 d_t u, which equals (d_t u)^3 on real solutions; F(hat{omega}) = -1.
[[nodiscard]] CubicNonlinearity antidissipative();
/// (d_a u)(|d_t u|^2 - |d_1 u|^2 - |d_2 u|^2)
[[nodiscard]] CubicNonlinearity null_form_a(int a);
/// conj(d_a u)((d_t u)^2 - (d_1 u)^2 - (d_2 u)^2)
[[nodiscard]] CubicNonlinearity null_form_b(int a);
/// (d_a u)((d_b u) conj(d_c u) - (d_c u) conj(d_b u))
[[nodiscard]] CubicNonlinearity null_form_c(int a, int b, int c);

/// Looks up "dissipative", "rotational", "antidissipative", "free", "null-form-a",
/// "null-form-b", with an optional ":<index>" suffix for the null forms. Throws ConfigError.
[[nodiscard]] CubicNonlinearity by_name(const std::string& name);
} // namespace presets

/// {"p000": [re, im], ..., "p222": [re, im]}
[[nodiscard]] nlohmann::json to_json(const CubicNonlinearity& f);
/// Missing keys are zero; unknown keys or malformed entries throw ConfigError.
[[nodiscard]] CubicNonlinearity nonlinearity_from_json(const nlohmann::json& j);

/// Specialisation of F to gradients (q_t, q_r, 0): six coefficients after symmetrising
/// the product (d_a u)(d_b u). Used by the radial solver.
class RadialCubic {
public:
    RadialCubic() = default;
    explicit RadialCubic(const CubicNonlinearity& f);

    [[nodiscard]] cplx operator()(cplx qt, cplx qr) const noexcept
    {
        if (time_only_) {
            return c_ttt_ * (std::norm(qt) * qt);
        }
        const cplx ct = std::conj(qt);
        const cplx cr = std::conj(qr);
        return qt * qt * (c_ttt_ * ct + c_ttr_ * cr) + qt * qr * (c_trt_ * ct + c_trr_ * cr)
            + qr * qr * (c_rrt_ * ct + c_rrr_ * cr);
    }
    [[nodiscard]] bool is_zero() const noexcept { return zero_; }

private:
    cplx c_ttt_{}, c_ttr_{}, c_trt_{}, c_trr_{}, c_rrt_{}, c_rrr_{};
    bool zero_ = true;
    bool time_only_ = false; ///< only c_ttt nonzero: F = c |q_t|^2 q_t
};

/// Sparse list of nonzero terms, used by the Cartesian solver.
class SparseCubic {
public:
    SparseCubic() = default;
    explicit SparseCubic(const CubicNonlinearity& f);

    [[nodiscard]] cplx operator()(const Gradient& q) const noexcept
    {
        cplx sum{0.0, 0.0};
        for (const auto& t : terms_) {
            sum += t.coeff * q[t.a] * q[t.b] * std::conj(q[t.c]);
        }
        return sum;
    }
    [[nodiscard]] bool is_zero() const noexcept { return terms_.empty(); }

private:
    struct Term {
        cplx coeff;
        int a, b, c;
    };
    std::vector<Term> terms_;
};

} // namespace nlwave
