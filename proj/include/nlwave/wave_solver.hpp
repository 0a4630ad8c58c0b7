#pragma once

// Leapfrog time stepping of  u_tt - Lap u = F(du)  in 2D, either for radially symmetric
// fields on r_j = j dr or on a square Cartesian grid. Complex valued throughout.

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "nlwave/nonlinearity.hpp"

namespace nlwave {

enum class BumpShape {
    Polynomial, ///< (1 - s^2)^4 for s < 1
    Smooth,     ///< exp(1 - 1 / (1 - s^2)) for s < 1
};

[[nodiscard]] double bump_profile(BumpShape shape, double s) noexcept;
[[nodiscard]] double bump_derivative(BumpShape shape, double s) noexcept;

/// u(0,x) = eps f_amplitude b(|x|/R),  u_t(0,x) = eps g_amplitude b(|x|/R).
struct InitialData {
    BumpShape shape = BumpShape::Polynomial;
    double support_radius = 1.0;
    double eps = 0.1;
    cplx f_amplitude{1.0, 0.0};
    cplx g_amplitude{0.0, 0.0};

    /// Throws ConfigError unless R > 0 and eps >= 0 (both finite).
    void validate() const;
    [[nodiscard]] cplx u0(double r) const noexcept;
    [[nodiscard]] cplx u0_r(double r) const noexcept;
    [[nodiscard]] cplx ut0(double r) const noexcept;
};

/// (1/2) int |u_t(0)|^2 + |grad u(0)|^2 dx by Gauss-Legendre quadrature in r.
[[nodiscard]] double initial_energy(const InitialData& data);

struct RadialGrid {
    double r_max = 0.0;
    std::size_t n_r = 0;
    double dr = 0.0;
    double dt = 0.0;
    double cfl = 0.0;

    /// n_r = ceil(r_max / dr); r_max is rounded up to n_r dr. Throws ConfigError
    /// unless 0 < cfl <= 0.9 and n_r >= 4.
    static RadialGrid make(double r_max, double dr, double cfl);
    /// Smallest grid with r_max >= t_end + R + 2 dr plus a pad for the discrete precursor.
    static RadialGrid for_run(double t_end, double support_radius, double dr, double cfl);
    [[nodiscard]] double r(std::size_t j) const noexcept { return static_cast<double>(j) * dr; }
};

enum class Boundary { Dirichlet, Periodic };

struct CartesianGrid2D {
    double half_width = 0.0;
    std::size_t n = 0; ///< nodes per axis
    double dx = 0.0;
    double dt = 0.0;
    double cfl = 0.0;
    Boundary boundary = Boundary::Dirichlet;

    /// Dirichlet: nodes -L + i dx, i = 0..n-1, with x = +-L on the boundary.
    /// Periodic: n = 2L/dx nodes, x = L identified with -L.
    /// Throws ConfigError unless 0 < cfl <= 0.5 and n >= 5.
    static CartesianGrid2D make(double half_width, double dx, double cfl, Boundary boundary = Boundary::Dirichlet);
    static CartesianGrid2D for_run(double t_end, double support_radius, double dx, double cfl);
    [[nodiscard]] double x(std::size_t i) const noexcept { return -half_width + static_cast<double>(i) * dx; }
};

using Grid = std::variant<RadialGrid, CartesianGrid2D>;

[[nodiscard]] double grid_spacing(const Grid& grid) noexcept;
[[nodiscard]] double grid_dt(const Grid& grid) noexcept;
[[nodiscard]] double grid_extent(const Grid& grid) noexcept;

inline constexpr double kDefaultRadialCfl = 0.5;
inline constexpr double kDefaultCartesianCfl = 0.45;
inline constexpr double kBlowupFactor = 1e6;
inline constexpr std::size_t kMinCellsAcrossSupport = 32;

struct SolverOptions {
    /// Corrector sweeps re-evaluating F with the centred u_t; 0 leaves only the predictor.
    int corrector_passes = 1;
    /// Absolute blow-up threshold on max|u|; 0 derives kBlowupFactor * eps from the data.
    double blowup_threshold = 0.0;
    /// Values at or below this beyond the wave front are set to zero (radial mode).
    double flush_below = 1e-250;
    /// Dirichlet data g(t, x, y) on the outer boundary; empty means homogeneous.
    std::function<cplx(double, double, double)> boundary_value;
};

/// Field values at the half level t_n - dt/2: u = (u^n + u^{n-1})/2, u_t = (u^n - u^{n-1})/dt.
/// Radial snapshots cover r = origin + k spacing, k < nx (ny = 1); Cartesian ones cover the
/// full grid, x = origin + i spacing, y = origin + j spacing.
struct FieldSnapshot {
    bool radial = true;
    double t = 0.0;
    double origin = 0.0;
    double spacing = 0.0;
    double dt = 0.0;
    std::size_t nx = 0;
    std::size_t ny = 1;
    std::vector<cplx> u;
    std::vector<cplx> ut;
};

class WaveField {
public:
    /// Taylor start u(dt) = u0 + dt u1 + dt^2/2 (Lap u0 + F(du(0))).
    /// Throws ConfigError if the support has fewer than 32 cells across it.
    static WaveField init(const InitialData& data, const Grid& grid, const CubicNonlinearity& f,
                          SolverOptions options = {});
    /// Both starting levels from a known solution u(t, x, y) (radial: y ignored, x = r).
    static WaveField from_exact(const Grid& grid, const CubicNonlinearity& f,
                                const std::function<cplx(double, double, double)>& u,
                                SolverOptions options = {});

    /// Advances one step. Throws BlowupDetected when max|u| exceeds the threshold or is non-finite.
    void step();

    [[nodiscard]] double time() const noexcept { return t_; }
    [[nodiscard]] double dt() const noexcept { return grid_dt(grid_); }
    [[nodiscard]] std::size_t steps() const noexcept { return steps_; }
    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] bool radial() const noexcept { return std::holds_alternative<RadialGrid>(grid_); }
    [[nodiscard]] const std::vector<cplx>& current() const noexcept { return u_; }
    [[nodiscard]] const std::vector<cplx>& previous() const noexcept { return u_prev_; }
    [[nodiscard]] double blowup_threshold() const noexcept { return threshold_; }

    /// Discrete energy at t - dt/2, (1/2) sum |D_t u|^2 + (1/2) Re <grad u^n, grad u^{n-1}>,
    /// exactly conserved by the linear scheme. Includes the 2 pi r Jacobian in radial mode.
    [[nodiscard]] double energy() const;
    [[nodiscard]] double max_abs() const;
    /// max |u^n| over nodes with |x| > radius.
    [[nodiscard]] double max_abs_outside(double radius) const;
    /// Radial: last index that may be nonzero. Cartesian: n*n - 1.
    [[nodiscard]] std::size_t active_extent() const noexcept { return active_; }
    /// True once the nonzero region has reached the outer boundary.
    [[nodiscard]] bool boundary_reached() const noexcept { return boundary_reached_; }

    [[nodiscard]] FieldSnapshot snapshot() const;
    /// Radial only: nodes with r in [r_lo, r_hi], clipped to the grid.
    [[nodiscard]] FieldSnapshot window(double r_lo, double r_hi) const;

private:
    WaveField(Grid grid, const CubicNonlinearity& f, SolverOptions options);
    void step_radial();
    void step_cartesian();
    void check_blowup(double max_abs_next, double t_next) const;
    [[nodiscard]] cplx boundary(double t, double x, double y) const;

    Grid grid_;
    CubicNonlinearity f_;
    RadialCubic radial_f_;
    SparseCubic sparse_f_;
    SolverOptions options_;
    std::vector<cplx> u_prev_;
    std::vector<cplx> u_;
    std::vector<cplx> u_next_;
    std::vector<double> inv_2j_; ///< radial: 1 / (2j)
    double t_ = 0.0;
    std::size_t steps_ = 0;
    std::size_t active_ = 0;
    double threshold_ = std::numeric_limits<double>::infinity();
    bool boundary_reached_ = false;
};

enum class RunStatus { Completed, Blowup, Error };

[[nodiscard]] std::string to_string(RunStatus status);
[[nodiscard]] RunStatus run_status_from_string(const std::string& text); ///< throws ConfigError

struct RunOptions {
    double t_end = 0.0;
    /// Energy and support diagnostics every this many time units (0: every step).
    double energy_every = 1.0;
    /// Rays r = t + sigma are sampled in a window of ray_halfwidth around [min, max] sigma.
    std::vector<double> ray_sigmas;
    double ray_halfwidth = 0.0; ///< 0: 4 grid spacings
    double ray_t_min = 1.0;
    int ray_per_decade = 40;
    /// Additional linear cadence for ray samples (0: off).
    double ray_every = 0.0;
    /// Times at which full snapshots are kept.
    std::vector<double> snapshot_times;
    /// Called after every step.
    std::function<void(const WaveField&)> on_step;
};

struct RunResult {
    RunStatus status = RunStatus::Completed;
    double blowup_time = std::numeric_limits<double>::quiet_NaN();
    std::string message;
    double t_final = 0.0;
    std::size_t steps = 0;
    double dt = 0.0;
    double spacing = 0.0;
    double support_radius = 0.0;
    std::vector<double> energy_times;
    std::vector<double> energy_values;
    std::vector<FieldSnapshot> ray_snapshots;
    std::vector<FieldSnapshot> full_snapshots;
    /// max over diagnostic times of max|u| outside |x| <= t + R + 2 dx, relative to max|u|.
    double support_leak = 0.0;
    bool boundary_reached = false;
};

/// Steps to t_end, recording the observers. Blow-up ends the run with status Blowup and
/// the failing time; other library errors give status Error. Throws ConfigError if the
/// grid does not clear the light cone (extent < t_end + R + 2 dx).
[[nodiscard]] RunResult run(const InitialData& data, const Grid& grid, const CubicNonlinearity& f,
                            const RunOptions& options, SolverOptions solver = {});

} // namespace nlwave
