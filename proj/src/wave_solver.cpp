#include "nlwave/wave_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "nlwave/errors.hpp"
#include "nlwave/text_io.hpp"

namespace nlwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double component_max(cplx z) noexcept { return std::max(std::abs(z.real()), std::abs(z.imag())); }

std::size_t cells_for(double length, double spacing)
{
    return static_cast<std::size_t>(std::ceil(length / spacing - 1e-9));
}

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string(what) + " must be positive and finite");
    }
}

// Next time strictly after t on the ray schedule.
double next_ray_time(const RunOptions& opt, double t)
{
    double next = kInf;
    if (opt.ray_per_decade > 0 && opt.ray_t_min > 0.0) {
        if (t < opt.ray_t_min) {
            next = opt.ray_t_min;
        } else {
            const double k = std::floor(std::log10(t / opt.ray_t_min) * opt.ray_per_decade + 1e-9) + 1.0;
            next = opt.ray_t_min * std::pow(10.0, k / opt.ray_per_decade);
        }
    }
    if (opt.ray_every > 0.0) {
        next = std::min(next, (std::floor(t / opt.ray_every + 1e-9) + 1.0) * opt.ray_every);
    }
    return next;
}

} // namespace

double bump_profile(BumpShape shape, double s) noexcept
{
    const double a = std::abs(s);
    if (a >= 1.0) {
        return 0.0;
    }
    const double q = 1.0 - a * a;
    if (shape == BumpShape::Polynomial) {
        return q * q * q * q;
    }
    return std::exp(1.0 - 1.0 / q);
}

double bump_derivative(BumpShape shape, double s) noexcept
{
    const double a = std::abs(s);
    if (a >= 1.0) {
        return 0.0;
    }
    const double q = 1.0 - s * s;
    if (shape == BumpShape::Polynomial) {
        return -8.0 * s * q * q * q;
    }
    return std::exp(1.0 - 1.0 / q) * (-2.0 * s / (q * q));
}

void InitialData::validate() const
{
    require_positive(support_radius, "support radius");
    if (!(eps >= 0.0) || !std::isfinite(eps)) {
        throw ConfigError("eps must be nonnegative and finite");
    }
    if (!std::isfinite(f_amplitude.real()) || !std::isfinite(f_amplitude.imag())
        || !std::isfinite(g_amplitude.real()) || !std::isfinite(g_amplitude.imag())) {
        throw ConfigError("bump amplitudes must be finite");
    }
}

cplx InitialData::u0(double r) const noexcept
{
    return eps * f_amplitude * bump_profile(shape, r / support_radius);
}

cplx InitialData::u0_r(double r) const noexcept
{
    return eps * f_amplitude * bump_derivative(shape, r / support_radius) / support_radius;
}

cplx InitialData::ut0(double r) const noexcept
{
    return eps * g_amplitude * bump_profile(shape, r / support_radius);
}

double initial_energy(const InitialData& data)
{
    data.validate();
    // Five-point Gauss-Legendre on uniform panels.
    constexpr std::array<double, 5> nodes{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                          0.9061798459386640};
    constexpr std::array<double, 5> weights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                            0.4786286704993665, 0.2369268850561891};
    constexpr int panels = 512;
    const double h = data.support_radius / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            const double r = mid + 0.5 * h * nodes[k];
            sum += weights[k] * 0.5 * h * r * (std::norm(data.ut0(r)) + std::norm(data.u0_r(r)));
        }
    }
    return std::numbers::pi * sum;
}

RadialGrid RadialGrid::make(double r_max, double dr, double cfl)
{
    require_positive(r_max, "r_max");
    require_positive(dr, "dr");
    if (!(cfl > 0.0) || cfl > 0.9) {
        throw ConfigError("radial CFL must lie in (0, 0.9]");
    }
    RadialGrid g;
    g.n_r = cells_for(r_max, dr);
    if (g.n_r < 4) {
        throw ConfigError("radial grid needs at least 4 cells");
    }
    g.dr = dr;
    g.r_max = static_cast<double>(g.n_r) * dr;
    g.cfl = cfl;
    g.dt = cfl * dr;
    return g;
}

RadialGrid RadialGrid::for_run(double t_end, double support_radius, double dr, double cfl)
{
    require_positive(cfl, "cfl");
    // The leapfrog stencil reaches r = R + t/cfl; covering it keeps the boundary silent.
    return make(support_radius + t_end / cfl + 10.0 * dr, dr, cfl);
}

CartesianGrid2D CartesianGrid2D::make(double half_width, double dx, double cfl, Boundary boundary)
{
    require_positive(half_width, "half width");
    require_positive(dx, "dx");
    if (!(cfl > 0.0) || cfl > 0.5) {
        throw ConfigError("Cartesian CFL must lie in (0, 0.5]");
    }
    CartesianGrid2D g;
    const std::size_t cells = cells_for(2.0 * half_width, dx);
    g.dx = dx;
    g.half_width = 0.5 * static_cast<double>(cells) * dx;
    g.n = boundary == Boundary::Periodic ? cells : cells + 1;
    if (g.n < 5) {
        throw ConfigError("Cartesian grid needs at least 5 nodes per axis");
    }
    g.cfl = cfl;
    g.dt = cfl * dx;
    g.boundary = boundary;
    return g;
}

CartesianGrid2D CartesianGrid2D::for_run(double t_end, double support_radius, double dx, double cfl)
{
    return make(t_end + support_radius + 16.0 * dx, dx, cfl, Boundary::Dirichlet);
}

double grid_spacing(const Grid& grid) noexcept
{
    return std::visit([](const auto& g) {
        if constexpr (std::is_same_v<std::decay_t<decltype(g)>, RadialGrid>) {
            return g.dr;
        } else {
            return g.dx;
        }
    }, grid);
}

double grid_dt(const Grid& grid) noexcept
{
    return std::visit([](const auto& g) { return g.dt; }, grid);
}

double grid_extent(const Grid& grid) noexcept
{
    return std::visit([](const auto& g) {
        if constexpr (std::is_same_v<std::decay_t<decltype(g)>, RadialGrid>) {
            return g.r_max;
        } else {
            return g.half_width;
        }
    }, grid);
}

WaveField::WaveField(Grid grid, const CubicNonlinearity& f, SolverOptions options)
    : grid_(std::move(grid)), f_(f), radial_f_(f), sparse_f_(f), options_(std::move(options))
{
    if (options_.corrector_passes < 0) {
        throw ConfigError("corrector_passes must be nonnegative");
    }
    if (radial() && !is_radially_compatible(f)) {
        throw ConfigError("nonlinearity does not preserve radial symmetry; use the Cartesian mode");
    }
    std::size_t size = 0;
    if (const auto* g = std::get_if<RadialGrid>(&grid_)) {
        size = g->n_r + 1;
    } else {
        const auto& c = std::get<CartesianGrid2D>(grid_);
        size = c.n * c.n;
    }
    if (radial()) {
        inv_2j_.assign(size, 0.0);
        for (std::size_t j = 1; j < size; ++j) {
            inv_2j_[j] = 0.5 / static_cast<double>(j);
        }
    }
    u_prev_.assign(size, cplx{});
    u_.assign(size, cplx{});
    u_next_.assign(size, cplx{});
    active_ = size - 1;
    if (options_.blowup_threshold > 0.0) {
        threshold_ = options_.blowup_threshold;
    }
}

cplx WaveField::boundary(double t, double x, double y) const
{
    return options_.boundary_value ? options_.boundary_value(t, x, y) : cplx{};
}

WaveField WaveField::init(const InitialData& data, const Grid& grid, const CubicNonlinearity& f,
                          SolverOptions options)
{
    data.validate();
    const double h = grid_spacing(grid);
    if (2.0 * data.support_radius / h < static_cast<double>(kMinCellsAcrossSupport) - 1e-9) {
        throw ConfigError("support under-resolved: need at least 32 cells across 2R (2R/dx = "
                          + format_double(2.0 * data.support_radius / h) + ")");
    }
    WaveField w(grid, f, std::move(options));
    if (w.options_.blowup_threshold <= 0.0) {
        w.threshold_ = data.eps > 0.0 ? kBlowupFactor * data.eps : kInf;
    }
    const double dt = grid_dt(grid);
    const double half_dt2 = 0.5 * dt * dt;

    if (const auto* g = std::get_if<RadialGrid>(&grid)) {
        const std::size_t n = g->n_r;
        std::vector<cplx> ut(n + 1);
        for (std::size_t j = 0; j <= n; ++j) {
            w.u_prev_[j] = data.u0(g->r(j));
            ut[j] = data.ut0(g->r(j));
        }
        w.u_prev_[n] = w.boundary(0.0, g->r_max, 0.0);
        const double inv = 1.0 / (g->dr * g->dr);
        const auto& u0 = w.u_prev_;
        for (std::size_t j = 0; j < n; ++j) {
            cplx lap;
            cplx ur;
            if (j == 0) {
                lap = 4.0 * (u0[1] - u0[0]) * inv;
            } else {
                lap = (u0[j + 1] - 2.0 * u0[j] + u0[j - 1]
                       + (u0[j + 1] - u0[j - 1]) / (2.0 * static_cast<double>(j)))
                    * inv;
                ur = (u0[j + 1] - u0[j - 1]) / (2.0 * g->dr);
            }
            w.u_[j] = u0[j] + dt * ut[j] + half_dt2 * (lap + w.radial_f_(ut[j], ur));
        }
        w.u_[n] = w.boundary(dt, g->r_max, 0.0);
        if (!w.options_.boundary_value) {
            std::size_t hi = n;
            while (hi > 0 && w.u_[hi] == cplx{} && w.u_prev_[hi] == cplx{}) {
                --hi;
            }
            w.active_ = hi;
        }
    } else {
        const auto& c = std::get<CartesianGrid2D>(grid);
        const std::size_t n = c.n;
        const bool periodic = c.boundary == Boundary::Periodic;
        std::vector<cplx> ut(n * n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                const double r = std::hypot(c.x(i), c.x(j));
                w.u_prev_[j * n + i] = data.u0(r);
                ut[j * n + i] = data.ut0(r);
            }
        }
        const auto& u0 = w.u_prev_;
        const double inv = 1.0 / (c.dx * c.dx);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                const std::size_t k = j * n + i;
                const bool edge = i == 0 || j == 0 || i == n - 1 || j == n - 1;
                if (edge && !periodic) {
                    w.u_[k] = w.boundary(dt, c.x(i), c.x(j));
                    continue;
                }
                const std::size_t ip = (i + 1) % n, im = (i + n - 1) % n;
                const std::size_t jp = (j + 1) % n, jm = (j + n - 1) % n;
                const cplx lap = (u0[j * n + ip] + u0[j * n + im] + u0[jp * n + i] + u0[jm * n + i] - 4.0 * u0[k]) * inv;
                const Gradient q{ut[k], (u0[j * n + ip] - u0[j * n + im]) / (2.0 * c.dx),
                                 (u0[jp * n + i] - u0[jm * n + i]) / (2.0 * c.dx)};
                w.u_[k] = u0[k] + dt * ut[k] + half_dt2 * (lap + w.sparse_f_(q));
            }
        }
    }
    w.t_ = dt;
    return w;
}

WaveField WaveField::from_exact(const Grid& grid, const CubicNonlinearity& f,
                                const std::function<cplx(double, double, double)>& u, SolverOptions options)
{
    WaveField w(grid, f, std::move(options));
    const double dt = grid_dt(grid);
    if (const auto* g = std::get_if<RadialGrid>(&grid)) {
        for (std::size_t j = 0; j <= g->n_r; ++j) {
            w.u_prev_[j] = u(0.0, g->r(j), 0.0);
            w.u_[j] = u(dt, g->r(j), 0.0);
        }
    } else {
        const auto& c = std::get<CartesianGrid2D>(grid);
        for (std::size_t j = 0; j < c.n; ++j) {
            for (std::size_t i = 0; i < c.n; ++i) {
                w.u_prev_[j * c.n + i] = u(0.0, c.x(i), c.x(j));
                w.u_[j * c.n + i] = u(dt, c.x(i), c.x(j));
            }
        }
    }
    w.t_ = dt;
    return w;
}

void WaveField::check_blowup(double max_norm_next, double t_next) const
{
    if (!std::isfinite(max_norm_next)) {
        throw BlowupDetected("field became non-finite", t_next);
    }
    if (max_norm_next > threshold_ * threshold_) {
        throw BlowupDetected("max|u| = " + format_double(std::sqrt(max_norm_next)) + " exceeds blow-up threshold "
                                 + format_double(threshold_),
                             t_next);
    }
}

void WaveField::step()
{
    if (radial()) {
        step_radial();
    } else {
        step_cartesian();
    }
}

void WaveField::step_radial()
{
    const auto& g = std::get<RadialGrid>(grid_);
    const std::size_t n = g.n_r;
    const double dt = g.dt;
    const double dt2 = dt * dt;
    const double inv = 1.0 / (g.dr * g.dr);
    const double inv_2dr = 0.5 / g.dr;
    const double inv_dt = 1.0 / dt;
    const double inv_2dt = 0.5 / dt;
    const bool nonlinear = !radial_f_.is_zero();
    const int passes = options_.corrector_passes;
    const std::size_t hi = std::min(active_ + 1, n - 1);
    const cplx* u = u_.data();
    const cplx* up = u_prev_.data();
    cplx* un = u_next_.data();

    double max_norm = 0.0;
    bool bad = false;
    for (std::size_t j = 0; j <= hi; ++j) {
        cplx lap;
        cplx ur;
        if (j == 0) {
            lap = 4.0 * (u[1] - u[0]) * inv;
        } else {
            const cplx d = u[j + 1] - u[j - 1];
            lap = (u[j + 1] - 2.0 * u[j] + u[j - 1] + d * inv_2j_[j]) * inv;
            ur = d * inv_2dr;
        }
        const cplx base = 2.0 * u[j] - up[j] + dt2 * lap;
        cplx next = base;
        if (nonlinear) {
            next = base + dt2 * radial_f_((u[j] - up[j]) * inv_dt, ur);
            for (int p = 0; p < passes; ++p) {
                next = base + dt2 * radial_f_((next - up[j]) * inv_2dt, ur);
            }
        }
        un[j] = next;
        const double nm = std::norm(next);
        bad = bad || std::isnan(nm);
        max_norm = std::max(max_norm, nm);
    }
    const double t_next = t_ + dt;
    un[n] = boundary(t_next, g.r_max, 0.0);
    check_blowup(bad ? std::nan("") : std::max(max_norm, std::norm(un[n])), t_next);

    std::swap(u_prev_, u_);
    std::swap(u_, u_next_);
    t_ = t_next;
    ++steps_;

    if (options_.boundary_value) {
        active_ = n - 1;
        return;
    }
    const double flush = options_.flush_below;
    std::size_t top = hi;
    while (top > 0 && component_max(u_[top]) <= flush && component_max(u_prev_[top]) <= flush) {
        u_[top] = cplx{};
        u_prev_[top] = cplx{};
        --top;
    }
    active_ = top;
    if (active_ + 2 >= n) {
        boundary_reached_ = true;
    }
}

void WaveField::step_cartesian()
{
    const auto& c = std::get<CartesianGrid2D>(grid_);
    const std::size_t n = c.n;
    const bool periodic = c.boundary == Boundary::Periodic;
    const double dt = c.dt;
    const double dt2 = dt * dt;
    const double inv = 1.0 / (c.dx * c.dx);
    const double inv_2dx = 0.5 / c.dx;
    const double inv_dt = 1.0 / dt;
    const double inv_2dt = 0.5 / dt;
    const bool nonlinear = !sparse_f_.is_zero();
    const int passes = options_.corrector_passes;
    const double t_next = t_ + dt;
    const cplx* u = u_.data();
    const cplx* up = u_prev_.data();
    cplx* un = u_next_.data();

    double max_norm = 0.0;
    double ring_norm = 0.0;
    bool bad = false;
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jp = j + 1 == n ? 0 : j + 1;
        const std::size_t jm = j == 0 ? n - 1 : j - 1;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = j * n + i;
            const bool edge = i == 0 || j == 0 || i == n - 1 || j == n - 1;
            if (edge && !periodic) {
                un[k] = boundary(t_next, c.x(i), c.x(j));
                continue;
            }
            const std::size_t ip = i + 1 == n ? 0 : i + 1;
            const std::size_t im = i == 0 ? n - 1 : i - 1;
            const cplx ue = u[j * n + ip], uw = u[j * n + im], un_ = u[jp * n + i], us = u[jm * n + i];
            const cplx base = 2.0 * u[k] - up[k] + dt2 * (ue + uw + un_ + us - 4.0 * u[k]) * inv;
            cplx next = base;
            if (nonlinear) {
                Gradient q{(u[k] - up[k]) * inv_dt, (ue - uw) * inv_2dx, (un_ - us) * inv_2dx};
                next = base + dt2 * sparse_f_(q);
                for (int p = 0; p < passes; ++p) {
                    q[0] = (next - up[k]) * inv_2dt;
                    next = base + dt2 * sparse_f_(q);
                }
            }
            un[k] = next;
            const double nm = std::norm(next);
            bad = bad || std::isnan(nm);
            max_norm = std::max(max_norm, nm);
            if (!periodic && (i == 1 || j == 1 || i == n - 2 || j == n - 2)) {
                ring_norm = std::max(ring_norm, nm);
            }
        }
    }
    check_blowup(bad ? std::nan("") : max_norm, t_next);
    if (!periodic && !options_.boundary_value && ring_norm > 1e-20 * max_norm) {
        boundary_reached_ = true;
    }
    std::swap(u_prev_, u_);
    std::swap(u_, u_next_);
    t_ = t_next;
    ++steps_;
}

double WaveField::energy() const
{
    const double dt = grid_dt(grid_);
    const double inv_dt2 = 1.0 / (dt * dt);
    if (const auto* g = std::get_if<RadialGrid>(&grid_)) {
        const std::size_t n = g->n_r;
        const std::size_t ext = std::min(active_ + 1, n);
        const double dr = g->dr;
        double kin = 0.125 * dr * dr * std::norm(u_[0] - u_prev_[0]);
        for (std::size_t j = 1; j <= ext; ++j) {
            kin += static_cast<double>(j) * dr * dr * std::norm(u_[j] - u_prev_[j]);
        }
        double pot = 0.0;
        const std::size_t last_edge = std::min(ext, n - 1);
        for (std::size_t j = 0; j <= last_edge; ++j) {
            const cplx a = u_[j + 1] - u_[j];
            const cplx b = u_prev_[j + 1] - u_prev_[j];
            pot += (static_cast<double>(j) + 0.5) * (a.real() * b.real() + a.imag() * b.imag());
        }
        return std::numbers::pi * (kin * inv_dt2 + pot);
    }
    const auto& c = std::get<CartesianGrid2D>(grid_);
    const std::size_t n = c.n;
    const bool periodic = c.boundary == Boundary::Periodic;
    double kin = 0.0;
    double pot = 0.0;
    auto edge = [&](std::size_t k, std::size_t l) {
        const cplx a = u_[l] - u_[k];
        const cplx b = u_prev_[l] - u_prev_[k];
        pot += a.real() * b.real() + a.imag() * b.imag();
    };
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = j * n + i;
            kin += std::norm(u_[k] - u_prev_[k]);
            if (i + 1 < n) {
                edge(k, k + 1);
            } else if (periodic) {
                edge(k, j * n);
            }
            if (j + 1 < n) {
                edge(k, k + n);
            } else if (periodic) {
                edge(k, i);
            }
        }
    }
    return 0.5 * (c.dx * c.dx * kin * inv_dt2 + pot);
}

double WaveField::max_abs() const
{
    double m = 0.0;
    const std::size_t ext = radial() ? std::min(active_ + 1, u_.size() - 1) : u_.size() - 1;
    for (std::size_t k = 0; k <= ext; ++k) {
        m = std::max(m, std::norm(u_[k]));
    }
    return std::sqrt(m);
}

double WaveField::max_abs_outside(double radius) const
{
    double m = 0.0;
    if (const auto* g = std::get_if<RadialGrid>(&grid_)) {
        const std::size_t ext = std::min(active_ + 1, g->n_r);
        for (std::size_t j = 0; j <= ext; ++j) {
            if (g->r(j) > radius) {
                m = std::max(m, std::norm(u_[j]));
            }
        }
        return std::sqrt(m);
    }
    const auto& c = std::get<CartesianGrid2D>(grid_);
    for (std::size_t j = 0; j < c.n; ++j) {
        for (std::size_t i = 0; i < c.n; ++i) {
            if (std::hypot(c.x(i), c.x(j)) > radius) {
                m = std::max(m, std::norm(u_[j * c.n + i]));
            }
        }
    }
    return std::sqrt(m);
}

FieldSnapshot WaveField::snapshot() const
{
    FieldSnapshot s;
    s.radial = radial();
    s.dt = dt();
    s.t = t_ - 0.5 * s.dt;
    s.spacing = grid_spacing(grid_);
    if (const auto* g = std::get_if<RadialGrid>(&grid_)) {
        s.origin = 0.0;
        s.nx = g->n_r + 1;
        s.ny = 1;
    } else {
        const auto& c = std::get<CartesianGrid2D>(grid_);
        s.origin = -c.half_width;
        s.nx = c.n;
        s.ny = c.n;
    }
    s.u.resize(u_.size());
    s.ut.resize(u_.size());
    for (std::size_t k = 0; k < u_.size(); ++k) {
        s.u[k] = 0.5 * (u_[k] + u_prev_[k]);
        s.ut[k] = (u_[k] - u_prev_[k]) / s.dt;
    }
    return s;
}

FieldSnapshot WaveField::window(double r_lo, double r_hi) const
{
    const auto* g = std::get_if<RadialGrid>(&grid_);
    if (g == nullptr) {
        throw ConfigError("window() is only available in radial mode");
    }
    const double lo = std::max(0.0, std::floor(r_lo / g->dr));
    const double hi = std::min(static_cast<double>(g->n_r), std::ceil(r_hi / g->dr));
    FieldSnapshot s;
    s.radial = true;
    s.dt = g->dt;
    s.t = t_ - 0.5 * s.dt;
    s.spacing = g->dr;
    if (hi < lo) {
        return s;
    }
    const auto j0 = static_cast<std::size_t>(lo);
    const auto j1 = static_cast<std::size_t>(hi);
    s.origin = g->r(j0);
    s.nx = j1 - j0 + 1;
    s.u.resize(s.nx);
    s.ut.resize(s.nx);
    for (std::size_t k = 0; k < s.nx; ++k) {
        s.u[k] = 0.5 * (u_[j0 + k] + u_prev_[j0 + k]);
        s.ut[k] = (u_[j0 + k] - u_prev_[j0 + k]) / s.dt;
    }
    return s;
}

std::string to_string(RunStatus status)
{
    switch (status) {
    case RunStatus::Completed:
        return "COMPLETED";
    case RunStatus::Blowup:
        return "BLOWUP";
    case RunStatus::Error:
        return "ERROR";
    }
    return "ERROR";
}

RunStatus run_status_from_string(const std::string& text)
{
    if (text == "COMPLETED") {
        return RunStatus::Completed;
    }
    if (text == "BLOWUP") {
        return RunStatus::Blowup;
    }
    if (text == "ERROR") {
        return RunStatus::Error;
    }
    throw ConfigError("unknown run status '" + text + "'");
}

RunResult run(const InitialData& data, const Grid& grid, const CubicNonlinearity& f, const RunOptions& options,
              SolverOptions solver)
{
    if (!(options.t_end >= 0.0) || !std::isfinite(options.t_end)) {
        throw ConfigError("t_end must be nonnegative");
    }
    const double h = grid_spacing(grid);
    const double R = data.support_radius;
    if (grid_extent(grid) < options.t_end + R + 2.0 * h - 1e-9) {
        throw ConfigError("grid extent " + format_double(grid_extent(grid)) + " does not clear the light cone t_end + R + 2dx = "
                          + format_double(options.t_end + R + 2.0 * h));
    }
    WaveField field = WaveField::init(data, grid, f, std::move(solver));
    const double dt = field.dt();

    RunResult res;
    res.dt = dt;
    res.spacing = h;
    res.support_radius = R;

    if (options.t_end == 0.0) {
        FieldSnapshot s = field.snapshot();
        s.t = 0.0;
        s.u = field.previous();
        for (std::size_t k = 0; k < s.ut.size(); ++k) {
            double r = 0.0;
            if (s.radial) {
                r = s.origin + static_cast<double>(k) * s.spacing;
            } else {
                r = std::hypot(s.origin + static_cast<double>(k % s.nx) * s.spacing,
                               s.origin + static_cast<double>(k / s.nx) * s.spacing);
            }
            s.ut[k] = data.ut0(r);
        }
        res.full_snapshots.push_back(std::move(s));
        return res;
    }

    double sigma_lo = 0.0;
    double sigma_hi = 0.0;
    if (!options.ray_sigmas.empty()) {
        sigma_lo = *std::min_element(options.ray_sigmas.begin(), options.ray_sigmas.end());
        sigma_hi = *std::max_element(options.ray_sigmas.begin(), options.ray_sigmas.end());
    }
    const double halfwidth = options.ray_halfwidth > 0.0 ? options.ray_halfwidth : 4.0 * h;
    std::vector<double> snap_times = options.snapshot_times;
    std::sort(snap_times.begin(), snap_times.end());
    std::size_t next_snap = 0;
    double next_ray = options.ray_sigmas.empty() ? kInf : next_ray_time(options, 0.0);
    double last_energy_t = -kInf;

    auto diagnostics = [&]() {
        const double th = field.time() - 0.5 * dt;
        res.energy_times.push_back(th);
        res.energy_values.push_back(field.energy());
        last_energy_t = field.time();
        const double m = field.max_abs();
        if (m > 0.0) {
            res.support_leak = std::max(res.support_leak, field.max_abs_outside(field.time() + R + 2.0 * h) / m);
        }
    };
    auto observe = [&]() {
        const double th = field.time() - 0.5 * dt;
        // The half level nearest the scheduled time counts, so t_end itself is sampled.
        if (th >= next_ray - 0.5 * dt) {
            if (field.radial()) {
                res.ray_snapshots.push_back(field.window(th + sigma_lo - halfwidth, th + sigma_hi + halfwidth));
            } else {
                res.ray_snapshots.push_back(field.snapshot());
            }
            next_ray = next_ray_time(options, std::max(th, next_ray));
        }
        while (next_snap < snap_times.size() && th >= snap_times[next_snap] - 0.5 * dt) {
            res.full_snapshots.push_back(field.snapshot());
            ++next_snap;
        }
    };

    diagnostics();
    observe();
    try {
        while (field.time() < options.t_end - 0.5 * dt) {
            field.step();
            if (options.energy_every <= 0.0 || field.time() - last_energy_t >= options.energy_every - 1e-9 * dt) {
                diagnostics();
            }
            observe();
            if (options.on_step) {
                options.on_step(field);
            }
        }
        if (last_energy_t != field.time()) {
            diagnostics();
        }
    } catch (const BlowupDetected& e) {
        res.status = RunStatus::Blowup;
        res.blowup_time = e.time();
        res.message = e.what();
    } catch (const Error& e) {
        res.status = RunStatus::Error;
        res.message = e.what();
    }
    res.t_final = field.time();
    res.steps = field.steps();
    res.boundary_reached = field.boundary_reached();
    return res;
}

} // namespace nlwave
