#include "nlwave/cli_runner.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <functional>
#include <set>
#include <thread>

#include "nlwave/errors.hpp"
#include "nlwave/text_io.hpp"

namespace nlwave {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

bool parse_bool(const std::string& text, const std::string& key)
{
    if (text == "true" || text == "yes" || text == "1") {
        return true;
    }
    if (text == "false" || text == "no" || text == "0") {
        return false;
    }
    throw ConfigError("'" + key + "' expects true or false, got '" + text + "'");
}

std::vector<double> parse_list(const std::string& text, const std::string& key)
{
    std::vector<double> out;
    if (trim(text).empty()) {
        return out;
    }
    for (const auto& item : split(text, ',')) {
        out.push_back(parse_double(trim(item), key));
    }
    return out;
}

cplx parse_complex(const std::string& text, const std::string& key)
{
    const auto v = parse_list(text, key);
    if (v.size() == 1) {
        return {v[0], 0.0};
    }
    if (v.size() == 2) {
        return {v[0], v[1]};
    }
    throw ConfigError("'" + key + "' expects 're' or 're, im'");
}

int parse_int(const std::string& text, const std::string& key)
{
    const double v = parse_double(text, key);
    if (v != std::floor(v) || std::abs(v) > 1e9) {
        throw ConfigError("'" + key + "' expects an integer, got '" + text + "'");
    }
    return static_cast<int>(v);
}

std::string join(const std::vector<double>& values)
{
    std::string out;
    for (std::size_t k = 0; k < values.size(); ++k) {
        out += (k ? ", " : "") + format_double(values[k]);
    }
    return out;
}

std::string complex_text(cplx z) { return format_double(z.real()) + ", " + format_double(z.imag()); }

bool is_coefficient_key(const std::string& key)
{
    return key.size() == 4 && key[0] == 'p' && key[1] >= '0' && key[1] <= '2' && key[2] >= '0' && key[2] <= '2'
        && key[3] >= '0' && key[3] <= '2';
}

std::string mode_name(Mode m) { return m == Mode::Radial ? "radial" : "cartesian"; }

std::string shape_name(BumpShape s) { return s == BumpShape::Polynomial ? "polynomial" : "smooth"; }

nlohmann::json number_or_null(double v)
{
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

std::string sigma_tag(double sigma) { return "sigma=" + format_double(sigma); }

} // namespace

void ExperimentConfig::validate() const
{
    if (schema_version != kConfigSchemaVersion) {
        throw ConfigError("unsupported schema_version " + std::to_string(schema_version));
    }
    if (eps.empty()) {
        throw ConfigError("eps list is empty");
    }
    for (double e : eps) {
        if (!(e > 0.0) || !std::isfinite(e)) {
            throw ConfigError("eps values must be positive and finite");
        }
    }
    if (!(support_radius > 0.0) || !std::isfinite(support_radius)) {
        throw ConfigError("support_radius must be positive");
    }
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw ConfigError("spacing must be positive");
    }
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
        throw ConfigError("t_end must be nonnegative");
    }
    if (!(energy_every >= 0.0)) {
        throw ConfigError("energy_every must be nonnegative");
    }
    if (ray_per_decade < 1) {
        throw ConfigError("ray_per_decade must be at least 1");
    }
    if (corrector_passes < 0) {
        throw ConfigError("corrector_passes must be nonnegative");
    }
    if (!(mu > 0.0 && mu < 0.1)) {
        throw ConfigError("mu must lie in (0, 0.1)");
    }
    if (!(t_match >= 0.0) || !(energy_drift_tol >= 0.0) || !(support_leak_tol >= 0.0)) {
        throw ConfigError("t_match and tolerances must be nonnegative");
    }
    if (!finite(f_amplitude) || !finite(g_amplitude)) {
        throw ConfigError("amplitudes must be finite");
    }
    for (double s : ray_sigmas) {
        if (!(std::abs(s) <= support_radius)) {
            throw ConfigError("ray sigma " + format_double(s) + " exceeds the support radius");
        }
    }
    if (nonlinearity != "inline" && !coefficients.empty()) {
        throw ConfigError("coefficients given but nonlinearity is not 'inline'");
    }
    const CubicNonlinearity f = build_nonlinearity();
    if (mode == Mode::Radial && !is_radially_compatible(f)) {
        throw ConfigError("nonlinearity is not compatible with radial symmetry");
    }
    (void)build_grid();
}

CubicNonlinearity ExperimentConfig::build_nonlinearity() const
{
    if (nonlinearity != "inline") {
        return presets::by_name(nonlinearity);
    }
    CubicNonlinearity f;
    for (const auto& [key, value] : coefficients) {
        if (!is_coefficient_key(key)) {
            throw ConfigError("bad coefficient key '" + key + "'");
        }
        f.set_coefficient(key[1] - '0', key[2] - '0', key[3] - '0', value);
    }
    return f;
}

Grid ExperimentConfig::build_grid() const
{
    if (mode == Mode::Radial) {
        return RadialGrid::for_run(t_end, support_radius, spacing, cfl);
    }
    return CartesianGrid2D::for_run(t_end, support_radius, spacing, cfl);
}

InitialData ExperimentConfig::initial_data(double eps_value) const
{
    InitialData d;
    d.shape = shape;
    d.support_radius = support_radius;
    d.eps = eps_value;
    d.f_amplitude = f_amplitude;
    d.g_amplitude = g_amplitude;
    return d;
}

ExperimentConfig parse_config(const std::string& text)
{
    ExperimentConfig c;
    std::set<std::string> seen;
    bool have_schema = false;
    int line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        if (key == "schema_version") {
            c.schema_version = parse_int(value, key);
            have_schema = true;
        } else if (key == "name") {
            c.name = value;
        } else if (key == "nonlinearity") {
            c.nonlinearity = value;
        } else if (is_coefficient_key(key)) {
            c.coefficients[key] = parse_complex(value, key);
        } else if (key == "mode") {
            if (value == "radial") {
                c.mode = Mode::Radial;
            } else if (value == "cartesian") {
                c.mode = Mode::Cartesian;
            } else {
                throw ConfigError("mode must be radial or cartesian");
            }
        } else if (key == "shape") {
            if (value == "polynomial") {
                c.shape = BumpShape::Polynomial;
            } else if (value == "smooth") {
                c.shape = BumpShape::Smooth;
            } else {
                throw ConfigError("shape must be polynomial or smooth");
            }
        } else if (key == "support_radius") {
            c.support_radius = parse_double(value, key);
        } else if (key == "f_amplitude") {
            c.f_amplitude = parse_complex(value, key);
        } else if (key == "g_amplitude") {
            c.g_amplitude = parse_complex(value, key);
        } else if (key == "spacing") {
            c.spacing = parse_double(value, key);
        } else if (key == "cfl") {
            c.cfl = parse_double(value, key);
        } else if (key == "eps") {
            c.eps = parse_list(value, key);
        } else if (key == "t_end") {
            c.t_end = parse_double(value, key);
        } else if (key == "energy_every") {
            c.energy_every = parse_double(value, key);
        } else if (key == "ray_sigmas") {
            c.ray_sigmas = parse_list(value, key);
        } else if (key == "ray_omega") {
            c.ray_omega = parse_double(value, key);
        } else if (key == "ray_per_decade") {
            c.ray_per_decade = parse_int(value, key);
        } else if (key == "snapshot_times") {
            c.snapshot_times = parse_list(value, key);
        } else if (key == "corrector_passes") {
            c.corrector_passes = parse_int(value, key);
        } else if (key == "expect_status") {
            c.expect_status = run_status_from_string(value);
        } else if (key == "energy_monotone") {
            c.energy_monotone = parse_bool(value, key);
        } else if (key == "energy_drift_tol") {
            c.energy_drift_tol = parse_double(value, key);
        } else if (key == "energy_fit") {
            c.energy_fit = parse_bool(value, key);
        } else if (key == "energy_fit_max_slope") {
            c.energy_fit_max_slope = parse_double(value, key);
        } else if (key == "mu") {
            c.mu = parse_double(value, key);
        } else if (key == "pointwise_fit") {
            c.pointwise_fit = parse_bool(value, key);
        } else if (key == "expect_pointwise_fail") {
            c.expect_pointwise_fail = parse_bool(value, key);
        } else if (key == "phase_fit") {
            c.phase_fit = parse_bool(value, key);
        } else if (key == "profile_fit") {
            c.profile_fit = parse_bool(value, key);
        } else if (key == "t_match") {
            c.t_match = parse_double(value, key);
        } else if (key == "support_leak_tol") {
            c.support_leak_tol = parse_double(value, key);
        } else if (key == "output_dir") {
            c.output_dir = value;
        } else if (key == "seed") {
            const double s = parse_double(value, key);
            if (s < 0.0 || s != std::floor(s)) {
                throw ConfigError("seed must be a nonnegative integer");
            }
            c.seed = static_cast<std::uint64_t>(s);
        } else {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (!have_schema) {
        throw ConfigError("config lacks schema_version");
    }
    if (c.schema_version != kConfigSchemaVersion) {
        throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
    }
    return c;
}

std::string serialize_config(const ExperimentConfig& c)
{
    std::string out;
    auto put = [&out](const std::string& key, const std::string& value) { out += key + " = " + value + "\n"; };
    auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
    put("schema_version", std::to_string(c.schema_version));
    put("name", c.name);
    put("nonlinearity", c.nonlinearity);
    for (const auto& [key, value] : c.coefficients) {
        put(key, complex_text(value));
    }
    put("mode", mode_name(c.mode));
    put("shape", shape_name(c.shape));
    put("support_radius", format_double(c.support_radius));
    put("f_amplitude", complex_text(c.f_amplitude));
    put("g_amplitude", complex_text(c.g_amplitude));
    put("spacing", format_double(c.spacing));
    put("cfl", format_double(c.cfl));
    put("eps", join(c.eps));
    put("t_end", format_double(c.t_end));
    put("energy_every", format_double(c.energy_every));
    put("ray_sigmas", join(c.ray_sigmas));
    put("ray_omega", format_double(c.ray_omega));
    put("ray_per_decade", std::to_string(c.ray_per_decade));
    put("snapshot_times", join(c.snapshot_times));
    put("corrector_passes", std::to_string(c.corrector_passes));
    put("expect_status", to_string(c.expect_status));
    put("energy_monotone", flag(c.energy_monotone));
    put("energy_drift_tol", format_double(c.energy_drift_tol));
    put("energy_fit", flag(c.energy_fit));
    put("energy_fit_max_slope", format_double(c.energy_fit_max_slope));
    put("mu", format_double(c.mu));
    put("pointwise_fit", flag(c.pointwise_fit));
    put("expect_pointwise_fail", flag(c.expect_pointwise_fail));
    put("phase_fit", flag(c.phase_fit));
    put("profile_fit", flag(c.profile_fit));
    put("t_match", format_double(c.t_match));
    put("support_leak_tol", format_double(c.support_leak_tol));
    put("output_dir", c.output_dir.string());
    put("seed", std::to_string(c.seed));
    return out;
}

ExperimentConfig load_config(const std::filesystem::path& path) { return parse_config(read_text_file(path)); }

ExperimentConfig preset_config(const std::string& name)
{
    // Long radial runs: a wide support keeps leapfrog dispersion along rays small at
    // t ~ 1e4 (the error grows like t h^2 / R^3); amplitude scales like sqrt(R).
    ExperimentConfig c;
    c.name = name;
    c.support_radius = 32.0;
    c.f_amplitude = {17.0, 0.0};
    c.spacing = 0.125;
    c.cfl = 0.9;
    c.eps = {0.3};
    c.t_end = 1e4;
    c.ray_sigmas = {0.0};
    if (name == "dissipative-radial-default") {
        c.nonlinearity = "dissipative";
        c.energy_monotone = true;
        c.energy_fit = true;
        c.pointwise_fit = true;
        c.profile_fit = true;
    } else if (name == "rotational-radial-default") {
        c.nonlinearity = "rotational";
        c.energy_drift_tol = 1e-4;
        c.phase_fit = true;
        c.profile_fit = true;
    } else if (name == "free-radial-default") {
        c.nonlinearity = "free";
        c.energy_drift_tol = 1e-10;
        c.pointwise_fit = true;
        c.expect_pointwise_fail = true;
    } else if (name == "null-form-radial-default") {
        c.nonlinearity = "null-form-a:0";
        c.t_end = 1e3;
        c.profile_fit = true;
    } else if (name == "antidissipative-blowup" || name == "dissipative-blowup-control") {
        const bool blow = name == "antidissipative-blowup";
        c.nonlinearity = blow ? "antidissipative" : "dissipative";
        c.support_radius = 1.0;
        c.f_amplitude = {1.0, 0.0};
        c.spacing = 1.0 / 32.0;
        c.cfl = kDefaultRadialCfl;
        c.eps = {0.5};
        c.t_end = 10.0;
        c.energy_every = 0.1;
        c.ray_sigmas.clear();
        c.expect_status = blow ? RunStatus::Blowup : RunStatus::Completed;
        c.energy_monotone = !blow;
    } else {
        throw ConfigError("unknown experiment preset '" + name + "'");
    }
    c.output_dir = "nlwave-out";
    return c;
}

std::vector<std::string> preset_names()
{
    return {"dissipative-radial-default", "rotational-radial-default", "free-radial-default",
            "null-form-radial-default",   "antidissipative-blowup",    "dissipative-blowup-control"};
}

bool RunArtifact::all_pass() const
{
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

void analyze(RunArtifact& a)
{
    const ExperimentConfig& c = a.config;
    const RunResult& r = a.result;
    a.rays.clear();
    a.fits.clear();
    a.verdicts.clear();

    std::string status_detail = to_string(r.status);
    if (r.status == RunStatus::Blowup) {
        status_detail += " at t=" + format_double(r.blowup_time);
    }
    if (!r.message.empty()) {
        status_detail += ": " + r.message;
    }
    a.verdicts.push_back({"status", r.status == c.expect_status,
                          "expected " + to_string(c.expect_status) + ", got " + status_detail});
    if (r.status != RunStatus::Completed) {
        return;
    }

    // Each analysis runs on its own; a throwing one fails with the message attached.
    auto guarded = [&a](const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const std::exception& e) {
            a.verdicts.push_back({name, false, e.what()});
        }
    };

    const EnergyTrace trace = EnergyTrace::from_run(r);
    if (c.energy_monotone) {
        a.verdicts.push_back({"energy_non_increasing", trace.non_increasing(), ""});
    }
    if (c.energy_drift_tol > 0.0) {
        const double drift = trace.max_relative_drift();
        a.verdicts.push_back({"energy_drift", drift <= c.energy_drift_tol,
                              "max relative drift " + format_double(drift) + " vs "
                                  + format_double(c.energy_drift_tol)});
    }
    if (c.energy_fit) {
        guarded("energy_decay", [&] {
            const double theory = -(1.0 - 2.0 * c.mu) / (2.0 - 2.0 * c.mu);
            const double slack = c.energy_fit_max_slope != 0.0 ? c.energy_fit_max_slope - theory : kEnergySlack;
            DecayFit fit = fit_energy_decay(trace, c.mu, a.eps, slack);
            a.verdicts.push_back({"energy_decay", fit.pass,
                                  "slope " + format_double(fit.slope) + " vs " + format_double(fit.threshold)});
            a.fits["energy_decay"] = std::move(fit);
        });
    }
    if (c.support_leak_tol > 0.0) {
        a.verdicts.push_back({"finite_propagation", r.support_leak <= c.support_leak_tol,
                              "leak " + format_double(r.support_leak) + " vs " + format_double(c.support_leak_tol)});
    }

    // Rays are traced whenever sigmas are configured so they can be emitted; fits are opt-in.
    const CubicNonlinearity f = c.build_nonlinearity();
    const cplx f_hat = null_trace(f, c.ray_omega);
    const double t_match = c.t_match > 0.0 ? c.t_match : 0.5 * r.t_final;
    for (double sigma : c.ray_sigmas) {
        const std::string tag = sigma_tag(sigma);
        RaySample ray;
        try {
            ray = extract_ray(r, sigma, c.ray_omega);
        } catch (const std::exception& e) {
            a.verdicts.push_back({"ray " + tag, false, e.what()});
            continue;
        }
        if (c.pointwise_fit) {
            guarded("pointwise " + tag, [&] {
                DecayFit fit = fit_pointwise_decay(ray);
                const bool ok = c.expect_pointwise_fail ? !fit.pass : fit.pass;
                a.verdicts.push_back({"pointwise " + tag, ok,
                                      std::string(c.expect_pointwise_fail ? "negative control, " : "") + "R^2 "
                                          + format_double(fit.r_squared) + ", slope " + format_double(fit.slope)});
                a.fits["pointwise " + tag] = std::move(fit);
            });
        }
        if (c.phase_fit || c.profile_fit) {
            guarded("profile_match " + tag, [&] {
                const cplx p0 = fit_profile_p0(ray, f_hat, t_match);
                if (c.phase_fit) {
                    DecayFit fit = fit_phase_slope(ray, p0, f_hat);
                    fit.extra["t_match"] = t_match;
                    a.verdicts.push_back({"phase " + tag, fit.pass,
                                          "slope " + format_double(fit.slope) + " vs "
                                              + format_double(fit.threshold)});
                    a.fits["phase " + tag] = std::move(fit);
                }
                if (c.profile_fit) {
                    // Residual against the late-matched profile, before the matching point.
                    const FitWindow window{10.0 * ray_start_time(sigma), 0.25 * t_match};
                    DecayFit fit = verify_profile_convergence(ray, p0, f_hat, window);
                    fit.extra["t_match"] = t_match;
                    fit.extra["abs_p0"] = std::abs(p0);
                    a.verdicts.push_back({"profile " + tag, fit.pass, "slope " + format_double(fit.slope)});
                    a.fits["profile " + tag] = std::move(fit);
                }
            });
        }
        a.rays.push_back(std::move(ray));
    }
}

namespace {

RunArtifact run_single(const ExperimentConfig& base, double eps, bool persist)
{
    RunArtifact a;
    a.config = base;
    a.config.eps = {eps};
    a.eps = eps;
    const ExperimentConfig& c = a.config;

    RunOptions opt;
    opt.t_end = c.t_end;
    opt.energy_every = c.energy_every;
    opt.ray_sigmas = c.ray_sigmas;
    opt.ray_per_decade = c.ray_per_decade;
    opt.snapshot_times = c.snapshot_times;
    SolverOptions solver;
    solver.corrector_passes = c.corrector_passes;
    a.result = run(c.initial_data(eps), c.build_grid(), c.build_nonlinearity(), opt, solver);
    analyze(a);
    if (persist) {
        a.directory = c.output_dir / (c.name + "-eps" + format_double(eps));
        persist_artifact(a, a.directory);
    }
    return a;
}

} // namespace

std::vector<RunArtifact> run_experiment(const ExperimentConfig& config, const RunnerOptions& options)
{
    config.validate();
    const std::size_t n = config.eps.size();
    std::vector<RunArtifact> out(n);
    std::vector<std::exception_ptr> errors(n);
    const std::size_t workers =
        options.deterministic ? 1 : std::clamp<std::size_t>(static_cast<std::size_t>(std::max(options.threads, 1)), 1, n);

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = run_single(config, config.eps[i], options.persist);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

std::vector<RunArtifact> run_experiment(const std::filesystem::path& config_path, const RunnerOptions& options)
{
    return run_experiment(load_config(config_path), options);
}

nlohmann::json to_json(const Verdict& v) { return {{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}}; }

nlohmann::json to_json(const CheckResult& c)
{
    return {{"name", c.name},           {"pass", c.pass},     {"value", number_or_null(c.value)},
            {"threshold", c.threshold}, {"detail", c.detail}, {"seconds", c.seconds}};
}

std::string emit_series(const RunArtifact& a, Series which, std::size_t ray_index)
{
    switch (which) {
    case Series::Energy: {
        CsvTable table;
        table.header = {"t", "energy_sq"};
        for (std::size_t k = 0; k < a.result.energy_times.size(); ++k) {
            table.rows.push_back({a.result.energy_times[k], a.result.energy_values[k]});
        }
        return table.to_string();
    }
    case Series::Ray:
        if (ray_index >= a.rays.size()) {
            throw IOError("no ray with index " + std::to_string(ray_index));
        }
        return ray_csv(a.rays[ray_index]);
    case Series::Fits: {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [name, fit] : a.fits) {
            j[name] = to_json(fit);
        }
        return j.dump(2) + "\n";
    }
    case Series::Status: {
        const RunResult& r = a.result;
        nlohmann::json verdicts = nlohmann::json::array();
        for (const auto& v : a.verdicts) {
            verdicts.push_back(to_json(v));
        }
        nlohmann::json j = {
            {"name", a.config.name},
            {"eps", a.eps},
            {"status", to_string(r.status)},
            {"blowup_time", number_or_null(r.blowup_time)},
            {"message", r.message},
            {"t_final", r.t_final},
            {"steps", r.steps},
            {"dt", r.dt},
            {"spacing", r.spacing},
            {"support_radius", r.support_radius},
            {"support_leak", r.support_leak},
            {"boundary_reached", r.boundary_reached},
            {"verdicts", verdicts},
            {"all_pass", a.all_pass()},
        };
        return j.dump(2) + "\n";
    }
    }
    throw IOError("unknown series");
}

void write_snapshots(const std::vector<FieldSnapshot>& snaps, const std::filesystem::path& bin,
                     const std::filesystem::path& sidecar)
{
    std::ofstream os(bin, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw IOError("cannot open " + bin.string() + " for writing");
    }
    nlohmann::json index = nlohmann::json::array();
    std::uint64_t offset = 0;
    auto put = [&os, &offset](const std::vector<cplx>& values) {
        for (const cplx& z : values) {
            for (double d : {z.real(), z.imag()}) {
                std::uint64_t bits = std::bit_cast<std::uint64_t>(d);
                unsigned char bytes[8];
                for (int b = 0; b < 8; ++b) {
                    bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
                }
                os.write(reinterpret_cast<const char*>(bytes), 8);
            }
        }
        offset += 16 * values.size();
    };
    for (const auto& s : snaps) {
        index.push_back({{"t", s.t},
                         {"radial", s.radial},
                         {"origin", s.origin},
                         {"spacing", s.spacing},
                         {"dt", s.dt},
                         {"nx", s.nx},
                         {"ny", s.ny},
                         {"offset", offset}});
        put(s.u);
        put(s.ut);
    }
    if (!os) {
        throw IOError("write failed for " + bin.string());
    }
    const nlohmann::json meta = {
        {"format", "float64 little-endian (re, im) pairs; per snapshot u then u_t, row-major y then x"},
        {"endianness", "little"},
        {"count", snaps.size()},
        {"snapshots", index},
    };
    write_text_file(sidecar, meta.dump(2) + "\n");
}

std::vector<FieldSnapshot> read_snapshots(const std::filesystem::path& bin, const std::filesystem::path& sidecar)
{
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_text_file(sidecar));
    } catch (const nlohmann::json::exception& e) {
        throw IOError("bad snapshot sidecar " + sidecar.string() + ": " + e.what());
    }
    std::ifstream is(bin, std::ios::binary);
    if (!is) {
        throw IOError("cannot open " + bin.string());
    }
    std::vector<FieldSnapshot> out;
    auto get = [&is, &bin](std::size_t n) {
        std::vector<cplx> values(n);
        for (auto& z : values) {
            double parts[2];
            for (double& d : parts) {
                unsigned char bytes[8];
                is.read(reinterpret_cast<char*>(bytes), 8);
                std::uint64_t bits = 0;
                for (int b = 0; b < 8; ++b) {
                    bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
                }
                d = std::bit_cast<double>(bits);
            }
            z = {parts[0], parts[1]};
        }
        if (!is) {
            throw IOError("truncated snapshot file " + bin.string());
        }
        return values;
    };
    try {
        for (const auto& entry : meta.at("snapshots")) {
            FieldSnapshot s;
            s.t = entry.at("t").get<double>();
            s.radial = entry.at("radial").get<bool>();
            s.origin = entry.at("origin").get<double>();
            s.spacing = entry.at("spacing").get<double>();
            s.dt = entry.at("dt").get<double>();
            s.nx = entry.at("nx").get<std::size_t>();
            s.ny = entry.at("ny").get<std::size_t>();
            is.seekg(static_cast<std::streamoff>(entry.at("offset").get<std::uint64_t>()));
            s.u = get(s.nx * s.ny);
            s.ut = get(s.nx * s.ny);
            out.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IOError("bad snapshot sidecar " + sidecar.string() + ": " + e.what());
    }
    return out;
}

void persist_artifact(const RunArtifact& a, const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IOError("cannot create " + dir.string() + ": " + ec.message());
    }
    write_text_file(dir / "config.txt", serialize_config(a.config));
    write_text_file(dir / "status.json", emit_series(a, Series::Status));
    write_text_file(dir / "energy.csv", emit_series(a, Series::Energy));
    write_text_file(dir / "fits.json", emit_series(a, Series::Fits));
    for (std::size_t k = 0; k < a.rays.size(); ++k) {
        write_text_file(dir / ("ray_" + std::to_string(k) + ".csv"), emit_series(a, Series::Ray, k));
    }
    write_snapshots(a.result.ray_snapshots, dir / "rays.bin", dir / "rays.json");
    write_snapshots(a.result.full_snapshots, dir / "snapshots.bin", dir / "snapshots.json");
}

RunArtifact load_artifact(const std::filesystem::path& dir)
{
    RunArtifact a;
    a.directory = dir;
    a.config = load_config(dir / "config.txt");
    if (a.config.eps.size() != 1) {
        throw IOError("artifact config must hold exactly one eps value");
    }
    a.eps = a.config.eps.front();

    nlohmann::json status;
    try {
        status = nlohmann::json::parse(read_text_file(dir / "status.json"));
        RunResult& r = a.result;
        r.status = run_status_from_string(status.at("status").get<std::string>());
        const auto& bt = status.at("blowup_time");
        r.blowup_time = bt.is_null() ? std::nan("") : bt.get<double>();
        r.message = status.at("message").get<std::string>();
        r.t_final = status.at("t_final").get<double>();
        r.steps = status.at("steps").get<std::size_t>();
        r.dt = status.at("dt").get<double>();
        r.spacing = status.at("spacing").get<double>();
        r.support_radius = status.at("support_radius").get<double>();
        r.support_leak = status.at("support_leak").get<double>();
        r.boundary_reached = status.at("boundary_reached").get<bool>();
        for (const auto& v : status.at("verdicts")) {
            a.verdicts.push_back({v.at("name").get<std::string>(), v.at("pass").get<bool>(),
                                  v.at("detail").get<std::string>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw IOError("bad status.json in " + dir.string() + ": " + e.what());
    }

    const CsvTable energy = CsvTable::parse(read_text_file(dir / "energy.csv"));
    const std::size_t ct = energy.column("t");
    const std::size_t ce = energy.column("energy_sq");
    for (const auto& row : energy.rows) {
        a.result.energy_times.push_back(row[ct]);
        a.result.energy_values.push_back(row[ce]);
    }
    a.result.ray_snapshots = read_snapshots(dir / "rays.bin", dir / "rays.json");
    a.result.full_snapshots = read_snapshots(dir / "snapshots.bin", dir / "snapshots.json");

    try {
        const auto fits = nlohmann::json::parse(read_text_file(dir / "fits.json"));
        for (const auto& [name, j] : fits.items()) {
            a.fits[name] = decay_fit_from_json(j);
        }
    } catch (const nlohmann::json::exception& e) {
        throw IOError("bad fits.json in " + dir.string() + ": " + e.what());
    }
    return a;
}

} // namespace nlwave
