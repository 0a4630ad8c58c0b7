#pragma once

// Experiment driver: key-value run configs, named presets, eps sweeps, per-run artifact
// directories, and the ODE property battery.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlwave/asymptotics.hpp"
#include "nlwave/fitting.hpp"
#include "nlwave/nonlinearity.hpp"
#include "nlwave/wave_solver.hpp"

namespace nlwave {

inline constexpr int kConfigSchemaVersion = 1;

enum class Mode { Radial, Cartesian };

struct ExperimentConfig {
    int schema_version = kConfigSchemaVersion;
    std::string name = "experiment";
    /// Preset name understood by presets::by_name, or "inline" with `coefficients` set.
    std::string nonlinearity = "dissipative";
    std::map<std::string, cplx> coefficients; ///< keys p000 .. p222, inline only
    Mode mode = Mode::Radial;
    BumpShape shape = BumpShape::Polynomial;
    double support_radius = 1.0;
    cplx f_amplitude{1.0, 0.0};
    cplx g_amplitude{0.0, 0.0};
    double spacing = 1.0 / 32.0;
    double cfl = kDefaultRadialCfl;
    std::vector<double> eps;
    double t_end = 10.0;
    double energy_every = 1.0;
    std::vector<double> ray_sigmas;
    double ray_omega = 0.0;
    int ray_per_decade = 40;
    std::vector<double> snapshot_times;
    int corrector_passes = 1;

    // Analyses; each enabled one contributes a PASS/FAIL verdict.
    RunStatus expect_status = RunStatus::Completed;
    bool energy_monotone = false;   ///< energy non-increasing
    double energy_drift_tol = 0.0;  ///< max relative drift, 0 = off
    bool energy_fit = false;        ///< fit_energy_decay
    double energy_fit_max_slope = 0.0; ///< 0: use the theory threshold with kEnergySlack
    double mu = 0.05;
    bool pointwise_fit = false;
    bool expect_pointwise_fail = false; ///< negative control
    bool phase_fit = false;
    bool profile_fit = false;
    double t_match = 0.0; ///< 0: t_end / 2
    double support_leak_tol = 0.0; ///< 0 = off

    std::filesystem::path output_dir = "nlwave-out";
    std::uint64_t seed = 1;

    /// Throws ConfigError: empty or non-positive eps, unknown preset, |sigma| > R, bad grid.
    void validate() const;
    [[nodiscard]] CubicNonlinearity build_nonlinearity() const;
    [[nodiscard]] Grid build_grid() const;
    [[nodiscard]] InitialData initial_data(double eps_value) const;
};

/// Lines `key = value`; `#` starts a comment; lists are comma separated; complex values
/// are `re, im`. Throws ConfigError on unknown keys, bad values or a schema mismatch.
[[nodiscard]] ExperimentConfig parse_config(const std::string& text);
[[nodiscard]] std::string serialize_config(const ExperimentConfig& config);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

/// dissipative-radial-default, rotational-radial-default, free-radial-default,
/// null-form-radial-default, antidissipative-blowup, dissipative-blowup-control.
[[nodiscard]] ExperimentConfig preset_config(const std::string& name);
[[nodiscard]] std::vector<std::string> preset_names();

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunArtifact {
    ExperimentConfig config; ///< with eps reduced to this run's value
    double eps = 0.0;
    RunResult result;
    std::vector<RaySample> rays;
    std::map<std::string, DecayFit> fits;
    std::vector<Verdict> verdicts;
    std::filesystem::path directory;

    [[nodiscard]] bool all_pass() const;
};

/// Runs the analyses enabled in artifact.config on artifact.result and fills rays, fits
/// and verdicts. Analysis errors become failing verdicts carrying the message.
void analyze(RunArtifact& artifact);

struct RunnerOptions {
    int threads = 1;
    bool deterministic = false; ///< forces one thread
    bool persist = true;
};

/// One solver run per eps entry, concurrently up to options.threads; each writes its own
/// directory output_dir/<name>-eps<eps>. Results are in eps-list order.
[[nodiscard]] std::vector<RunArtifact> run_experiment(const ExperimentConfig& config,
                                                      const RunnerOptions& options = {});
[[nodiscard]] std::vector<RunArtifact> run_experiment(const std::filesystem::path& config_path,
                                                      const RunnerOptions& options = {});

enum class Series { Energy, Ray, Fits, Status };

/// Byte-stable text for an artifact: Energy -> CSV (t, energy_sq); Ray -> ray_csv of
/// rays[ray_index]; Fits -> JSON of the fit reports; Status -> JSON status record.
[[nodiscard]] std::string emit_series(const RunArtifact& artifact, Series which, std::size_t ray_index = 0);

/// Writes config.txt, status.json, energy.csv, ray_<k>.csv, fits.json and the snapshot
/// pair snapshots.bin / snapshots.json into dir. Throws IOError.
void persist_artifact(const RunArtifact& artifact, const std::filesystem::path& dir);
/// Reads back what persist_artifact wrote (config, status, energy trace, snapshots).
[[nodiscard]] RunArtifact load_artifact(const std::filesystem::path& dir);

/// Snapshots as little-endian float64 pairs (re, im) of u then u_t, back to back, with a
/// JSON sidecar listing t, origin, spacing, dt, nx, ny, radial and byte offsets.
void write_snapshots(const std::vector<FieldSnapshot>& snaps, const std::filesystem::path& bin,
                     const std::filesystem::path& sidecar);
[[nodiscard]] std::vector<FieldSnapshot> read_snapshots(const std::filesystem::path& bin,
                                                        const std::filesystem::path& sidecar);

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;     ///< measured quantity
    double threshold = 0.0; ///< acceptance bound it is compared against
    std::string detail;
    double seconds = 0.0;
};

/// Randomized profile/char ODE battery: explicit vs integrated profile, closed-form phase
/// vs quadrature, z vs xi/sqrt(eta) reconstruction, and the forced decay-rate fit.
[[nodiscard]] std::vector<CheckResult> run_ode_suite(std::uint64_t seed);

[[nodiscard]] nlohmann::json to_json(const CheckResult& check);
[[nodiscard]] nlohmann::json to_json(const Verdict& verdict);

} // namespace nlwave
