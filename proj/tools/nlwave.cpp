// nlwave: run, analyze and report wave experiments; classify nonlinearities; ODE battery.
// Exit status 0 means every enabled criterion passed, 1 a failure, 2 an error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nlwave/cli_runner.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/nonlinearity.hpp"
#include "nlwave/text_io.hpp"

namespace fs = std::filesystem;
using namespace nlwave;

namespace {

void print_verdicts(const RunArtifact& a)
{
    std::cout << a.config.name << " eps=" << format_double(a.eps) << " " << to_string(a.result.status);
    if (!a.directory.empty()) {
        std::cout << " -> " << a.directory.string();
    }
    std::cout << "\n";
    for (const auto& v : a.verdicts) {
        std::cout << "  " << (v.pass ? "PASS" : "FAIL") << " " << v.name;
        if (!v.detail.empty()) {
            std::cout << ": " << v.detail;
        }
        std::cout << "\n";
    }
}

ExperimentConfig config_from_argument(const std::string& arg)
{
    if (fs::exists(arg)) {
        return load_config(arg);
    }
    for (const auto& name : preset_names()) {
        if (name == arg) {
            return preset_config(name);
        }
    }
    throw ConfigError("'" + arg + "' is neither a config file nor a preset");
}

CubicNonlinearity nonlinearity_from_file(const fs::path& path)
{
    const std::string text = trim(read_text_file(path));
    if (!text.empty() && text.front() == '{') {
        try {
            return nonlinearity_from_json(nlohmann::json::parse(text));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("bad nonlinearity JSON: ") + e.what());
        }
    }
    return presets::by_name(text);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Semilinear wave experiments with cubic derivative nonlinearities"};
    app.require_subcommand(1);
    int threads = 1;
    bool deterministic = false;
    std::string out_dir;
    app.add_option("--threads", threads, "Concurrent runs in an eps sweep")->check(CLI::PositiveNumber);
    app.add_flag("--deterministic", deterministic, "Single-threaded reference mode");
    app.add_option("--out", out_dir, "Output directory (overrides the config)");
    app.fallthrough();

    std::string config_arg;
    auto* run_cmd = app.add_subcommand("run", "Run a config file or a named preset");
    run_cmd->add_option("config", config_arg, "Config path or preset name")->required();

    std::string artifact_dir;
    auto* analyze_cmd = app.add_subcommand("analyze", "Recompute fits for a stored run");
    analyze_cmd->add_option("artifact", artifact_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

    std::string report_dir;
    auto* report_cmd = app.add_subcommand("report", "Summarize a stored run");
    report_cmd->add_option("artifact", report_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

    std::string nl_file;
    auto* classify_cmd = app.add_subcommand("classify", "Classify a nonlinearity (JSON tensor or preset name)");
    classify_cmd->add_option("file", nl_file, "Nonlinearity file")->required()->check(CLI::ExistingFile);

    std::uint64_t seed = 1;
    auto* suite_cmd = app.add_subcommand("ode-suite", "Randomized profile and characteristic ODE checks");
    suite_cmd->add_option("--seed", seed, "Random seed");

    std::string preset_name;
    auto* preset_cmd = app.add_subcommand("preset", "Print the config of a named preset");
    preset_cmd->add_option("name", preset_name, "Preset name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            ExperimentConfig cfg = config_from_argument(config_arg);
            if (!out_dir.empty()) {
                cfg.output_dir = out_dir;
            }
            RunnerOptions opt;
            opt.threads = threads;
            opt.deterministic = deterministic;
            bool ok = true;
            for (const auto& a : run_experiment(cfg, opt)) {
                print_verdicts(a);
                ok = ok && a.all_pass();
            }
            return ok ? 0 : 1;
        }
        if (*analyze_cmd) {
            RunArtifact a = load_artifact(artifact_dir);
            analyze(a);
            const fs::path target = out_dir.empty() ? fs::path(artifact_dir) : fs::path(out_dir);
            persist_artifact(a, target);
            a.directory = target;
            print_verdicts(a);
            return a.all_pass() ? 0 : 1;
        }
        if (*report_cmd) {
            const RunArtifact a = load_artifact(report_dir);
            print_verdicts(a);
            for (const auto& [name, fit] : a.fits) {
                std::cout << "  fit " << name << ": slope " << format_double(fit.slope) << ", R^2 "
                          << format_double(fit.r_squared) << ", window [" << format_double(fit.t_lo) << ", "
                          << format_double(fit.t_hi) << "]" << (fit.degenerate ? " (degenerate)" : "") << "\n";
            }
            return a.all_pass() ? 0 : 1;
        }
        if (*classify_cmd) {
            const CubicNonlinearity f = nonlinearity_from_file(nl_file);
            nlohmann::json j = to_json(classify(f));
            j["radially_compatible"] = is_radially_compatible(f);
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (*suite_cmd) {
            bool ok = true;
            for (const auto& c : run_ode_suite(seed)) {
                std::printf("%s %s: %.3e vs %.3e (%.2fs) %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                            c.threshold, c.seconds, c.detail.c_str());
                ok = ok && c.pass;
            }
            return ok ? 0 : 1;
        }
        if (*preset_cmd) {
            std::cout << serialize_config(preset_config(preset_name));
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
