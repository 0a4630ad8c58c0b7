#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

namespace nlwave {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0; ///< 0 when y has zero variance
    double residual_norm = 0.0;
    std::size_t n = 0;
};

/// Ordinary least squares y = slope * x + intercept. Throws FitError for fewer than
/// two points, mismatched sizes, non-finite data, or zero variance in x.
[[nodiscard]] LinearFit fit_line(std::span<const double> x, std::span<const double> y);

/// Result of a rate/exponent fit together with its acceptance verdict.
struct DecayFit {
    std::string model;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double residual_norm = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::size_t n_points = 0;
    double threshold = 0.0;
    bool pass = false;
    bool degenerate = false; ///< data at the noise floor; pass is reported with a note
    std::string criterion;
    std::string note;
    std::map<std::string, double> extra;
};

[[nodiscard]] nlohmann::json to_json(const DecayFit& fit);
[[nodiscard]] DecayFit decay_fit_from_json(const nlohmann::json& j);

/// Least-squares fit of log(values) against log(times), keeping only points whose value
/// exceeds noise_floor. Throws FitError if fewer than three points survive.
[[nodiscard]] DecayFit fit_power_law(std::span<const double> times, std::span<const double> values,
                                     double noise_floor);

} // namespace nlwave
