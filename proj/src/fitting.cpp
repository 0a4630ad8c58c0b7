#include "nlwave/fitting.hpp"

#include <cmath>
#include <vector>

#include "nlwave/errors.hpp"

namespace nlwave {

LinearFit fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw FitError("fit_line: size mismatch");
    }
    const std::size_t n = x.size();
    if (n < 2) {
        throw FitError("fit_line: need at least two points");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
            throw FitError("fit_line: non-finite data");
        }
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) {
        throw FitError("fit_line: zero variance in abscissa");
    }
    LinearFit fit;
    fit.n = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        ss_res += r * r;
    }
    fit.residual_norm = std::sqrt(ss_res);
    fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 0.0;
    return fit;
}

nlohmann::json to_json(const DecayFit& fit)
{
    nlohmann::json j{
        {"model", fit.model},
        {"slope", fit.slope},
        {"intercept", fit.intercept},
        {"r_squared", fit.r_squared},
        {"residual_norm", fit.residual_norm},
        {"window", {fit.t_lo, fit.t_hi}},
        {"n_points", fit.n_points},
        {"threshold", fit.threshold},
        {"pass", fit.pass},
        {"degenerate", fit.degenerate},
        {"criterion", fit.criterion},
        {"note", fit.note},
    };
    j["extra"] = nlohmann::json::object();
    for (const auto& [k, v] : fit.extra) {
        j["extra"][k] = v;
    }
    return j;
}

DecayFit decay_fit_from_json(const nlohmann::json& j)
{
    DecayFit fit;
    fit.model = j.at("model").get<std::string>();
    fit.slope = j.at("slope").get<double>();
    fit.intercept = j.at("intercept").get<double>();
    fit.r_squared = j.at("r_squared").get<double>();
    fit.residual_norm = j.at("residual_norm").get<double>();
    fit.t_lo = j.at("window").at(0).get<double>();
    fit.t_hi = j.at("window").at(1).get<double>();
    fit.n_points = j.at("n_points").get<std::size_t>();
    fit.threshold = j.at("threshold").get<double>();
    fit.pass = j.at("pass").get<bool>();
    fit.degenerate = j.at("degenerate").get<bool>();
    fit.criterion = j.value("criterion", "");
    fit.note = j.value("note", "");
    if (j.contains("extra")) {
        for (const auto& [k, v] : j["extra"].items()) {
            fit.extra[k] = v.get<double>();
        }
    }
    return fit;
}

DecayFit fit_power_law(std::span<const double> times, std::span<const double> values,
                       double noise_floor)
{
    if (times.size() != values.size()) {
        throw FitError("fit_power_law: size mismatch");
    }
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (values[i] > noise_floor && times[i] > 0.0) {
            lx.push_back(std::log(times[i]));
            ly.push_back(std::log(values[i]));
        }
    }
    if (lx.size() < 3) {
        throw FitError("fit_power_law: fewer than three points above the noise floor");
    }
    const LinearFit lf = fit_line(lx, ly);
    DecayFit fit;
    fit.model = "power_law";
    fit.slope = lf.slope;
    fit.intercept = lf.intercept;
    fit.r_squared = lf.r_squared;
    fit.residual_norm = lf.residual_norm;
    fit.n_points = lf.n;
    fit.t_lo = std::exp(lx.front());
    fit.t_hi = std::exp(lx.back());
    return fit;
}

} // namespace nlwave
