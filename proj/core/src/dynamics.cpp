#include "stdd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stdd/error.hpp"

namespace stdd::dynamics {

void DynamicsConfig::validate() const {
    if (temporal_window == 0) throw config_error("temporal window must be >= 1");
    if (neighbour_window == 0) throw config_error("neighbour window must be >= 1");
    if (!(left_bias >= 0.0 && left_bias <= 2.0)) throw config_error("left_bias must lie in [0, 2]");
}

double temporal_variance(std::span<const double> recent, double current, std::size_t window) {
    if (window == 0 || recent.size() != window) {
        throw structural_error("temporal window expects " + std::to_string(window) + " samples, got " +
                               std::to_string(recent.size()));
    }
    return current - window_mean(recent);
}

double window_mean(std::span<const double> recent) {
    if (recent.empty()) throw structural_error("mean of an empty window");
    // Shifted by the first sample so a constant window averages to itself exactly.
    const double first = recent.front();
    double offset = 0.0;
    for (double x : recent) offset += x - first;
    return first + offset / static_cast<double>(recent.size());
}

std::vector<double> neighbor_weights(std::size_t half_width) {
    if (half_width == 0) throw config_error("neighbour window must be >= 1");
    std::vector<double> w(half_width);
    for (std::size_t d = 1; d < half_width; ++d) {
        w[d - 1] = std::ldexp(1.0, -static_cast<int>(d + 1));
    }
    w[half_width - 1] = std::ldexp(1.0, -static_cast<int>(half_width));
    return w;
}

double spatial_deviance(std::span<const double> conf, Position pos, std::size_t half_width, Padding pads,
                        double left_bias, std::size_t left_limit) {
    if (pos >= conf.size()) {
        throw structural_error("position " + std::to_string(pos) + " outside confidence vector of length " +
                               std::to_string(conf.size()));
    }
    const auto weights = neighbor_weights(half_width);
    const double right_bias = 2.0 - left_bias;
    double left = 0.0;
    double right = 0.0;
    for (std::size_t d = 1; d <= half_width; ++d) {
        const double w = weights[d - 1];
        left += w * ((pos >= d && pos - d >= left_limit) ? conf[pos - d] : pads.left);
        right += w * (pos + d < conf.size() ? conf[pos + d] : pads.right);
    }
    return left_bias * left + right_bias * right;
}

std::string_view to_string(TokenClass c) noexcept {
    switch (c) {
        case TokenClass::Static: return "static";
        case TokenClass::Unstable: return "unstable";
        case TokenClass::Normal: return "normal";
    }
    return "normal";
}

TokenClass classify_token(double whole_variance, double whole_deviance, ClassCutoffs cutoffs) {
    if (whole_deviance >= cutoffs.deviance) {
        return whole_variance >= cutoffs.variance ? TokenClass::Unstable : TokenClass::Static;
    }
    return TokenClass::Normal;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw structural_error("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double rank = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

ClassCutoffs quantile_cutoffs(std::span<const double> whole_variance, std::span<const double> whole_deviance,
                              double q) {
    return ClassCutoffs{quantile({whole_variance.begin(), whole_variance.end()}, q),
                        quantile({whole_deviance.begin(), whole_deviance.end()}, q)};
}

}  // namespace stdd::dynamics
