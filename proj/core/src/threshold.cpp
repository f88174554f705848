#include "stdd/threshold.hpp"

#include <algorithm>
#include <string>

#include "stdd/dynamics.hpp"
#include "stdd/error.hpp"

namespace stdd::threshold {

std::string_view to_string(BoundaryMode mode) noexcept {
    return mode == BoundaryMode::HardCases ? "hard-cases" : "pad-only";
}

BoundaryMode boundary_mode_from_string(std::string_view name) {
    if (name == "hard-cases") return BoundaryMode::HardCases;
    if (name == "pad-only") return BoundaryMode::PadOnly;
    throw config_error("unknown boundary mode '" + std::string(name) + "'");
}

void ThresholdConfig::validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(warmup_threshold) || !unit(p_outer) || !unit(p_inner) || !unit(lo) || !unit(hi)) {
        throw config_error("threshold parameters must lie in [0,1]");
    }
    if (!(lo < hi)) throw config_error("mixing schedule needs lo < hi");
}

double base_threshold(std::span<const double> previous, double /*current*/, std::size_t temporal_window,
                      double warmup_threshold) {
    if (temporal_window == kUnbounded || previous.size() < temporal_window) {
        return warmup_threshold;
    }
    // current - var(current) is the window mean.
    return std::clamp(dynamics::window_mean(previous.last(temporal_window)), 0.0, 1.0);
}

double neighbour_threshold(std::span<const double> conf, Position pos, std::size_t half_width,
                           std::size_t prompt_len, BoundaryMode mode, double left_bias) {
    if (pos < prompt_len || pos >= conf.size()) {
        throw structural_error("position " + std::to_string(pos) + " is outside the generation region [" +
                               std::to_string(prompt_len) + ", " + std::to_string(conf.size()) + ")");
    }
    if (mode == BoundaryMode::HardCases) {
        // pos - W_n < prompt_len, written without unsigned underflow.
        if (pos < prompt_len + half_width) return 0.0;
        if (pos + half_width > conf.size() - 1) return 1.0;
    }
    const double dev = dynamics::spatial_deviance(conf, pos, half_width, dynamics::Padding{1.0, 0.0}, left_bias);
    return std::clamp(dev, 0.0, 1.0);
}

double mixing_weight(double decoded_fraction, const ThresholdConfig& cfg) {
    if (decoded_fraction < cfg.lo || decoded_fraction > cfg.hi) return cfg.p_outer;
    return cfg.p_inner;
}

double dynamic_threshold(double base, double neighbour, double p) {
    return p * base + (1.0 - p) * neighbour;
}

}  // namespace stdd::threshold
