#pragma once

#include <span>
#include <string_view>

#include "stdd/types.hpp"

namespace stdd::threshold {

// How the neighbour component treats windows that cross the prompt or the end
// of the sequence.
enum class BoundaryMode {
    // 0 when the window reaches into the prompt, 1 when it reaches past the
    // last position, weighted neighbour sum otherwise.
    HardCases,
    // Always the weighted neighbour sum, padding with 1 on the left and 0 on
    // the right of the sequence.
    PadOnly,
};

std::string_view to_string(BoundaryMode mode) noexcept;
BoundaryMode boundary_mode_from_string(std::string_view name);

struct ThresholdConfig {
    double warmup_threshold = 0.95;
    double p_outer = 0.6;
    double p_inner = 0.5;
    double lo = 0.20;
    double hi = 0.80;
    BoundaryMode boundary_mode = BoundaryMode::HardCases;

    void validate() const;
    bool operator==(const ThresholdConfig&) const = default;
};

// Temporal component. `previous` holds the confidences recorded before the
// current one, oldest first. While fewer than temporal_window of them exist
// the warm-up threshold is returned; afterwards current - var(current), which
// is the mean of the last temporal_window samples. Clamped to [0,1].
double base_threshold(std::span<const double> previous, double current,
                      std::size_t temporal_window, double warmup_threshold);

// Spatial component for a generation position.
double neighbour_threshold(std::span<const double> conf, Position pos, std::size_t half_width,
                           std::size_t prompt_len, BoundaryMode mode, double left_bias = 1.0);

// Mixing weight from the decoded share of the generation region: p_outer below
// lo or above hi, p_inner on [lo, hi].
double mixing_weight(double decoded_fraction, const ThresholdConfig& cfg);

// p * base + (1 - p) * neighbour.
double dynamic_threshold(double base, double neighbour, double p);

}  // namespace stdd::threshold
