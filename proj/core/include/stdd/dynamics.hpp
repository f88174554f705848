#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "stdd/types.hpp"

namespace stdd::dynamics {

enum class WeightScheme { ExponentialHalving };

struct DynamicsConfig {
    // Number of previous confidences averaged by the temporal variance.
    std::size_t temporal_window = 3;
    // Neighbours considered on each side by the spatial deviance.
    std::size_t neighbour_window = 3;
    WeightScheme weight_scheme = WeightScheme::ExponentialHalving;
    // Scales the left-side weights by left_bias and the right side by
    // (2 - left_bias); 1 is the symmetric window. Must lie in [0, 2].
    double left_bias = 1.0;

    void validate() const;
    bool operator==(const DynamicsConfig&) const = default;
};

// Confidence used for neighbours that fall outside the sequence.
struct Padding {
    double left = 1.0;
    double right = 0.0;
};

// Arithmetic mean; exact for constant windows.
double window_mean(std::span<const double> recent);

// current - mean(recent). recent must hold exactly `window` samples.
double temporal_variance(std::span<const double> recent, double current, std::size_t window);

// Per-side weights for distances 1..half_width: 2^-(d+1) for d < half_width and
// 2^-half_width for the last one, so each side sums to 1/2.
std::vector<double> neighbor_weights(std::size_t half_width);

// Weighted sum of the 2*half_width neighbour confidences around pos (pos itself
// excluded). Neighbours with index < left_limit take pads.left, neighbours past
// the end take pads.right.
double spatial_deviance(std::span<const double> conf, Position pos, std::size_t half_width,
                        Padding pads, double left_bias = 1.0, std::size_t left_limit = 0);

enum class TokenClass { Static, Unstable, Normal };

std::string_view to_string(TokenClass c) noexcept;

struct ClassCutoffs {
    double variance = 1.0;
    double deviance = 1.0;
};

// Unstable: high variance and high deviance. Static: low variance, high
// deviance. Everything else is Normal.
TokenClass classify_token(double whole_variance, double whole_deviance, ClassCutoffs cutoffs);

// Linear-interpolated quantile (numpy "linear" method) of a sample.
double quantile(std::vector<double> values, double q);

// Cutoffs at the q-quantile of each accumulator over a population of tokens.
ClassCutoffs quantile_cutoffs(std::span<const double> whole_variance,
                              std::span<const double> whole_deviance, double q = 0.75);

}  // namespace stdd::dynamics
