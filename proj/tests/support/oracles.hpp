#pragma once

// Brute-force reference formulas, written directly from the rule definitions
// and kept free of any call into the library under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace oracle {

inline constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

inline bool close(double a, double b, double rel = 1e-12) {
    const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return std::fabs(a - b) <= rel * scale;
}

inline double mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double temporal_variance(const std::vector<double>& recent, double current) {
    return current - mean(recent);
}

// Weight of the neighbour at distance d (1-based) for a half width w.
inline double weight(std::size_t d, std::size_t w) {
    return d < w ? std::ldexp(1.0, -static_cast<int>(d + 1)) : std::ldexp(1.0, -static_cast<int>(w));
}

inline double spatial_deviance(const std::vector<double>& conf, std::size_t pos, std::size_t w, double pad_left,
                               double pad_right, double left_bias = 1.0, std::size_t left_limit = 0) {
    const long n = static_cast<long>(conf.size());
    double total = 0.0;
    for (std::size_t d = 1; d <= w; ++d) {
        const long l = static_cast<long>(pos) - static_cast<long>(d);
        const long r = static_cast<long>(pos) + static_cast<long>(d);
        const double lv = (l < 0 || l < static_cast<long>(left_limit)) ? pad_left : conf[static_cast<std::size_t>(l)];
        const double rv = r >= n ? pad_right : conf[static_cast<std::size_t>(r)];
        total += weight(d, w) * left_bias * lv;
        total += weight(d, w) * (2.0 - left_bias) * rv;
    }
    return total;
}

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

// previous: samples before the current one, oldest first.
inline double base_threshold(const std::vector<double>& previous, double current, std::size_t wt,
                             double warmup = 0.95) {
    if (wt == kUnbounded || previous.size() < wt) return warmup;
    std::vector<double> recent(previous.end() - static_cast<std::ptrdiff_t>(wt), previous.end());
    return clamp01(current - temporal_variance(recent, current));
}

inline double neighbour_threshold(const std::vector<double>& conf, std::size_t pos, std::size_t w,
                                  std::size_t prompt_len, bool hard_cases, double left_bias = 1.0) {
    const long i = static_cast<long>(pos);
    if (hard_cases) {
        if (i - static_cast<long>(w) < static_cast<long>(prompt_len)) return 0.0;
        if (i + static_cast<long>(w) > static_cast<long>(conf.size()) - 1) return 1.0;
    }
    return clamp01(spatial_deviance(conf, pos, w, 1.0, 0.0, left_bias));
}

inline double mixing_weight(double fraction) { return (fraction < 0.2 || fraction > 0.8) ? 0.6 : 0.5; }

inline double dynamic_threshold(double base, double neighbour, double p) { return p * base + (1.0 - p) * neighbour; }

}  // namespace oracle
