#include "stdd/confidence_history.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

namespace stdd {

namespace {

std::size_t capacity_for(std::size_t temporal_window) {
    constexpr std::size_t kMinCapacity = 8;
    if (temporal_window == kUnbounded) return kMinCapacity;
    return std::max(temporal_window + 1, kMinCapacity);
}

}  // namespace

ConfidenceHistory::ConfidenceHistory(std::size_t seq_len, dynamics::DynamicsConfig cfg)
    : cfg_(cfg),
      capacity_(capacity_for(cfg.temporal_window)),
      windows_(seq_len),
      samples_(seq_len, 0),
      whole_variance_(seq_len, 0.0),
      whole_deviance_(seq_len, 0.0),
      whole_isolation_(seq_len, 0.0) {
    cfg_.validate();
}

void ConfidenceHistory::record(const StepObservation& obs) {
    obs.validate(windows_.size());
    const std::size_t w = cfg_.temporal_window;
    for (Position pos = 0; pos < windows_.size(); ++pos) {
        auto& win = windows_[pos];
        const double c = obs.conf[pos];
        if (w != kUnbounded && win.size() >= w) {
            const std::vector<double> recent(win.end() - static_cast<std::ptrdiff_t>(w), win.end());
            whole_variance_[pos] += std::abs(dynamics::temporal_variance(recent, c, w));
        }
        const double dev = dynamics::spatial_deviance(obs.conf, pos, cfg_.neighbour_window,
                                                      dynamics::Padding{}, cfg_.left_bias);
        whole_deviance_[pos] += std::abs(dev);
        whole_isolation_[pos] += std::abs(c - dev);

        win.push_back(c);
        if (win.size() > capacity_) win.pop_front();
        ++samples_[pos];
    }
}

std::vector<double> ConfidenceHistory::window(Position pos) const {
    const auto& win = windows_.at(pos);
    return {win.begin(), win.end()};
}

std::vector<double> ConfidenceHistory::previous(Position pos) const {
    const auto& win = windows_.at(pos);
    if (win.empty()) return {};
    return {win.begin(), std::prev(win.end())};
}

}  // namespace stdd
