#pragma once

#include <deque>
#include <vector>

#include "stdd/dynamics.hpp"
#include "stdd/sequence_state.hpp"

namespace stdd {

// Rolling per-position confidence windows plus the whole-run |variance| and
// |deviance| accumulators.
//
// The window keeps max(temporal_window + 1, 8) samples so the temporal window
// can be re-read at a different size after a run, and so the W_t samples that
// precede the latest one are always available.
class ConfidenceHistory {
public:
    ConfidenceHistory(std::size_t seq_len, dynamics::DynamicsConfig cfg);

    // Appends obs.conf to every window. Variance accrues only for positions that
    // already had temporal_window samples; deviance accrues every step.
    void record(const StepObservation& obs);

    std::size_t seq_len() const noexcept { return windows_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    const dynamics::DynamicsConfig& config() const noexcept { return cfg_; }

    std::size_t samples_seen(Position pos) const { return samples_.at(pos); }
    // Stored samples in arrival order, most recent last.
    std::vector<double> window(Position pos) const;
    // Stored samples that precede the most recent one.
    std::vector<double> previous(Position pos) const;

    double whole_variance(Position pos) const { return whole_variance_.at(pos); }
    double whole_deviance(Position pos) const { return whole_deviance_.at(pos); }
    // Accumulated |c - dev|, a derived isolation diagnostic.
    double whole_isolation(Position pos) const { return whole_isolation_.at(pos); }

private:
    dynamics::DynamicsConfig cfg_;
    std::size_t capacity_;
    std::vector<std::deque<double>> windows_;
    std::vector<std::size_t> samples_;
    std::vector<double> whole_variance_;
    std::vector<double> whole_deviance_;
    std::vector<double> whole_isolation_;
};

}  // namespace stdd
