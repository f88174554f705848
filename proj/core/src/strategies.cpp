#include "stdd/strategies.hpp"

#include <string>
#include <utility>

#include "stdd/error.hpp"

namespace stdd {

FixedThresholdStrategy::FixedThresholdStrategy(double tau) : tau_(tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw config_error("fixed threshold must lie in [0,1]");
}

StepDecision FixedThresholdStrategy::decide(const SequenceState& state, const StepObservation& obs,
                                            const ConfidenceHistory& /*history*/) {
    StepDecision d;
    for (Position pos : state.masked_positions()) {
        d.thresholds.push_back({pos, tau_});
        if (obs.conf[pos] >= tau_) d.decode.push_back({pos, obs.token[pos], DecodeReason::Threshold});
    }
    apply_progress_fallback(d, state, obs);
    return d;
}

DilatedUnmaskingStrategy::DilatedUnmaskingStrategy(std::size_t groups) : groups_(groups) {
    if (groups_ == 0) throw config_error("dilated unmasking needs at least one group");
}

void DilatedUnmaskingStrategy::begin(const SequenceState& /*state*/) { cursor_ = 0; }

StepDecision DilatedUnmaskingStrategy::decide(const SequenceState& state, const StepObservation& obs,
                                              const ConfidenceHistory& /*history*/) {
    StepDecision d;
    const std::size_t group = cursor_++ % groups_;
    for (Position pos : state.masked_positions()) {
        if ((pos - state.prompt_len()) % groups_ == group) {
            d.decode.push_back({pos, obs.token[pos], DecodeReason::Schedule});
        }
    }
    apply_progress_fallback(d, state, obs);
    return d;
}

void StddConfig::validate() const {
    dynamics.validate();
    threshold.validate();
    feasibility.validate();
}

StddStrategy::StddStrategy(StddConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void StddStrategy::begin(const SequenceState& state) { labels_.resize(state.seq_len()); }

void StddStrategy::finish() { labels_.clear_all(); }

double StddStrategy::threshold_for(Position pos, const SequenceState& state, const StepObservation& obs,
                                   const ConfidenceHistory& history, double p) const {
    const auto& dyn = cfg_.dynamics;
    const auto previous = history.previous(pos);
    const double base = threshold::base_threshold(previous, obs.conf[pos], dyn.temporal_window,
                                                  cfg_.threshold.warmup_threshold);
    const double neighbour = threshold::neighbour_threshold(obs.conf, pos, dyn.neighbour_window,
                                                            state.prompt_len(), cfg_.threshold.boundary_mode,
                                                            dyn.left_bias);
    return threshold::dynamic_threshold(base, neighbour, p);
}

StepDecision StddStrategy::decide(const SequenceState& state, const StepObservation& obs,
                                  const ConfidenceHistory& history) {
    const auto& fc = cfg_.feasibility;
    const std::size_t w = cfg_.dynamics.temporal_window;
    if (w != kUnbounded && w + 1 > history.capacity()) {
        throw structural_error("history keeps " + std::to_string(history.capacity()) +
                               " samples, temporal window " + std::to_string(w) + " needs " +
                               std::to_string(w + 1));
    }
    if (labels_.size() != state.seq_len()) labels_.resize(state.seq_len());

    StepDecision d;
    const StepIndex step = state.step();

    // Watched warm-up decodes: a changed argmax sends the token back to the mask.
    for (Position pos : labels_.fast_positions()) {
        if (state.is_masked(pos)) {
            labels_.clear(pos);
            continue;
        }
        switch (feasibility::check_fast(*labels_.fast(pos), obs.token[pos], step, fc)) {
            case feasibility::FastAction::Remask:
                d.remask.push_back(pos);
                labels_.clear(pos);
                break;
            case feasibility::FastAction::ClearLabel:
                labels_.clear(pos);
                break;
            case feasibility::FastAction::Keep:
                break;
        }
    }

    const double p = threshold::mixing_weight(state.decoded_fraction(), cfg_.threshold);
    d.mixing_weight = p;

    std::vector<std::pair<Position, feasibility::SuspectedFast>> new_fast;
    for (Position pos : state.masked_positions()) {
        const double tau = threshold_for(pos, state, obs, history, p);
        const double c = obs.conf[pos];
        d.thresholds.push_back({pos, tau});
        if (c >= tau) {
            d.decode.push_back({pos, obs.token[pos], DecodeReason::Threshold});
            labels_.clear(pos);
            if (auto label = feasibility::maybe_label_fast(step, c, tau, obs.token[pos], fc)) {
                new_fast.emplace_back(pos, *label);
            }
            continue;
        }
        auto slow = labels_.slow(pos);
        const auto update = feasibility::update_slow(slow, c, tau, fc);
        if (update.kind == feasibility::SlowUpdate::Kind::ForceDecode) {
            d.decode.push_back({pos, obs.token[pos], DecodeReason::Forced});
            labels_.clear(pos);
        } else if (slow) {
            labels_.set(pos, *slow);
        } else {
            labels_.clear(pos);
        }
    }

    for (const auto& [pos, label] : new_fast) {
        labels_.set(pos, label);
        d.fast_labeled.push_back(pos);
    }

    apply_progress_fallback(d, state, obs);
    for (const auto& a : d.decode) {
        if (a.reason == DecodeReason::Fallback) labels_.clear(a.pos);
    }
    return d;
}

}  // namespace stdd
