#pragma once

#include <optional>
#include <span>
#include <vector>

#include "stdd/scheduler.hpp"

namespace stdd {

// Fraction of generation positions whose committed token equals the reference
// (ground truth or a baseline run's output). Masked positions count as misses.
double fidelity(const SequenceState& final_state, std::span<const TokenId> reference);

// Generation-region tokens of a completed run.
std::vector<TokenId> committed_tokens(const SequenceState& final_state);

struct RunMetrics {
    std::size_t steps_used = 0;
    std::size_t max_steps = 0;
    double tokens_per_step = 0.0;
    std::size_t decode_events = 0;
    std::size_t remask_events = 0;
    std::size_t force_decodes = 0;
    std::size_t fallback_decodes = 0;
    std::size_t flushed = 0;
    double fidelity = 0.0;
    // Baseline steps / these steps; set once a baseline is known.
    std::optional<double> speedup;
};

RunMetrics summarize(const RunResult& result, std::span<const TokenId> reference);

// Steps-ratio speedup proxy.
double speedup(std::size_t baseline_steps, std::size_t steps);

// Decodes per step (threshold, forced, fallback, schedule and flush).
std::vector<std::size_t> decoded_per_step(const RunResult& result);

}  // namespace stdd
