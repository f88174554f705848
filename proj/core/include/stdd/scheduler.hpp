#pragma once

#include <string_view>
#include <vector>

#include "stdd/confidence_history.hpp"
#include "stdd/sequence_state.hpp"

namespace stdd {

enum class DecodeReason {
    Threshold,   // confidence cleared the (fixed or dynamic) threshold
    Forced,      // suspected-slow patience exhausted
    Fallback,    // nothing else moved; highest-confidence masked token
    Schedule,    // confidence-free schedule (dilated groups)
    FinalFlush,  // step budget exhausted; remaining masks take their argmax
};

std::string_view to_string(DecodeReason reason) noexcept;

struct DecodeAction {
    Position pos;
    TokenId token;
    DecodeReason reason;

    bool operator==(const DecodeAction&) const = default;
};

struct ThresholdSample {
    Position pos;
    double tau;

    bool operator==(const ThresholdSample&) const = default;
};

struct StepDecision {
    std::vector<DecodeAction> decode;
    // Previously decoded positions sent back to the mask.
    std::vector<Position> remask;
    // Positions that received a suspected-fast label this step.
    std::vector<Position> fast_labeled;
    // Threshold evaluated for each position that was masked at step start.
    std::vector<ThresholdSample> thresholds;
    // Mixing weight used this step (dynamic strategies only).
    double mixing_weight = 1.0;

    bool empty() const noexcept { return decode.empty() && remask.empty(); }
    bool operator==(const StepDecision&) const = default;
};

// Throws contract_violation when the decision decodes a prompt or an already
// decoded position, remasks a masked or prompt position, or touches a position
// twice.
void validate_decision(const StepDecision& decision, const SequenceState& state);

// Appends a fallback decode of the highest-confidence masked position (lowest
// index on ties) when the decision would otherwise leave the step idle.
void apply_progress_fallback(StepDecision& decision, const SequenceState& state,
                             const StepObservation& obs);

// A remasking policy. Strategies may keep private per-run state (labels,
// cursors) but no global state.
class Strategy {
public:
    virtual ~Strategy() = default;

    virtual std::string_view name() const = 0;
    virtual StepDecision decide(const SequenceState& state, const StepObservation& obs,
                                const ConfidenceHistory& history) = 0;
    // Called once before the first step of a run.
    virtual void begin(const SequenceState& /*state*/) {}
    // Called once after the last step; drops any leftover per-run state.
    virtual void finish() {}
};

// Supplies one observation per step. Interactive sources react to the current
// state; replay sources ignore it.
class ConfidenceSource {
public:
    virtual ~ConfidenceSource() = default;
    virtual StepObservation observe(const SequenceState& state) = 0;
};

struct StepReport {
    StepIndex step = 0;
    StepObservation observation;
    StepDecision decision;
    // Decodes made after the strategy when the step budget ran out.
    std::vector<DecodeAction> flushed;
    double decoded_fraction = 0.0;
    std::size_t masked_remaining = 0;

    std::size_t decoded_count() const noexcept { return decision.decode.size() + flushed.size(); }
    bool operator==(const StepReport&) const = default;
};

struct RunResult {
    SequenceState final_state;
    std::vector<StepReport> steps;
    ConfidenceHistory history;

    std::size_t steps_used() const noexcept { return steps.size(); }
};

// Runs the decode/remask loop until the generation region is fully decoded.
// At the last allowed step every remaining mask is decoded at its argmax.
// Per step: observe, record into history, decide, validate, apply.
RunResult run(ConfidenceSource& source, Strategy& strategy, SequenceState state,
              const dynamics::DynamicsConfig& history_config);

}  // namespace stdd
