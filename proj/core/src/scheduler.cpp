#include "stdd/scheduler.hpp"

#include <string>
#include <utility>

#include "stdd/error.hpp"

namespace stdd {

std::string_view to_string(DecodeReason reason) noexcept {
    switch (reason) {
        case DecodeReason::Threshold: return "threshold";
        case DecodeReason::Forced: return "forced";
        case DecodeReason::Fallback: return "fallback";
        case DecodeReason::Schedule: return "schedule";
        case DecodeReason::FinalFlush: return "final-flush";
    }
    return "threshold";
}

void validate_decision(const StepDecision& decision, const SequenceState& state) {
    std::vector<bool> touched(state.seq_len(), false);
    auto claim = [&](Position pos, const char* what) {
        if (pos >= state.seq_len()) {
            throw contract_violation(std::string(what) + " position " + std::to_string(pos) + " out of range");
        }
        if (state.is_prompt(pos)) {
            throw contract_violation(std::string(what) + " touches prompt position " + std::to_string(pos));
        }
        if (touched[pos]) {
            throw contract_violation("position " + std::to_string(pos) + " appears twice in one decision");
        }
        touched[pos] = true;
    };
    for (const auto& a : decision.decode) {
        claim(a.pos, "decode");
        if (!state.is_masked(a.pos)) {
            throw contract_violation("decode of already decoded position " + std::to_string(a.pos));
        }
    }
    for (Position pos : decision.remask) {
        claim(pos, "remask");
        if (state.is_masked(pos)) {
            throw contract_violation("remask of masked position " + std::to_string(pos));
        }
    }
}

void apply_progress_fallback(StepDecision& decision, const SequenceState& state, const StepObservation& obs) {
    if (!decision.empty() || state.complete()) return;
    Position best = state.seq_len();
    for (Position pos = state.prompt_len(); pos < state.seq_len(); ++pos) {
        if (!state.is_masked(pos)) continue;
        if (best == state.seq_len() || obs.conf[pos] > obs.conf[best]) best = pos;
    }
    decision.decode.push_back({best, obs.token[best], DecodeReason::Fallback});
}

RunResult run(ConfidenceSource& source, Strategy& strategy, SequenceState state,
              const dynamics::DynamicsConfig& history_config) {
    ConfidenceHistory history(state.seq_len(), history_config);
    std::vector<StepReport> steps;
    steps.reserve(state.max_steps());

    strategy.begin(state);
    while (!state.complete()) {
        StepObservation obs = source.observe(state);
        obs.validate(state.seq_len());
        if (obs.t != state.step()) {
            throw structural_error("source returned step " + std::to_string(obs.t) + " for step " +
                                   std::to_string(state.step()));
        }
        history.record(obs);

        StepDecision decision = strategy.decide(state, obs, history);
        validate_decision(decision, state);
        for (Position pos : decision.remask) state.revert_to_mask(pos);
        for (const auto& a : decision.decode) state.commit_decode(a.pos, a.token);

        StepReport report;
        report.step = state.step();
        if (!state.complete() && state.step() + 1 >= state.max_steps()) {
            for (Position pos : state.masked_positions()) {
                state.commit_decode(pos, obs.token[pos]);
                report.flushed.push_back({pos, obs.token[pos], DecodeReason::FinalFlush});
            }
        }
        report.decoded_fraction = state.decoded_fraction();
        report.masked_remaining = state.masked_count();
        report.observation = std::move(obs);
        report.decision = std::move(decision);
        steps.push_back(std::move(report));

        if (state.complete()) break;
        state.advance_step();
    }
    strategy.finish();

    return RunResult{std::move(state), std::move(steps), std::move(history)};
}

}  // namespace stdd
