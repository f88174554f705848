#include "stdd/metrics.hpp"

#include "stdd/error.hpp"

namespace stdd {

double fidelity(const SequenceState& final_state, std::span<const TokenId> reference) {
    if (reference.size() != final_state.gen_len()) {
        throw structural_error("reference has " + std::to_string(reference.size()) + " tokens, generation region has " +
                               std::to_string(final_state.gen_len()));
    }
    std::size_t hits = 0;
    for (std::size_t k = 0; k < reference.size(); ++k) {
        const auto& slot = final_state.status(final_state.prompt_len() + k);
        if (slot && slot->token == reference[k]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(reference.size());
}

std::vector<TokenId> committed_tokens(const SequenceState& final_state) {
    std::vector<TokenId> out;
    out.reserve(final_state.gen_len());
    for (const auto& t : final_state.generated_tokens()) {
        if (!t) throw illegal_operation("run is not complete; masked positions remain");
        out.push_back(*t);
    }
    return out;
}

RunMetrics summarize(const RunResult& result, std::span<const TokenId> reference) {
    RunMetrics m;
    m.steps_used = result.steps_used();
    m.max_steps = result.final_state.max_steps();
    for (const auto& s : result.steps) {
        m.decode_events += s.decoded_count();
        m.remask_events += s.decision.remask.size();
        m.flushed += s.flushed.size();
        for (const auto& a : s.decision.decode) {
            if (a.reason == DecodeReason::Forced) ++m.force_decodes;
            if (a.reason == DecodeReason::Fallback) ++m.fallback_decodes;
        }
    }
    m.tokens_per_step = m.steps_used ? static_cast<double>(m.decode_events) / static_cast<double>(m.steps_used) : 0.0;
    m.fidelity = fidelity(result.final_state, reference);
    return m;
}

double speedup(std::size_t baseline_steps, std::size_t steps) {
    if (steps == 0 || baseline_steps == 0) throw structural_error("speedup needs positive step counts");
    return static_cast<double>(baseline_steps) / static_cast<double>(steps);
}

std::vector<std::size_t> decoded_per_step(const RunResult& result) {
    std::vector<std::size_t> out;
    out.reserve(result.steps.size());
    for (const auto& s : result.steps) out.push_back(s.decoded_count());
    return out;
}

}  // namespace stdd
