#include "doctest.h"
#include "scripted.hpp"
#include "stdd/error.hpp"
#include "stdd/strategies.hpp"

using namespace stdd;
using testsupport::constant_obs;
using testsupport::ScriptedSource;

namespace {

SequenceState state_of(std::size_t prompt, std::size_t seq_len, std::size_t max_steps) {
    std::vector<TokenId> p(prompt, 1);
    return SequenceState(p, seq_len, max_steps);
}

// Decodes one already decoded position to provoke the contract check.
class Rogue final : public Strategy {
public:
    std::string_view name() const override { return "rogue"; }
    StepDecision decide(const SequenceState&, const StepObservation& obs, const ConfidenceHistory&) override {
        StepDecision d;
        d.decode.push_back({0, obs.token[0], DecodeReason::Threshold});
        return d;
    }
};

}  // namespace

TEST_CASE("all-confident source finishes in one step") {
    ScriptedSource src({constant_obs(24, 1.0)});
    FixedThresholdStrategy fixed;
    const auto r = run(src, fixed, state_of(8, 24, 64), {});
    CHECK(r.steps_used() == 1);
    CHECK(r.final_state.complete());
    CHECK(r.steps[0].decision.decode.size() == 16);
}

TEST_CASE("zero-confidence source decodes one token per step") {
    ScriptedSource src({constant_obs(24, 0.0)});
    FixedThresholdStrategy fixed;
    const auto r = run(src, fixed, state_of(8, 24, 64), {});
    CHECK(r.steps_used() == 16);
    for (StepIndex t = 0; t < 16; ++t) {
        REQUIRE(r.steps[t].decision.decode.size() == 1);
        CHECK(r.steps[t].decision.decode[0].reason == DecodeReason::Fallback);
        CHECK(r.steps[t].decision.decode[0].pos == 8 + t);
    }
}

TEST_CASE("a one-step budget flushes everything") {
    ScriptedSource src({constant_obs(24, 0.3)});
    StddStrategy stdd;
    const auto r = run(src, stdd, state_of(8, 24, 1), {});
    CHECK(r.steps_used() == 1);
    CHECK(r.final_state.complete());
    CHECK(r.steps[0].flushed.size() == 15);
    CHECK(r.steps[0].decoded_count() == 16);
}

TEST_CASE("budget exhaustion flushes at the last step") {
    ScriptedSource src({constant_obs(24, 0.0)});
    FixedThresholdStrategy fixed;
    const auto r = run(src, fixed, state_of(8, 24, 5), {});
    CHECK(r.steps_used() == 5);
    CHECK(r.final_state.complete());
    CHECK(r.steps.back().flushed.size() == 11);
    CHECK(r.steps.back().masked_remaining == 0);
}

TEST_CASE("invalid decisions abort the run") {
    ScriptedSource src({constant_obs(16, 0.5)});
    Rogue rogue;
    CHECK_THROWS_AS(run(src, rogue, state_of(4, 16, 8), {}), contract_violation);
}

TEST_CASE("validate_decision rules") {
    auto s = state_of(2, 8, 8);
    s.commit_decode(3, 1);
    StepDecision d;
    d.decode.push_back({4, 1, DecodeReason::Threshold});
    d.remask.push_back(3);
    CHECK_NOTHROW(validate_decision(d, s));
    d.remask.push_back(5);
    CHECK_THROWS_AS(validate_decision(d, s), contract_violation);
    d.remask = {4};
    CHECK_THROWS_AS(validate_decision(d, s), contract_violation);
    d.remask = {1};
    CHECK_THROWS_AS(validate_decision(d, s), contract_violation);
}

TEST_CASE("source returning the wrong step is rejected") {
    class Stuck final : public ConfidenceSource {
    public:
        StepObservation observe(const SequenceState&) override { return constant_obs(16, 0.0); }
    } src;
    FixedThresholdStrategy fixed;
    CHECK_THROWS_AS(run(src, fixed, state_of(4, 16, 8), {}), structural_error);
}

TEST_CASE("progress fallback picks the lowest index on ties") {
    auto s = state_of(2, 8, 8);
    auto obs = constant_obs(8, 0.3);
    obs.conf[5] = 0.4;
    obs.conf[6] = 0.4;
    StepDecision d;
    apply_progress_fallback(d, s, obs);
    REQUIRE(d.decode.size() == 1);
    CHECK(d.decode[0].pos == 5);
}
