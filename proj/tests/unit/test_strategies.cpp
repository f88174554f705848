#include <random>

#include "doctest.h"
#include "scripted.hpp"
#include "stdd/error.hpp"
#include "stdd/strategies.hpp"

using namespace stdd;
using testsupport::constant_obs;
using testsupport::RandomWalkSource;
using testsupport::ScriptedSource;

namespace {

SequenceState state_of(std::size_t prompt, std::size_t seq_len, std::size_t max_steps = 64) {
    std::vector<TokenId> p(prompt, 1);
    return SequenceState(p, seq_len, max_steps);
}

std::vector<Position> positions(const StepDecision& d) {
    std::vector<Position> out;
    for (const auto& a : d.decode) out.push_back(a.pos);
    return out;
}

}  // namespace

TEST_CASE("fixed threshold decodes everything above tau") {
    auto s = state_of(1, 4);
    StepObservation obs{0, {1, 2, 3, 4}, {1.0, 0.99, 0.50, 0.96}};
    ConfidenceHistory h(4, {});
    FixedThresholdStrategy fixed;
    CHECK(positions(fixed.decide(s, obs, h)) == std::vector<Position>{1, 3});

    obs.conf = {1.0, 0.2, 0.9, 0.3};
    const auto d = fixed.decide(s, obs, h);
    CHECK(positions(d) == std::vector<Position>{2});
    CHECK(d.decode[0].reason == DecodeReason::Fallback);

    obs.conf = {1.0, 0.95, 0.97, 1.0};
    CHECK(positions(fixed.decide(s, obs, h)).size() == 3);
}

TEST_CASE("dilated unmasking schedule") {
    SUBCASE("16 tokens, 8 groups") {
        ScriptedSource src({constant_obs(20, 0.1)});
        DilatedUnmaskingStrategy dus(8);
        const auto r = run(src, dus, state_of(4, 20), {});
        CHECK(r.steps_used() == 8);
        for (const auto& step : r.steps) {
            REQUIRE(step.decision.decode.size() == 2);
            CHECK(step.decision.decode[1].pos - step.decision.decode[0].pos == 8);
        }
    }
    SUBCASE("one group decodes everything at once") {
        ScriptedSource src({constant_obs(20, 0.1)});
        DilatedUnmaskingStrategy dus(1);
        const auto r = run(src, dus, state_of(4, 20), {});
        CHECK(r.steps_used() == 1);
    }
    SUBCASE("singleton groups go one by one") {
        ScriptedSource src({constant_obs(20, 0.1)});
        DilatedUnmaskingStrategy dus(16);
        const auto r = run(src, dus, state_of(4, 20), {});
        CHECK(r.steps_used() == 16);
        for (StepIndex t = 0; t < 16; ++t) CHECK(r.steps[t].decision.decode[0].pos == 4 + t);
    }
    SUBCASE("fewer tokens than groups ends once everything is decoded") {
        ScriptedSource src({constant_obs(9, 0.1)});
        DilatedUnmaskingStrategy dus(8);
        const auto r = run(src, dus, state_of(4, 9), {});
        CHECK(r.steps_used() == 5);
    }
    CHECK_THROWS_AS(DilatedUnmaskingStrategy(0), config_error);
}

TEST_CASE("stdd decodes well above threshold without a fast label") {
    auto s = state_of(8, 16);
    for (int i = 0; i < 2; ++i) s.advance_step();
    StddConfig cfg;
    cfg.threshold.p_outer = 1.0;
    cfg.dynamics.temporal_window = 2;
    StddStrategy stdd(cfg);
    stdd.begin(s);
    ConfidenceHistory h(16, cfg.dynamics);
    auto obs = constant_obs(16, 0.0);
    for (StepIndex t = 0; t < 3; ++t) {
        obs.t = t;
        // Falling neighbours stay below their own window mean.
        for (Position p = 8; p < 16; ++p) obs.conf[p] = 0.3 - 0.1 * static_cast<double>(t);
        obs.conf[10] = t < 2 ? 0.7 : 0.97;
        h.record(obs);
    }
    const auto d = stdd.decide(s, obs, h);
    bool found = false;
    for (const auto& smp : d.thresholds) {
        if (smp.pos == 10) {
            CHECK(smp.tau == doctest::Approx(0.7));
            found = true;
        }
    }
    CHECK(found);
    CHECK(positions(d) == std::vector<Position>{10});
    CHECK(d.fast_labeled.empty());
}

TEST_CASE("stdd force-decodes at the third consecutive near miss") {
    StddConfig cfg;
    cfg.threshold.p_outer = cfg.threshold.p_inner = 1.0;
    cfg.dynamics.temporal_window = kUnbounded;
    auto obs = constant_obs(8, 0.0);
    obs.conf[4] = 0.90;  // near miss every step
    obs.conf[5] = 0.99;
    obs.conf[6] = 0.99;
    obs.conf[7] = 0.99;
    // Keep one high-confidence decode per step so the fallback never fires.
    std::vector<StepObservation> script;
    for (int t = 0; t < 3; ++t) {
        auto o = obs;
        for (Position p = 5; p < 8; ++p) o.conf[p] = (p - 5 == static_cast<Position>(t)) ? 0.99 : 0.0;
        script.push_back(o);
    }
    ScriptedSource src(script);
    StddStrategy stdd(cfg);
    const auto r = run(src, stdd, state_of(4, 8), cfg.dynamics);
    REQUIRE(r.steps_used() == 3);
    bool forced = false;
    for (const auto& a : r.steps[2].decision.decode) forced |= (a.pos == 4 && a.reason == DecodeReason::Forced);
    CHECK(forced);
    for (StepIndex t = 0; t < 2; ++t) {
        for (const auto& a : r.steps[t].decision.decode) CHECK(a.pos != 4);
    }
}

TEST_CASE("stdd remasks a warm-up decode whose argmax changes") {
    StddConfig cfg;
    cfg.threshold.p_outer = cfg.threshold.p_inner = 1.0;
    cfg.dynamics.temporal_window = kUnbounded;
    auto first = constant_obs(8, 0.0);
    first.conf[5] = 0.96;  // 0.01 above tau: suspected fast
    auto second = first;
    second.token[5] = 99;
    second.conf[5] = 0.5;
    second.conf[6] = 0.99;
    ScriptedSource src({first, second});
    StddStrategy stdd(cfg);
    auto s = state_of(4, 8, 8);
    const auto r = run(src, stdd, s, cfg.dynamics);
    CHECK(r.steps[0].decision.fast_labeled == std::vector<Position>{5});
    CHECK(r.steps[1].decision.remask == std::vector<Position>{5});
    CHECK(stdd.labels().active_count() == 0);
}

TEST_CASE("stdd with p=1 and perpetual warm-up matches fixed(0.95) on step 0") {
    StddConfig cfg;
    cfg.threshold.p_outer = cfg.threshold.p_inner = 1.0;
    cfg.dynamics.temporal_window = kUnbounded;
    cfg.feasibility.enabled = false;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        auto obs = constant_obs(40, 0.0);
        for (auto& c : obs.conf) c = u(rng);
        auto s = state_of(8, 40);
        ConfidenceHistory h(40, cfg.dynamics);
        h.record(obs);
        StddStrategy stdd(cfg);
        FixedThresholdStrategy fixed;
        stdd.begin(s);
        auto a = stdd.decide(s, obs, h);
        auto b = fixed.decide(s, obs, h);
        CHECK(a.decode == b.decode);
        CHECK(a.remask == b.remask);
    }
}

TEST_CASE("labels never outlive a run") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomWalkSource src(seed, 40);
        StddStrategy stdd;
        const auto r = run(src, stdd, state_of(8, 40, 64), {});
        CHECK(r.final_state.complete());
        CHECK(stdd.labels().active_count() == 0);
    }
}

TEST_CASE("zero margins and unbounded patience match feasibility off") {
    StddConfig neutral;
    neutral.feasibility.fast_margin = 0.0;
    neutral.feasibility.slow_margin = 0.0;
    neutral.feasibility.patience = kUnbounded;
    StddConfig off;
    off.feasibility.enabled = false;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        RandomWalkSource a(seed, 40), b(seed, 40);
        StddStrategy sa(neutral), sb(off);
        const auto ra = run(a, sa, state_of(8, 40, 64), {});
        const auto rb = run(b, sb, state_of(8, 40, 64), {});
        REQUIRE(ra.steps.size() == rb.steps.size());
        for (std::size_t t = 0; t < ra.steps.size(); ++t) {
            CHECK(ra.steps[t].decision.decode == rb.steps[t].decision.decode);
            CHECK(ra.steps[t].decision.remask == rb.steps[t].decision.remask);
        }
    }
}

TEST_CASE("stdd refuses a history too short for its window") {
    StddConfig cfg;
    cfg.dynamics.temporal_window = 10;
    StddStrategy stdd(cfg);
    auto s = state_of(4, 8);
    ConfidenceHistory h(8, {});
    const auto obs = constant_obs(8, 0.5);
    h.record(obs);
    stdd.begin(s);
    CHECK_THROWS_AS(stdd.decide(s, obs, h), structural_error);
}
