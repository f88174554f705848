#include "doctest.h"
#include "stdd/error.hpp"
#include "stdd/feasibility.hpp"

using namespace stdd;
using namespace stdd::feasibility;

TEST_CASE("fast labels only near the threshold during warm-up") {
    const FeasibilityConfig cfg;
    const auto label = maybe_label_fast(3, 0.96, 0.90, 42, cfg);
    REQUIRE(label.has_value());
    CHECK(label->content == 42);
    CHECK(label->labeled_at == 3);
    CHECK_FALSE(maybe_label_fast(12, 0.91, 0.90, 42, cfg));
    CHECK_FALSE(maybe_label_fast(3, 0.99, 0.80, 42, cfg));
    CHECK(maybe_label_fast(3, 0.90, 0.90, 42, cfg));
    CHECK_FALSE(maybe_label_fast(3, 0.85, 0.90, 42, cfg));
    FeasibilityConfig off;
    off.enabled = false;
    CHECK_FALSE(maybe_label_fast(3, 0.96, 0.90, 42, off));
}

TEST_CASE("check_fast actions") {
    const FeasibilityConfig cfg;
    const SuspectedFast label{2, 42};
    CHECK(check_fast(label, 17, 5, cfg) == FastAction::Remask);
    CHECK(check_fast(label, 42, 10, cfg) == FastAction::ClearLabel);
    CHECK(check_fast(label, 42, 7, cfg) == FastAction::Keep);
}

TEST_CASE("slow counter forces a decode at patience") {
    const FeasibilityConfig cfg;
    std::optional<SuspectedSlow> label;
    auto u = update_slow(label, 0.85, 0.90, cfg);
    CHECK(u.kind == SlowUpdate::Kind::Labeled);
    CHECK(label->consecutive == 1);
    u = update_slow(label, 0.85, 0.90, cfg);
    CHECK(label->consecutive == 2);
    u = update_slow(label, 0.85, 0.90, cfg);
    CHECK(u.kind == SlowUpdate::Kind::ForceDecode);
    CHECK(u.consecutive == 3);
    CHECK_FALSE(label.has_value());
}

TEST_CASE("slow counter resets outside the margin") {
    const FeasibilityConfig cfg;
    std::optional<SuspectedSlow> label = SuspectedSlow{2};
    const auto u = update_slow(label, 0.60, 0.90, cfg);
    CHECK(u.kind == SlowUpdate::Kind::None);
    CHECK_FALSE(label.has_value());
    label = SuspectedSlow{2};
    update_slow(label, 0.95, 0.90, cfg);
    CHECK_FALSE(label.has_value());
}

TEST_CASE("unbounded patience never forces") {
    FeasibilityConfig cfg;
    cfg.patience = kUnbounded;
    std::optional<SuspectedSlow> label;
    for (int i = 0; i < 100; ++i) CHECK(update_slow(label, 0.85, 0.90, cfg).kind == SlowUpdate::Kind::Labeled);
}

TEST_CASE("config validation") {
    FeasibilityConfig cfg;
    cfg.patience = 0;
    CHECK_THROWS_AS(cfg.validate(), config_error);
    cfg = {};
    cfg.fast_margin = -0.1;
    CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("label table holds one label per position") {
    LabelTable t(6);
    t.set(2, SuspectedFast{0, 9});
    t.set(4, SuspectedSlow{1});
    CHECK(t.active_count() == 2);
    CHECK(t.fast_positions() == std::vector<Position>{2});
    CHECK(t.slow(4)->consecutive == 1);
    t.set(2, SuspectedSlow{1});
    CHECK(t.fast(2) == nullptr);
    t.clear_all();
    CHECK(t.active_count() == 0);
}
