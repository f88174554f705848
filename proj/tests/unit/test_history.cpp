#include "doctest.h"
#include "stdd/confidence_history.hpp"

using namespace stdd;

namespace {

StepObservation obs_with(std::size_t n, double c, StepIndex t = 0) {
    return {t, std::vector<TokenId>(n, 0), std::vector<double>(n, c)};
}

}  // namespace

TEST_CASE("variance accrues once the temporal window is full") {
    dynamics::DynamicsConfig cfg;
    cfg.temporal_window = 2;
    ConfidenceHistory h(4, cfg);
    h.record(obs_with(4, 0.5));
    h.record(obs_with(4, 0.7, 1));
    CHECK(h.whole_variance(1) == 0.0);
    h.record(obs_with(4, 0.9, 2));
    CHECK(h.whole_variance(1) == doctest::Approx(0.3).epsilon(1e-12));
    const auto win = h.window(1);
    REQUIRE(win.size() == 3);
    CHECK(win[1] == 0.7);
    CHECK(win[2] == 0.9);
}

TEST_CASE("first sample leaves variance untouched") {
    ConfidenceHistory h(4, {});
    h.record(obs_with(4, 0.4));
    CHECK(h.window(0) == std::vector<double>{0.4});
    CHECK(h.whole_variance(0) == 0.0);
    CHECK(h.samples_seen(0) == 1);
}

TEST_CASE("constant stream has zero variance") {
    ConfidenceHistory h(6, {});
    for (StepIndex t = 0; t < 10; ++t) h.record(obs_with(6, 0.8, t));
    for (Position p = 0; p < 6; ++p) CHECK(h.whole_variance(p) == 0.0);
}

TEST_CASE("window is bounded by capacity and kept in arrival order") {
    dynamics::DynamicsConfig cfg;
    cfg.temporal_window = 3;
    ConfidenceHistory h(2, cfg);
    CHECK(h.capacity() == 8);
    for (StepIndex t = 0; t < 20; ++t) {
        auto o = obs_with(2, 0.0, t);
        o.conf[0] = static_cast<double>(t) / 20.0;
        h.record(o);
        const auto win = h.window(0);
        CHECK(win.size() == std::min<std::size_t>(t + 1, 8));
        CHECK(win.back() == o.conf[0]);
        for (std::size_t i = 1; i < win.size(); ++i) CHECK(win[i - 1] < win[i]);
    }
    CHECK(h.previous(0).size() == 7);
}

TEST_CASE("large temporal windows get enough capacity") {
    dynamics::DynamicsConfig cfg;
    cfg.temporal_window = 12;
    CHECK(ConfidenceHistory(2, cfg).capacity() == 13);
    cfg.temporal_window = kUnbounded;
    CHECK(ConfidenceHistory(2, cfg).capacity() == 8);
}

TEST_CASE("accumulators are non-negative and non-decreasing") {
    ConfidenceHistory h(5, {});
    std::vector<double> last_v(5, 0.0), last_d(5, 0.0);
    for (StepIndex t = 0; t < 12; ++t) {
        auto o = obs_with(5, 0.0, t);
        for (Position p = 0; p < 5; ++p) o.conf[p] = ((t * 7 + p * 3) % 10) / 10.0;
        h.record(o);
        for (Position p = 0; p < 5; ++p) {
            CHECK(h.whole_variance(p) >= last_v[p]);
            CHECK(h.whole_deviance(p) >= last_d[p]);
            last_v[p] = h.whole_variance(p);
            last_d[p] = h.whole_deviance(p);
        }
    }
}
