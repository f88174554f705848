#include "stdd/feasibility.hpp"

#include <algorithm>

#include "stdd/error.hpp"

namespace stdd::feasibility {

void FeasibilityConfig::validate() const {
    if (!(fast_margin >= 0.0 && fast_margin <= 1.0) || !(slow_margin >= 0.0 && slow_margin <= 1.0)) {
        throw config_error("feasibility margins must lie in [0,1]");
    }
    if (patience == 0) throw config_error("slow-token patience must be >= 1");
}

std::optional<SuspectedFast> maybe_label_fast(StepIndex step, double conf, double tau, TokenId argmax,
                                              const FeasibilityConfig& cfg) {
    if (!cfg.enabled || step >= cfg.start_steps) return std::nullopt;
    const double margin = conf - tau;
    if (margin >= 0.0 && margin <= cfg.fast_margin) {
        return SuspectedFast{step, argmax};
    }
    return std::nullopt;
}

FastAction check_fast(const SuspectedFast& label, TokenId observed, StepIndex step,
                      const FeasibilityConfig& cfg) {
    if (observed != label.content) return FastAction::Remask;
    if (step >= cfg.start_steps) return FastAction::ClearLabel;
    return FastAction::Keep;
}

SlowUpdate update_slow(std::optional<SuspectedSlow>& label, double conf, double tau,
                       const FeasibilityConfig& cfg) {
    const double margin = tau - conf;
    if (!cfg.enabled || !(margin >= 0.0 && margin <= cfg.slow_margin)) {
        label.reset();
        return {};
    }
    const std::size_t count = (label ? label->consecutive : 0) + 1;
    if (count >= cfg.patience) {
        label.reset();
        return {SlowUpdate::Kind::ForceDecode, count};
    }
    label = SuspectedSlow{count};
    return {SlowUpdate::Kind::Labeled, count};
}

std::optional<SuspectedSlow> LabelTable::slow(Position pos) const {
    if (const auto* s = std::get_if<SuspectedSlow>(&labels_.at(pos))) return *s;
    return std::nullopt;
}

void LabelTable::clear_all() {
    std::fill(labels_.begin(), labels_.end(), TokenLabel{});
}

std::size_t LabelTable::active_count() const noexcept {
    return static_cast<std::size_t>(std::count_if(labels_.begin(), labels_.end(), [](const TokenLabel& l) {
        return !std::holds_alternative<std::monostate>(l);
    }));
}

std::vector<Position> LabelTable::fast_positions() const {
    std::vector<Position> out;
    for (Position p = 0; p < labels_.size(); ++p) {
        if (std::holds_alternative<SuspectedFast>(labels_[p])) out.push_back(p);
    }
    return out;
}

}  // namespace stdd::feasibility
