#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "stdd/types.hpp"

namespace stdd::feasibility {

struct FeasibilityConfig {
    bool enabled = true;
    // Warm-up length during which near-threshold decodes are monitored.
    std::size_t start_steps = 10;
    double fast_margin = 0.1;
    double slow_margin = 0.1;
    // Consecutive near-miss steps before a masked token is force-decoded.
    std::size_t patience = 3;

    void validate() const;
    bool operator==(const FeasibilityConfig&) const = default;
};

// A token decoded just above its threshold during warm-up; its argmax is
// watched and the token is remasked if it changes.
struct SuspectedFast {
    StepIndex labeled_at;
    TokenId content;

    bool operator==(const SuspectedFast&) const = default;
};

// A masked token that keeps landing just below its threshold.
struct SuspectedSlow {
    std::size_t consecutive = 0;

    bool operator==(const SuspectedSlow&) const = default;
};

using TokenLabel = std::variant<std::monostate, SuspectedFast, SuspectedSlow>;

std::optional<SuspectedFast> maybe_label_fast(StepIndex step, double conf, double tau,
                                              TokenId argmax, const FeasibilityConfig& cfg);

enum class FastAction { Keep, Remask, ClearLabel };

FastAction check_fast(const SuspectedFast& label, TokenId observed, StepIndex step,
                      const FeasibilityConfig& cfg);

struct SlowUpdate {
    enum class Kind { None, Labeled, ForceDecode };
    Kind kind = Kind::None;
    std::size_t consecutive = 0;
};

// Advances the near-miss counter of a masked token. `label` is the token's
// current slow label, if any, and is updated in place: created or incremented
// when 0 <= tau - conf <= slow_margin, cleared on ForceDecode or when the margin
// condition fails.
SlowUpdate update_slow(std::optional<SuspectedSlow>& label, double conf, double tau,
                       const FeasibilityConfig& cfg);

// Per-position label storage for one run; at most one label per position.
class LabelTable {
public:
    explicit LabelTable(std::size_t seq_len = 0) : labels_(seq_len) {}

    void resize(std::size_t seq_len) { labels_.assign(seq_len, std::monostate{}); }
    std::size_t size() const noexcept { return labels_.size(); }

    const TokenLabel& at(Position pos) const { return labels_.at(pos); }
    const SuspectedFast* fast(Position pos) const { return std::get_if<SuspectedFast>(&labels_.at(pos)); }
    std::optional<SuspectedSlow> slow(Position pos) const;

    void set(Position pos, TokenLabel label) { labels_.at(pos) = label; }
    void clear(Position pos) { labels_.at(pos) = std::monostate{}; }
    void clear_all();

    std::size_t active_count() const noexcept;
    std::vector<Position> fast_positions() const;

private:
    std::vector<TokenLabel> labels_;
};

}  // namespace stdd::feasibility
