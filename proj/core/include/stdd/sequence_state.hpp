#pragma once

#include <optional>
#include <span>
#include <vector>

#include "stdd/types.hpp"

namespace stdd {

// One denoiser step: the current argmax token and its confidence for every
// position, decoded or not.
struct StepObservation {
    StepIndex t = 0;
    std::vector<TokenId> token;
    std::vector<double> conf;

    // Throws structural_error unless both vectors have seq_len entries and
    // every confidence lies in [0,1].
    void validate(std::size_t seq_len) const;

    bool operator==(const StepObservation&) const = default;
};

struct Decoded {
    TokenId token;
    StepIndex decoded_at;

    bool operator==(const Decoded&) const = default;
};

// Mask/decoded status of a prompt + generation sequence. Prompt positions are
// decoded at step 0 and can never be remasked.
class SequenceState {
public:
    SequenceState(std::span<const TokenId> prompt, std::size_t seq_len, std::size_t max_steps);

    std::size_t prompt_len() const noexcept { return prompt_len_; }
    std::size_t seq_len() const noexcept { return slots_.size(); }
    std::size_t gen_len() const noexcept { return slots_.size() - prompt_len_; }
    StepIndex step() const noexcept { return step_; }
    std::size_t max_steps() const noexcept { return max_steps_; }

    bool is_prompt(Position pos) const noexcept { return pos < prompt_len_; }
    bool is_masked(Position pos) const;
    const std::optional<Decoded>& status(Position pos) const;

    void commit_decode(Position pos, TokenId token);
    void revert_to_mask(Position pos);

    // Moves to the next step; throws illegal_operation past max_steps.
    void advance_step();

    std::size_t masked_count() const noexcept { return masked_; }
    std::size_t decoded_generation_count() const noexcept { return gen_len() - masked_; }
    // Decoded share of the generation region (prompt excluded).
    double decoded_fraction() const noexcept;
    bool complete() const noexcept { return masked_ == 0; }

    std::vector<Position> masked_positions() const;
    // Committed tokens of the generation region; masked entries are nullopt.
    std::vector<std::optional<TokenId>> generated_tokens() const;

private:
    void check_position(Position pos) const;

    std::size_t prompt_len_;
    std::size_t max_steps_;
    StepIndex step_ = 0;
    std::size_t masked_;
    std::vector<std::optional<Decoded>> slots_;
};

}  // namespace stdd
