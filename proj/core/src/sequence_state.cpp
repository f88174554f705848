#include "stdd/sequence_state.hpp"

#include <string>

#include "stdd/error.hpp"

namespace stdd {

void StepObservation::validate(std::size_t seq_len) const {
    if (token.size() != seq_len || conf.size() != seq_len) {
        throw structural_error("observation for step " + std::to_string(t) + " has " +
                               std::to_string(token.size()) + " tokens and " +
                               std::to_string(conf.size()) + " confidences, expected " +
                               std::to_string(seq_len));
    }
    for (std::size_t i = 0; i < conf.size(); ++i) {
        if (!(conf[i] >= 0.0 && conf[i] <= 1.0)) {
            throw structural_error("confidence at position " + std::to_string(i) + " of step " +
                                   std::to_string(t) + " is outside [0,1]");
        }
    }
}

SequenceState::SequenceState(std::span<const TokenId> prompt, std::size_t seq_len, std::size_t max_steps)
    : prompt_len_(prompt.size()), max_steps_(max_steps), slots_(seq_len) {
    if (prompt_len_ == 0 || prompt_len_ >= seq_len) {
        throw structural_error("need 0 < prompt_len < seq_len, got prompt_len=" + std::to_string(prompt_len_) +
                               " seq_len=" + std::to_string(seq_len));
    }
    if (max_steps_ == 0) {
        throw structural_error("max_steps must be at least 1");
    }
    for (std::size_t i = 0; i < prompt_len_; ++i) {
        slots_[i] = Decoded{prompt[i], 0};
    }
    masked_ = seq_len - prompt_len_;
}

void SequenceState::check_position(Position pos) const {
    if (pos >= slots_.size()) {
        throw structural_error("position " + std::to_string(pos) + " out of range (seq_len " +
                               std::to_string(slots_.size()) + ")");
    }
}

bool SequenceState::is_masked(Position pos) const {
    check_position(pos);
    return !slots_[pos].has_value();
}

const std::optional<Decoded>& SequenceState::status(Position pos) const {
    check_position(pos);
    return slots_[pos];
}

void SequenceState::commit_decode(Position pos, TokenId token) {
    check_position(pos);
    if (is_prompt(pos)) {
        throw illegal_operation("cannot decode prompt position " + std::to_string(pos));
    }
    if (slots_[pos]) {
        throw illegal_operation("position " + std::to_string(pos) + " is already decoded");
    }
    slots_[pos] = Decoded{token, step_};
    --masked_;
}

void SequenceState::revert_to_mask(Position pos) {
    check_position(pos);
    if (is_prompt(pos)) {
        throw illegal_operation("cannot remask prompt position " + std::to_string(pos));
    }
    if (!slots_[pos]) {
        throw illegal_operation("position " + std::to_string(pos) + " is already masked");
    }
    slots_[pos].reset();
    ++masked_;
}

void SequenceState::advance_step() {
    if (step_ + 1 > max_steps_) {
        throw illegal_operation("step budget of " + std::to_string(max_steps_) + " exhausted");
    }
    ++step_;
}

double SequenceState::decoded_fraction() const noexcept {
    return static_cast<double>(decoded_generation_count()) / static_cast<double>(gen_len());
}

std::vector<Position> SequenceState::masked_positions() const {
    std::vector<Position> out;
    out.reserve(masked_);
    for (Position p = prompt_len_; p < slots_.size(); ++p) {
        if (!slots_[p]) out.push_back(p);
    }
    return out;
}

std::vector<std::optional<TokenId>> SequenceState::generated_tokens() const {
    std::vector<std::optional<TokenId>> out;
    out.reserve(gen_len());
    for (Position p = prompt_len_; p < slots_.size(); ++p) {
        out.push_back(slots_[p] ? std::optional<TokenId>(slots_[p]->token) : std::nullopt);
    }
    return out;
}

}  // namespace stdd
