#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stdd/scheduler.hpp"

namespace stdd::sim {

// Single logistic rise from shape.floor to `plateau`, centred at onset_step.
struct NormalToken {
    StepIndex onset_step = 0;
    double plateau = 0.98;

    bool operator==(const NormalToken&) const = default;
};

// Persistently low confidence; argmax is the ground truth from the start.
struct StaticToken {
    double base_conf = 0.3;

    bool operator==(const StaticToken&) const = default;
};

// Low confidence with pulses at spike_steps. Before settle_step the argmax is a
// decoy: decoy_tokens[k mod n] where k spikes have happened so far. From
// settle_step on it is the ground truth at shape.settled_conf.
struct UnstableToken {
    std::vector<StepIndex> spike_steps;
    StepIndex settle_step = 0;
    std::vector<TokenId> decoy_tokens;
    double spike_peak = 0.97;

    bool operator==(const UnstableToken&) const = default;
};

using Archetype = std::variant<NormalToken, StaticToken, UnstableToken>;

std::string_view archetype_name(const Archetype& a) noexcept;

// Decode feedback on Normal tokens: each decoded generation position among the
// `radius` positions to the left moves the onset earlier by advance_on_decode
// steps; each of those holding a wrong token moves it later by
// penalty_on_wrong steps.
struct Coupling {
    bool enabled = true;
    double advance_on_decode = 2.0;
    double penalty_on_wrong = 4.0;
    std::size_t radius = 2;

    bool operator==(const Coupling&) const = default;
};

struct TrajectoryShape {
    double floor = 0.1;
    double rise_rate = 1.0;
    double unstable_floor = 0.3;
    double settled_conf = 0.98;

    bool operator==(const TrajectoryShape&) const = default;
};

// A fully resolved synthetic sequence: every generation position carries its
// archetype and ground-truth token.
struct SynthSpec {
    std::uint64_t seed = 0;
    std::size_t max_steps = 64;
    std::vector<TokenId> prompt;
    std::vector<Archetype> archetypes;
    std::vector<TokenId> ground_truth;
    double window_speed = 1.0;
    Coupling coupling;
    double noise_sigma = 0.0;
    TrajectoryShape shape;

    std::size_t prompt_len() const noexcept { return prompt.size(); }
    std::size_t gen_len() const noexcept { return archetypes.size(); }
    std::size_t seq_len() const noexcept { return prompt.size() + archetypes.size(); }

    // Throws config_error on a broken invariant.
    void validate() const;
    bool operator==(const SynthSpec&) const = default;
};

// Recipe for drawing SynthSpecs. All ranges are inclusive.
struct SynthTemplate {
    std::size_t prompt_len = 16;
    std::size_t gen_len = 64;
    std::size_t max_steps = 64;

    double static_fraction = 0.15;
    double unstable_fraction = 0.15;

    // Normal onsets follow a decoding window sweeping this many positions per
    // step, jittered by up to +-onset_jitter steps.
    double window_speed = 2.0;
    std::size_t onset_jitter = 2;
    double plateau_min = 0.85;
    double plateau_max = 0.99;

    double static_conf_min = 0.2;
    double static_conf_max = 0.5;

    std::size_t spikes_min = 1;
    std::size_t spikes_max = 3;
    StepIndex spike_window = 12;
    double spike_peak_min = 0.95;
    double spike_peak_max = 0.99;
    StepIndex settle_min = 20;
    StepIndex settle_max = 40;

    Coupling coupling;
    double noise_sigma = 0.02;
    TrajectoryShape shape;
    TokenId vocab_size = 32000;

    double normal_fraction() const noexcept { return 1.0 - static_fraction - unstable_fraction; }
    void validate() const;
    bool operator==(const SynthTemplate&) const = default;
};

// Deterministic in (tmpl, seed).
SynthSpec make_synth_spec(const SynthTemplate& tmpl, std::uint64_t seed);

// Noise-free confidence of a Normal token `offset` steps after its (effective)
// onset.
double normal_confidence(const NormalToken& token, const TrajectoryShape& shape, double offset);

// Effective onset of a Normal token given the current decode state.
double effective_onset(const SynthSpec& spec, const SequenceState& state, std::size_t gen_index);

// Observation for `step`; a pure function of (spec, state, step).
StepObservation synth_observe(const SynthSpec& spec, const SequenceState& state, StepIndex step);

// Initial state: prompt decoded, generation masked, budget spec.max_steps.
SequenceState initial_state(const SynthSpec& spec);

class SyntheticSource final : public ConfidenceSource {
public:
    explicit SyntheticSource(SynthSpec spec);

    StepObservation observe(const SequenceState& state) override;
    const SynthSpec& spec() const noexcept { return spec_; }

private:
    SynthSpec spec_;
};

// Single-line JSON form used by corpus files and embedded configs.
std::string to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(std::string_view text);
std::string to_json(const SynthTemplate& tmpl);
SynthTemplate synth_template_from_json(std::string_view text);

}  // namespace stdd::sim
