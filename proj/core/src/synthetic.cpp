#include "stdd/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "json.hpp"
#include "stdd/error.hpp"

namespace stdd::sim {

using nlohmann::json;

namespace {

// Distribution helpers with a fixed algorithm, so corpora are identical across
// standard library implementations.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
}

double standard_normal(std::mt19937_64& rng) {
    const double u1 = 1.0 - uniform01(rng);  // (0, 1]
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::mt19937_64 step_rng(std::uint64_t seed, StepIndex step) {
    const auto s = static_cast<std::uint64_t>(step);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(s >> 32), 0x5744u};
    return std::mt19937_64(seq);
}

TokenId random_token(std::mt19937_64& rng, TokenId vocab) {
    return static_cast<TokenId>(rng() % static_cast<std::uint64_t>(vocab));
}

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

std::string_view archetype_name(const Archetype& a) noexcept {
    switch (a.index()) {
        case 0: return "normal";
        case 1: return "static";
        default: return "unstable";
    }
}

void SynthSpec::validate() const {
    if (prompt.empty()) throw config_error("synthetic spec needs a non-empty prompt");
    if (archetypes.empty()) throw config_error("synthetic spec needs a non-empty generation region");
    if (ground_truth.size() != archetypes.size()) {
        throw config_error("ground_truth has " + std::to_string(ground_truth.size()) + " entries for " +
                           std::to_string(archetypes.size()) + " generation positions");
    }
    if (max_steps == 0) throw config_error("max_steps must be >= 1");
    if (!(noise_sigma >= 0.0)) throw config_error("noise_sigma must be non-negative");
    if (!unit(shape.floor) || !unit(shape.unstable_floor) || !unit(shape.settled_conf) || !(shape.rise_rate > 0.0)) {
        throw config_error("trajectory shape out of range");
    }
    if (coupling.advance_on_decode < 0.0 || coupling.penalty_on_wrong < 0.0) {
        throw config_error("coupling magnitudes must be non-negative");
    }
    for (std::size_t k = 0; k < archetypes.size(); ++k) {
        const auto where = " (generation offset " + std::to_string(k) + ")";
        if (const auto* n = std::get_if<NormalToken>(&archetypes[k])) {
            if (n->onset_step >= max_steps) throw config_error("onset_step >= max_steps" + where);
            if (!unit(n->plateau)) throw config_error("plateau outside [0,1]" + where);
        } else if (const auto* s = std::get_if<StaticToken>(&archetypes[k])) {
            if (!(s->base_conf >= 0.0 && s->base_conf < 0.95)) {
                throw config_error("static base_conf must lie in [0, 0.95)" + where);
            }
        } else {
            const auto& u = std::get<UnstableToken>(archetypes[k]);
            if (u.settle_step >= max_steps) throw config_error("settle_step >= max_steps" + where);
            if (u.decoy_tokens.empty()) throw config_error("unstable token needs decoys" + where);
            if (!unit(u.spike_peak)) throw config_error("spike_peak outside [0,1]" + where);
            for (std::size_t i = 0; i < u.spike_steps.size(); ++i) {
                if (i > 0 && u.spike_steps[i] <= u.spike_steps[i - 1]) {
                    throw config_error("spike_steps must be strictly increasing" + where);
                }
                if (u.spike_steps[i] >= u.settle_step) throw config_error("spike after settle_step" + where);
            }
            for (TokenId d : u.decoy_tokens) {
                if (d == ground_truth[k]) throw config_error("decoy equals ground truth" + where);
            }
        }
    }
}

void SynthTemplate::validate() const {
    if (prompt_len == 0 || gen_len == 0 || max_steps == 0) {
        throw config_error("prompt_len, gen_len and max_steps must be >= 1");
    }
    if (static_fraction < 0.0 || unstable_fraction < 0.0 || normal_fraction() < -1e-12) {
        throw config_error("archetype fractions must be non-negative and sum to at most 1");
    }
    if (!(window_speed > 0.0)) throw config_error("window_speed must be positive");
    if (plateau_min > plateau_max || static_conf_min > static_conf_max || spikes_min > spikes_max ||
        spike_peak_min > spike_peak_max || settle_min > settle_max) {
        throw config_error("template range with min > max");
    }
    if (!unit(plateau_min) || !unit(plateau_max) || !unit(spike_peak_min) || !unit(spike_peak_max)) {
        throw config_error("template confidence range outside [0,1]");
    }
    if (!(static_conf_max < 0.95) || static_conf_min < 0.0) {
        throw config_error("static confidence range must lie in [0, 0.95)");
    }
    if (spikes_max > spike_window) throw config_error("spike_window too small for spikes_max");
    if (spike_window > settle_min) throw config_error("spike_window must not exceed settle_min");
    if (settle_max >= max_steps) throw config_error("settle_max must be < max_steps");
    if (vocab_size < 8) throw config_error("vocab_size must be >= 8");
}

SynthSpec make_synth_spec(const SynthTemplate& tmpl, std::uint64_t seed) {
    tmpl.validate();
    std::mt19937_64 rng(seed);

    SynthSpec spec;
    spec.seed = seed;
    spec.max_steps = tmpl.max_steps;
    spec.window_speed = tmpl.window_speed;
    spec.coupling = tmpl.coupling;
    spec.noise_sigma = tmpl.noise_sigma;
    spec.shape = tmpl.shape;

    spec.prompt.resize(tmpl.prompt_len);
    for (auto& t : spec.prompt) t = random_token(rng, tmpl.vocab_size);

    const auto n = tmpl.gen_len;
    const auto n_static = static_cast<std::size_t>(std::llround(tmpl.static_fraction * static_cast<double>(n)));
    const auto n_unstable =
        std::min(n - n_static,
                 static_cast<std::size_t>(std::llround(tmpl.unstable_fraction * static_cast<double>(n))));
    std::vector<int> kinds(n, 0);
    std::fill(kinds.begin(), kinds.begin() + static_cast<std::ptrdiff_t>(n_static), 1);
    std::fill(kinds.begin() + static_cast<std::ptrdiff_t>(n_static),
              kinds.begin() + static_cast<std::ptrdiff_t>(n_static + n_unstable), 2);
    // Fisher-Yates with the portable index helper.
    for (std::size_t i = n; i > 1; --i) std::swap(kinds[i - 1], kinds[uniform_index(rng, 0, i - 1)]);

    spec.ground_truth.resize(n);
    for (auto& t : spec.ground_truth) t = random_token(rng, tmpl.vocab_size);

    spec.archetypes.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (kinds[k] == 0) {
            const auto jitter = static_cast<long long>(uniform_index(rng, 0, 2 * tmpl.onset_jitter)) -
                                static_cast<long long>(tmpl.onset_jitter);
            const auto base = static_cast<long long>(std::floor(static_cast<double>(k) / tmpl.window_speed));
            const auto onset = std::clamp<long long>(base + jitter, 0, static_cast<long long>(tmpl.max_steps) - 1);
            spec.archetypes.emplace_back(
                NormalToken{static_cast<StepIndex>(onset), uniform(rng, tmpl.plateau_min, tmpl.plateau_max)});
        } else if (kinds[k] == 1) {
            spec.archetypes.emplace_back(StaticToken{uniform(rng, tmpl.static_conf_min, tmpl.static_conf_max)});
        } else {
            UnstableToken u;
            const auto spikes = uniform_index(rng, tmpl.spikes_min, tmpl.spikes_max);
            std::vector<StepIndex> slots(tmpl.spike_window);
            for (std::size_t i = 0; i < slots.size(); ++i) slots[i] = i;
            for (std::size_t i = 0; i < spikes; ++i) {
                std::swap(slots[i], slots[uniform_index(rng, i, slots.size() - 1)]);
            }
            u.spike_steps.assign(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(spikes));
            std::sort(u.spike_steps.begin(), u.spike_steps.end());
            u.settle_step = uniform_index(rng, tmpl.settle_min, tmpl.settle_max);
            u.spike_peak = uniform(rng, tmpl.spike_peak_min, tmpl.spike_peak_max);
            while (u.decoy_tokens.size() < spikes + 1) {
                const TokenId d = random_token(rng, tmpl.vocab_size);
                if (d != spec.ground_truth[k] &&
                    std::find(u.decoy_tokens.begin(), u.decoy_tokens.end(), d) == u.decoy_tokens.end()) {
                    u.decoy_tokens.push_back(d);
                }
            }
            spec.archetypes.emplace_back(std::move(u));
        }
    }
    spec.validate();
    return spec;
}

double normal_confidence(const NormalToken& token, const TrajectoryShape& shape, double offset) {
    return shape.floor + (token.plateau - shape.floor) / (1.0 + std::exp(-shape.rise_rate * offset));
}

double effective_onset(const SynthSpec& spec, const SequenceState& state, std::size_t gen_index) {
    const auto& normal = std::get<NormalToken>(spec.archetypes.at(gen_index));
    double onset = static_cast<double>(normal.onset_step);
    if (!spec.coupling.enabled) return onset;
    const std::size_t first = gen_index > spec.coupling.radius ? gen_index - spec.coupling.radius : 0;
    for (std::size_t k = first; k < gen_index; ++k) {
        const auto& slot = state.status(spec.prompt_len() + k);
        if (!slot) continue;
        onset -= spec.coupling.advance_on_decode;
        if (slot->token != spec.ground_truth[k]) onset += spec.coupling.penalty_on_wrong;
    }
    return onset;
}

StepObservation synth_observe(const SynthSpec& spec, const SequenceState& state, StepIndex step) {
    StepObservation obs;
    obs.t = step;
    obs.token.resize(spec.seq_len());
    obs.conf.resize(spec.seq_len());
    for (std::size_t i = 0; i < spec.prompt_len(); ++i) {
        obs.token[i] = spec.prompt[i];
        obs.conf[i] = 1.0;
    }

    auto rng = step_rng(spec.seed, step);
    const auto t = static_cast<double>(step);
    for (std::size_t k = 0; k < spec.gen_len(); ++k) {
        const double noise = spec.noise_sigma * standard_normal(rng);
        const Position pos = spec.prompt_len() + k;
        double conf = 0.0;
        TokenId token = spec.ground_truth[k];
        if (const auto* n = std::get_if<NormalToken>(&spec.archetypes[k])) {
            conf = normal_confidence(*n, spec.shape, t - effective_onset(spec, state, k));
        } else if (const auto* s = std::get_if<StaticToken>(&spec.archetypes[k])) {
            conf = s->base_conf;
        } else {
            const auto& u = std::get<UnstableToken>(spec.archetypes[k]);
            if (step >= u.settle_step) {
                conf = spec.shape.settled_conf;
            } else {
                const auto seen = static_cast<std::size_t>(
                    std::upper_bound(u.spike_steps.begin(), u.spike_steps.end(), step) - u.spike_steps.begin());
                const bool spiking = seen > 0 && u.spike_steps[seen - 1] == step;
                conf = spiking ? u.spike_peak : spec.shape.unstable_floor;
                token = u.decoy_tokens[seen % u.decoy_tokens.size()];
            }
        }
        obs.token[pos] = token;
        obs.conf[pos] = std::clamp(conf + noise, 0.0, 1.0);
    }
    return obs;
}

SequenceState initial_state(const SynthSpec& spec) {
    return SequenceState(spec.prompt, spec.seq_len(), spec.max_steps);
}

SyntheticSource::SyntheticSource(SynthSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

StepObservation SyntheticSource::observe(const SequenceState& state) {
    return synth_observe(spec_, state, state.step());
}

// ---- serialization ---------------------------------------------------------

namespace {

json coupling_json(const Coupling& c) {
    return {{"enabled", c.enabled},
            {"advance_on_decode", c.advance_on_decode},
            {"penalty_on_wrong", c.penalty_on_wrong},
            {"radius", c.radius}};
}

Coupling coupling_from(const json& j, Coupling c = {}) {
    c.enabled = j.value("enabled", c.enabled);
    c.advance_on_decode = j.value("advance_on_decode", c.advance_on_decode);
    c.penalty_on_wrong = j.value("penalty_on_wrong", c.penalty_on_wrong);
    c.radius = j.value("radius", c.radius);
    return c;
}

json shape_json(const TrajectoryShape& s) {
    return {{"floor", s.floor},
            {"rise_rate", s.rise_rate},
            {"unstable_floor", s.unstable_floor},
            {"settled_conf", s.settled_conf}};
}

TrajectoryShape shape_from(const json& j, TrajectoryShape s = {}) {
    s.floor = j.value("floor", s.floor);
    s.rise_rate = j.value("rise_rate", s.rise_rate);
    s.unstable_floor = j.value("unstable_floor", s.unstable_floor);
    s.settled_conf = j.value("settled_conf", s.settled_conf);
    return s;
}

json parse_object(std::string_view text, const char* what) {
    json j = json::parse(text.begin(), text.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw validation_error(std::string(what) + " is not a JSON object");
    }
    return j;
}

}  // namespace

std::string to_json(const SynthSpec& spec) {
    json tokens = json::array();
    for (std::size_t k = 0; k < spec.gen_len(); ++k) {
        json t;
        if (const auto* n = std::get_if<NormalToken>(&spec.archetypes[k])) {
            t = {{"kind", "normal"}, {"onset_step", n->onset_step}, {"plateau", n->plateau}};
        } else if (const auto* s = std::get_if<StaticToken>(&spec.archetypes[k])) {
            t = {{"kind", "static"}, {"base_conf", s->base_conf}};
        } else {
            const auto& u = std::get<UnstableToken>(spec.archetypes[k]);
            t = {{"kind", "unstable"},
                 {"spike_steps", u.spike_steps},
                 {"settle_step", u.settle_step},
                 {"decoy_tokens", u.decoy_tokens},
                 {"spike_peak", u.spike_peak}};
        }
        t["truth"] = spec.ground_truth[k];
        tokens.push_back(std::move(t));
    }
    json j = {{"type", "synth-spec"},
              {"version", 1},
              {"seed", spec.seed},
              {"max_steps", spec.max_steps},
              {"prompt", spec.prompt},
              {"window_speed", spec.window_speed},
              {"noise_sigma", spec.noise_sigma},
              {"coupling", coupling_json(spec.coupling)},
              {"shape", shape_json(spec.shape)},
              {"tokens", std::move(tokens)}};
    return j.dump();
}

SynthSpec synth_spec_from_json(std::string_view text) {
    const json j = parse_object(text, "synthetic spec");
    if (j.value("type", "") != "synth-spec") throw validation_error("not a synth-spec document");
    SynthSpec spec;
    try {
        spec.seed = j.at("seed").get<std::uint64_t>();
        spec.max_steps = j.at("max_steps").get<std::size_t>();
        spec.prompt = j.at("prompt").get<std::vector<TokenId>>();
        spec.window_speed = j.value("window_speed", 1.0);
        spec.noise_sigma = j.value("noise_sigma", 0.0);
        spec.coupling = coupling_from(j.value("coupling", json::object()));
        spec.shape = shape_from(j.value("shape", json::object()));
        for (const auto& t : j.at("tokens")) {
            const auto kind = t.at("kind").get<std::string>();
            if (kind == "normal") {
                spec.archetypes.emplace_back(
                    NormalToken{t.at("onset_step").get<StepIndex>(), t.value("plateau", 0.98)});
            } else if (kind == "static") {
                spec.archetypes.emplace_back(StaticToken{t.at("base_conf").get<double>()});
            } else if (kind == "unstable") {
                spec.archetypes.emplace_back(UnstableToken{t.at("spike_steps").get<std::vector<StepIndex>>(),
                                                           t.at("settle_step").get<StepIndex>(),
                                                           t.at("decoy_tokens").get<std::vector<TokenId>>(),
                                                           t.value("spike_peak", 0.97)});
            } else {
                throw validation_error("unknown archetype '" + kind + "'");
            }
            spec.ground_truth.push_back(t.at("truth").get<TokenId>());
        }
    } catch (const json::exception& e) {
        throw validation_error(std::string("synthetic spec: ") + e.what());
    }
    try {
        spec.validate();
    } catch (const config_error& e) {
        throw validation_error(e.what());
    }
    return spec;
}

std::string to_json(const SynthTemplate& t) {
    json j = {{"type", "synth-template"},
              {"prompt_len", t.prompt_len},
              {"gen_len", t.gen_len},
              {"max_steps", t.max_steps},
              {"static_fraction", t.static_fraction},
              {"unstable_fraction", t.unstable_fraction},
              {"window_speed", t.window_speed},
              {"onset_jitter", t.onset_jitter},
              {"plateau_min", t.plateau_min},
              {"plateau_max", t.plateau_max},
              {"static_conf_min", t.static_conf_min},
              {"static_conf_max", t.static_conf_max},
              {"spikes_min", t.spikes_min},
              {"spikes_max", t.spikes_max},
              {"spike_window", t.spike_window},
              {"spike_peak_min", t.spike_peak_min},
              {"spike_peak_max", t.spike_peak_max},
              {"settle_min", t.settle_min},
              {"settle_max", t.settle_max},
              {"coupling", coupling_json(t.coupling)},
              {"noise_sigma", t.noise_sigma},
              {"shape", shape_json(t.shape)},
              {"vocab_size", t.vocab_size}};
    return j.dump();
}

SynthTemplate synth_template_from_json(std::string_view text) {
    const json j = parse_object(text, "synthetic template");
    SynthTemplate t;
    try {
        t.prompt_len = j.value("prompt_len", t.prompt_len);
        t.gen_len = j.value("gen_len", t.gen_len);
        t.max_steps = j.value("max_steps", t.max_steps);
        t.static_fraction = j.value("static_fraction", t.static_fraction);
        t.unstable_fraction = j.value("unstable_fraction", t.unstable_fraction);
        t.window_speed = j.value("window_speed", t.window_speed);
        t.onset_jitter = j.value("onset_jitter", t.onset_jitter);
        t.plateau_min = j.value("plateau_min", t.plateau_min);
        t.plateau_max = j.value("plateau_max", t.plateau_max);
        t.static_conf_min = j.value("static_conf_min", t.static_conf_min);
        t.static_conf_max = j.value("static_conf_max", t.static_conf_max);
        t.spikes_min = j.value("spikes_min", t.spikes_min);
        t.spikes_max = j.value("spikes_max", t.spikes_max);
        t.spike_window = j.value("spike_window", t.spike_window);
        t.spike_peak_min = j.value("spike_peak_min", t.spike_peak_min);
        t.spike_peak_max = j.value("spike_peak_max", t.spike_peak_max);
        t.settle_min = j.value("settle_min", t.settle_min);
        t.settle_max = j.value("settle_max", t.settle_max);
        t.coupling = coupling_from(j.value("coupling", json::object()), t.coupling);
        t.noise_sigma = j.value("noise_sigma", t.noise_sigma);
        t.shape = shape_from(j.value("shape", json::object()), t.shape);
        t.vocab_size = j.value("vocab_size", t.vocab_size);
    } catch (const json::exception& e) {
        throw validation_error(std::string("synthetic template: ") + e.what());
    }
    try {
        t.validate();
    } catch (const config_error& e) {
        throw validation_error(e.what());
    }
    return t;
}

}  // namespace stdd::sim
