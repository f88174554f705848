#include "harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace stdd::harness {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) noexcept {
    if (dynamic_cast<const usage_error*>(&e) || dynamic_cast<const config_error*>(&e)) return kExitUsage;
    if (dynamic_cast<const validation_error*>(&e)) return kExitValidation;
    if (dynamic_cast<const io_error*>(&e)) return kExitIo;
    return kExitRuntime;
}

// ---- strategy configs ------------------------------------------------------

namespace {

json size_or_unbounded(std::size_t v) {
    return v == kUnbounded ? json("unbounded") : json(v);
}

std::size_t read_size(const json& j, const char* key, std::size_t fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (v.is_string() && v.get<std::string>() == "unbounded") return kUnbounded;
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw config_error(std::string(key) + " must be a non-negative integer or \"unbounded\"");
    return v.get<std::size_t>();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::unique_ptr<Strategy> make_strategy(const StrategyConfig& cfg) {
    if (cfg.name == "stdd") return std::make_unique<StddStrategy>(cfg.stdd);
    if (cfg.name == "fixed") return std::make_unique<FixedThresholdStrategy>(cfg.fixed_tau);
    if (cfg.name == "dus") return std::make_unique<DilatedUnmaskingStrategy>(cfg.dus_groups);
    throw usage_error("unknown strategy '" + cfg.name + "' (expected stdd, fixed or dus)");
}

json strategy_preset(const std::string& name) {
    if (name == "default") return {{"stdd", {{"temporal_window", 3}, {"feasibility", {{"slow_margin", 0.1}}}}}};
    if (name == "long-window") return {{"stdd", {{"temporal_window", 5}}}};
    if (name == "super-stall") return {{"stdd", {{"feasibility", {{"slow_margin", 0.05}}}}}};
    throw usage_error("unknown preset '" + name + "' (expected default, long-window or super-stall)");
}

std::vector<std::string> preset_names() { return {"default", "long-window", "super-stall"}; }

json to_json(const StrategyConfig& cfg) {
    const auto& s = cfg.stdd;
    return {{"name", cfg.name},
            {"fixed", {{"tau", cfg.fixed_tau}}},
            {"dus", {{"groups", cfg.dus_groups}}},
            {"stdd",
             {{"temporal_window", size_or_unbounded(s.dynamics.temporal_window)},
              {"neighbour_window", s.dynamics.neighbour_window},
              {"left_bias", s.dynamics.left_bias},
              {"warmup_threshold", s.threshold.warmup_threshold},
              {"p_outer", s.threshold.p_outer},
              {"p_inner", s.threshold.p_inner},
              {"lo", s.threshold.lo},
              {"hi", s.threshold.hi},
              {"boundary_mode", std::string(threshold::to_string(s.threshold.boundary_mode))},
              {"feasibility",
               {{"enabled", s.feasibility.enabled},
                {"start_steps", size_or_unbounded(s.feasibility.start_steps)},
                {"fast_margin", s.feasibility.fast_margin},
                {"slow_margin", s.feasibility.slow_margin},
                {"patience", size_or_unbounded(s.feasibility.patience)}}}}}};
}

StrategyConfig strategy_from_json(const json& j, StrategyConfig base) {
    if (!j.is_object()) throw config_error("strategy config must be an object");
    try {
        base.name = j.value("name", base.name);
        if (j.contains("fixed")) base.fixed_tau = j["fixed"].value("tau", base.fixed_tau);
        if (j.contains("dus")) base.dus_groups = j["dus"].value("groups", base.dus_groups);
        if (j.contains("stdd")) {
            const auto& s = j["stdd"];
            auto& c = base.stdd;
            c.dynamics.temporal_window = read_size(s, "temporal_window", c.dynamics.temporal_window);
            c.dynamics.neighbour_window = read_size(s, "neighbour_window", c.dynamics.neighbour_window);
            c.dynamics.left_bias = s.value("left_bias", c.dynamics.left_bias);
            c.threshold.warmup_threshold = s.value("warmup_threshold", c.threshold.warmup_threshold);
            c.threshold.p_outer = s.value("p_outer", c.threshold.p_outer);
            c.threshold.p_inner = s.value("p_inner", c.threshold.p_inner);
            c.threshold.lo = s.value("lo", c.threshold.lo);
            c.threshold.hi = s.value("hi", c.threshold.hi);
            if (s.contains("boundary_mode")) {
                c.threshold.boundary_mode = threshold::boundary_mode_from_string(s["boundary_mode"].get<std::string>());
            }
            if (s.contains("feasibility")) {
                const auto& f = s["feasibility"];
                c.feasibility.enabled = f.value("enabled", c.feasibility.enabled);
                c.feasibility.start_steps = read_size(f, "start_steps", c.feasibility.start_steps);
                c.feasibility.fast_margin = f.value("fast_margin", c.feasibility.fast_margin);
                c.feasibility.slow_margin = f.value("slow_margin", c.feasibility.slow_margin);
                c.feasibility.patience = read_size(f, "patience", c.feasibility.patience);
            }
        }
    } catch (const json::exception& e) {
        throw config_error(std::string("strategy config: ") + e.what());
    }
    base.stdd.validate();
    return base;
}

// ---- run configs -----------------------------------------------------------

namespace {

std::string_view kind_name(SourceKind k) {
    switch (k) {
        case SourceKind::Template: return "template";
        case SourceKind::Synthetic: return "synthetic";
        case SourceKind::Trace: return "trace";
        case SourceKind::Corpus: return "corpus";
    }
    return "template";
}

SourceKind kind_from(const std::string& name) {
    if (name == "template") return SourceKind::Template;
    if (name == "synthetic") return SourceKind::Synthetic;
    if (name == "trace") return SourceKind::Trace;
    if (name == "corpus") return SourceKind::Corpus;
    throw config_error("unknown source kind '" + name + "'");
}

}  // namespace

json to_json(const RunConfig& cfg) {
    json source = {{"kind", std::string(kind_name(cfg.source.kind))}};
    if (cfg.source.kind == SourceKind::Template) {
        source["template"] = json::parse(sim::to_json(cfg.source.tmpl));
        source["seed"] = cfg.source.seed;
        source["count"] = cfg.source.count;
    } else {
        source["path"] = cfg.source.path;
    }
    json strategies = json::array();
    for (const auto& s : cfg.strategies) strategies.push_back(to_json(s));
    json classify = {{"quantile", cfg.classify.quantile},
                     {"variance_cutoff", cfg.classify.variance_cutoff ? json(*cfg.classify.variance_cutoff) : json()},
                     {"deviance_cutoff", cfg.classify.deviance_cutoff ? json(*cfg.classify.deviance_cutoff) : json()}};
    return {{"type", "run-config"},
            {"source", std::move(source)},
            {"max_steps", cfg.max_steps ? json(*cfg.max_steps) : json()},
            {"strategy", to_json(cfg.strategy)},
            {"strategies", std::move(strategies)},
            {"baseline", cfg.baseline},
            {"classify", std::move(classify)},
            {"out", cfg.out},
            {"jobs", cfg.jobs}};
}

RunConfig run_config_from_json(const json& j, RunConfig base) {
    if (!j.is_object()) throw config_error("run config must be an object");
    try {
        if (j.contains("source")) {
            const auto& s = j["source"];
            if (s.contains("kind")) base.source.kind = kind_from(s["kind"].get<std::string>());
            base.source.path = s.value("path", base.source.path);
            if (s.contains("template")) {
                json merged = json::parse(sim::to_json(base.source.tmpl));
                merge_into(merged, s["template"]);
                base.source.tmpl = sim::synth_template_from_json(merged.dump());
            }
            base.source.seed = s.value("seed", base.source.seed);
            base.source.count = s.value("count", base.source.count);
        }
        if (j.contains("max_steps")) {
            base.max_steps = j["max_steps"].is_null() ? std::nullopt
                                                      : std::optional<std::size_t>(j["max_steps"].get<std::size_t>());
        }
        if (j.contains("strategy")) base.strategy = strategy_from_json(j["strategy"], base.strategy);
        if (j.contains("strategies")) {
            base.strategies.clear();
            for (const auto& s : j["strategies"]) base.strategies.push_back(strategy_from_json(s));
        }
        base.baseline = j.value("baseline", base.baseline);
        if (j.contains("classify")) {
            const auto& c = j["classify"];
            base.classify.quantile = c.value("quantile", base.classify.quantile);
            if (c.contains("variance_cutoff")) {
                base.classify.variance_cutoff =
                    c["variance_cutoff"].is_null() ? std::nullopt : std::optional(c["variance_cutoff"].get<double>());
            }
            if (c.contains("deviance_cutoff")) {
                base.classify.deviance_cutoff =
                    c["deviance_cutoff"].is_null() ? std::nullopt : std::optional(c["deviance_cutoff"].get<double>());
            }
        }
        base.out = j.value("out", base.out);
        base.jobs = j.value("jobs", base.jobs);
    } catch (const json::exception& e) {
        throw config_error(std::string("run config: ") + e.what());
    }
    return base;
}

void merge_into(json& base, const json& patch) {
    if (!base.is_object() || !patch.is_object()) {
        base = patch;
        return;
    }
    for (auto it = patch.begin(); it != patch.end(); ++it) {
        if (base.contains(it.key()) && base[it.key()].is_object() && it.value().is_object()) {
            merge_into(base[it.key()], it.value());
        } else {
            base[it.key()] = it.value();
        }
    }
}

json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot read config '" + path + "'");
    json merged = json::object();
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw config_error(path + ":" + std::to_string(number) + ": not a JSON object");
        }
        merge_into(merged, j);
    }
    return merged;
}

// ---- sequences -------------------------------------------------------------

std::unique_ptr<ConfidenceSource> Sequence::make_source() const {
    if (spec) return std::make_unique<sim::SyntheticSource>(*spec);
    return std::make_unique<sim::ReplaySource>(trace);
}

SequenceState Sequence::make_state() const {
    if (spec) return SequenceState(spec->prompt, spec->seq_len(), max_steps);
    return sim::initial_state(*trace, max_steps);
}

namespace {

Sequence from_spec(std::string id, sim::SynthSpec spec, std::optional<std::size_t> max_steps) {
    Sequence s;
    s.id = std::move(id);
    s.max_steps = max_steps.value_or(spec.max_steps);
    s.spec = std::move(spec);
    return s;
}

}  // namespace

std::vector<Sequence> load_sequences(const RunConfig& cfg, bool corpus_mode) {
    std::vector<Sequence> out;
    const auto& src = cfg.source;
    if (cfg.max_steps && *cfg.max_steps == 0) throw usage_error("--max-steps must be >= 1");
    switch (src.kind) {
        case SourceKind::Template: {
            const auto& tmpl = src.tmpl;
            const std::size_t n = corpus_mode ? src.count : 1;
            if (n == 0) throw usage_error("corpus count must be >= 1");
            for (std::size_t i = 0; i < n; ++i) {
                const auto seed = src.seed + i;
                out.push_back(from_spec("seed-" + std::to_string(seed), sim::make_synth_spec(tmpl, seed), cfg.max_steps));
            }
            break;
        }
        case SourceKind::Synthetic:
            out.push_back(from_spec(fs::path(src.path).stem().string(), sim::synth_spec_from_json(read_file(src.path)),
                                    cfg.max_steps));
            break;
        case SourceKind::Trace: {
            Sequence s;
            s.id = fs::path(src.path).filename().string();
            s.trace = std::make_shared<const sim::TraceFile>(sim::read_trace_file(src.path));
            if (s.trace->steps.empty()) throw validation_error("trace '" + src.path + "' has no step records");
            s.max_steps = cfg.max_steps.value_or(s.trace->steps.size());
            out.push_back(std::move(s));
            break;
        }
        case SourceKind::Corpus: {
            if (!corpus_mode) throw usage_error("a corpus directory is only accepted by compare");
            if (!fs::is_directory(src.path)) throw usage_error("corpus '" + src.path + "' is not a directory");
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(src.path)) {
                if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
            if (files.empty()) throw usage_error("corpus '" + src.path + "' contains no .json spec files");
            for (const auto& f : files) {
                out.push_back(from_spec(f.stem().string(), sim::synth_spec_from_json(read_file(f.string())), cfg.max_steps));
            }
            break;
        }
    }
    return out;
}

dynamics::DynamicsConfig history_config(const RunConfig& cfg) {
    return cfg.strategy.name == "stdd" ? cfg.strategy.stdd.dynamics : dynamics::DynamicsConfig{};
}

RunResult execute(const Sequence& seq, const StrategyConfig& strategy, const dynamics::DynamicsConfig& history) {
    auto source = seq.make_source();
    auto policy = make_strategy(strategy);
    auto hist = history;
    // Keep enough history for the strategy's own temporal window.
    if (strategy.name == "stdd") hist = strategy.stdd.dynamics;
    return run(*source, *policy, seq.make_state(), hist);
}

// ---- gen-corpus ------------------------------------------------------------

std::vector<std::string> gen_corpus(const CorpusOptions& opts) {
    if (opts.count == 0) throw usage_error("--count must be >= 1");
    if (opts.out_dir.empty()) throw usage_error("--out <dir> is required");
    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec || !fs::is_directory(opts.out_dir)) {
        throw io_error("cannot create corpus directory '" + opts.out_dir + "'");
    }
    std::vector<std::string> paths;
    for (std::size_t i = 0; i < opts.count; ++i) {
        const std::uint64_t seed = opts.seed + i;
        const auto spec = sim::make_synth_spec(opts.tmpl, seed);
        char name[64];
        std::snprintf(name, sizeof name, "seq-%08llu.json", static_cast<unsigned long long>(seed));
        const auto path = (fs::path(opts.out_dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw io_error("cannot write '" + path + "'");
        out << sim::to_json(spec) << '\n';
        if (!out) throw io_error("failed writing '" + path + "'");
        paths.push_back(path);
    }
    return paths;
}

TraceCheck check_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read trace '" + path + "'");
    TraceCheck check;
    check.diagnostics = sim::validate_trace(in);
    check.ok = check.diagnostics.empty();
    return check;
}

}  // namespace stdd::harness
