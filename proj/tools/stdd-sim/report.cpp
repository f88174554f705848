#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numeric>
#include <mutex>
#include <thread>

#include "harness.hpp"

namespace stdd::harness {

namespace {

json decode_list(const std::vector<DecodeAction>& actions) {
    json arr = json::array();
    for (const auto& a : actions) {
        arr.push_back({{"pos", a.pos}, {"token", a.token}, {"reason", std::string(to_string(a.reason))}});
    }
    return arr;
}

json step_json(const StepReport& s) {
    json thresholds = json::array();
    for (const auto& t : s.decision.thresholds) thresholds.push_back(json::array({t.pos, t.tau}));
    return {{"t", s.step},
            {"mixing_weight", s.decision.mixing_weight},
            {"decoded", decode_list(s.decision.decode)},
            {"remasked", s.decision.remask},
            {"fast_labeled", s.decision.fast_labeled},
            {"flushed", decode_list(s.flushed)},
            {"thresholds", std::move(thresholds)},
            {"decoded_fraction", s.decoded_fraction},
            {"masked_remaining", s.masked_remaining},
            {"token", s.observation.token},
            {"conf", s.observation.conf}};
}

StrategyConfig baseline_config(const RunConfig& cfg) {
    for (const auto& s : cfg.strategies) {
        if (s.name == cfg.baseline) return s;
    }
    if (cfg.strategy.name == cfg.baseline) return cfg.strategy;
    StrategyConfig b;
    b.name = cfg.baseline;
    make_strategy(b);  // rejects unknown names
    return b;
}

std::vector<TokenId> reference_tokens(const Sequence& seq, const RunResult& baseline) {
    if (seq.spec) return seq.spec->ground_truth;
    return committed_tokens(baseline.final_state);
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_json_file(const std::string& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << doc.dump(1) << '\n';
    if (!out) throw io_error("failed writing '" + path + "'");
}

json without_volatile(json report) {
    report.erase("generated_at");
    return report;
}

json run_report(const RunConfig& cfg) {
    auto sequences = load_sequences(cfg, false);
    const auto& seq = sequences.front();
    const auto hist = history_config(cfg);

    const auto result = execute(seq, cfg.strategy, hist);
    const auto base_cfg = baseline_config(cfg);
    const auto baseline = execute(seq, base_cfg, hist);
    const auto reference = reference_tokens(seq, baseline);
    const auto metrics = summarize(result, reference);
    const double proxy = speedup(baseline.steps_used(), result.steps_used());

    const auto& state = result.final_state;
    std::vector<double> wv, wd;
    for (Position p = state.prompt_len(); p < state.seq_len(); ++p) {
        wv.push_back(result.history.whole_variance(p));
        wd.push_back(result.history.whole_deviance(p));
    }
    auto cutoffs = dynamics::quantile_cutoffs(wv, wd, cfg.classify.quantile);
    if (cfg.classify.variance_cutoff) cutoffs.variance = *cfg.classify.variance_cutoff;
    if (cfg.classify.deviance_cutoff) cutoffs.deviance = *cfg.classify.deviance_cutoff;

    json tokens = json::array();
    for (Position p = state.prompt_len(); p < state.seq_len(); ++p) {
        const auto k = p - state.prompt_len();
        const auto& slot = state.status(p);
        json t = {{"pos", p},
                  {"committed", slot->token},
                  {"decoded_at", slot->decoded_at},
                  {"correct", slot->token == reference[k]},
                  {"whole_variance", wv[k]},
                  {"whole_deviance", wd[k]},
                  {"derived_isolation", result.history.whole_isolation(p)},
                  {"class", std::string(dynamics::to_string(dynamics::classify_token(wv[k], wd[k], cutoffs)))}};
        if (seq.spec) t["archetype"] = std::string(sim::archetype_name(seq.spec->archetypes[k]));
        tokens.push_back(std::move(t));
    }

    json steps = json::array();
    for (const auto& s : result.steps) steps.push_back(step_json(s));

    return {{"schema", kReportSchema},
            {"kind", "run"},
            {"generated_at", utc_timestamp()},
            {"config", to_json(cfg)},
            {"sequence",
             {{"id", seq.id},
              {"source", seq.spec ? "synthetic" : "trace"},
              {"prompt_len", state.prompt_len()},
              {"seq_len", state.seq_len()},
              {"gen_len", state.gen_len()}}},
            {"metrics",
             {{"strategy", cfg.strategy.name},
              {"steps_used", metrics.steps_used},
              {"max_steps", metrics.max_steps},
              {"tokens_per_step", metrics.tokens_per_step},
              {"decode_events", metrics.decode_events},
              {"remask_events", metrics.remask_events},
              {"force_decodes", metrics.force_decodes},
              {"fallback_decodes", metrics.fallback_decodes},
              {"flushed", metrics.flushed},
              {"fidelity", metrics.fidelity},
              {"fidelity_reference", seq.spec ? "ground-truth" : "baseline:" + base_cfg.name},
              {"speedup_proxy",
               {{"baseline", base_cfg.name},
                {"baseline_steps", baseline.steps_used()},
                {"value", proxy},
                {"definition", "baseline steps_used / steps_used"}}}}},
            {"classification",
             {{"variance_cutoff", cutoffs.variance},
              {"deviance_cutoff", cutoffs.deviance},
              {"method", cfg.classify.variance_cutoff || cfg.classify.deviance_cutoff ? "absolute" : "quantile"},
              {"quantile", cfg.classify.quantile}}},
            {"steps", std::move(steps)},
            {"tokens", std::move(tokens)}};
}

namespace {

struct CellResult {
    std::size_t steps_used = 0;
    double fidelity = 0.0;
    std::size_t remask_events = 0;
    std::size_t force_decodes = 0;
    std::vector<std::size_t> decoded_per_step;
};

}  // namespace

json compare_report(const RunConfig& cfg) {
    std::vector<StrategyConfig> strategies = cfg.strategies;
    if (strategies.empty()) strategies = {baseline_config(cfg), cfg.strategy};
    if (strategies.size() < 2) throw usage_error("compare needs at least two strategies");
    std::size_t base_idx = strategies.size();
    for (std::size_t i = 0; i < strategies.size(); ++i) {
        make_strategy(strategies[i]);
        if (base_idx == strategies.size() && strategies[i].name == cfg.baseline) base_idx = i;
    }
    if (base_idx == strategies.size()) {
        throw usage_error("baseline '" + cfg.baseline + "' is not among the compared strategies");
    }

    const auto sequences = load_sequences(cfg, true);
    const auto hist = history_config(cfg);
    std::vector<std::vector<CellResult>> cells(sequences.size(), std::vector<CellResult>(strategies.size()));

    auto work = [&](std::size_t i) {
        const auto& seq = sequences[i];
        std::vector<RunResult> runs;
        runs.reserve(strategies.size());
        for (const auto& s : strategies) runs.push_back(execute(seq, s, hist));
        const auto reference = reference_tokens(seq, runs[base_idx]);
        for (std::size_t j = 0; j < strategies.size(); ++j) {
            const auto m = summarize(runs[j], reference);
            cells[i][j] = {m.steps_used, m.fidelity, m.remask_events, m.force_decodes, decoded_per_step(runs[j])};
        }
    };

    const std::size_t jobs = std::max<std::size_t>(1, std::min(cfg.jobs, sequences.size()));
    if (jobs == 1) {
        for (std::size_t i = 0; i < sequences.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mu;
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < sequences.size(); i = next++) {
                    try {
                        work(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mu);
                        if (!failure) failure = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    std::vector<std::string> labels;
    for (std::size_t j = 0; j < strategies.size(); ++j) {
        const auto dupes = std::count_if(strategies.begin(), strategies.begin() + static_cast<std::ptrdiff_t>(j),
                                         [&](const StrategyConfig& s) { return s.name == strategies[j].name; });
        labels.push_back(dupes ? strategies[j].name + "#" + std::to_string(dupes + 1) : strategies[j].name);
    }

    json seq_entries = json::array();
    std::vector<std::vector<double>> speedups(strategies.size()), fidelities(strategies.size()),
        steps(strategies.size());
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        json results = json::array();
        for (std::size_t j = 0; j < strategies.size(); ++j) {
            const auto& c = cells[i][j];
            const double sp = speedup(cells[i][base_idx].steps_used, c.steps_used);
            speedups[j].push_back(sp);
            fidelities[j].push_back(c.fidelity);
            steps[j].push_back(static_cast<double>(c.steps_used));
            results.push_back({{"strategy", labels[j]},
                               {"steps_used", c.steps_used},
                               {"fidelity", c.fidelity},
                               {"speedup", sp},
                               {"remask_events", c.remask_events},
                               {"force_decodes", c.force_decodes},
                               {"decoded_per_step", c.decoded_per_step}});
        }
        seq_entries.push_back({{"id", sequences[i].id}, {"max_steps", sequences[i].max_steps}, {"results", std::move(results)}});
    }

    json aggregate = json::array();
    const double base_fid = mean(fidelities[base_idx]);
    for (std::size_t j = 0; j < strategies.size(); ++j) {
        aggregate.push_back({{"strategy", labels[j]},
                             {"median_speedup", median(speedups[j])},
                             {"mean_speedup", mean(speedups[j])},
                             {"mean_steps", mean(steps[j])},
                             {"mean_fidelity", mean(fidelities[j])},
                             {"fidelity_delta", mean(fidelities[j]) - base_fid}});
    }

    json strategy_cfgs = json::array();
    for (const auto& s : strategies) strategy_cfgs.push_back(to_json(s));
    auto resolved = cfg;
    resolved.strategies = strategies;

    return {{"schema", kReportSchema},
            {"kind", "compare"},
            {"generated_at", utc_timestamp()},
            {"config", to_json(resolved)},
            {"baseline", labels[base_idx]},
            {"strategies", labels},
            {"speedup_definition", "speedup proxy: baseline steps_used / strategy steps_used, per sequence"},
            {"fidelity_reference", sequences.front().spec ? "ground-truth" : "baseline committed tokens"},
            {"sequences", std::move(seq_entries)},
            {"aggregate", std::move(aggregate)}};
}

std::vector<std::string> validate_report(const json& r) {
    std::vector<std::string> errs;
    auto need = [&](const json& obj, const char* key, auto pred, const char* what) {
        if (!obj.is_object() || !obj.contains(key) || !pred(obj.at(key))) {
            errs.push_back(std::string(key) + ": missing or not " + what);
            return false;
        }
        return true;
    };
    const auto is_str = [](const json& v) { return v.is_string(); };
    const auto is_obj = [](const json& v) { return v.is_object(); };
    const auto is_arr = [](const json& v) { return v.is_array(); };
    const auto is_uint = [](const json& v) { return v.is_number_unsigned(); };
    const auto is_num = [](const json& v) { return v.is_number(); };
    const auto is_unit = [](const json& v) { return v.is_number() && v.get<double>() >= 0.0 && v.get<double>() <= 1.0; };
    const auto is_pos = [](const json& v) { return v.is_number() && v.get<double>() > 0.0; };

    if (!r.is_object()) return {"report is not an object"};
    if (r.value("schema", "") != kReportSchema) errs.push_back(std::string("schema: expected ") + kReportSchema);
    need(r, "generated_at", is_str, "a string");
    need(r, "config", is_obj, "an object");
    const auto kind = r.value("kind", "");
    if (kind == "run") {
        if (need(r, "metrics", is_obj, "an object")) {
            const auto& m = r["metrics"];
            need(m, "steps_used", is_uint, "an unsigned integer");
            need(m, "max_steps", is_uint, "an unsigned integer");
            need(m, "tokens_per_step", is_num, "a number");
            need(m, "remask_events", is_uint, "an unsigned integer");
            need(m, "force_decodes", is_uint, "an unsigned integer");
            need(m, "fidelity", is_unit, "a number in [0,1]");
            if (need(m, "speedup_proxy", is_obj, "an object")) need(m["speedup_proxy"], "value", is_pos, "a positive number");
            if (m.contains("steps_used") && m.contains("max_steps") && m["steps_used"].is_number() &&
                m["max_steps"].is_number() && m["steps_used"].get<double>() > m["max_steps"].get<double>()) {
                errs.push_back("metrics: steps_used exceeds max_steps");
            }
        }
        need(r, "classification", is_obj, "an object");
        need(r, "sequence", is_obj, "an object");
        if (need(r, "steps", is_arr, "an array")) {
            std::size_t expect = 0;
            for (const auto& s : r["steps"]) {
                if (!s.is_object() || s.value("t", kUnbounded) != expect) {
                    errs.push_back("steps: step " + std::to_string(expect) + " missing or out of order");
                    break;
                }
                for (const char* key : {"decoded", "remasked", "flushed", "thresholds", "token", "conf"}) {
                    if (!need(s, key, is_arr, "an array")) break;
                }
                ++expect;
            }
        }
        if (need(r, "tokens", is_arr, "an array") && r.contains("sequence") && r["sequence"].is_object() &&
            r["sequence"].value("gen_len", kUnbounded) != r["tokens"].size()) {
            errs.push_back("tokens: length differs from sequence.gen_len");
        }
    } else if (kind == "compare") {
        need(r, "baseline", is_str, "a string");
        if (need(r, "strategies", is_arr, "an array") && need(r, "sequences", is_arr, "an array")) {
            for (const auto& s : r["sequences"]) {
                if (!s.contains("results") || !s["results"].is_array() || s["results"].size() != r["strategies"].size()) {
                    errs.push_back("sequences: results do not line up with strategies");
                    break;
                }
            }
        }
        need(r, "aggregate", is_arr, "an array");
    } else {
        errs.push_back("kind: expected run or compare");
    }
    return errs;
}

}  // namespace stdd::harness
