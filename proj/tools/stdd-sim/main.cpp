#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "harness.hpp"

using namespace stdd;
using namespace stdd::harness;

namespace {

struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> max_steps;
    std::string out;
    std::string strategy;
    std::string tmpl;

    std::string synthetic;
    std::string trace;
    std::string corpus;
    std::optional<std::size_t> count;
    std::vector<std::string> strategies;
    std::string baseline;
    std::optional<std::size_t> jobs;
    std::string record_trace;

    std::optional<double> fixed_tau;
    std::optional<std::size_t> dus_groups;
    std::optional<std::string> temporal_window;
    std::optional<std::size_t> neighbour_window;
    std::optional<double> left_bias;
    std::optional<std::string> boundary;
    std::optional<bool> feasibility;
    std::optional<std::string> start_steps;
    std::optional<double> fast_margin;
    std::optional<double> slow_margin;
    std::optional<std::string> patience;
    std::optional<double> quantile;
    std::string preset;
};

json size_token(const std::string& v) {
    if (v == "unbounded") return "unbounded";
    try {
        std::size_t used = 0;
        const auto n = std::stoull(v, &used);
        if (used == v.size()) return n;
    } catch (const std::exception&) {
    }
    throw usage_error("expected a non-negative integer or 'unbounded', got '" + v + "'");
}

void add_source_flags(CLI::App* cmd, Flags& f, bool corpus) {
    cmd->add_option("--synthetic", f.synthetic, "Synthetic spec file");
    cmd->add_option("--trace", f.trace, "Recorded trace to replay");
    if (corpus) {
        cmd->add_option("--corpus", f.corpus, "Directory of synthetic spec files");
        cmd->add_option("--count", f.count, "Template sequences to draw when no corpus is given");
    }
    cmd->add_option("--template", f.tmpl, "Synthetic template file (JSON)");
}

void add_common_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--config", f.config, "Line-delimited config file; flags override it");
    cmd->add_option("--seed", f.seed, "Seed for template sources");
    cmd->add_option("--max-steps", f.max_steps, "Step budget");
    cmd->add_option("--out", f.out, "Output path");
    cmd->add_option("--strategy", f.strategy, "stdd, fixed or dus");
}

void add_strategy_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--preset", f.preset, "Named stdd parameter set: default, long-window, super-stall");
    cmd->add_option("--fixed-tau", f.fixed_tau, "Threshold of the fixed strategy");
    cmd->add_option("--dus-groups", f.dus_groups, "Group count of the dus strategy");
    cmd->add_option("--temporal-window", f.temporal_window, "stdd temporal window (or 'unbounded')");
    cmd->add_option("--neighbour-window", f.neighbour_window, "stdd neighbours per side");
    cmd->add_option("--left-bias", f.left_bias, "stdd left/right neighbour weighting");
    cmd->add_option("--boundary", f.boundary, "hard-cases or pad-only");
    cmd->add_flag("--feasibility,!--no-feasibility", f.feasibility, "Toggle fast/slow feasibility checks");
    cmd->add_option("--start-steps", f.start_steps, "Feasibility start steps (or 'unbounded')");
    cmd->add_option("--fast-margin", f.fast_margin, "Suspected-fast margin");
    cmd->add_option("--slow-margin", f.slow_margin, "Suspected-slow margin");
    cmd->add_option("--patience", f.patience, "Slow patience (or 'unbounded')");
}

json strategy_patch(const Flags& f) {
    json s = f.preset.empty() ? json::object() : strategy_preset(f.preset);
    if (!f.strategy.empty()) s["name"] = f.strategy;
    if (f.fixed_tau) s["fixed"]["tau"] = *f.fixed_tau;
    if (f.dus_groups) s["dus"]["groups"] = *f.dus_groups;
    json stdd = s.value("stdd", json::object());
    if (f.temporal_window) stdd["temporal_window"] = size_token(*f.temporal_window);
    if (f.neighbour_window) stdd["neighbour_window"] = *f.neighbour_window;
    if (f.left_bias) stdd["left_bias"] = *f.left_bias;
    if (f.boundary) stdd["boundary_mode"] = *f.boundary;
    json feas = stdd.value("feasibility", json::object());
    if (f.feasibility) feas["enabled"] = *f.feasibility;
    if (f.start_steps) feas["start_steps"] = size_token(*f.start_steps);
    if (f.fast_margin) feas["fast_margin"] = *f.fast_margin;
    if (f.slow_margin) feas["slow_margin"] = *f.slow_margin;
    if (f.patience) feas["patience"] = size_token(*f.patience);
    if (!feas.empty()) stdd["feasibility"] = feas;
    if (!stdd.empty()) s["stdd"] = stdd;
    return s;
}

RunConfig resolve(const Flags& f, bool corpus) {
    json doc = f.config.empty() ? json::object() : read_config_file(f.config);

    const int sources = !f.synthetic.empty() + !f.trace.empty() + !f.corpus.empty();
    if (sources > 1) throw usage_error("give at most one of --synthetic, --trace, --corpus");

    json patch = json::object();
    if (!f.synthetic.empty()) patch["source"] = {{"kind", "synthetic"}, {"path", f.synthetic}};
    if (!f.trace.empty()) patch["source"] = {{"kind", "trace"}, {"path", f.trace}};
    if (!f.corpus.empty()) patch["source"] = {{"kind", "corpus"}, {"path", f.corpus}};
    if (!f.tmpl.empty()) {
        const auto t = read_config_file(f.tmpl);
        patch["source"]["kind"] = "template";
        patch["source"]["template"] = t;
    }
    if (f.seed) patch["source"]["seed"] = *f.seed;
    if (f.count) {
        if (*f.count == 0) throw usage_error("--count must be >= 1");
        patch["source"]["count"] = *f.count;
    }
    if (f.max_steps) patch["max_steps"] = *f.max_steps;
    if (!f.out.empty()) patch["out"] = f.out;
    if (!f.baseline.empty()) patch["baseline"] = f.baseline;
    if (f.jobs) patch["jobs"] = *f.jobs;
    if (f.quantile) patch["classify"]["quantile"] = *f.quantile;

    const json sp = strategy_patch(f);
    if (!sp.empty()) patch["strategy"] = sp;
    if (!f.strategies.empty()) {
        // Named strategies take the shared parameter flags.
        json base = doc.value("strategy", json::object());
        merge_into(base, sp);
        json list = json::array();
        for (const auto& name : f.strategies) {
            json s = base;
            s["name"] = name;
            list.push_back(std::move(s));
        }
        patch["strategies"] = std::move(list);
    }
    merge_into(doc, patch);

    auto cfg = run_config_from_json(doc);
    if (!corpus && cfg.source.kind == SourceKind::Corpus) throw usage_error("run takes a single sequence, not a corpus");
    for (const auto& s : cfg.strategies) make_strategy(s);
    make_strategy(cfg.strategy);
    return cfg;
}

void emit(const json& report, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << report.dump(1) << '\n';
    } else {
        write_json_file(out, report);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Remasking scheduler simulator"};
    app.require_subcommand(1);

    Flags f;

    auto* gen = app.add_subcommand("gen-corpus", "Write synthetic spec files drawn from a template");
    std::size_t gen_count = 100;
    gen->add_option("--count", gen_count, "Number of sequences");
    gen->add_option("--seed", f.seed, "First seed");
    gen->add_option("--out", f.out, "Output directory")->required();
    gen->add_option("--template", f.tmpl, "Template file (JSON)");
    gen->add_option("--max-steps", f.max_steps, "Step budget written into each spec");
    gen->add_option("--config", f.config, "Line-delimited config file");

    auto* run_cmd = app.add_subcommand("run", "Decode one sequence and write a run report");
    add_common_flags(run_cmd, f);
    add_source_flags(run_cmd, f, false);
    add_strategy_flags(run_cmd, f);
    run_cmd->add_option("--baseline", f.baseline, "Strategy for the speedup proxy");
    run_cmd->add_option("--record-trace", f.record_trace, "Also write the observed steps as a trace");
    run_cmd->add_option("--quantile", f.quantile, "Quantile for token class cutoffs");

    auto* cmp = app.add_subcommand("compare", "Compare strategies on a corpus");
    add_common_flags(cmp, f);
    add_source_flags(cmp, f, true);
    add_strategy_flags(cmp, f);
    cmp->add_option("--strategies", f.strategies, "Strategies to compare")->delimiter(',');
    cmp->add_option("--baseline", f.baseline, "Baseline strategy");
    cmp->add_option("--jobs", f.jobs, "Worker threads");

    auto* val = app.add_subcommand("validate-trace", "Check a trace file");
    std::string trace_path;
    val->add_option("path", trace_path, "Trace file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            RunConfig cfg = resolve(f, true);
            CorpusOptions opts;
            opts.tmpl = cfg.source.tmpl;
            if (f.max_steps) opts.tmpl.max_steps = *f.max_steps;
            opts.count = gen_count;
            opts.seed = cfg.source.seed;
            opts.out_dir = f.out;
            const auto paths = gen_corpus(opts);
            std::cout << "wrote " << paths.size() << " sequences to " << f.out << '\n';
        } else if (run_cmd->parsed()) {
            const auto cfg = resolve(f, false);
            const auto report = run_report(cfg);
            emit(report, cfg.out);
            if (!f.record_trace.empty()) {
                const auto seq = load_sequences(cfg, false).front();
                const auto result = execute(seq, cfg.strategy, history_config(cfg));
                sim::write_trace_file(f.record_trace, sim::trace_from_run(result, "stdd-sim:" + seq.id));
            }
        } else if (cmp->parsed()) {
            const auto cfg = resolve(f, true);
            emit(compare_report(cfg), cfg.out);
        } else if (val->parsed()) {
            const auto check = check_trace_file(trace_path);
            for (const auto& d : check.diagnostics) std::cerr << trace_path << ": " << sim::to_string(d) << '\n';
            if (!check.ok) return kExitValidation;
            std::cout << trace_path << ": ok\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "stdd-sim: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kExitOk;
}
