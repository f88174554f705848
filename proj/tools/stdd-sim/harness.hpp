#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "stdd/error.hpp"
#include "stdd/metrics.hpp"
#include "stdd/strategies.hpp"
#include "stdd/synthetic.hpp"
#include "stdd/trace.hpp"

namespace stdd::harness {

using nlohmann::json;

enum ExitCode : int {
    kExitOk = 0,
    kExitIo = 1,
    kExitUsage = 2,
    kExitValidation = 3,
    kExitRuntime = 4,
};

class usage_error : public stdd::error {
public:
    using stdd::error::error;
};

class io_error : public stdd::error {
public:
    using stdd::error::error;
};

// Maps an exception thrown by the harness or core to the CLI exit code.
int exit_code_for(const std::exception& e) noexcept;

inline constexpr const char* kReportSchema = "stdd-report/1";

struct StrategyConfig {
    std::string name = "stdd";
    double fixed_tau = 0.95;
    std::size_t dus_groups = 8;
    StddConfig stdd;

    bool operator==(const StrategyConfig&) const = default;
};

std::unique_ptr<Strategy> make_strategy(const StrategyConfig& cfg);

// Named stdd parameter sets, as strategy JSON patches:
//   default      temporal window 3, slow margin 0.1
//   long-window  temporal window 5
//   super-stall  slow margin 0.05
json strategy_preset(const std::string& name);
std::vector<std::string> preset_names();
json to_json(const StrategyConfig& cfg);
// Missing keys keep the values of `base`.
StrategyConfig strategy_from_json(const json& j, StrategyConfig base = {});

enum class SourceKind {
    Template,  // one sequence drawn from the template at `seed`
    Synthetic, // a synthetic spec file
    Trace,     // a recorded trace (replay)
    Corpus,    // a directory of synthetic spec files (compare)
};

struct SourceConfig {
    SourceKind kind = SourceKind::Template;
    std::string path;
    sim::SynthTemplate tmpl;
    std::uint64_t seed = 0;
    // Template corpora for compare: seeds seed .. seed+count-1.
    std::size_t count = 100;

    bool operator==(const SourceConfig&) const = default;
};

struct ClassifyConfig {
    double quantile = 0.75;
    std::optional<double> variance_cutoff;
    std::optional<double> deviance_cutoff;

    bool operator==(const ClassifyConfig&) const = default;
};

struct RunConfig {
    SourceConfig source;
    std::optional<std::size_t> max_steps;
    StrategyConfig strategy;
    // compare: the strategies to evaluate; empty means {baseline, strategy}.
    std::vector<StrategyConfig> strategies;
    std::string baseline = "fixed";
    ClassifyConfig classify;
    std::string out;
    std::size_t jobs = 1;

    bool operator==(const RunConfig&) const = default;
};

json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const json& j, RunConfig base = {});

// Reads a line-delimited config file; each line is an object merged over the
// previous ones (later keys win).
json read_config_file(const std::string& path);
// Shallow-recursive merge: objects merge key by key, anything else replaces.
void merge_into(json& base, const json& patch);

// One loaded sequence ready to be decoded.
struct Sequence {
    std::string id;
    std::optional<sim::SynthSpec> spec;
    std::shared_ptr<const sim::TraceFile> trace;
    std::size_t max_steps = 0;

    std::unique_ptr<ConfidenceSource> make_source() const;
    SequenceState make_state() const;
};

// Expands the source into sequences. Template sources yield `count` sequences
// in corpus mode and one otherwise; a corpus directory outside corpus mode is a
// usage_error, unreadable inputs are validation_errors.
std::vector<Sequence> load_sequences(const RunConfig& cfg, bool corpus_mode);

// History windows used for the run report (the stdd dynamics settings).
dynamics::DynamicsConfig history_config(const RunConfig& cfg);

RunResult execute(const Sequence& seq, const StrategyConfig& strategy, const dynamics::DynamicsConfig& history);

// ---- commands --------------------------------------------------------------

struct CorpusOptions {
    sim::SynthTemplate tmpl;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    std::string out_dir;
};

// Writes count spec files seq-<seed>.json with seeds seed, seed+1, ...
// Returns the written paths.
std::vector<std::string> gen_corpus(const CorpusOptions& opts);

json run_report(const RunConfig& cfg);
json compare_report(const RunConfig& cfg);

struct TraceCheck {
    bool ok = false;
    std::vector<sim::Diagnostic> diagnostics;
};
TraceCheck check_trace_file(const std::string& path);

// Structural conformance of a report against stdd-report/1; empty when valid.
std::vector<std::string> validate_report(const json& report);

// Copy of the report without volatile fields (timestamp) for comparisons.
json without_volatile(json report);

void write_json_file(const std::string& path, const json& doc);
std::string utc_timestamp();

}  // namespace stdd::harness
