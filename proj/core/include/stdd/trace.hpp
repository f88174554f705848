#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "stdd/scheduler.hpp"

namespace stdd::sim {

inline constexpr int kTraceVersion = 1;

struct TraceHeader {
    int version = kTraceVersion;
    std::size_t prompt_len = 0;
    std::size_t seq_len = 0;
    std::string source;

    bool operator==(const TraceHeader&) const = default;
};

// A recorded run: header line followed by one line per step.
//   {"type":"header","version":1,"prompt_len":P,"seq_len":N,"source":"..."}
//   {"type":"step","t":0,"token":[...N ints],"conf":[...N numbers]}
struct TraceFile {
    TraceHeader header;
    std::vector<StepObservation> steps;

    bool operator==(const TraceFile&) const = default;
};

struct Diagnostic {
    std::size_t line;  // 1-based
    std::string field;
    std::string message;
};

std::string to_string(const Diagnostic& d);

void write_trace(std::ostream& out, const TraceFile& trace);
void write_trace_file(const std::string& path, const TraceFile& trace);

// Every invariant violation, with line numbers. Empty means valid.
std::vector<Diagnostic> validate_trace(std::istream& in);

// Throws validation_error carrying the first diagnostic.
TraceFile read_trace(std::istream& in);
TraceFile read_trace_file(const std::string& path);

// Recorded step verbatim; replay_underrun past the end.
const StepObservation& replay_observe(const TraceFile& trace, StepIndex step);

// Initial state for replaying a trace; prompt tokens come from step 0.
SequenceState initial_state(const TraceFile& trace, std::size_t max_steps);

// Builds a trace from the observations of a finished run.
TraceFile trace_from_run(const RunResult& result, std::string source);

// Non-interactive: scheduler decisions do not affect the recording.
class ReplaySource final : public ConfidenceSource {
public:
    explicit ReplaySource(std::shared_ptr<const TraceFile> trace);

    StepObservation observe(const SequenceState& state) override;

private:
    std::shared_ptr<const TraceFile> trace_;
};

}  // namespace stdd::sim
