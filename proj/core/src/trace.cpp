#include "stdd/trace.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "stdd/error.hpp"

namespace stdd::sim {

using nlohmann::json;

std::string to_string(const Diagnostic& d) {
    return "line " + std::to_string(d.line) + ": " + d.field + ": " + d.message;
}

namespace {

// 17 significant digits with '#' so every value keeps its full precision and a
// decimal point; strtod on the way back is exact.
void append_conf(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%#.17g", v);
    out += buf;
}

struct LineCursor {
    std::istream& in;
    std::size_t number = 0;
    bool next(std::string& line) {
        if (!std::getline(in, line)) return false;
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }
};

class TraceChecker {
public:
    std::vector<Diagnostic> diags;
    TraceHeader header;
    bool header_ok = false;
    std::vector<StepObservation> steps;
    bool keep_steps = false;

    void check_header(std::size_t line, const std::string& text) {
        const json j = json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            report(line, "header", "not a JSON object");
            return;
        }
        if (j.value("type", "") != "header") {
            report(line, "type", "first line must be a header record");
            return;
        }
        bool ok = true;
        if (!j.contains("version") || !j["version"].is_number_integer()) {
            report(line, "version", "missing or not an integer");
            ok = false;
        } else if (j["version"].get<long long>() != kTraceVersion) {
            report(line, "version", "unknown version " + j["version"].dump());
            ok = false;
        }
        for (const char* key : {"prompt_len", "seq_len"}) {
            if (!j.contains(key) || !j[key].is_number_unsigned()) {
                report(line, key, "missing or not a non-negative integer");
                ok = false;
            }
        }
        if (!j.contains("source") || !j["source"].is_string()) {
            report(line, "source", "missing or not a string");
            ok = false;
        }
        if (!ok) return;
        header.version = kTraceVersion;
        header.prompt_len = j["prompt_len"].get<std::size_t>();
        header.seq_len = j["seq_len"].get<std::size_t>();
        header.source = j["source"].get<std::string>();
        if (header.prompt_len == 0 || header.prompt_len >= header.seq_len) {
            report(line, "prompt_len", "need 0 < prompt_len < seq_len");
            return;
        }
        header_ok = true;
    }

    void check_step(std::size_t line, const std::string& text) {
        if (text.empty()) {
            report(line, "record", "blank line");
            return;
        }
        const json j = json::parse(text, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            report(line, "record", "not a JSON object");
            return;
        }
        if (j.value("type", "") != "step") {
            report(line, "type", "expected a step record");
            return;
        }
        StepObservation obs;
        bool ok = true;
        if (!j.contains("t") || !j["t"].is_number_unsigned()) {
            report(line, "t", "missing or not a non-negative integer");
            ok = false;
        } else {
            obs.t = j["t"].get<StepIndex>();
            if (obs.t != expected_t_) {
                report(line, "t", "expected step " + std::to_string(expected_t_) + ", found " +
                                      std::to_string(obs.t) + " (steps must be contiguous from 0)");
                ok = false;
            }
            expected_t_ = obs.t + 1;
        }
        if (!j.contains("token") || !j["token"].is_array()) {
            report(line, "token", "missing or not an array");
            ok = false;
        } else {
            const auto& arr = j["token"];
            if (header_ok && arr.size() != header.seq_len) {
                report(line, "token", "length " + std::to_string(arr.size()) + " != seq_len " +
                                          std::to_string(header.seq_len));
                ok = false;
            }
            for (std::size_t i = 0; i < arr.size(); ++i) {
                if (!arr[i].is_number_integer() || arr[i].get<long long>() < 0 ||
                    arr[i].get<long long>() > std::numeric_limits<TokenId>::max()) {
                    report(line, "token[" + std::to_string(i) + "]", "not a valid token id");
                    ok = false;
                    break;
                }
                obs.token.push_back(arr[i].get<TokenId>());
            }
        }
        if (!j.contains("conf") || !j["conf"].is_array()) {
            report(line, "conf", "missing or not an array");
            ok = false;
        } else {
            const auto& arr = j["conf"];
            if (header_ok && arr.size() != header.seq_len) {
                report(line, "conf", "length " + std::to_string(arr.size()) + " != seq_len " +
                                         std::to_string(header.seq_len));
                ok = false;
            }
            for (std::size_t i = 0; i < arr.size(); ++i) {
                if (!arr[i].is_number()) {
                    report(line, "conf[" + std::to_string(i) + "]", "not a number");
                    ok = false;
                    continue;
                }
                const double v = arr[i].get<double>();
                if (!(v >= 0.0 && v <= 1.0)) {
                    report(line, "conf[" + std::to_string(i) + "]", "value " + arr[i].dump() + " outside [0,1]");
                    ok = false;
                }
                obs.conf.push_back(v);
            }
        }
        if (ok && keep_steps) steps.push_back(std::move(obs));
    }

    void run(std::istream& in) {
        LineCursor cursor{in};
        std::string line;
        if (!cursor.next(line)) {
            report(1, "header", "empty file");
            return;
        }
        check_header(cursor.number, line);
        while (cursor.next(line)) check_step(cursor.number, line);
    }

private:
    void report(std::size_t line, std::string field, std::string message) {
        diags.push_back({line, std::move(field), std::move(message)});
    }

    StepIndex expected_t_ = 0;
};

}  // namespace

void write_trace(std::ostream& out, const TraceFile& trace) {
    const json header = {{"type", "header"},
                         {"version", trace.header.version},
                         {"prompt_len", trace.header.prompt_len},
                         {"seq_len", trace.header.seq_len},
                         {"source", trace.header.source}};
    out << header.dump() << '\n';
    std::string line;
    for (const auto& s : trace.steps) {
        line.clear();
        line += R"({"type":"step","t":)";
        line += std::to_string(s.t);
        line += R"(,"token":[)";
        for (std::size_t i = 0; i < s.token.size(); ++i) {
            if (i) line += ',';
            line += std::to_string(s.token[i]);
        }
        line += R"(],"conf":[)";
        for (std::size_t i = 0; i < s.conf.size(); ++i) {
            if (i) line += ',';
            append_conf(line, s.conf[i]);
        }
        line += "]}\n";
        out << line;
    }
}

void write_trace_file(const std::string& path, const TraceFile& trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot open '" + path + "' for writing");
    write_trace(out, trace);
    if (!out) throw error("failed writing '" + path + "'");
}

std::vector<Diagnostic> validate_trace(std::istream& in) {
    TraceChecker checker;
    checker.run(in);
    return checker.diags;
}

TraceFile read_trace(std::istream& in) {
    TraceChecker checker;
    checker.keep_steps = true;
    checker.run(in);
    if (!checker.diags.empty()) throw validation_error(to_string(checker.diags.front()));
    return TraceFile{checker.header, std::move(checker.steps)};
}

TraceFile read_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("cannot open trace '" + path + "'");
    return read_trace(in);
}

const StepObservation& replay_observe(const TraceFile& trace, StepIndex step) {
    if (step >= trace.steps.size()) {
        throw replay_underrun("trace has " + std::to_string(trace.steps.size()) + " steps, step " +
                              std::to_string(step) + " requested");
    }
    return trace.steps[step];
}

SequenceState initial_state(const TraceFile& trace, std::size_t max_steps) {
    const auto& first = replay_observe(trace, 0);
    return SequenceState(std::span<const TokenId>(first.token).first(trace.header.prompt_len),
                         trace.header.seq_len, max_steps);
}

TraceFile trace_from_run(const RunResult& result, std::string source) {
    TraceFile trace;
    trace.header.prompt_len = result.final_state.prompt_len();
    trace.header.seq_len = result.final_state.seq_len();
    trace.header.source = std::move(source);
    trace.steps.reserve(result.steps.size());
    for (const auto& s : result.steps) trace.steps.push_back(s.observation);
    return trace;
}

ReplaySource::ReplaySource(std::shared_ptr<const TraceFile> trace) : trace_(std::move(trace)) {
    if (!trace_) throw structural_error("replay source needs a trace");
}

StepObservation ReplaySource::observe(const SequenceState& state) {
    if (state.seq_len() != trace_->header.seq_len) {
        throw structural_error("trace seq_len does not match the sequence being decoded");
    }
    return replay_observe(*trace_, state.step());
}

}  // namespace stdd::sim
