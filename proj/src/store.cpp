#include "store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "errors.hpp"

namespace autotune {

namespace fs = std::filesystem;

double improvement_percent(const BaselineSpec& baseline, double best) {
    if (!std::isfinite(baseline.objective) || !std::isfinite(best))
        throw Error("improvement_percent: values must be finite");
    if (baseline.objective == 0)
        throw Error("improvement_percent: baseline objective must be nonzero");
    const double ratio = baseline.direction == Direction::maximize
                             ? (best - baseline.objective) / baseline.objective
                             : (baseline.objective - best) / baseline.objective;
    return std::round(ratio * 100.0 * 100.0) / 100.0;
}

std::string format_double(double v) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc())
        throw Error("format_double: conversion failed");
    return std::string(buf, end);
}

std::string format_time(double seconds) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", seconds);
    return buf;
}

double quantize_ms(double seconds) {
    return std::round(seconds * 1000.0) / 1000.0;
}

std::string results_header(const ParameterSpace& space) {
    std::string header;
    for (const auto& p : space.params()) {
        header += p.name;
        header += ',';
    }
    header += "objective,status,elapsed_sec,worker_id,eval_id,started_at,finished_at";
    return header;
}

namespace {

std::string record_row(const ParameterSpace& space, const EvaluationRecord& r) {
    std::string row;
    for (std::size_t i = 0; i < space.size(); ++i) {
        row += format_config_value(r.config[i]);
        row += ',';
    }
    row += format_double(r.objective);
    row += ',';
    row += to_string(r.status);
    row += ',';
    row += format_double(r.elapsed_sec);
    row += ',';
    row += std::to_string(r.worker_id);
    row += ',';
    row += std::to_string(r.eval_id);
    row += ',';
    row += format_time(r.started_at);
    row += ',';
    row += format_time(r.finished_at);
    return row;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (const char c : line) {
        if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

double parse_double(const std::string& s, const char* what) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + s.size() || s.empty())
        throw ParseError(std::string("results file: bad ") + what + " value '" + s + "'");
    return v;
}

std::int64_t parse_int(const std::string& s, const char* what) {
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ParseError(std::string("results file: bad ") + what + " value '" + s + "'");
    return v;
}

std::optional<Value> parse_param_value(const ParameterSpec& spec, const std::string& field) {
    if (field == "nan")
        return std::nullopt;
    if (spec.is_categorical())
        return Value{field};
    if (spec.is_ordinal())
        return Value{parse_double(field, spec.name.c_str())};
    return Value{parse_int(field, spec.name.c_str())};
}

} // namespace

ResultsWriter::ResultsWriter(fs::path path, const ParameterSpace& space, bool append)
    : path_(std::move(path)), space_(space) {
    bool continue_existing = false;
    if (append) {
        std::error_code ec;
        continue_existing = fs::exists(path_, ec) && fs::file_size(path_, ec) > 0;
    }
    if (continue_existing) {
        const auto existing = read_results(path_, space_);
        for (const auto& r : existing)
            last_eval_id_ = std::max<std::int64_t>(last_eval_id_, r.eval_id);
        out_.open(path_, std::ios::app);
    } else {
        out_.open(path_, std::ios::trunc);
        if (out_)
            out_ << results_header(space_) << '\n' << std::flush;
    }
    if (!out_)
        throw IoError("cannot open results file " + path_.string());
}

void ResultsWriter::append(const EvaluationRecord& record) {
    if (record.eval_id <= last_eval_id_)
        throw Error("results file: eval_id " + std::to_string(record.eval_id) +
                    " does not increase (last was " + std::to_string(last_eval_id_) + ")");
    out_ << record_row(space_, record) << '\n' << std::flush;
    if (!out_)
        throw IoError("write to " + path_.string() + " failed");
    last_eval_id_ = record.eval_id;
}

std::vector<EvaluationRecord> read_results(const fs::path& path, const ParameterSpace& space) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open results file " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("results file " + path.string() + " is empty");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != results_header(space))
        throw ParseError("results file header does not match the space");

    const std::size_t n_params = space.size();
    std::vector<EvaluationRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        const auto fields = split_csv(line);
        if (fields.size() != n_params + 7)
            throw ParseError("results file line " + std::to_string(line_no) + ": expected " +
                             std::to_string(n_params + 7) + " fields, got " +
                             std::to_string(fields.size()));
        EvaluationRecord r;
        std::vector<std::optional<Value>> values(n_params);
        for (std::size_t i = 0; i < n_params; ++i)
            values[i] = parse_param_value(space.param(i), fields[i]);
        r.config = Configuration(std::move(values));
        r.objective = parse_double(fields[n_params], "objective");
        r.status = status_from_string(fields[n_params + 1]);
        r.elapsed_sec = parse_double(fields[n_params + 2], "elapsed_sec");
        r.worker_id = static_cast<int>(parse_int(fields[n_params + 3], "worker_id"));
        r.eval_id = static_cast<int>(parse_int(fields[n_params + 4], "eval_id"));
        r.started_at = parse_double(fields[n_params + 5], "started_at");
        r.finished_at = parse_double(fields[n_params + 6], "finished_at");
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<TracePoint> export_trace(const std::vector<EvaluationRecord>& records,
                                     const std::optional<BaselineSpec>& baseline) {
    std::vector<TracePoint> trace;
    trace.reserve(records.size() + 1);
    if (baseline)
        trace.push_back({0.0, baseline->objective, "baseline"});
    for (const auto& r : records)
        trace.push_back({r.finished_at, r.objective, to_string(r.status)});
    std::stable_sort(trace.begin(), trace.end(),
                     [](const TracePoint& a, const TracePoint& b) { return a.t_sec < b.t_sec; });
    return trace;
}

void write_trace_csv(const fs::path& path, const std::vector<TracePoint>& trace) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot open trace file " + path.string());
    out << "t_sec,objective,status\n";
    for (const auto& p : trace)
        out << format_time(p.t_sec) << ',' << format_double(p.objective) << ',' << p.status
            << '\n';
    if (!out.flush())
        throw IoError("write to " + path.string() + " failed");
}

std::string render_report(const ParameterSpace& space,
                          const std::vector<EvaluationRecord>& records, Direction direction,
                          const std::optional<BaselineSpec>& baseline) {
    std::ostringstream out;
    std::map<EvalStatus, std::size_t> counts;
    const EvaluationRecord* best = nullptr;
    double wall = 0;
    for (const auto& r : records) {
        ++counts[r.status];
        wall = std::max(wall, r.finished_at);
        if (r.status != EvalStatus::ok)
            continue;
        const bool better = !best || (direction == Direction::maximize
                                          ? r.objective > best->objective
                                          : r.objective < best->objective);
        if (better)
            best = &r;
    }

    out << "evaluations: " << records.size() << " (ok " << counts[EvalStatus::ok] << ", timeout "
        << counts[EvalStatus::timeout] << ", fail " << counts[EvalStatus::fail] << ")\n";
    out << "direction: " << to_string(direction) << '\n';
    out << "total wall time: " << format_time(wall) << " s\n";
    if (!best) {
        out << "best: none (no successful evaluations)\n";
        return out.str();
    }
    out << "best objective: " << format_double(best->objective) << " (eval " << best->eval_id
        << ", worker " << best->worker_id << ", finished at " << format_time(best->finished_at)
        << " s)\n";
    out << "best configuration:\n";
    for (std::size_t i = 0; i < space.size(); ++i)
        out << "  " << space.param(i).name << " = " << format_config_value(best->config[i])
            << '\n';
    if (baseline) {
        out << "baseline: " << format_double(baseline->objective);
        if (!baseline->provenance.empty())
            out << " (" << baseline->provenance << ")";
        out << '\n';
        char pct[32];
        std::snprintf(pct, sizeof(pct), "%.2f",
                      improvement_percent(*baseline, best->objective));
        out << "improvement: " << pct << "%\n";
    }
    return out.str();
}

} // namespace autotune
