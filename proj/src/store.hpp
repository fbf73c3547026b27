#ifndef AUTOTUNE_STORE_HPP
#define AUTOTUNE_STORE_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "optimizer.hpp"
#include "space.hpp"

namespace autotune {

/// One finished evaluation. Timestamps are seconds since campaign start,
/// quantized to milliseconds so records survive a CSV round trip untouched.
struct EvaluationRecord {
    int eval_id = 0; // 0-based dispatch order
    int worker_id = 0;
    Configuration config;
    double objective = 0; // user orientation (never negated)
    EvalStatus status = EvalStatus::fail;
    double elapsed_sec = 0;
    double started_at = 0;
    double finished_at = 0;
};

struct BaselineSpec {
    double objective = 0;
    std::string provenance;
    Direction direction = Direction::maximize;
};

/// Percent improvement of `best` over the baseline, rounded to 2 decimals:
/// maximize -> 100*(best-baseline)/baseline, minimize -> 100*(baseline-best)/baseline.
double improvement_percent(const BaselineSpec& baseline, double best);

/// Append-only results.csv writer: one header row (parameter names in space
/// order, then objective,status,elapsed_sec,worker_id,eval_id,started_at,
/// finished_at), flushed per record. Inactive values serialize as "nan".
class ResultsWriter {
public:
    /// Opens `path`. With append=true an existing non-empty file is
    /// continued (header must match) and eval_id validation resumes from
    /// the last stored record.
    ResultsWriter(std::filesystem::path path, const ParameterSpace& space, bool append = false);

    void append(const EvaluationRecord& record);
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    ParameterSpace space_;
    std::ofstream out_;
    std::int64_t last_eval_id_ = -1;
};

std::string results_header(const ParameterSpace& space);

std::vector<EvaluationRecord> read_results(const std::filesystem::path& path,
                                           const ParameterSpace& space);

struct TracePoint {
    double t_sec = 0;
    double objective = 0;
    std::string status;
};

/// Records as (finish time, objective, status), sorted by finish time. A
/// configured baseline contributes a reference row at t=0 with status
/// "baseline".
std::vector<TracePoint> export_trace(const std::vector<EvaluationRecord>& records,
                                     const std::optional<BaselineSpec>& baseline);

void write_trace_csv(const std::filesystem::path& path, const std::vector<TracePoint>& trace);

/// Human-readable campaign summary: best configuration and objective,
/// improvement vs. baseline when given, status counts, total wall time.
std::string render_report(const ParameterSpace& space,
                          const std::vector<EvaluationRecord>& records, Direction direction,
                          const std::optional<BaselineSpec>& baseline);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

/// Fixed three decimals, for millisecond-quantized timestamps.
std::string format_time(double seconds);

/// Quantize to whole milliseconds (round half away from zero).
double quantize_ms(double seconds);

} // namespace autotune

#endif
