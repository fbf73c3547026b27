#ifndef AUTOTUNE_HARNESS_HPP
#define AUTOTUNE_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "optimizer.hpp"
#include "space.hpp"

namespace autotune {

/// Script template plus launcher-argument template; both use `#Pk`
/// placeholders where k is the parameter's index in space order.
struct CodeMold {
    std::string template_text;
    std::string launcher_template;
};

struct RenderedEvaluation {
    std::string script_text;
    std::string launcher_args;
};

enum class MetricKind { fom, runtime, energy, edp };

const char* to_string(MetricKind k);
MetricKind metric_kind_from_string(const std::string& s);

struct MetricSpec {
    MetricKind kind = MetricKind::fom;
    /// Regex with one numeric capture group, applied to stdout; the LAST
    /// match wins. Used for fom and runtime. An empty pattern with
    /// kind=runtime falls back to measured wall-clock time.
    std::string stdout_pattern;
    /// File read from the evaluation directory for energy/edp; one line per
    /// node: "package_energy_j dram_energy_j".
    std::string metrics_filename = "metrics.txt";

    Direction direction() const {
        return kind == MetricKind::fom ? Direction::maximize : Direction::minimize;
    }
};

/// Replace every `#Pk` in `text` with the rendered value of parameter k
/// (Inactive renders as "nan"). Throws on out-of-range indices or if any
/// placeholder survives.
std::string render_template(const std::string& text, const ParameterSpace& space,
                            const Configuration& cfg);

RenderedEvaluation render_mold(const CodeMold& mold, const ParameterSpace& space,
                               const Configuration& cfg);

struct ExecutionRequest {
    std::string script_text;
    std::string launcher_args;
    std::filesystem::path work_dir; // created if missing; logs land here
    double timeout_sec = 0;
    double penalty = -1;
    MetricSpec metric;
    Direction direction = Direction::maximize;
};

struct ExecutionOutcome {
    double objective = 0;
    EvalStatus status = EvalStatus::fail;
    double elapsed = 0; // wall-clock seconds
};

/// Run the rendered script as `/bin/sh script` in its own process group
/// inside work_dir, with stdout/stderr captured to stdout.log/stderr.log.
/// On timeout the whole process group is killed; the objective is then the
/// timeout in seconds for minimize metrics or `penalty` for maximize
/// metrics. Spawn failures, nonzero exits, and unparseable output yield
/// status=fail with objective=penalty.
ExecutionOutcome execute_with_timeout(const ExecutionRequest& req);

/// Mean over nodes of (package + dram) energy.
double aggregate_energy(const std::vector<std::pair<double, double>>& per_node);

/// Energy-delay product: energy times runtime.
double compute_edp(double energy_joules, double runtime_sec);

/// Default evaluation timeout: 1.5x the baseline runtime.
double default_timeout(double baseline_runtime_sec);

/// Parse "package dram" pairs, one node per line; blank lines are skipped.
std::vector<std::pair<double, double>> read_energy_file(const std::filesystem::path& path);

struct EvalRequest {
    int eval_id = 0;
    int worker_id = 0;
    Configuration config;
    double timeout_sec = 0;
    double penalty = -1;
    Direction direction = Direction::maximize;
    std::uint64_t campaign_seed = 0;
};

using Evaluator = std::function<ExecutionOutcome(const EvalRequest&)>;

/// Evaluator that renders a code mold per configuration and executes it in
/// evals/<eval_id>/ under base_dir.
class SubprocessEvaluator {
public:
    SubprocessEvaluator(ParameterSpace space, CodeMold mold, MetricSpec metric,
                        std::filesystem::path base_dir);

    ExecutionOutcome operator()(const EvalRequest& req) const;

    const CodeMold& mold() const { return mold_; }
    const MetricSpec& metric() const { return metric_; }

private:
    ParameterSpace space_;
    CodeMold mold_;
    MetricSpec metric_;
    std::filesystem::path base_dir_;
};

} // namespace autotune

#endif
