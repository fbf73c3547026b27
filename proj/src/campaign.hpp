#ifndef AUTOTUNE_CAMPAIGN_HPP
#define AUTOTUNE_CAMPAIGN_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "ensemble.hpp"
#include "harness.hpp"
#include "space.hpp"
#include "store.hpp"
#include "synthetic.hpp"

namespace autotune {

enum class EvaluatorKind { synthetic, subprocess };

/// Everything a campaign file declares: the space, how to evaluate a
/// configuration, the campaign knobs, and an optional baseline.
struct CampaignDefinition {
    explicit CampaignDefinition(ParameterSpace s) : space(std::move(s)) {}

    ParameterSpace space;
    EvaluatorKind evaluator_kind = EvaluatorKind::synthetic;
    std::string synthetic_name;            // evaluator_kind == synthetic
    SyntheticObjective synthetic_objective; // resolved, incl. sleep/noise overrides
    CodeMold mold;                          // evaluator_kind == subprocess
    MetricSpec metric;
    CampaignConfig config;
    std::optional<BaselineSpec> baseline;
};

/// Command-line overrides; unset fields keep the file (or built-in) value.
/// Precedence: flag > file > default.
struct CampaignOverrides {
    std::optional<int> workers;
    std::optional<int> max_evals;
    std::optional<double> timeout;
    std::optional<double> kappa;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> direction;
    std::optional<double> penalty;
    std::optional<double> wall_clock_budget;
    bool reproducible_timestamps = false;
};

/// Parse and fully validate a campaign file (JSON). Referenced files (space,
/// mold, launcher) are resolved relative to the campaign file and must
/// exist; the mold is test-rendered against the default configuration so
/// placeholder errors surface before any evaluation runs.
CampaignDefinition load_campaign_file(const std::filesystem::path& path);

void apply_overrides(CampaignDefinition& def, const CampaignOverrides& overrides);

Evaluator make_evaluator(const CampaignDefinition& def,
                         const std::filesystem::path& output_dir);

struct CampaignRunOutput {
    CampaignResult result;
    std::filesystem::path results_path;
    std::filesystem::path trace_path;
};

/// Execute the campaign, writing results.csv and trace.csv under
/// output_dir. The report for the finished campaign is in
/// render_report(...) form via the store module.
CampaignRunOutput run_campaign_definition(const CampaignDefinition& def,
                                          const std::filesystem::path& output_dir);

/// Render what would run without executing anything: the default
/// configuration plus the initial batch, each as script text and launcher
/// line (or the configuration itself for synthetic evaluators).
std::string dry_run_preview(const CampaignDefinition& def);

} // namespace autotune

#endif
