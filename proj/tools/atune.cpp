#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "autotune/autotune.h"

namespace {

// Exit codes: 0 success, 2 invalid input, 3 aborted campaign.
constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitAborted = 3;

int map_code(int rc) {
    if (rc == ATUNE_OK)
        return kExitOk;
    if (rc == ATUNE_EABORTED)
        return kExitAborted;
    return kExitInvalid;
}

int fail(int rc) {
    std::fprintf(stderr, "atune: %s\n", atune_last_error());
    return map_code(rc);
}

void print_and_free(char* text) {
    if (text) {
        std::fputs(text, stdout);
        atune_string_free(text);
    }
}

struct RunOptions {
    std::string campaign_path;
    std::string output_dir = ".";
    std::optional<int> workers;
    std::optional<int> max_evals;
    std::optional<double> timeout;
    std::optional<double> kappa;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> direction;
    std::optional<double> penalty;
    std::optional<double> wall_clock_budget;
    bool dry_run = false;
    bool reproducible_timestamps = false;
};

int apply_overrides(atune_campaign* campaign, const RunOptions& opt) {
    int rc = ATUNE_OK;
    if (opt.workers && !rc)
        rc = atune_campaign_set_workers(campaign, *opt.workers);
    if (opt.max_evals && !rc)
        rc = atune_campaign_set_max_evals(campaign, *opt.max_evals);
    if (opt.timeout && !rc)
        rc = atune_campaign_set_timeout(campaign, *opt.timeout);
    if (opt.kappa && !rc)
        rc = atune_campaign_set_kappa(campaign, *opt.kappa);
    if (opt.seed && !rc)
        rc = atune_campaign_set_seed(campaign, *opt.seed);
    if (opt.direction && !rc)
        rc = atune_campaign_set_direction(campaign, opt.direction->c_str());
    if (opt.penalty && !rc)
        rc = atune_campaign_set_penalty(campaign, *opt.penalty);
    if (opt.wall_clock_budget && !rc)
        rc = atune_campaign_set_wall_clock_budget(campaign, *opt.wall_clock_budget);
    if (opt.reproducible_timestamps && !rc)
        rc = atune_campaign_set_reproducible_timestamps(campaign, 1);
    return rc;
}

int cmd_run(const RunOptions& opt) {
    atune_campaign* campaign = nullptr;
    int rc = atune_campaign_load(opt.campaign_path.c_str(), &campaign);
    if (rc != ATUNE_OK)
        return fail(rc);
    rc = apply_overrides(campaign, opt);
    if (rc == ATUNE_OK) {
        char* text = nullptr;
        rc = opt.dry_run ? atune_campaign_dry_run(campaign, &text)
                         : atune_campaign_run(campaign, opt.output_dir.c_str(), &text);
        print_and_free(text);
    }
    atune_campaign_free(campaign);
    return rc == ATUNE_OK ? kExitOk : fail(rc);
}

int cmd_sample(const std::string& space_path, std::size_t n, std::uint64_t seed) {
    atune_space* space = nullptr;
    int rc = atune_space_from_file(space_path.c_str(), &space);
    if (rc != ATUNE_OK)
        return fail(rc);
    char* csv = nullptr;
    rc = atune_space_sample_csv(space, seed, n, &csv);
    print_and_free(csv);
    atune_space_free(space);
    return rc == ATUNE_OK ? kExitOk : fail(rc);
}

int cmd_report(const std::string& campaign_path, const std::string& results_path,
               const std::optional<std::string>& direction,
               const std::optional<double>& baseline) {
    atune_campaign* campaign = nullptr;
    int rc = atune_campaign_load(campaign_path.c_str(), &campaign);
    if (rc != ATUNE_OK)
        return fail(rc);
    if (direction)
        rc = atune_campaign_set_direction(campaign, direction->c_str());
    if (rc == ATUNE_OK) {
        char* text = nullptr;
        const double* baseline_ptr = baseline ? &*baseline : nullptr;
        rc = atune_campaign_report(campaign, results_path.c_str(), baseline_ptr, &text);
        print_and_free(text);
    }
    atune_campaign_free(campaign);
    return rc == ATUNE_OK ? kExitOk : fail(rc);
}

int cmd_trace(const std::string& campaign_path, const std::string& results_path,
              const std::string& out_path) {
    atune_campaign* campaign = nullptr;
    int rc = atune_campaign_load(campaign_path.c_str(), &campaign);
    if (rc != ATUNE_OK)
        return fail(rc);
    rc = atune_campaign_export_trace(campaign, results_path.c_str(), out_path.c_str());
    atune_campaign_free(campaign);
    if (rc == ATUNE_OK) {
        std::printf("wrote %s\n", out_path.c_str());
        return kExitOk;
    }
    return fail(rc);
}

int cmd_validate(const std::string& path) {
    atune_space* space = nullptr;
    if (atune_space_from_file(path.c_str(), &space) == ATUNE_OK) {
        atune_space_free(space);
        std::printf("%s: valid space definition\n", path.c_str());
        return kExitOk;
    }
    const std::string space_error = atune_last_error();
    atune_campaign* campaign = nullptr;
    if (atune_campaign_load(path.c_str(), &campaign) == ATUNE_OK) {
        atune_campaign_free(campaign);
        std::printf("%s: valid campaign definition\n", path.c_str());
        return kExitOk;
    }
    std::fprintf(stderr, "atune: not a valid space (%s)\n", space_error.c_str());
    std::fprintf(stderr, "atune: not a valid campaign (%s)\n", atune_last_error());
    return kExitInvalid;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Asynchronous model-based autotuning for external programs"};
    app.set_version_flag("--version", atune_version());
    app.require_subcommand(1);

    RunOptions run_opt;
    CLI::App* run = app.add_subcommand("run", "Run a campaign from a campaign file");
    run->add_option("campaign", run_opt.campaign_path, "Campaign file (JSON)")->required();
    run->add_option("--output-dir", run_opt.output_dir,
                    "Directory for results.csv, trace.csv, and evals/");
    run->add_option("--workers", run_opt.workers, "Number of parallel workers");
    run->add_option("--max-evals", run_opt.max_evals, "Total evaluation budget");
    run->add_option("--timeout", run_opt.timeout, "Per-evaluation timeout in seconds");
    run->add_option("--kappa", run_opt.kappa,
                    "Exploration weight in the acquisition score (default 1.96)");
    run->add_option("--seed", run_opt.seed, "Random seed");
    run->add_option("--direction", run_opt.direction, "minimize or maximize")
        ->check(CLI::IsMember({"minimize", "maximize"}));
    run->add_option("--penalty", run_opt.penalty,
                    "Objective recorded for failed/timed-out evaluations");
    run->add_option("--wall-clock-budget", run_opt.wall_clock_budget,
                    "Stop dispatching new evaluations after this many seconds");
    run->add_flag("--dry-run", run_opt.dry_run,
                  "Render scripts and launcher lines without executing");
    run->add_flag("--reproducible-timestamps", run_opt.reproducible_timestamps,
                  "Zero out timing fields so identical runs produce identical files");

    std::string sample_space;
    std::size_t sample_n = 5;
    std::uint64_t sample_seed = 0;
    CLI::App* sample = app.add_subcommand("sample", "Print seeded samples from a space file");
    sample->add_option("space", sample_space, "Space definition file (JSON)")->required();
    sample->add_option("-n,--count", sample_n, "Number of samples");
    sample->add_option("--seed", sample_seed, "Random seed");

    std::string report_campaign;
    std::string report_results = "results.csv";
    std::optional<std::string> report_direction;
    std::optional<double> report_baseline;
    CLI::App* report = app.add_subcommand("report", "Summarize an existing results file");
    report->add_option("campaign", report_campaign, "Campaign file (JSON)")->required();
    report->add_option("--results", report_results, "Path to results.csv");
    report->add_option("--direction", report_direction, "minimize or maximize")
        ->check(CLI::IsMember({"minimize", "maximize"}));
    report->add_option("--baseline", report_baseline, "Baseline objective to compare against");

    std::string trace_campaign;
    std::string trace_results = "results.csv";
    std::string trace_out = "trace.csv";
    CLI::App* trace = app.add_subcommand("trace", "Export a finish-time-ordered trace");
    trace->add_option("campaign", trace_campaign, "Campaign file (JSON)")->required();
    trace->add_option("--results", trace_results, "Path to results.csv");
    trace->add_option("--out", trace_out, "Output trace file");

    std::string validate_path;
    CLI::App* validate = app.add_subcommand("validate", "Validate a space or campaign file");
    validate->add_option("file", validate_path, "Space or campaign file (JSON)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInvalid;
    }

    if (run->parsed())
        return cmd_run(run_opt);
    if (sample->parsed())
        return cmd_sample(sample_space, sample_n, sample_seed);
    if (report->parsed())
        return cmd_report(report_campaign, report_results, report_direction, report_baseline);
    if (trace->parsed())
        return cmd_trace(trace_campaign, trace_results, trace_out);
    if (validate->parsed())
        return cmd_validate(validate_path);
    return kExitInvalid;
}
