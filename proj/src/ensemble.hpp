#ifndef AUTOTUNE_ENSEMBLE_HPP
#define AUTOTUNE_ENSEMBLE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "forest.hpp"
#include "harness.hpp"
#include "optimizer.hpp"
#include "space.hpp"
#include "store.hpp"

namespace autotune {

struct CampaignConfig {
    int n_workers = 1;
    int max_evals = 1;
    double eval_timeout = 300.0;
    double kappa = 1.96;
    std::optional<int> n_initial; // default max(2 * n_workers, 8)
    int candidate_pool_size = 1000;
    std::uint64_t seed = 0;
    Direction direction = Direction::maximize;
    std::optional<double> penalty; // default -1 (maximize) or eval_timeout (minimize)
    std::string metric_name = "objective";
    double wall_clock_budget = 0; // seconds; 0 means unlimited
    bool reproducible_timestamps = false;
    ForestParams forest;

    int effective_n_initial() const {
        return n_initial ? *n_initial : std::max(2 * n_workers, 8);
    }
    /// Worst-region value fed back for timeouts (maximize) and failures.
    /// Minimize campaigns default to the timeout itself so bad results rank
    /// last instead of first.
    double effective_penalty() const {
        if (penalty)
            return *penalty;
        return direction == Direction::maximize ? -1.0 : eval_timeout;
    }
    void validate() const;
};

struct CampaignResult {
    std::vector<EvaluationRecord> records; // sorted by eval_id
    bool aborted = false;
    bool exhausted = false; // distinct configurations ran out before max_evals
    std::string abort_reason;
    double wall_time_sec = 0;
};

struct ProgressSnapshot {
    std::size_t n_done = 0;
    std::optional<double> best_objective;
    std::optional<Configuration> best_config;
    double elapsed_total = 0;
};

ProgressSnapshot progress_snapshot(const std::vector<EvaluationRecord>& records,
                                   Direction direction, double elapsed_total);

/// Drive an asynchronous campaign: one manager owning the optimizer and the
/// results store, n worker threads each evaluating one configuration at a
/// time. The first n_workers configurations are dispatched as a batch; every
/// completion is told to the optimizer and immediately backfilled with a new
/// ask until max_evals have been dispatched (or the space is exhausted, or
/// the wall-clock budget is spent). `writer` may be null to skip
/// persistence.
CampaignResult run_campaign(const ParameterSpace& space, const Evaluator& evaluator,
                            const CampaignConfig& config, ResultsWriter* writer);

} // namespace autotune

#endif
