#include "ensemble.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include "errors.hpp"

namespace autotune {

namespace {

using Clock = std::chrono::steady_clock;

struct Task {
    int eval_id;
    Configuration config;
};

struct WorkerResult {
    int eval_id;
    int worker_id;
    Configuration config;
    ExecutionOutcome outcome;
    double started_at;
    double finished_at;
};

class TaskQueue {
public:
    void push(Task task) {
        {
            std::lock_guard lock(mutex_);
            tasks_.push_back(std::move(task));
        }
        cv_.notify_one();
    }

    std::optional<Task> pop() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return closed_ || !tasks_.empty(); });
        if (tasks_.empty())
            return std::nullopt;
        Task task = std::move(tasks_.front());
        tasks_.pop_front();
        return task;
    }

    void close() {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        cv_.notify_all();
    }

    void close_and_discard() {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
            tasks_.clear();
        }
        cv_.notify_all();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Task> tasks_;
    bool closed_ = false;
};

class ResultQueue {
public:
    void push(WorkerResult result) {
        {
            std::lock_guard lock(mutex_);
            results_.push_back(std::move(result));
        }
        cv_.notify_one();
    }

    WorkerResult pop() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return !results_.empty(); });
        WorkerResult result = std::move(results_.front());
        results_.pop_front();
        return result;
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<WorkerResult> results_;
};

} // namespace

void CampaignConfig::validate() const {
    if (n_workers < 1)
        throw Error("n_workers must be >= 1");
    if (max_evals < 1)
        throw Error("max_evals must be >= 1");
    if (n_workers > max_evals)
        throw Error("n_workers (" + std::to_string(n_workers) + ") must not exceed max_evals (" +
                    std::to_string(max_evals) + ")");
    if (!(eval_timeout > 0))
        throw Error("eval_timeout must be > 0");
    if (kappa < 0)
        throw Error("kappa must be >= 0");
    if (n_initial && *n_initial < 1)
        throw Error("n_initial must be >= 1");
    if (candidate_pool_size < 1)
        throw Error("candidate_pool_size must be >= 1");
    if (wall_clock_budget < 0)
        throw Error("wall_clock_budget must be >= 0");
}

ProgressSnapshot progress_snapshot(const std::vector<EvaluationRecord>& records,
                                   Direction direction, double elapsed_total) {
    ProgressSnapshot snap;
    snap.n_done = records.size();
    snap.elapsed_total = elapsed_total;
    const EvaluationRecord* best = nullptr;
    for (const auto& r : records) {
        if (r.status != EvalStatus::ok)
            continue;
        if (!best || (direction == Direction::maximize ? r.objective > best->objective
                                                       : r.objective < best->objective))
            best = &r;
    }
    if (best) {
        snap.best_objective = best->objective;
        snap.best_config = best->config;
    }
    return snap;
}

CampaignResult run_campaign(const ParameterSpace& space, const Evaluator& evaluator,
                            const CampaignConfig& config, ResultsWriter* writer) {
    config.validate();

    OptimizerConfig opt_config;
    opt_config.kappa = config.kappa;
    opt_config.n_initial = config.effective_n_initial();
    opt_config.candidate_pool_size = config.candidate_pool_size;
    opt_config.seed = config.seed;
    opt_config.direction = config.direction;
    opt_config.forest = config.forest;
    AskTellOptimizer optimizer(space, opt_config);

    const double penalty = config.effective_penalty();
    const auto t0 = Clock::now();
    auto now_sec = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

    TaskQueue tasks;
    ResultQueue results;

    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(config.n_workers));
    for (int w = 0; w < config.n_workers; ++w) {
        workers.emplace_back([&, w] {
            while (auto task = tasks.pop()) {
                WorkerResult result;
                result.eval_id = task->eval_id;
                result.worker_id = w;
                result.config = std::move(task->config);
                result.started_at = now_sec();

                EvalRequest req;
                req.eval_id = result.eval_id;
                req.worker_id = w;
                req.config = result.config;
                req.timeout_sec = config.eval_timeout;
                req.penalty = penalty;
                req.direction = config.direction;
                req.campaign_seed = config.seed;
                try {
                    result.outcome = evaluator(req);
                } catch (const std::exception&) {
                    result.outcome.status = EvalStatus::fail;
                    result.outcome.objective = penalty;
                    result.outcome.elapsed = now_sec() - result.started_at;
                }
                if (!std::isfinite(result.outcome.objective)) {
                    result.outcome.status = EvalStatus::fail;
                    result.outcome.objective = penalty;
                }
                result.finished_at = now_sec();
                results.push(std::move(result));
            }
        });
    }

    CampaignResult campaign;
    int dispatched = 0;
    int in_flight = 0;

    auto try_dispatch = [&]() -> bool {
        if (dispatched >= config.max_evals || campaign.exhausted || campaign.aborted)
            return false;
        if (config.wall_clock_budget > 0 && now_sec() >= config.wall_clock_budget)
            return false;
        try {
            Configuration cfg = optimizer.ask();
            tasks.push({dispatched, std::move(cfg)});
            ++dispatched;
            ++in_flight;
            return true;
        } catch (const SpaceExhausted&) {
            campaign.exhausted = true;
            return false;
        } catch (const std::exception& e) {
            campaign.aborted = true;
            campaign.abort_reason = e.what();
            tasks.close_and_discard();
            return false;
        }
    };

    for (int i = 0; i < config.n_workers; ++i)
        if (!try_dispatch())
            break;

    // Records completed out of dispatch order wait here so the results file
    // keeps strictly increasing eval_ids.
    std::map<int, EvaluationRecord> pending_write;
    int next_write_id = 0;
    auto flush_ready = [&] {
        while (!pending_write.empty() && pending_write.begin()->first == next_write_id) {
            if (writer)
                writer->append(pending_write.begin()->second);
            pending_write.erase(pending_write.begin());
            ++next_write_id;
        }
    };

    while (in_flight > 0) {
        WorkerResult result = results.pop();
        --in_flight;

        EvaluationRecord record;
        record.eval_id = result.eval_id;
        record.worker_id = result.worker_id;
        record.config = std::move(result.config);
        record.objective = result.outcome.objective;
        record.status = result.outcome.status;
        if (config.reproducible_timestamps) {
            record.elapsed_sec = 0;
            record.started_at = 0;
            record.finished_at = 0;
        } else {
            record.elapsed_sec = result.outcome.elapsed;
            record.started_at = quantize_ms(result.started_at);
            record.finished_at = quantize_ms(result.finished_at);
        }

        try {
            optimizer.tell(record.config, record.objective, record.status);
        } catch (const std::exception& e) {
            if (!campaign.aborted) {
                campaign.aborted = true;
                campaign.abort_reason = e.what();
                tasks.close_and_discard();
            }
        }
        campaign.records.push_back(record);

        pending_write.emplace(record.eval_id, std::move(record));
        if (!campaign.aborted) {
            try {
                flush_ready();
            } catch (const std::exception& e) {
                campaign.aborted = true;
                campaign.abort_reason = e.what();
                tasks.close_and_discard();
            }
        }

        try_dispatch();
    }

    tasks.close();
    for (auto& worker : workers)
        worker.join();

    if (!campaign.aborted) {
        try {
            flush_ready();
            // Exhaustion or a budget stop can leave a gap-free ordered tail.
            for (auto& [id, rec] : pending_write)
                if (writer)
                    writer->append(rec);
            pending_write.clear();
        } catch (const std::exception& e) {
            campaign.aborted = true;
            campaign.abort_reason = e.what();
        }
    }

    std::sort(campaign.records.begin(), campaign.records.end(),
              [](const EvaluationRecord& a, const EvaluationRecord& b) {
                  return a.eval_id < b.eval_id;
              });
    campaign.wall_time_sec = now_sec();
    return campaign;
}

} // namespace autotune
