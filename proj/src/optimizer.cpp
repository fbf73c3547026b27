#include "optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "errors.hpp"

namespace autotune {

namespace {

// Resample budget before falling back to exhaustive enumeration; generous
// enough that hitting it on a non-exhausted space is effectively impossible.
constexpr int kResampleCap = 20000;
// Spaces up to this many configurations can be enumerated to find the
// remaining unused ones (or prove there are none).
constexpr std::uint64_t kEnumerationLimit = 1u << 20;

} // namespace

const char* to_string(Direction d) {
    return d == Direction::maximize ? "maximize" : "minimize";
}

const char* to_string(EvalStatus s) {
    switch (s) {
    case EvalStatus::ok:
        return "ok";
    case EvalStatus::timeout:
        return "timeout";
    default:
        return "fail";
    }
}

Direction direction_from_string(const std::string& s) {
    if (s == "minimize")
        return Direction::minimize;
    if (s == "maximize")
        return Direction::maximize;
    throw ParseError("unknown direction '" + s + "' (expected minimize or maximize)");
}

EvalStatus status_from_string(const std::string& s) {
    if (s == "ok")
        return EvalStatus::ok;
    if (s == "timeout")
        return EvalStatus::timeout;
    if (s == "fail")
        return EvalStatus::fail;
    throw ParseError("unknown status '" + s + "'");
}

double lcb(double mu, double sigma, double kappa) {
    if (sigma < 0)
        throw Error("lcb: sigma must be >= 0");
    if (kappa < 0)
        throw Error("lcb: kappa must be >= 0");
    return mu - kappa * sigma;
}

std::size_t pick_by_lcb(std::span<const RandomForest::Prediction> candidates, double kappa) {
    if (candidates.empty())
        throw Error("pick_by_lcb: no candidates");
    std::size_t best = 0;
    double best_score = lcb(candidates[0].mean, candidates[0].stddev, kappa);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double score = lcb(candidates[i].mean, candidates[i].stddev, kappa);
        if (score < best_score) {
            best = i;
            best_score = score;
        }
    }
    return best;
}

AskTellOptimizer::AskTellOptimizer(ParameterSpace space, OptimizerConfig config)
    : space_(std::move(space)),
      config_(config),
      rng_(derive_seed(config.seed, 0)),
      fit_seed_base_(derive_seed(config.seed, std::numeric_limits<std::uint64_t>::max())) {
    if (config_.kappa < 0)
        throw Error("kappa must be >= 0");
    if (config_.n_initial < 1)
        throw Error("n_initial must be >= 1");
    if (config_.candidate_pool_size < 1)
        throw Error("candidate_pool_size must be >= 1");
}

bool AskTellOptimizer::is_used(const Configuration& cfg) const {
    return used_keys_.count(space_.key(cfg)) != 0;
}

Configuration AskTellOptimizer::ask() {
    if (used_keys_.size() >= space_.cardinality())
        throw SpaceExhausted();
    Configuration cfg = history_.size() < static_cast<std::size_t>(config_.n_initial)
                            ? propose_random()
                            : propose_by_surrogate();
    const std::string key = space_.key(cfg);
    in_flight_keys_.insert(key);
    used_keys_.insert(key);
    return cfg;
}

void AskTellOptimizer::tell(const Configuration& cfg, double objective, EvalStatus status) {
    if (!std::isfinite(objective))
        throw Error("tell: objective must be finite");
    const std::string key = space_.key(cfg);
    const auto it = in_flight_keys_.find(key);
    if (it == in_flight_keys_.end())
        throw Error("tell: configuration is not in flight");
    in_flight_keys_.erase(it);
    const double internal = config_.direction == Direction::maximize ? -objective : objective;
    history_.push_back({cfg, internal, status});
}

Configuration AskTellOptimizer::propose_random() {
    for (int attempt = 0; attempt < kResampleCap; ++attempt) {
        Configuration cfg = space_.sample(rng_);
        if (!is_used(cfg))
            return cfg;
    }
    return pick_from_enumeration(nullptr);
}

Configuration AskTellOptimizer::propose_by_surrogate() {
    TrainingSet data;
    data.xs.reserve(history_.size());
    data.ys.reserve(history_.size());
    for (const auto& obs : history_) {
        data.xs.push_back(space_.encode(obs.config));
        data.ys.push_back(obs.objective);
    }
    const RandomForest forest =
        RandomForest::fit(data, config_.forest, derive_seed(fit_seed_base_, history_.size()));

    std::vector<Configuration> pool;
    std::unordered_set<std::string> pool_keys;
    pool.reserve(static_cast<std::size_t>(config_.candidate_pool_size));
    const int max_attempts = config_.candidate_pool_size + kResampleCap;
    for (int attempt = 0;
         attempt < max_attempts && pool.size() < static_cast<std::size_t>(config_.candidate_pool_size);
         ++attempt) {
        Configuration cfg = space_.sample(rng_);
        if (is_used(cfg))
            continue;
        if (!pool_keys.insert(space_.key(cfg)).second)
            continue;
        pool.push_back(std::move(cfg));
    }
    if (pool.empty())
        return pick_from_enumeration(&forest);

    std::vector<RandomForest::Prediction> predictions;
    predictions.reserve(pool.size());
    for (const auto& cfg : pool)
        predictions.push_back(forest.predict(space_.encode(cfg)));
    return pool[pick_by_lcb(predictions, config_.kappa)];
}

Configuration AskTellOptimizer::pick_from_enumeration(const RandomForest* forest) {
    const auto all = space_.enumerate(kEnumerationLimit);
    if (!all)
        throw SpaceExhausted(); // resampling failed and the space is too big to enumerate
    std::vector<Configuration> unused;
    for (const auto& cfg : *all)
        if (!is_used(cfg))
            unused.push_back(cfg);
    if (unused.empty())
        throw SpaceExhausted();
    if (!forest)
        return unused[static_cast<std::size_t>(rng_.bounded(unused.size()))];
    std::vector<RandomForest::Prediction> predictions;
    predictions.reserve(unused.size());
    for (const auto& cfg : unused)
        predictions.push_back(forest->predict(space_.encode(cfg)));
    return unused[pick_by_lcb(predictions, config_.kappa)];
}

} // namespace autotune
