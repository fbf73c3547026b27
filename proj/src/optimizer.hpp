#ifndef AUTOTUNE_OPTIMIZER_HPP
#define AUTOTUNE_OPTIMIZER_HPP

#include <cstdint>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "forest.hpp"
#include "rng.hpp"
#include "space.hpp"

namespace autotune {

enum class Direction { minimize, maximize };
enum class EvalStatus { ok, timeout, fail };

const char* to_string(Direction d);
const char* to_string(EvalStatus s);
Direction direction_from_string(const std::string& s);
EvalStatus status_from_string(const std::string& s);

/// Lower confidence bound acquisition: mu - kappa * sigma.
/// Lower is more promising under minimization.
double lcb(double mu, double sigma, double kappa);

/// Index of the candidate with the lowest LCB score; ties break toward the
/// lowest index.
std::size_t pick_by_lcb(std::span<const RandomForest::Prediction> candidates, double kappa);

struct OptimizerConfig {
    double kappa = 1.96;
    int n_initial = 8;
    int candidate_pool_size = 1000;
    std::uint64_t seed = 0;
    Direction direction = Direction::minimize;
    ForestParams forest;
};

/// Sequential model-based optimizer over a conditional parameter space.
///
/// ask() returns the next configuration to evaluate: random draws until
/// n_initial results have been told, then the best-LCB candidate from a
/// random pool scored by a random-forest surrogate refit on the history.
/// tell() feeds an observed objective back. Maximize objectives are negated
/// on the way in so the machinery always minimizes.
///
/// Not thread-safe: a single owner serializes ask/tell.
class AskTellOptimizer {
public:
    struct Observation {
        Configuration config;
        double objective; // internal minimize orientation
        EvalStatus status;
    };

    AskTellOptimizer(ParameterSpace space, OptimizerConfig config);

    Configuration ask();
    void tell(const Configuration& cfg, double objective, EvalStatus status);

    const ParameterSpace& space() const { return space_; }
    const OptimizerConfig& config() const { return config_; }
    const std::vector<Observation>& history() const { return history_; }
    std::size_t in_flight_count() const { return in_flight_keys_.size(); }

private:
    Configuration propose_random();
    Configuration propose_by_surrogate();
    Configuration pick_from_enumeration(const RandomForest* forest);
    bool is_used(const Configuration& cfg) const;

    ParameterSpace space_;
    OptimizerConfig config_;
    RandomSource rng_;
    std::uint64_t fit_seed_base_;
    std::vector<Observation> history_;
    std::unordered_set<std::string> in_flight_keys_;
    std::unordered_set<std::string> used_keys_; // history + in flight
};

} // namespace autotune

#endif
