#ifndef AUTOTUNE_SYNTHETIC_HPP
#define AUTOTUNE_SYNTHETIC_HPP

#include <map>
#include <string>
#include <vector>

#include "harness.hpp"
#include "space.hpp"

namespace autotune {

/// Deterministic test objective over a conditional space (minimize
/// orientation by construction): a weighted quadratic bowl over normalized
/// numeric parameters, plus per-choice categorical offsets, plus a constant
/// contribution for each active conditioned child, plus optional Gaussian
/// noise. `sleep_sec` makes evaluations take real wall time so scheduling
/// behavior can be exercised without an external application.
struct SyntheticObjective {
    std::vector<double> weights; // per parameter; ignored for categoricals
    std::vector<double> optima;  // per parameter, normalized to [0, 1]
    std::map<std::string, double> categorical_offsets; // by choice string
    double conditional_term = 0;
    double noise_std = 0;
    double sleep_sec = 0;
};

double evaluate_synthetic(const SyntheticObjective& obj, const ParameterSpace& space,
                          const Configuration& cfg, RandomSource& rng);

struct SyntheticBenchmark {
    ParameterSpace space;
    SyntheticObjective objective;
};

/// Canned benchmarks, addressable from campaign files as
/// "synthetic:<name>". "openmc-like" is a small fully enumerable space with
/// the same shape as a real queued/queueless tuning problem: one categorical
/// mode switch, a wide quantized integer, a conditioned child, an ordinal.
SyntheticBenchmark synthetic_benchmark(const std::string& name);
std::vector<std::string> synthetic_benchmark_names();

/// Wrap a synthetic objective as an Evaluator. Noise is seeded from
/// (campaign seed, eval_id) so reruns reproduce exactly. When sleep_sec
/// reaches the evaluation timeout the outcome mirrors the subprocess
/// harness: status=timeout, objective = timeout seconds (minimize) or the
/// penalty (maximize).
Evaluator make_synthetic_evaluator(ParameterSpace space, SyntheticObjective objective);

} // namespace autotune

#endif
