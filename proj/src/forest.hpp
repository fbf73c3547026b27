#ifndef AUTOTUNE_FOREST_HPP
#define AUTOTUNE_FOREST_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"

namespace autotune {

struct ForestParams {
    int n_trees = 50;
    int min_samples_split = 2;
    std::optional<int> max_depth; // nullopt = unlimited
    bool bootstrap = true;
};

struct TrainingSet {
    std::vector<std::vector<double>> xs;
    std::vector<double> ys;
};

/// Random forest of CART regression trees. Splits are axis-aligned
/// thresholds at midpoints between sorted distinct feature values, chosen
/// to minimize the weighted variance of the child target sets; ties break
/// toward the lowest feature index, then the lowest threshold. Each tree
/// trains on a same-size bootstrap resample when params.bootstrap is set.
///
/// A fitted forest is immutable and safe for concurrent predict calls.
class RandomForest {
public:
    struct Prediction {
        double mean = 0.0;
        double stddev = 0.0;
    };

    // Flat node storage; feature == -1 marks a leaf.
    struct Node {
        int feature = -1;
        double threshold = 0.0;
        double value = 0.0; // leaf mean
        std::int32_t left = -1;
        std::int32_t right = -1;
    };
    struct Tree {
        std::vector<Node> nodes;
        double predict(std::span<const double> x) const;
    };

    /// Deterministic given (data, params, seed).
    static RandomForest fit(const TrainingSet& data, const ForestParams& params,
                            std::uint64_t seed);

    /// Mean and population standard deviation over per-tree predictions.
    Prediction predict(std::span<const double> x) const;

    std::vector<double> predict_per_tree(std::span<const double> x) const;

    static Prediction aggregate(std::span<const double> per_tree);

    std::size_t dimension() const { return dimension_; }
    std::size_t tree_count() const { return trees_.size(); }

private:
    std::vector<Tree> trees_;
    std::size_t dimension_ = 0;
};

} // namespace autotune

#endif
