#include "forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rng.hpp"

namespace autotune {

namespace {

struct SplitCandidate {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double cost = 0.0; // summed squared error of both children

    bool better_than(const SplitCandidate& other) const {
        if (!other.found)
            return found;
        if (cost != other.cost)
            return cost < other.cost;
        if (feature != other.feature)
            return feature < other.feature;
        return threshold < other.threshold;
    }
};

class TreeBuilder {
public:
    TreeBuilder(const TrainingSet& data, const ForestParams& params)
        : data_(data), params_(params), dim_(data.xs.front().size()) {}

    std::vector<std::size_t> sample_indices(RandomSource& rng) const {
        const std::size_t n = data_.ys.size();
        std::vector<std::size_t> indices(n);
        if (params_.bootstrap) {
            for (auto& i : indices)
                i = static_cast<std::size_t>(rng.bounded(n));
        } else {
            std::iota(indices.begin(), indices.end(), std::size_t{0});
        }
        return indices;
    }

    void grow(std::vector<RandomForest::Node>& nodes, std::vector<std::size_t>& indices,
              std::size_t begin, std::size_t end, int depth) {
        const std::size_t node_id = nodes.size();
        nodes.emplace_back();

        const std::size_t n = end - begin;
        double sum = 0.0;
        for (std::size_t k = begin; k < end; ++k)
            sum += data_.ys[indices[k]];
        const double mean = sum / static_cast<double>(n);

        auto make_leaf = [&] {
            nodes[node_id].feature = -1;
            nodes[node_id].value = mean;
        };

        if (n < static_cast<std::size_t>(params_.min_samples_split)) {
            make_leaf();
            return;
        }
        if (params_.max_depth && depth >= *params_.max_depth) {
            make_leaf();
            return;
        }
        double y_min = data_.ys[indices[begin]];
        double y_max = y_min;
        for (std::size_t k = begin + 1; k < end; ++k) {
            y_min = std::min(y_min, data_.ys[indices[k]]);
            y_max = std::max(y_max, data_.ys[indices[k]]);
        }
        if (y_min == y_max) {
            make_leaf();
            return;
        }

        const SplitCandidate split = best_split(indices, begin, end);
        if (!split.found) {
            make_leaf();
            return;
        }

        const auto mid_it = std::partition(
            indices.begin() + static_cast<std::ptrdiff_t>(begin),
            indices.begin() + static_cast<std::ptrdiff_t>(end),
            [&](std::size_t idx) { return data_.xs[idx][split.feature] < split.threshold; });
        const auto mid = static_cast<std::size_t>(mid_it - indices.begin());

        nodes[node_id].feature = split.feature;
        nodes[node_id].threshold = split.threshold;
        nodes[node_id].left = static_cast<std::int32_t>(nodes.size());
        grow(nodes, indices, begin, mid, depth + 1);
        nodes[node_id].right = static_cast<std::int32_t>(nodes.size());
        grow(nodes, indices, mid, end, depth + 1);
    }

private:
    SplitCandidate best_split(const std::vector<std::size_t>& indices, std::size_t begin,
                              std::size_t end) {
        const std::size_t n = end - begin;
        SplitCandidate best;

        auto& pairs = pairs_scratch_;
        pairs.resize(n);
        for (int feature = 0; feature < static_cast<int>(dim_); ++feature) {
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t idx = indices[begin + k];
                pairs[k] = {data_.xs[idx][feature], data_.ys[idx]};
            }
            std::sort(pairs.begin(), pairs.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (pairs.front().first == pairs.back().first)
                continue; // constant feature, no threshold exists

            // Prefix scan: cost(i) = SSE(left of i) + SSE(right of i),
            // with SSE = sum(y^2) - sum(y)^2 / n per side. Minimizing this
            // equals minimizing the count-weighted child variances.
            double total_sum = 0.0;
            double total_sq = 0.0;
            for (const auto& [_, y] : pairs) {
                total_sum += y;
                total_sq += y * y;
            }
            double left_sum = 0.0;
            double left_sq = 0.0;
            for (std::size_t i = 1; i < n; ++i) {
                left_sum += pairs[i - 1].second;
                left_sq += pairs[i - 1].second * pairs[i - 1].second;
                if (pairs[i - 1].first == pairs[i].first)
                    continue; // not a boundary between distinct values
                const double right_sum = total_sum - left_sum;
                const double right_sq = total_sq - left_sq;
                const double nl = static_cast<double>(i);
                const double nr = static_cast<double>(n - i);
                const double cost =
                    (left_sq - left_sum * left_sum / nl) + (right_sq - right_sum * right_sum / nr);
                SplitCandidate cand{true, feature,
                                    pairs[i - 1].first + (pairs[i].first - pairs[i - 1].first) / 2,
                                    cost};
                if (cand.better_than(best))
                    best = cand;
            }
        }
        return best;
    }

    const TrainingSet& data_;
    const ForestParams& params_;
    std::size_t dim_;
    std::vector<std::pair<double, double>> pairs_scratch_;
};

} // namespace

double RandomForest::Tree::predict(std::span<const double> x) const {
    std::int32_t at = 0;
    while (nodes[at].feature >= 0)
        at = x[nodes[at].feature] < nodes[at].threshold ? nodes[at].left : nodes[at].right;
    return nodes[at].value;
}

RandomForest RandomForest::fit(const TrainingSet& data, const ForestParams& params,
                               std::uint64_t seed) {
    if (data.xs.empty() || data.ys.empty())
        throw Error("cannot fit a forest on empty training data");
    if (data.xs.size() != data.ys.size())
        throw Error("training set has " + std::to_string(data.xs.size()) + " inputs but " +
                    std::to_string(data.ys.size()) + " targets");
    const std::size_t dim = data.xs.front().size();
    for (const auto& x : data.xs) {
        if (x.size() != dim)
            throw Error("training vectors have inconsistent dimensions");
        for (double v : x)
            if (!std::isfinite(v))
                throw Error("training vectors must be finite");
    }
    for (double y : data.ys)
        if (!std::isfinite(y))
            throw Error("training targets must be finite");
    if (params.n_trees < 1)
        throw Error("n_trees must be >= 1");
    if (params.min_samples_split < 2)
        throw Error("min_samples_split must be >= 2");

    RandomForest forest;
    forest.dimension_ = dim;
    forest.trees_.resize(static_cast<std::size_t>(params.n_trees));
    for (int t = 0; t < params.n_trees; ++t) {
        // Per-tree seed stream keeps the fit deterministic regardless of
        // how trees might be scheduled.
        RandomSource rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        TreeBuilder builder(data, params);
        auto indices = builder.sample_indices(rng);
        auto& tree = forest.trees_[static_cast<std::size_t>(t)];
        tree.nodes.reserve(2 * indices.size());
        builder.grow(tree.nodes, indices, 0, indices.size(), 0);
    }
    return forest;
}

std::vector<double> RandomForest::predict_per_tree(std::span<const double> x) const {
    if (trees_.empty())
        throw Error("forest is not fitted");
    if (x.size() != dimension_)
        throw Error("input has dimension " + std::to_string(x.size()) + " but forest expects " +
                    std::to_string(dimension_));
    std::vector<double> out(trees_.size());
    for (std::size_t t = 0; t < trees_.size(); ++t)
        out[t] = trees_[t].predict(x);
    return out;
}

RandomForest::Prediction RandomForest::aggregate(std::span<const double> per_tree) {
    if (per_tree.empty())
        throw Error("cannot aggregate zero tree predictions");
    double sum = 0.0;
    for (double v : per_tree)
        sum += v;
    const double mean = sum / static_cast<double>(per_tree.size());
    double sq_dev = 0.0;
    for (double v : per_tree)
        sq_dev += (v - mean) * (v - mean);
    return {mean, std::sqrt(sq_dev / static_cast<double>(per_tree.size()))};
}

RandomForest::Prediction RandomForest::predict(std::span<const double> x) const {
    const auto per_tree = predict_per_tree(x);
    return aggregate(per_tree);
}

} // namespace autotune
