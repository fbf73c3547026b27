#include "synthetic.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include "errors.hpp"

namespace autotune {

namespace {

/// Position of an active value within its parameter's range, in [0, 1].
double normalized_position(const ParameterSpec& spec, const Value& v) {
    if (const auto* ord = std::get_if<OrdinalKind>(&spec.kind)) {
        const auto& seq = ord->sequence;
        const double x = std::get<double>(v);
        std::size_t idx = 0;
        while (idx < seq.size() && seq[idx] != x)
            ++idx;
        return seq.size() > 1 ? static_cast<double>(idx) / static_cast<double>(seq.size() - 1)
                              : 0.0;
    }
    const auto& ui = std::get<UniformIntKind>(spec.kind);
    if (ui.upper == ui.lower)
        return 0.0;
    return static_cast<double>(std::get<std::int64_t>(v) - ui.lower) /
           static_cast<double>(ui.upper - ui.lower);
}

} // namespace

double evaluate_synthetic(const SyntheticObjective& obj, const ParameterSpace& space,
                          const Configuration& cfg, RandomSource& rng) {
    if (obj.weights.size() != space.size() || obj.optima.size() != space.size())
        throw Error("synthetic objective weights/optima do not match the space size");
    if (const auto violation = space.validate(cfg))
        throw Error("synthetic objective: " + *violation);

    double value = 0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (!cfg[i].has_value())
            continue;
        const ParameterSpec& spec = space.param(i);
        if (spec.is_categorical()) {
            const auto it = obj.categorical_offsets.find(std::get<std::string>(*cfg[i]));
            if (it != obj.categorical_offsets.end())
                value += it->second;
        } else {
            const double delta = normalized_position(spec, *cfg[i]) - obj.optima[i];
            value += obj.weights[i] * delta * delta;
        }
        if (space.condition_for(i) != nullptr)
            value += obj.conditional_term;
    }
    if (obj.noise_std > 0)
        value += rng.gaussian(0.0, obj.noise_std);
    return value;
}

SyntheticBenchmark synthetic_benchmark(const std::string& name) {
    if (name == "openmc-like") {
        std::vector<ParameterSpec> params;
        params.push_back({"mode", CategoricalKind{{"queued", "queueless"}}, Value{"queued"}});
        params.push_back(
            {"particles", UniformIntKind{100000, 8000000, 100000}, Value{std::int64_t{1000000}}});
        params.push_back(
            {"sort_threshold", UniformIntKind{0, 1000000, 20000}, Value{std::int64_t{20000}}});
        params.push_back({"tasks_per_gpu", OrdinalKind{{1, 2}}, Value{1.0}});
        std::vector<ActivationCondition> conditions = {
            {"sort_threshold", "mode", Value{"queued"}}};
        ParameterSpace space(std::move(params), std::move(conditions));

        SyntheticObjective obj;
        obj.weights = {0.0, 3.0, 2.0, 0.5};
        obj.optima = {0.0, 0.35, 0.6, 1.0};
        obj.categorical_offsets = {{"queued", 0.0}, {"queueless", 0.3}};
        obj.conditional_term = -0.1;
        return {std::move(space), std::move(obj)};
    }
    if (name == "bowl") {
        std::vector<ParameterSpec> params;
        params.push_back({"x", UniformIntKind{0, 100, 1}, Value{std::int64_t{0}}});
        params.push_back({"y", UniformIntKind{0, 100, 1}, Value{std::int64_t{0}}});
        ParameterSpace space(std::move(params), {});
        SyntheticObjective obj;
        obj.weights = {1.0, 1.0};
        obj.optima = {0.5, 0.5};
        return {std::move(space), std::move(obj)};
    }
    throw ParseError("unknown synthetic benchmark '" + name + "'");
}

std::vector<std::string> synthetic_benchmark_names() {
    return {"openmc-like", "bowl"};
}

Evaluator make_synthetic_evaluator(ParameterSpace space, SyntheticObjective objective) {
    return [space = std::move(space),
            objective = std::move(objective)](const EvalRequest& req) -> ExecutionOutcome {
        const auto start = std::chrono::steady_clock::now();
        const bool times_out = req.timeout_sec > 0 && objective.sleep_sec >= req.timeout_sec;
        const double nap = times_out ? req.timeout_sec : objective.sleep_sec;
        if (nap > 0)
            std::this_thread::sleep_for(std::chrono::duration<double>(nap));

        ExecutionOutcome out;
        out.elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (times_out) {
            out.status = EvalStatus::timeout;
            out.objective =
                req.direction == Direction::minimize ? req.timeout_sec : req.penalty;
            return out;
        }
        RandomSource rng(derive_seed(req.campaign_seed, static_cast<std::uint64_t>(req.eval_id)));
        out.objective = evaluate_synthetic(objective, space, req.config, rng);
        out.status = EvalStatus::ok;
        return out;
    };
}

} // namespace autotune
