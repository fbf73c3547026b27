#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "rng.hpp"
#include "synthetic.hpp"

using namespace autotune;

namespace {

Configuration config_of(const std::string& mode,
                        std::int64_t particles, std::optional<std::int64_t> sort_threshold,
                        double tasks) {
    std::vector<std::optional<Value>> v(4);
    v[0] = Value{mode};
    v[1] = Value{particles};
    if (sort_threshold)
        v[2] = Value{*sort_threshold};
    v[3] = Value{tasks};
    return Configuration(std::move(v));
}

} // namespace

TEST_CASE("the canned benchmarks are registered and bounded") {
    const auto names = synthetic_benchmark_names();
    CHECK(std::find(names.begin(), names.end(), "openmc-like") != names.end());
    CHECK(std::find(names.begin(), names.end(), "bowl") != names.end());
    CHECK_THROWS_AS((void)synthetic_benchmark("hills"), ParseError);

    const auto canned = synthetic_benchmark("openmc-like");
    CHECK(canned.space.cardinality() == 8320); // fully enumerable
    CHECK(canned.space.size() == 4);
    CHECK(canned.space.conditions().size() == 1);
    CHECK(synthetic_benchmark("bowl").space.cardinality() == 101 * 101);
}

TEST_CASE("the bowl evaluates to zero at its center") {
    const auto bench = synthetic_benchmark("bowl");
    RandomSource rng(0);
    Configuration center(
        {std::optional<Value>{Value{std::int64_t{50}}}, std::optional<Value>{Value{std::int64_t{50}}}});
    CHECK(evaluate_synthetic(bench.objective, bench.space, center, rng) == 0.0);
    Configuration corner(
        {std::optional<Value>{Value{std::int64_t{0}}}, std::optional<Value>{Value{std::int64_t{0}}}});
    CHECK(evaluate_synthetic(bench.objective, bench.space, corner, rng) ==
          doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("values match an independent recomputation of the formula") {
    const auto bench = synthetic_benchmark("openmc-like");
    RandomSource rng(0);
    const Configuration cfg = config_of("queued", 4000000, 600000, 2.0);
    const double pnorm = static_cast<double>(4000000 - 100000) / (8000000 - 100000);
    const double snorm = 600000.0 / 1000000.0;
    const double tnorm = 1.0; // index 1 of a 2-entry ordinal
    const double expected = 3.0 * (pnorm - 0.35) * (pnorm - 0.35) +
                            2.0 * (snorm - 0.6) * (snorm - 0.6) +
                            0.5 * (tnorm - 1.0) * (tnorm - 1.0) - 0.1;
    CHECK(evaluate_synthetic(bench.objective, bench.space, cfg, rng) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("the conditional term applies exactly when the child is active") {
    const auto bench = synthetic_benchmark("openmc-like");
    RandomSource rng(0);
    // Identical except for the mode switch: the gated child disappears and
    // its -0.1 active bonus with it, while the queueless offset adds 0.3.
    const Configuration queued = config_of("queued", 1000000, 600000, 2.0);
    const Configuration queueless = config_of("queueless", 1000000, std::nullopt, 2.0);
    const double vq = evaluate_synthetic(bench.objective, bench.space, queued, rng);
    const double vl = evaluate_synthetic(bench.objective, bench.space, queueless, rng);
    CHECK(vl - vq == doctest::Approx(0.3 + 0.1).epsilon(1e-12));
}

TEST_CASE("exhaustive enumeration locates the expected argmin") {
    const auto bench = synthetic_benchmark("openmc-like");
    const auto all = bench.space.enumerate(10000);
    REQUIRE(all.has_value());
    RandomSource rng(0);
    const Configuration* argmin = nullptr;
    double best = 1e300;
    for (const auto& cfg : *all) {
        const double v = evaluate_synthetic(bench.objective, bench.space, cfg, rng);
        if (v < best) {
            best = v;
            argmin = &cfg;
        }
    }
    REQUIRE(argmin != nullptr);
    // queued mode, particles on the lattice point nearest 0.35, sort
    // threshold exactly at 0.6, the higher tasks_per_gpu step.
    CHECK(*argmin == config_of("queued", 2900000, 600000, 2.0));
    const double k = 28.0 / 79.0;
    CHECK(best == doctest::Approx(3.0 * (k - 0.35) * (k - 0.35) - 0.1).epsilon(1e-12));
}

TEST_CASE("noiseless evaluation is deterministic, noisy evaluation is seeded") {
    const auto bench = synthetic_benchmark("openmc-like");
    const Configuration cfg = config_of("queued", 1000000, 20000, 1.0);

    RandomSource a(1), b(2);
    CHECK(evaluate_synthetic(bench.objective, bench.space, cfg, a) ==
          evaluate_synthetic(bench.objective, bench.space, cfg, b));

    auto noisy = bench.objective;
    noisy.noise_std = 0.05;
    RandomSource n1(7), n2(7), n3(8);
    const double v1 = evaluate_synthetic(noisy, bench.space, cfg, n1);
    CHECK(v1 == evaluate_synthetic(noisy, bench.space, cfg, n2));
    CHECK(v1 != evaluate_synthetic(noisy, bench.space, cfg, n3));
}

TEST_CASE("mismatched objectives and invalid configurations are rejected") {
    const auto bench = synthetic_benchmark("openmc-like");
    RandomSource rng(0);
    CHECK_THROWS_AS((void)evaluate_synthetic(synthetic_benchmark("bowl").objective, bench.space,
                                             bench.space.default_configuration(), rng),
                    Error);
    const Configuration bad = config_of("queued", 4000001, 600000, 2.0);
    CHECK_THROWS_AS((void)evaluate_synthetic(bench.objective, bench.space, bad, rng), Error);
}

TEST_CASE("the evaluator wrapper reproduces per eval id and simulates timeouts") {
    const auto bench = synthetic_benchmark("openmc-like");
    auto noisy = bench.objective;
    noisy.noise_std = 0.05;
    const Evaluator eval = make_synthetic_evaluator(bench.space, noisy);

    EvalRequest req;
    req.eval_id = 5;
    req.config = bench.space.default_configuration();
    req.timeout_sec = 10.0;
    req.penalty = -1.0;
    req.direction = Direction::minimize;
    req.campaign_seed = 42;

    const auto first = eval(req);
    CHECK(first.status == EvalStatus::ok);
    CHECK(eval(req).objective == first.objective); // same (seed, eval_id)
    req.eval_id = 6;
    CHECK(eval(req).objective != first.objective);

    // The wrapper draws its noise from (campaign seed, eval id).
    RandomSource expected_rng(derive_seed(42, 6));
    CHECK(eval(req).objective ==
          evaluate_synthetic(noisy, bench.space, req.config, expected_rng));
}

TEST_CASE("a sleeping evaluator mirrors the harness timeout semantics") {
    const auto bench = synthetic_benchmark("openmc-like");
    auto slow = bench.objective;
    slow.sleep_sec = 5.0;
    const Evaluator eval = make_synthetic_evaluator(bench.space, slow);

    EvalRequest req;
    req.config = bench.space.default_configuration();
    req.timeout_sec = 0.1;
    req.penalty = -3.0;
    req.direction = Direction::minimize;

    auto out = eval(req);
    CHECK(out.status == EvalStatus::timeout);
    CHECK(out.objective == 0.1); // minimize: the timeout is the objective
    CHECK(out.elapsed >= 0.1);
    CHECK(out.elapsed < 1.0); // slept only until the timeout, not 5 s

    req.direction = Direction::maximize;
    out = eval(req);
    CHECK(out.status == EvalStatus::timeout);
    CHECK(out.objective == -3.0);
}

TEST_CASE("a short sleep delays the result without failing it") {
    const auto bench = synthetic_benchmark("bowl");
    auto napping = bench.objective;
    napping.sleep_sec = 0.05;
    const Evaluator eval = make_synthetic_evaluator(bench.space, napping);
    EvalRequest req;
    req.config = bench.space.default_configuration();
    req.timeout_sec = 10.0;
    const auto out = eval(req);
    CHECK(out.status == EvalStatus::ok);
    CHECK(out.elapsed >= 0.05);
}
