#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "errors.hpp"
#include "optimizer.hpp"
#include "rng.hpp"
#include "test_util.hpp"

using namespace autotune;

TEST_CASE("lcb arithmetic and preconditions") {
    CHECK(lcb(10.0, 2.0, 1.96) == doctest::Approx(6.08).epsilon(1e-12));
    CHECK(lcb(0.0, 5.0, 1.96) == doctest::Approx(-9.8).epsilon(1e-12));
    CHECK(lcb(10.0, 2.0, 0.0) == 10.0); // kappa 0 is pure exploitation

    RandomSource rng(17);
    for (int i = 0; i < 100; ++i) {
        const double mu = rng.uniform01() * 200 - 100;
        const double sigma = rng.uniform01() * 10;
        CHECK(lcb(mu, sigma, 0.0) == mu);
    }
    CHECK_THROWS_AS((void)lcb(1.0, -0.1, 1.0), Error);
    CHECK_THROWS_AS((void)lcb(1.0, 0.1, -1.0), Error);
}

TEST_CASE("pick_by_lcb trades exploitation against uncertainty") {
    // A has the better (lower) mean, B is the near-certain one.
    const std::vector<RandomForest::Prediction> candidates{{9.0, 2.0}, {10.0, 0.1}};
    CHECK(pick_by_lcb(candidates, 1.96) == 0); // 9 - 3.92 < 10 - 0.196
    CHECK(pick_by_lcb(candidates, 0.0) == 0);
    const std::vector<RandomForest::Prediction> flipped{{10.0, 2.0}, {9.5, 0.1}};
    CHECK(pick_by_lcb(flipped, 1.96) == 0);  // uncertainty wins
    CHECK(pick_by_lcb(flipped, 0.0) == 1);   // exploitation wins
    CHECK_THROWS_AS((void)pick_by_lcb({}, 1.0), Error);
}

TEST_CASE("pick_by_lcb breaks ties toward the lowest index") {
    const std::vector<RandomForest::Prediction> tied{{5.0, 1.0}, {5.0, 1.0}, {4.0, 0.0}};
    CHECK(pick_by_lcb(tied, 0.0) == 2);
    const std::vector<RandomForest::Prediction> exact{{5.0, 0.0}, {5.0, 0.0}};
    CHECK(pick_by_lcb(exact, 1.0) == 0);
}

TEST_CASE("the argmin is invariant under a constant shift of the means") {
    RandomSource rng(71);
    for (int round = 0; round < 100; ++round) {
        std::vector<RandomForest::Prediction> candidates;
        for (int i = 0; i < 10; ++i)
            candidates.push_back({rng.uniform01() * 20 - 10, rng.uniform01() * 5});
        const double kappa = rng.uniform01() * 3;
        const std::size_t base = pick_by_lcb(candidates, kappa);
        const double shift = rng.uniform01() * 100 - 50;
        for (auto& c : candidates)
            c.mean += shift;
        CHECK(pick_by_lcb(candidates, kappa) == base);
    }
}

TEST_CASE("raising kappa never selects a less uncertain candidate") {
    const std::vector<RandomForest::Prediction> candidates{
        {1.0, 0.1}, {1.5, 0.8}, {2.5, 2.0}, {4.0, 4.5}};
    double prev_sigma = -1.0;
    for (double kappa = 0.0; kappa <= 3.01; kappa += 0.1) {
        const double sigma = candidates[pick_by_lcb(candidates, kappa)].stddev;
        CHECK(sigma >= prev_sigma);
        prev_sigma = sigma;
    }
}

TEST_CASE("ask returns valid unseen configurations and tracks in-flight state") {
    OptimizerConfig oc;
    oc.n_initial = 8;
    oc.seed = 3;
    AskTellOptimizer opt(testutil::small_space(), oc);
    std::vector<Configuration> asked;
    std::set<std::string> keys;
    for (int i = 0; i < 4; ++i) {
        const Configuration cfg = opt.ask();
        REQUIRE(!opt.space().validate(cfg));
        keys.insert(opt.space().key(cfg));
        asked.push_back(cfg);
    }
    CHECK(keys.size() == 4); // no duplicates among concurrent asks
    CHECK(opt.in_flight_count() == 4);
    CHECK(opt.history().empty());
    for (const auto& cfg : asked)
        opt.tell(cfg, 1.0, EvalStatus::ok);
    CHECK(opt.in_flight_count() == 0);
    CHECK(opt.history().size() == 4);
}

TEST_CASE("tell rejects unknown configurations and non-finite objectives") {
    OptimizerConfig oc;
    oc.seed = 4;
    AskTellOptimizer opt(testutil::small_space(), oc);
    const Configuration cfg = opt.ask();
    CHECK_THROWS_AS(opt.tell(cfg, std::nan(""), EvalStatus::ok), Error);
    CHECK_THROWS_AS(opt.tell(opt.space().default_configuration(), 1.0, EvalStatus::ok), Error);
    opt.tell(cfg, 2.0, EvalStatus::ok);
    CHECK_THROWS_AS(opt.tell(cfg, 2.0, EvalStatus::ok), Error); // already told
}

TEST_CASE("maximize objectives are negated into the internal orientation") {
    OptimizerConfig oc;
    oc.direction = Direction::maximize;
    oc.seed = 5;
    AskTellOptimizer opt(testutil::small_space(), oc);
    const Configuration cfg = opt.ask();
    opt.tell(cfg, 562288.0, EvalStatus::ok);
    REQUIRE(opt.history().size() == 1);
    CHECK(opt.history()[0].objective == -562288.0);
    CHECK(opt.history()[0].status == EvalStatus::ok);
}

TEST_CASE("the optimizer never repeats a configuration and exhausts cleanly") {
    // Tiny space: 2 * 3 = 6 configurations.
    std::vector<ParameterSpec> params;
    params.push_back({"a", CategoricalKind{{"x", "y"}}, Value{std::string("x")}});
    params.push_back({"b", UniformIntKind{0, 2, 1}, Value{std::int64_t{0}}});
    ParameterSpace space(std::move(params), {});

    OptimizerConfig oc;
    oc.n_initial = 2;
    oc.seed = 12;
    AskTellOptimizer opt(space, oc);
    std::set<std::string> keys;
    for (int i = 0; i < 6; ++i) {
        const Configuration cfg = opt.ask();
        keys.insert(space.key(cfg));
        opt.tell(cfg, static_cast<double>(i), EvalStatus::ok);
    }
    CHECK(keys.size() == 6);
    CHECK_THROWS_AS((void)opt.ask(), SpaceExhausted);
    CHECK_THROWS_WITH((void)opt.ask(), "space exhausted");
}

TEST_CASE("exhaustion accounts for in-flight asks as well") {
    std::vector<ParameterSpec> params;
    params.push_back({"b", UniformIntKind{0, 3, 1}, Value{std::int64_t{0}}});
    ParameterSpace space(std::move(params), {});
    OptimizerConfig oc;
    oc.n_initial = 10;
    oc.seed = 8;
    AskTellOptimizer opt(space, oc);
    for (int i = 0; i < 4; ++i)
        (void)opt.ask(); // hold all four configurations in flight
    CHECK_THROWS_AS((void)opt.ask(), SpaceExhausted);
}

TEST_CASE("surrogate-guided asks stay valid and deduplicated") {
    OptimizerConfig oc;
    oc.n_initial = 4;
    oc.candidate_pool_size = 50;
    oc.seed = 21;
    AskTellOptimizer opt(testutil::small_space(), oc);
    std::set<std::string> keys;
    RandomSource noise(1);
    for (int i = 0; i < 30; ++i) { // well past n_initial: surrogate path
        const Configuration cfg = opt.ask();
        REQUIRE(!opt.space().validate(cfg));
        REQUIRE(keys.insert(opt.space().key(cfg)).second);
        opt.tell(cfg, noise.uniform01(), EvalStatus::ok);
    }
    CHECK(opt.history().size() == 30);
}

TEST_CASE("ask sequences are reproducible for a fixed seed") {
    const auto run = [](std::uint64_t seed) {
        OptimizerConfig oc;
        oc.n_initial = 4;
        oc.seed = seed;
        AskTellOptimizer opt(testutil::small_space(), oc);
        std::vector<std::string> keys;
        for (int i = 0; i < 20; ++i) {
            const Configuration cfg = opt.ask();
            keys.push_back(opt.space().key(cfg));
            opt.tell(cfg, static_cast<double>(i % 5), EvalStatus::ok);
        }
        return keys;
    };
    CHECK(run(77) == run(77));
    CHECK(run(77) != run(78));
}

TEST_CASE("configuration knobs are validated") {
    OptimizerConfig oc;
    oc.kappa = -0.5;
    CHECK_THROWS_AS(AskTellOptimizer(testutil::small_space(), oc), Error);
    oc.kappa = 1.96;
    oc.n_initial = 0;
    CHECK_THROWS_AS(AskTellOptimizer(testutil::small_space(), oc), Error);
    oc.n_initial = 1;
    oc.candidate_pool_size = 0;
    CHECK_THROWS_AS(AskTellOptimizer(testutil::small_space(), oc), Error);
}
