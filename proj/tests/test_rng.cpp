#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "rng.hpp"

using namespace autotune;

TEST_CASE("random source is deterministic per seed") {
    RandomSource a(42), b(42), c(43);
    bool all_equal = true;
    bool any_diff = false;
    for (int i = 0; i < 100; ++i) {
        const std::uint64_t va = a.next();
        all_equal = all_equal && va == b.next();
        any_diff = any_diff || va != c.next();
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("uniform01 stays in [0,1)") {
    RandomSource rng(7);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform01();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("bounded draw covers the full range and nothing else") {
    RandomSource rng(11);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 5000; ++i) {
        const std::uint64_t v = rng.bounded(7);
        REQUIRE(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
    CHECK(rng.bounded(1) == 0);
}

TEST_CASE("gaussian has roughly the requested moments") {
    RandomSource rng(3);
    const int n = 200000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.gaussian(5.0, 2.0);
        sum += v;
        sq += v * v;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(mean == doctest::Approx(5.0).epsilon(0.01));
    CHECK(std::sqrt(var) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("derive_seed separates streams and repeats exactly") {
    CHECK(derive_seed(1, 0) == derive_seed(1, 0));
    std::set<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 100; ++s)
        seeds.insert(derive_seed(1234, s));
    CHECK(seeds.size() == 100);
    CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}
