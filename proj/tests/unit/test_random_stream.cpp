#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "decoh/random_stream.hpp"

using namespace decoh;

TEST_CASE("mix64 reference values") {
    // SplitMix64 outputs for state 0 (first draw), published reference
    CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
    CHECK(mix64(0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("equal seeds give equal streams") {
    RandomStream a(123), b(123), c(124);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.uniform();
        CHECK(x == b.uniform());
        differs |= x != c.uniform();
    }
    CHECK(differs);
}

TEST_CASE("substreams ignore parent state") {
    RandomStream a(7);
    const double first = a.substream(99).uniform();
    for (int i = 0; i < 10; ++i) a.uniform();
    CHECK(a.substream(99).uniform() == first);
    CHECK(a.substream(98).uniform() != first);
    CHECK(RandomStream(8).substream(99).uniform() != first);
}

TEST_CASE("substream seeds are distinct over many keys") {
    RandomStream root(42);
    std::set<std::uint64_t> seeds;
    for (std::uint64_t k = 0; k < 100000; ++k) seeds.insert(root.substream(k).seed());
    CHECK(seeds.size() == 100000);
}

TEST_CASE("uniform, exponential and below moments") {
    RandomStream rng(2024);
    const int n = 200000;
    double su = 0.0, se = 0.0, sn = 0.0, sn2 = 0.0;
    std::vector<int> counts(5, 0);
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double e = rng.exponential(2.0);
        REQUIRE(e >= 0.0);
        se += e;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
        ++counts[rng.below(5)];
    }
    CHECK(std::abs(su / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
    CHECK(std::abs(se / n - 2.0) < 5.0 * 2.0 / std::sqrt(n));
    CHECK(std::abs(sn / n) < 5.0 / std::sqrt(n));
    CHECK(std::abs(sn2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
    for (int c : counts) CHECK(std::abs(c - n / 5.0) < 5.0 * std::sqrt(n * 0.16));
}
