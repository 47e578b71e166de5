#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "decoh/random_stream.hpp"
#include "decoh/resampling.hpp"

using namespace decoh;

namespace {

// Exhaustive search over which units round up, minimizing the total
// deviation from w*N; ties go to the lexicographically lowest up-set.
std::vector<std::uint64_t> brute_force_apportion(const std::vector<double>& w, std::uint64_t n) {
    const std::size_t k = w.size();
    std::vector<std::uint64_t> best;
    double best_err = 1e300;
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
        std::vector<std::uint64_t> c(k);
        std::uint64_t total = 0;
        for (std::size_t i = 0; i < k; ++i) {
            c[i] = static_cast<std::uint64_t>(std::floor(w[i] * n)) + ((mask >> i) & 1u);
            total += c[i];
        }
        if (total != n) continue;
        double err = 0.0;
        for (std::size_t i = 0; i < k; ++i) err += std::abs(static_cast<double>(c[i]) - w[i] * n);
        if (err < best_err - 1e-12 || (std::abs(err - best_err) <= 1e-12 && c > best)) {
            best_err = err;
            best = c;
        }
    }
    return best;
}

std::vector<double> normalized(std::vector<double> v) {
    const double s = std::accumulate(v.begin(), v.end(), 0.0);
    for (double& x : v) x /= s;
    return v;
}

}  // namespace

TEST_CASE("apportion_counts examples") {
    CHECK(apportion_counts(std::vector<double>{1.0}, 5) == std::vector<std::uint64_t>{5});
    CHECK(apportion_counts(std::vector<double>{0.75, 0.25}, 4) == std::vector<std::uint64_t>{3, 1});
    const std::vector<double> thirds(3, 1.0 / 3.0);
    CHECK(apportion_counts(thirds, 4) == std::vector<std::uint64_t>{2, 1, 1});
    CHECK(brute_force_apportion(thirds, 4) == std::vector<std::uint64_t>{2, 1, 1});
}

TEST_CASE("apportion_counts errors") {
    CHECK_THROWS_AS(apportion_counts(std::vector<double>{0.5, 0.4}, 3), std::domain_error);
    CHECK_THROWS_AS(apportion_counts(std::vector<double>{1.5, -0.5}, 3), std::domain_error);
    CHECK_THROWS_AS(apportion_counts(std::vector<double>{1.0}, 0), std::domain_error);
    CHECK_THROWS_AS(apportion_counts(std::vector<double>{}, 3), std::domain_error);
    CHECK_THROWS_AS(apportion_counts(std::vector<double>{std::nan(""), 1.0}, 3), std::domain_error);
}

TEST_CASE("apportion_counts matches exhaustive search") {
    RandomStream rng(3);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t k = 1 + rng.below(10);
        std::vector<double> w(k);
        for (double& x : w) x = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
        if (std::accumulate(w.begin(), w.end(), 0.0) == 0.0) w[0] = 1.0;
        w = normalized(w);
        const std::uint64_t n = 1 + rng.below(60);
        const auto got = apportion_counts(w, n);
        CHECK(got == brute_force_apportion(w, n));
        CHECK(std::accumulate(got.begin(), got.end(), std::uint64_t{0}) == n);
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(std::abs(static_cast<double>(got[i]) - w[i] * n) < 1.0);
        }
    }
}

TEST_CASE("select_proportional keeps everything at or below target") {
    const std::vector<double> a{0.2, 0.0, 0.3};
    const std::vector<double> b{0.5};
    const std::vector<SamplingGroup> groups{{1.0, a}, {1.0, b}};
    RandomStream rng(1);
    const auto out = select_proportional(groups, 3, rng);
    REQUIRE(out.size() == 3);
    CHECK(out[0].group == 0);
    CHECK(out[0].member == 0);
    CHECK(out[1].member == 2);
    CHECK(out[2].group == 1);
    for (const auto& inc : out) CHECK(inc.probability == 1.0);
}

TEST_CASE("select_proportional fixed size, order, zero weights") {
    RandomStream rng(9);
    std::vector<std::vector<double>> members(50);
    for (auto& m : members) {
        m.resize(1 + rng.below(7));
        for (double& x : m) x = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    }
    std::vector<SamplingGroup> groups;
    for (const auto& m : members) groups.push_back({0.5 + rng.uniform(), m});
    for (std::size_t target : {1u, 7u, 40u, 100u}) {
        const auto out = select_proportional(groups, target, rng);
        std::size_t positive = 0;
        for (const auto& m : members) {
            for (double x : m) positive += x > 0.0;
        }
        CHECK(out.size() == std::min(target, positive));
        for (std::size_t i = 0; i < out.size(); ++i) {
            CHECK(members[out[i].group][out[i].member] > 0.0);
            CHECK(out[i].probability > 0.0);
            CHECK(out[i].probability <= 1.0);
            if (i > 0) {
                const bool ordered = out[i - 1].group < out[i].group ||
                                     (out[i - 1].group == out[i].group &&
                                      out[i - 1].member < out[i].member);
                CHECK(ordered);
            }
        }
    }
}

TEST_CASE("select_proportional marginal inclusion probabilities") {
    // one certain unit, uneven groups, a group with integer mass
    const std::vector<double> g0{5.0, 0.4, 0.1};
    const std::vector<double> g1{0.3, 0.3, 0.3, 0.6};
    const std::vector<double> g2{1.0, 1.0};
    const std::vector<double> g3{0.05};
    const std::vector<SamplingGroup> groups{{1.0, g0}, {1.0, g1}, {0.5, g2}, {2.0, g3}};
    const std::size_t target = 4;
    const int trials = 100000;
    std::vector<std::vector<int>> hits{std::vector<int>(3), std::vector<int>(4), std::vector<int>(2),
                                      std::vector<int>(1)};
    std::vector<std::vector<double>> pi{std::vector<double>(3), std::vector<double>(4),
                                        std::vector<double>(2), std::vector<double>(1)};
    RandomStream rng(17);
    for (int t = 0; t < trials; ++t) {
        const auto out = select_proportional(groups, target, rng);
        REQUIRE(out.size() == target);
        for (const auto& inc : out) {
            ++hits[inc.group][inc.member];
            pi[inc.group][inc.member] = inc.probability;
        }
    }
    // Independent water-fill: c with sum min(1, c w) = 4 over the scaled weights.
    std::vector<double> all;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (double x : groups[g].members) all.push_back(groups[g].scale * x);
    }
    double lo = 0.0, hi = 100.0;
    for (int it = 0; it < 200; ++it) {
        const double c = 0.5 * (lo + hi);
        double s = 0.0;
        for (double x : all) s += std::min(1.0, c * x);
        (s < target ? lo : hi) = c;
    }
    std::size_t u = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t j = 0; j < groups[g].members.size(); ++j, ++u) {
            const double expect = std::min(1.0, lo * all[u]);
            const double freq = static_cast<double>(hits[g][j]) / trials;
            const double sd = std::sqrt(expect * (1.0 - expect) / trials);
            CHECK(pi[g][j] == doctest::Approx(expect).epsilon(1e-9));
            CHECK(std::abs(freq - expect) <= 4.0 * sd + 1e-12);
        }
    }
}

TEST_CASE("select_proportional gives integer-mass groups exactly that many draws") {
    // 20 equal parents, each with the same 5-member kernel, capped to 20:
    // each parent has inclusion mass exactly 1.
    const std::vector<double> kernel{0.1, 0.2, 0.4, 0.2, 0.1};
    std::vector<SamplingGroup> groups(20, SamplingGroup{0.05, kernel});
    RandomStream rng(23);
    for (int t = 0; t < 200; ++t) {
        const auto out = select_proportional(groups, 20, rng);
        REQUIRE(out.size() == 20);
        for (std::size_t g = 0; g < 20; ++g) CHECK(out[g].group == g);
    }
}

TEST_CASE("select_proportional Horvitz-Thompson totals are unbiased") {
    RandomStream rng(31);
    std::vector<std::vector<double>> members(30);
    for (auto& m : members) {
        m.resize(4);
        for (double& x : m) x = rng.uniform();
    }
    std::vector<SamplingGroup> groups;
    double exact = 0.0;
    for (const auto& m : members) {
        groups.push_back({1.0, m});
        for (double x : m) exact += x * x;  // estimate sum of y = w^2
    }
    const int trials = 20000;
    double acc = 0.0, acc2 = 0.0;
    for (int t = 0; t < trials; ++t) {
        double est = 0.0;
        for (const auto& inc : select_proportional(groups, 25, rng)) {
            const double w = members[inc.group][inc.member];
            est += w * w / inc.probability;
        }
        acc += est;
        acc2 += est * est;
    }
    const double mean = acc / trials;
    const double sd = std::sqrt((acc2 / trials - mean * mean) / trials);
    CHECK(std::abs(mean - exact) < 4.0 * sd);
}

TEST_CASE("select_proportional uniform subsets of equal units") {
    const std::vector<double> one{1.0};
    std::vector<SamplingGroup> groups(20, SamplingGroup{1.0, one});
    std::vector<int> hits(20, 0);
    RandomStream rng(37);
    const int trials = 40000;
    for (int t = 0; t < trials; ++t) {
        for (const auto& inc : select_proportional(groups, 10, rng)) ++hits[inc.group];
    }
    const double sd = std::sqrt(0.25 / trials);
    for (int h : hits) CHECK(std::abs(static_cast<double>(h) / trials - 0.5) < 4.0 * sd);
}

TEST_CASE("select_proportional rejects bad weights") {
    const std::vector<double> bad{0.5, -0.1};
    const std::vector<SamplingGroup> groups{{1.0, bad}};
    RandomStream rng(1);
    CHECK_THROWS_AS(select_proportional(groups, 1, rng), std::domain_error);
    const std::vector<double> ok{0.5};
    const std::vector<SamplingGroup> neg{{-1.0, ok}};
    CHECK_THROWS_AS(select_proportional(neg, 1, rng), std::domain_error);
}
