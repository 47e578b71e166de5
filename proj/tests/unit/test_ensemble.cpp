#include <doctest.h>

#include <stdexcept>
#include <vector>

#include "decoh/ensemble.hpp"

using namespace decoh;

namespace {

Branch at(double x, double weight, std::uint64_t mult = 1) {
    Branch b;
    b.packet = GaussianPacket::localized(x, 1.0);
    b.weight = weight;
    b.multiplicity = mult;
    return b;
}

}  // namespace

TEST_CASE("mode names round trip") {
    for (Mode m : {Mode::weighted, Mode::count, Mode::collapse}) {
        CHECK(parse_mode(to_string(m)) == m);
    }
    CHECK_FALSE(parse_mode("Weighted").has_value());
    CHECK_FALSE(parse_mode("").has_value());
}

TEST_CASE("midbox starts at rest in the middle") {
    PhysicalParams p;
    p.L = 30.0;
    const auto e = Ensemble::midbox(p, Mode::count, 8);
    REQUIRE(e.size() == 1);
    CHECK(e.branches()[0].packet.center == 15.0);
    CHECK(e.branches()[0].packet.variance == 1.0);
    CHECK(e.branches()[0].packet.age == 0.0);
    CHECK(e.total_count() == 8);
    CHECK(e.time() == 0.0);
}

TEST_CASE("weighted invariants") {
    CHECK_NOTHROW(Ensemble(Mode::weighted, 0.0, {at(1, 0.25), at(2, 0.75)}));
    CHECK_THROWS_AS(Ensemble(Mode::weighted, 0.0, {at(1, 0.25), at(2, 0.7)}), std::invalid_argument);
    CHECK_THROWS_AS(Ensemble(Mode::weighted, 0.0, {at(1, 0.0), at(2, 1.0)}), std::invalid_argument);
    CHECK_THROWS_AS(Ensemble(Mode::weighted, 0.0, {at(1, 1.5)}), std::invalid_argument);
}

TEST_CASE("count invariants") {
    const Ensemble e(Mode::count, 1.0, {at(1, 1, 3), at(2, 1, 5)});
    CHECK(e.total_count() == 8);
    CHECK(e.total_mass() == 8.0);
    CHECK(e.effective_size() == doctest::Approx(64.0 / 34.0));
    CHECK_THROWS_AS(Ensemble(Mode::count, 0.0, {at(1, 1, 0)}), std::invalid_argument);
    CHECK_THROWS_AS(Ensemble(Mode::count, 0.0, {at(1, 1, ~0ULL), at(2, 1, 2)}), std::overflow_error);
}

TEST_CASE("collapse holds exactly one branch") {
    CHECK_NOTHROW(Ensemble(Mode::collapse, 0.0, {at(1, 1.0)}));
    CHECK_THROWS_AS(Ensemble(Mode::collapse, 0.0, {}), std::invalid_argument);
    CHECK_THROWS_AS(Ensemble(Mode::collapse, 0.0, {at(1, 0.5), at(2, 0.5)}), std::invalid_argument);
}

TEST_CASE("Kish size of equal weights is the branch count") {
    std::vector<Branch> bs;
    for (int i = 0; i < 40; ++i) bs.push_back(at(i, 1.0 / 40));
    const Ensemble e(Mode::weighted, 0.0, bs);
    CHECK(e.effective_size() == doctest::Approx(40.0));
}
