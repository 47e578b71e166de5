#include <doctest.h>

#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "decoh/tag_path.hpp"

using namespace decoh;

TEST_CASE("empty path") {
    TagPath t;
    CHECK(t.depth() == 0);
    CHECK(t.recent().empty());
    CHECK_FALSE(t.last().has_value());
    CHECK(t == TagPath{});
}

TEST_CASE("extension keeps the recent events in order") {
    TagPath t;
    for (int i = 1; i <= 6; ++i) t = t.extended(static_cast<double>(i), static_cast<std::uint32_t>(i * 10));
    CHECK(t.depth() == 6);
    const auto r = t.recent();
    REQUIRE(r.size() == TagPath::kRetained);
    CHECK(r.front().time == 3.0);
    CHECK(r.back().time == 6.0);
    CHECK(r.back().offspring == 60u);
    CHECK(t.last()->offspring == 60u);
    CHECK(t.to_string().find("depth=6") == 0);
    CHECK(t.to_string().find("...") != std::string::npos);
}

TEST_CASE("event times must increase") {
    const TagPath t = TagPath{}.extended(1.0, 0);
    CHECK_THROWS_AS(t.extended(1.0, 1), std::logic_error);
    CHECK_THROWS_AS(t.extended(0.5, 1), std::logic_error);
    CHECK_NOTHROW(t.extended(1.0000000001, 1));
}

TEST_CASE("equal histories compare equal, different ones do not") {
    const TagPath a = TagPath{}.extended(1.0, 3).extended(2.0, 4);
    const TagPath b = TagPath{}.extended(1.0, 3).extended(2.0, 4);
    const TagPath c = TagPath{}.extended(1.0, 4).extended(2.0, 4);
    const TagPath d = TagPath{}.extended(1.0, 3).extended(2.5, 4);
    CHECK(a == b);
    CHECK(a.digest() == b.digest());
    CHECK_FALSE(a == c);
    CHECK_FALSE(a == d);
}

TEST_CASE("old divergence survives past the retained window") {
    TagPath a = TagPath{}.extended(1.0, 0);
    TagPath b = TagPath{}.extended(1.0, 1);
    for (int i = 2; i < 50; ++i) {
        a = a.extended(i, 5);
        b = b.extended(i, 5);
    }
    CHECK(std::equal(a.recent().begin(), a.recent().end(), b.recent().begin()));
    CHECK_FALSE(a == b);
}

TEST_CASE("digests of a full ternary tree are distinct") {
    std::vector<TagPath> level{TagPath{}};
    for (int depth = 1; depth <= 9; ++depth) {
        std::vector<TagPath> next;
        for (const auto& t : level) {
            for (std::uint32_t k = 0; k < 3; ++k) next.push_back(t.extended(depth, k));
        }
        level = std::move(next);
    }
    std::set<LineageDigest> seen;
    for (const auto& t : level) seen.insert(t.digest());
    CHECK(seen.size() == level.size());
}
