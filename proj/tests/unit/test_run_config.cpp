#include <doctest.h>

#include <string>

#include "decoh/run_config.hpp"

using namespace decoh;

TEST_CASE("scenario names round trip") {
    for (Scenario s : {Scenario::midbox, Scenario::freespread, Scenario::born_test,
                       Scenario::peres_test, Scenario::collapse_compare, Scenario::liouville_check}) {
        CHECK(parse_scenario(to_string(s)) == s);
    }
    CHECK_FALSE(parse_scenario("peres").has_value());
}

TEST_CASE("empty document gives the defaults") {
    const RunConfig c = parse_config("");
    CHECK(c.scenario == Scenario::midbox);
    CHECK(c.params.m == 1.0);
    CHECK(c.params.hbar == 1.0);
    CHECK(c.params.w == 1.0);
    CHECK(c.params.tau == 1.0);
    CHECK(c.params.L == 20.0);
    CHECK(c.seed == 42);
    CHECK(c.fanout == 8);
    CHECK(c.max_branches == 100000);
    CHECK(c.bins == 20);
    CHECK(c.steps == 200);
    CHECK(c.mode == Mode::weighted);
    CHECK(c.timing == Timing::deterministic);
    CHECK(c.output_dir == "out");
    const RunConfig comments = parse_config("# nothing here\n\n   \n");
    CHECK(comments.steps == 200);
}

TEST_CASE("overrides merge with defaults") {
    const RunConfig c = parse_config("scenario = midbox, steps = 8000");
    CHECK(c.scenario == Scenario::midbox);
    CHECK(c.steps == 8000);
    CHECK(c.seed == 42);
    const RunConfig d = parse_config(
        "scenario = peres_test\nL = 60 # wider box\nmax_branches = 1e5\ntiming = poisson\n"
        "mode = count\noutput_dir = /tmp/x y\nseed = 18446744073709551615\n");
    CHECK(d.scenario == Scenario::peres_test);
    CHECK(d.params.L == 60.0);
    CHECK(d.max_branches == 100000);
    CHECK(d.timing == Timing::poisson);
    CHECK(d.mode == Mode::count);
    CHECK(d.output_dir == "/tmp/x y");
    CHECK(d.seed == 18446744073709551615ULL);
}

TEST_CASE("errors name the key and the reason") {
    auto key_of = [](const char* text) {
        try {
            parse_config(text);
        } catch (const ConfigError& e) {
            return e.key();
        }
        return std::string("<none>");
    };
    CHECK(key_of("w = -1") == "w");
    CHECK_THROWS_WITH_AS(parse_config("w = -1"), doctest::Contains("> 0"), ConfigError);
    CHECK(key_of("colour = red") == "colour");
    CHECK_THROWS_WITH_AS(parse_config("colour = red"), doctest::Contains("unknown key"), ConfigError);
    CHECK(key_of("steps = 10, steps = 20") == "steps");
    CHECK(key_of("steps = 0") == "steps");
    CHECK(key_of("steps = -3") == "steps");
    CHECK(key_of("steps = 2.5") == "steps");
    CHECK(key_of("m = abc") == "m");
    CHECK(key_of("mode = quantum") == "mode");
    CHECK(key_of("timing = random") == "timing");
    CHECK(key_of("scenario = nope") == "scenario");
    CHECK(key_of("w = 2") == "w");
    CHECK(key_of("bins = 1") == "bins");
    CHECK(key_of("bins = 40") == "bins");
    CHECK(key_of("fanout = 0") == "fanout");
    CHECK(key_of("max_branches = 0") == "max_branches");
    CHECK(key_of("scenario = peres_test") == "L");
    CHECK(key_of("just words") == "line 1");
    CHECK(key_of("L = inf") == "L");
}

TEST_CASE("apply_setting on its own") {
    RunConfig c;
    apply_setting(c, "seed", "7");
    apply_setting(c, "mode", "collapse");
    CHECK(c.seed == 7);
    CHECK(c.mode == Mode::collapse);
    CHECK_THROWS_AS(apply_setting(c, "bogus", "1"), ConfigError);
    CHECK_NOTHROW(c.validate());
}
