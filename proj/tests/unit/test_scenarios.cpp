#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "decoh/scenarios.hpp"

using namespace decoh;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

RunConfig small(Scenario s, const std::string& dir) {
    RunConfig c;
    c.scenario = s;
    c.max_branches = 2000;
    c.output_dir = (fs::path(DECOH_TEST_TMP) / dir).string();
    return c;
}

void check_schema(const RunSummary& s) {
    std::set<std::string> names;
    for (const auto& ck : s.checks) CHECK(names.insert(ck.name).second);
    const auto doc = nlohmann::json::parse(slurp(s.summary_path));
    CHECK(doc["scenario"] == std::string(to_string(s.config.scenario)));
    CHECK(doc["checks"].size() == s.checks.size());
    CHECK(doc["all_pass"] == s.all_pass());
    CHECK(doc["series_rows"] == s.series.size());
    CHECK(doc.find("wall_seconds") == doc.end());
    std::ifstream csv(s.series_path);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "t,n_branches,n_effective,mean_x,var_x,coarse_entropy_nats,tv_uniform");
}

}  // namespace

TEST_CASE("midbox writes 201 rows and a D estimate") {
    RunConfig c = small(Scenario::midbox, "midbox");
    c.params.L = 10000.0;
    c.max_branches = 20000;
    const auto s = run_scenario(c);
    CHECK(s.series.size() == 201);
    CHECK(s.has_check("weight_conservation"));
    CHECK(s.has_check("tag_uniqueness"));
    CHECK(s.has_check("variance_ladder"));
    CHECK(s.has_check("diffusion_constant"));
    CHECK(s.metric("D_estimate") == doctest::Approx(0.5).epsilon(0.1));
    CHECK(s.all_pass());
    check_schema(s);
    CHECK_THROWS_AS(s.metric("no_such_metric"), std::out_of_range);
}

TEST_CASE("midbox in count mode conserves counts") {
    RunConfig c = small(Scenario::midbox, "midbox_count");
    c.mode = Mode::count;
    c.steps = 12;  // totals grow by the fanout every step
    const auto s = run_scenario(c, false);
    CHECK(s.check("count_conservation").pass);
    CHECK(s.check("tag_uniqueness").pass);
}

TEST_CASE("born_test") {
    const auto s = run_scenario(small(Scenario::born_test, "born"));
    for (const char* n : {"born_total", "born_apportionment_bound", "born_chi_square",
                          "born_poisson_chi_square"}) {
        REQUIRE(s.has_check(n));
        CHECK(s.check(n).pass);
    }
    CHECK(s.metric("born_bins") == 8);
    check_schema(s);
}

TEST_CASE("collapse_compare reports both z-scores") {
    RunConfig c = small(Scenario::collapse_compare, "collapse");
    c.steps = 5;
    const auto s = run_scenario(c);
    CHECK(s.metric("trajectories") == 10000);
    CHECK(std::abs(s.metric("z_position_mean")) < 3.0);
    CHECK(std::abs(s.metric("z_position_variance")) < 3.0);
    CHECK(s.check("biased_fixture_rejected").pass);
    check_schema(s);
}

TEST_CASE("liouville_check short run") {
    RunConfig c = small(Scenario::liouville_check, "liouville");
    c.steps = 20;
    const auto s = run_scenario(c);
    CHECK(s.series.size() == 21);
    for (const auto& ck : s.checks) CHECK_MESSAGE(ck.pass, ck.name << ": " << ck.detail);
    check_schema(s);
}

TEST_CASE("peres_test short run") {
    RunConfig c = small(Scenario::peres_test, "peres");
    c.params.L = 60.0;
    c.steps = 50;
    const auto s = run_scenario(c);
    for (const auto& ck : s.checks) CHECK_MESSAGE(ck.pass, ck.name << ": " << ck.detail);
    CHECK(s.metric("visibility_coherent") > 0.5);
    check_schema(s);
}

TEST_CASE("peres_test rejects a narrow box") {
    RunConfig c = small(Scenario::peres_test, "peres_bad");
    CHECK_THROWS_AS(run_scenario(c), ConfigError);
}

TEST_CASE("identical configs give identical files") {
    RunConfig c = small(Scenario::midbox, "repro_a");
    c.steps = 40;
    c.timing = Timing::poisson;
    RunConfig d = c;
    d.output_dir = (fs::path(DECOH_TEST_TMP) / "repro_b").string();
    const auto a = run_scenario(c);
    const auto b = run_scenario(d);
    CHECK(slurp(a.series_path) == slurp(b.series_path));
    // the summary echoes output_dir; compare everything else
    auto strip = [](std::string text) {
        auto doc = nlohmann::json::parse(text);
        doc["config"].erase("output_dir");
        return doc.dump();
    };
    CHECK(strip(slurp(a.summary_path)) == strip(slurp(b.summary_path)));
    RunConfig e = c;
    e.seed = 43;
    e.output_dir = (fs::path(DECOH_TEST_TMP) / "repro_c").string();
    CHECK(slurp(run_scenario(e).series_path) != slurp(a.series_path));
}

TEST_CASE("unwritable output directory") {
    RunConfig c = small(Scenario::born_test, "x");
    c.output_dir = "/proc/decoh_cannot_write_here";
    CHECK_THROWS_AS(run_scenario(c), std::runtime_error);
}
