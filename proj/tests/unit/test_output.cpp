#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>
#include <vector>

#include "decoh/output.hpp"

using namespace decoh;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("format_double round trips") {
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.3829249233036042}) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
}

TEST_CASE("csv schema") {
    const std::vector<SeriesRow> rows{{0, 1, 1, 10, 1, 0.5, 0.9}, {1, 13, 4.5, 10, 2, 0.75, 0.8}};
    const auto csv = format_csv(rows);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,n_branches,n_effective,mean_x,var_x,coarse_entropy_nats,tv_uniform");
    std::getline(in, line);
    CHECK(line == "0,1,1,10,1,0.5,0.90000000000000002");
    std::getline(in, line);
    CHECK(line == "1,13,4.5,10,2,0.75,0.80000000000000004");
    CHECK(csv.back() == '\n');
    CHECK(format_csv({}) == std::string(kCsvHeader) + "\n");
}

TEST_CASE("json writer output parses back") {
    JsonWriter j;
    j.begin_object();
    j.value("name", "a \"quoted\"\nline\\");
    j.value("x", 0.1);
    j.value("bad", std::nan(""));
    j.value("n", std::uint64_t{18446744073709551615ULL});
    j.value("ok", true);
    j.begin_object("empty").end_object();
    j.begin_array("list");
    j.begin_object().value("k", 1.5).end_object();
    j.end_array();
    j.end_object();
    const std::string text = j.str();
    CHECK(text.back() == '\n');
    const auto doc = nlohmann::json::parse(text);
    CHECK(doc["name"] == "a \"quoted\"\nline\\");
    CHECK(doc["x"].get<double>() == 0.1);
    CHECK(doc["bad"].is_null());
    CHECK(doc["n"].get<std::uint64_t>() == 18446744073709551615ULL);
    CHECK(doc["ok"] == true);
    CHECK(doc["empty"].empty());
    CHECK(doc["list"][0]["k"] == 1.5);
    // key order is kept
    CHECK(text.find("\"name\"") < text.find("\"x\""));
}

TEST_CASE("json_escape control characters") {
    CHECK(json_escape("a\tb") == "a\\tb");
    CHECK(json_escape(std::string(1, '\x01')) == "\\u0001");
}

TEST_CASE("write_atomic replaces content and leaves no temporary") {
    const fs::path dir = fs::path(DECOH_TEST_TMP) / "output";
    fs::create_directories(dir);
    const fs::path target = dir / "file.txt";
    write_atomic(target, "first\n");
    write_atomic(target, "second\n");
    CHECK(slurp(target) == "second\n");
    CHECK_FALSE(fs::exists(dir / "file.txt.tmp"));
    CHECK_THROWS_AS(write_atomic(dir / "missing" / "x.txt", "y"), std::runtime_error);
}
