#include "decoh/run_config.hpp"

#include <charconv>
#include <cmath>
#include <set>
#include <string>
#include <vector>

namespace decoh {

std::string_view to_string(Scenario s) {
    switch (s) {
        case Scenario::midbox: return "midbox";
        case Scenario::freespread: return "freespread";
        case Scenario::born_test: return "born_test";
        case Scenario::peres_test: return "peres_test";
        case Scenario::collapse_compare: return "collapse_compare";
        case Scenario::liouville_check: return "liouville_check";
    }
    return "unknown";
}

std::optional<Scenario> parse_scenario(std::string_view text) {
    for (auto s : {Scenario::midbox, Scenario::freespread, Scenario::born_test,
                   Scenario::peres_test, Scenario::collapse_compare, Scenario::liouville_check}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(std::string_view key, std::string_view v) {
    const std::string text(v);
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(std::string(key), "expected a number, got '" + text + "'");
    }
    if (used != text.size()) {
        throw ConfigError(std::string(key), "expected a number, got '" + text + "'");
    }
    return out;
}

std::uint64_t parse_count(std::string_view key, std::string_view v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec == std::errc() && ptr == end) return out;
    // accept integral scientific notation such as 1e5
    const double d = parse_double(key, v);
    if (!(d >= 0.0 && d <= 1.8e19 && std::floor(d) == d)) {
        throw ConfigError(std::string(key), "expected a non-negative integer, got '" +
                                                std::string(v) + "'");
    }
    return static_cast<std::uint64_t>(d);
}

void require_positive(std::string_view key, double v) {
    if (!(std::isfinite(v) && v > 0.0)) {
        throw ConfigError(std::string(key), "must be finite and > 0, got " + std::to_string(v));
    }
}

}  // namespace

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
    const std::string k(key);
    if (key == "scenario") {
        const auto s = parse_scenario(value);
        if (!s) throw ConfigError(k, "unknown scenario '" + std::string(value) + "'");
        c.scenario = *s;
    } else if (key == "m") {
        c.params.m = parse_double(key, value);
    } else if (key == "w") {
        c.params.w = parse_double(key, value);
    } else if (key == "tau") {
        c.params.tau = parse_double(key, value);
    } else if (key == "hbar") {
        c.params.hbar = parse_double(key, value);
    } else if (key == "L") {
        c.params.L = parse_double(key, value);
    } else if (key == "mode") {
        const auto m = parse_mode(value);
        if (!m) throw ConfigError(k, "expected weighted, count or collapse");
        c.mode = *m;
    } else if (key == "steps") {
        c.steps = parse_count(key, value);
    } else if (key == "fanout") {
        const auto f = parse_count(key, value);
        if (f > 0xffffffffULL) throw ConfigError(k, "too large");
        c.fanout = static_cast<std::uint32_t>(f);
    } else if (key == "max_branches") {
        c.max_branches = parse_count(key, value);
    } else if (key == "bins") {
        c.bins = parse_count(key, value);
    } else if (key == "seed") {
        c.seed = parse_count(key, value);
    } else if (key == "timing") {
        const auto t = parse_timing(value);
        if (!t) throw ConfigError(k, "expected deterministic or poisson");
        c.timing = *t;
    } else if (key == "output_dir") {
        if (value.empty()) throw ConfigError(k, "must not be empty");
        c.output_dir = std::string(value);
    } else {
        throw ConfigError(k, "unknown key");
    }
}

void RunConfig::validate() const {
    const auto& p = params;
    require_positive("m", p.m);
    require_positive("w", p.w);
    require_positive("tau", p.tau);
    require_positive("hbar", p.hbar);
    require_positive("L", p.L);
    if (p.w > p.L / 20.0) throw ConfigError("w", "must satisfy w <= L/20");
    const double d2 = p.delta_squared();
    if (!(std::isfinite(d2) && d2 > 0.0)) {
        throw ConfigError("tau", "step scale (tau*hbar/(m*w))^2 must be finite and > 0");
    }
    if (steps < 1) throw ConfigError("steps", "must be >= 1");
    if (fanout < 1) throw ConfigError("fanout", "must be >= 1");
    if (max_branches < 1) throw ConfigError("max_branches", "must be >= 1");
    if (bins < 2) throw ConfigError("bins", "must be >= 2");
    if (p.L / static_cast<double>(bins) < p.w) {
        throw ConfigError("bins", "bin width L/bins must be >= w");
    }
    if (scenario == Scenario::peres_test && p.L < 40.0 * p.w) {
        throw ConfigError("L", "peres_test needs L >= 40 w to fit two packets 20 w apart");
    }
}

RunConfig parse_config(std::string_view text) {
    RunConfig c;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        std::size_t ipos = 0;
        while (ipos <= line.size()) {
            auto comma = line.find(',', ipos);
            if (comma == std::string_view::npos) comma = line.size();
            const auto item = trim(line.substr(ipos, comma - ipos));
            ipos = comma + 1;
            if (item.empty()) continue;
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError("line " + std::to_string(line_no),
                                  "expected 'key = value', got '" + std::string(item) + "'");
            }
            const auto key = trim(item.substr(0, eq));
            const auto value = trim(item.substr(eq + 1));
            if (key.empty()) {
                throw ConfigError("line " + std::to_string(line_no), "missing key");
            }
            if (!seen.insert(std::string(key)).second) {
                throw ConfigError(std::string(key), "given more than once");
            }
            apply_setting(c, key, value);
        }
        if (nl == text.size()) break;
    }
    c.validate();
    return c;
}

}  // namespace decoh
