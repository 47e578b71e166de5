#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "decoh/branching.hpp"
#include "decoh/ensemble.hpp"
#include "decoh/model_core.hpp"

namespace decoh {

enum class Scenario { midbox, freespread, born_test, peres_test, collapse_compare, liouville_check };

std::string_view to_string(Scenario s);
std::optional<Scenario> parse_scenario(std::string_view text);

/// Configuration problem tied to a key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& reason)
        : std::runtime_error(key + ": " + reason), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Defaults: midbox, m = hbar = w = tau = 1, L = 20, weighted, 200 steps,
/// fanout 8, max_branches 1e5, 20 bins, seed 42, deterministic timing,
/// output_dir "out".
struct RunConfig {
    Scenario scenario = Scenario::midbox;
    PhysicalParams params;
    Mode mode = Mode::weighted;
    std::uint64_t steps = 200;
    std::uint32_t fanout = 8;
    std::uint64_t max_branches = 100000;
    std::uint64_t bins = 20;
    std::uint64_t seed = 42;
    Timing timing = Timing::deterministic;
    std::string output_dir = "out";

    /// Throws ConfigError for the first violated invariant.
    void validate() const;
};

/// Set one key from its textual value; throws ConfigError for an unknown
/// key or an unparsable value.
void apply_setting(RunConfig& c, std::string_view key, std::string_view value);

/// Flat `key = value` document. Items are separated by newlines or commas;
/// `#` starts a comment. Unknown keys, repeated keys and malformed items are
/// errors. The result is validated.
RunConfig parse_config(std::string_view text);

}  // namespace decoh
