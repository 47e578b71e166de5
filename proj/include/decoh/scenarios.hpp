#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "decoh/output.hpp"
#include "decoh/run_config.hpp"

namespace decoh {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunSummary {
    RunConfig config;
    std::vector<SeriesRow> series;
    std::vector<std::pair<std::string, double>> metrics;
    std::vector<Check> checks;
    std::filesystem::path series_path;
    std::filesystem::path summary_path;
    double wall_seconds = 0.0;  ///< reported on stdout only; never written to files

    bool all_pass() const;
    /// Throws std::out_of_range for an unknown name.
    double metric(std::string_view name) const;
    const Check& check(std::string_view name) const;
    bool has_check(std::string_view name) const;
};

/// Summary document (config echo, series file, metrics, verdicts).
std::string summary_json(const RunSummary& s);

/// Run the configured scenario. When `write_files` is set, writes
/// <output_dir>/<scenario>.csv and <output_dir>/<scenario>.summary.json
/// atomically. Throws ConfigError for invalid configs and
/// std::runtime_error for unwritable outputs or invariant violations.
RunSummary run_scenario(const RunConfig& c, bool write_files = true);

/// Trajectories used by collapse_compare.
inline constexpr std::size_t kCollapseTrajectories = 10000;
/// Spacing, in steps, of the equilibration checkpoints.
inline constexpr std::uint64_t kCheckpointSteps = 100;
/// Branch cap of the random-step part of peres_test.
inline constexpr std::size_t kPeresCap = 64;

}  // namespace decoh
