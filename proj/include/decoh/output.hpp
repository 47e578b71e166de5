#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace decoh {

struct SeriesRow {
    double t = 0.0;
    double n_branches = 0.0;
    double n_effective = 0.0;
    double mean_x = 0.0;
    double var_x = 0.0;
    double coarse_entropy_nats = 0.0;
    double tv_uniform = 0.0;
};

inline constexpr std::string_view kCsvHeader =
    "t,n_branches,n_effective,mean_x,var_x,coarse_entropy_nats,tv_uniform";

/// %.17g; non-finite values print as nan / inf / -inf.
std::string format_double(double v);

std::string format_csv(std::span<const SeriesRow> rows);

/// Minimal ordered JSON builder; numbers use format_double, non-finite
/// numbers become null.
class JsonWriter {
public:
    JsonWriter& begin_object(std::string_view key = {});
    JsonWriter& end_object();
    JsonWriter& begin_array(std::string_view key = {});
    JsonWriter& end_array();
    JsonWriter& value(std::string_view key, double v);
    JsonWriter& value(std::string_view key, std::uint64_t v);
    JsonWriter& value(std::string_view key, bool v);
    JsonWriter& value(std::string_view key, std::string_view v);
    JsonWriter& value(std::string_view key, const char* v) { return value(key, std::string_view(v)); }

    /// Document text, newline-terminated.
    std::string str() const { return out_ + "\n"; }

private:
    void prefix(std::string_view key);
    std::string out_;
    std::vector<bool> first_{};
};

std::string json_escape(std::string_view s);

/// Write to a temporary file in the same directory, then rename over
/// `path`. Throws std::runtime_error on failure.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace decoh
