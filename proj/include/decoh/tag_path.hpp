#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>

namespace decoh {

struct TagEvent {
    double time = 0.0;
    std::uint32_t offspring = 0;

    friend bool operator==(const TagEvent&, const TagEvent&) = default;
};

/// 128-bit fingerprint of a full lineage.
struct LineageDigest {
    std::uint64_t hi = 0;
    std::uint64_t lo = 0;

    friend bool operator==(const LineageDigest&, const LineageDigest&) = default;
    friend auto operator<=>(const LineageDigest&, const LineageDigest&) = default;
};

/// Decoherence-event lineage of a branch: the ordered (event time,
/// offspring index) pairs since the root state.
///
/// The full lineage is carried as a 128-bit digest folded event by event;
/// only the most recent kRetained events are stored explicitly. Lineages
/// grow by one event per period per branch, so storing them in full would
/// cost O(branches x steps) memory with no sharing between independent
/// walkers.
class TagPath {
public:
    static constexpr std::size_t kRetained = 4;

    TagPath() = default;

    /// Lineage extended by one event. Throws std::logic_error unless `time`
    /// is strictly after the last event.
    TagPath extended(double time, std::uint32_t offspring) const;

    std::size_t depth() const { return depth_; }
    const LineageDigest& digest() const { return digest_; }
    /// Retained events, oldest first.
    std::span<const TagEvent> recent() const;
    std::optional<TagEvent> last() const;

    std::string to_string() const;

    friend bool operator==(const TagPath& a, const TagPath& b);

private:
    std::array<TagEvent, kRetained> recent_{};
    std::uint32_t depth_ = 0;
    LineageDigest digest_{};
};

}  // namespace decoh
