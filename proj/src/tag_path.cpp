#include "decoh/tag_path.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <stdexcept>

#include "decoh/random_stream.hpp"

namespace decoh {

namespace {

// murmur3 fmix64, an independent second lane next to SplitMix64
std::uint64_t fmix64(std::uint64_t k) {
    k ^= k >> 33;
    k *= 0xff51afd7ed558ccdULL;
    k ^= k >> 33;
    k *= 0xc4ceb9fe1a85ec53ULL;
    k ^= k >> 33;
    return k;
}

std::size_t retained_count(std::uint32_t depth) {
    return std::min<std::size_t>(depth, TagPath::kRetained);
}

}  // namespace

TagPath TagPath::extended(double time, std::uint32_t offspring) const {
    if (const auto prev = last(); prev && !(time > prev->time)) {
        throw std::logic_error("TagPath: event times must be strictly increasing");
    }
    TagPath out = *this;
    const std::size_t n = retained_count(depth_);
    if (n == kRetained) {
        std::shift_left(out.recent_.begin(), out.recent_.end(), 1);
        out.recent_[kRetained - 1] = {time, offspring};
    } else {
        out.recent_[n] = {time, offspring};
    }
    out.depth_ = depth_ + 1;

    const std::uint64_t t = std::bit_cast<std::uint64_t>(time);
    const std::uint64_t k = (static_cast<std::uint64_t>(offspring) << 32) | out.depth_;
    out.digest_.hi = mix64(digest_.hi ^ mix64(t) ^ (k * 0x9e3779b97f4a7c15ULL));
    out.digest_.lo = fmix64(digest_.lo + fmix64(t ^ 0x2545f4914f6cdd1dULL) + fmix64(k));
    return out;
}

std::span<const TagEvent> TagPath::recent() const {
    return {recent_.data(), retained_count(depth_)};
}

std::optional<TagEvent> TagPath::last() const {
    if (depth_ == 0) return std::nullopt;
    return recent_[retained_count(depth_) - 1];
}

std::string TagPath::to_string() const {
    char head[96];
    std::snprintf(head, sizeof head, "depth=%u digest=%016llx%016llx events=[", depth_,
                  static_cast<unsigned long long>(digest_.hi),
                  static_cast<unsigned long long>(digest_.lo));
    std::string s = head;
    if (depth_ > kRetained) s += "..., ";
    bool first = true;
    for (const auto& ev : recent()) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s(%.17g, %u)", first ? "" : ", ", ev.time, ev.offspring);
        s += buf;
        first = false;
    }
    s += "]";
    return s;
}

bool operator==(const TagPath& a, const TagPath& b) {
    if (a.depth_ != b.depth_ || a.digest_ != b.digest_) return false;
    const auto ra = a.recent();
    const auto rb = b.recent();
    return std::equal(ra.begin(), ra.end(), rb.begin(), rb.end());
}

}  // namespace decoh
