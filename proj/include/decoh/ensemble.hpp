#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "decoh/model_core.hpp"
#include "decoh/tag_path.hpp"

namespace decoh {

enum class Mode { weighted, count, collapse };

std::string_view to_string(Mode mode);
std::optional<Mode> parse_mode(std::string_view text);

/// One decoherent component. `weight` is used in weighted and collapse
/// modes, `multiplicity` in count mode.
struct Branch {
    GaussianPacket packet;
    TagPath tag;
    double weight = 1.0;
    std::uint64_t multiplicity = 1;
    double birth_time = 0.0;
};

/// Live branches at a common time. Immutable once built; the constructor
/// checks the mode invariants and throws std::invalid_argument on failure.
class Ensemble {
public:
    Ensemble(Mode mode, double time, std::vector<Branch> branches);

    /// One branch at rest in the middle of the box with variance w^2.
    static Ensemble midbox(const PhysicalParams& p, Mode mode, std::uint64_t multiplicity = 1);

    Mode mode() const { return mode_; }
    double time() const { return time_; }
    std::span<const Branch> branches() const { return branches_; }
    std::size_t size() const { return branches_.size(); }
    bool empty() const { return branches_.empty(); }

    /// Statistical mass of a branch: multiplicity in count mode, weight otherwise.
    double mass(const Branch& b) const {
        return mode_ == Mode::count ? static_cast<double>(b.multiplicity) : b.weight;
    }
    double total_mass() const;
    /// Sum of multiplicities (count mode); 0 otherwise.
    std::uint64_t total_count() const { return total_count_; }
    /// Kish effective sample size (sum m)^2 / sum m^2.
    double effective_size() const;

private:
    Mode mode_;
    double time_;
    std::vector<Branch> branches_;
    std::uint64_t total_count_ = 0;
};

inline constexpr double kWeightSumTolerance = 1e-9;

}  // namespace decoh
