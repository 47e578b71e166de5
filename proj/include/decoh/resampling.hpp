#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "decoh/random_stream.hpp"

namespace decoh {

/// Largest-remainder apportionment of `n` units to `weights`: floor(w_i n)
/// each, then one extra unit to the largest fractional remainders, ties to
/// the lower index. Weights must be non-negative and sum to 1 within 1e-9;
/// otherwise std::domain_error.
std::vector<std::uint64_t> apportion_counts(std::span<const double> weights, std::uint64_t n);

/// A block of candidate units with weights scale * members[j]. Units of one
/// group stay adjacent during selection; typically a group is the offspring
/// set of one parent branch.
struct SamplingGroup {
    double scale = 1.0;
    std::span<const double> members;
};

struct Inclusion {
    std::size_t group = 0;
    std::size_t member = 0;
    double probability = 1.0;  ///< first-order inclusion probability
};

/// Fixed-size sampling without replacement, inclusion probability
/// proportional to weight.
///
/// Inclusion probabilities are pi = min(1, c * weight) with sum(pi) =
/// `target`. Each group first receives floor(T_g) or ceil(T_g) draws, where
/// T_g is its non-certain inclusion mass, by ordered pivotal sampling over
/// the groups in random order; the draws are then placed inside the group by
/// systematic sampling. Marginal inclusion probabilities are exact, so
/// weight / probability is an unbiased (Horvitz-Thompson) weight. A group
/// whose inclusion mass is an integer receives exactly that many draws.
///
/// Zero-weight units are never selected. If at most `target` units have
/// positive weight, all of them are returned with probability 1. The result
/// is ordered by (group, member).
std::vector<Inclusion> select_proportional(std::span<const SamplingGroup> groups,
                                           std::size_t target, RandomStream& rng);

}  // namespace decoh
