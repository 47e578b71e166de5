#pragma once

// Decoherence dynamics of the tagged branch ensemble.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "decoh/ensemble.hpp"
#include "decoh/model_core.hpp"
#include "decoh/random_stream.hpp"

namespace decoh {

enum class Timing { deterministic, poisson };

std::string_view to_string(Timing timing);
std::optional<Timing> parse_timing(std::string_view text);

/// How a parent's offset Gaussian is spread over the lattice.
enum class Discretization {
    /// Kernel width chosen so the lattice second moment about the parent
    /// center equals variance - w^2 exactly (no h^2/12 excess per event).
    moment_matched,
    /// bin_weights of Gaussian(center, variance - w^2) as given.
    direct,
};

struct StepOptions {
    std::uint32_t fanout = 8;
    std::size_t max_branches = 100000;
    Timing timing = Timing::deterministic;
    bool walls = true;
    Discretization discretization = Discretization::moment_matched;
};

/// Offspring pattern of one decoherence event: lattice offsets relative to
/// the parent's bin and their masses (sum 1).
struct OffspringKernel {
    std::int64_t base = 0;  ///< parent's lattice bin
    std::vector<std::int64_t> offsets;
    std::vector<double> weights;
};

/// Kernel for a parent at `center` whose center-offset distribution has
/// variance `offset_variance`. Throws std::domain_error for a negative or
/// non-finite offset variance. A vanishing offset variance yields the
/// degenerate single-bin split.
OffspringKernel offspring_kernel(double center, double offset_variance, const PhysicalParams& p,
                                 Discretization d = Discretization::moment_matched);

/// Kernel memo keyed by (lattice phase, offset variance, w); not thread-safe.
class KernelCache {
public:
    const OffspringKernel& get(double center, double offset_variance, const PhysicalParams& p,
                               Discretization d);

private:
    struct Entry {
        std::int64_t phase;
        double variance;
        double w;
        Discretization d;
        OffspringKernel kernel;
    };
    std::vector<Entry> entries_;
};

/// Split one branch at event time `event_time`. Offspring sit on the lattice
/// bins of the kernel (reflected into [0, L] when `walls`), carry variance
/// w^2, age 0 and the parent tag extended by (event_time, index).
/// Weighted/collapse: weight = kernel mass x parent weight. Count:
/// multiplicities apportion_counts(kernel, multiplicity x fanout), empty
/// bins dropped.
/// Throws std::invalid_argument unless variance > w^2 (strictly spread) or
/// fanout >= 1; std::overflow_error if multiplicity x fanout overflows.
std::vector<Branch> decohere_branch(const Branch& b, const PhysicalParams& p, Mode mode,
                                    double event_time, const StepOptions& opt);

/// As above with kernels drawn from `cache`.
std::vector<Branch> decohere_branch(const Branch& b, const PhysicalParams& p, Mode mode,
                                    double event_time, const StepOptions& opt,
                                    KernelCache& cache);

struct TimedOffspring {
    double event_time = 0.0;
    std::vector<Branch> offspring;
};

/// Poisson-timed event: waits Exp(tau) after `now` on `rng`, spreads the
/// packet to the event time and decoheres it there.
TimedOffspring decohere_after_wait(const Branch& b, const PhysicalParams& p, Mode mode,
                                   double now, const StepOptions& opt, RandomStream& rng);

/// Pick one offspring with probability proportional to its mass, using only
/// `rng`; the survivor gets weight 1 and multiplicity 1. Throws
/// std::logic_error on empty input.
Branch prune_to_collapse(std::span<const Branch> offspring, Mode mode, RandomStream& rng);

/// Identity when size <= max_branches, otherwise select_proportional down to
/// max_branches with Horvitz-Thompson reweighting. Weighted: weights
/// renormalized to 1. Count: the total is re-apportioned over the
/// reweighted survivors (exactly preserved); survivors left at zero are
/// dropped. Throws std::invalid_argument if max_branches < 1.
Ensemble cap_resample(const Ensemble& e, std::size_t max_branches, RandomStream& rng);

/// One period: spread, decohere (deterministic: once at t + tau; poisson:
/// at exponential waits of mean tau, per branch, on a stream keyed by the
/// branch lineage), prune in collapse mode, cap otherwise. Time advances by
/// tau. `rng` supplies the step-level stream for capping.
Ensemble evolve_ensemble_step(const Ensemble& e, const PhysicalParams& p,
                              const StepOptions& opt, RandomStream& rng);

struct TagReport {
    bool unique = true;
    std::size_t first = 0;   ///< index of the first branch of the duplicate pair
    std::size_t second = 0;
    std::string lineage;     ///< duplicated lineage, empty on pass
};

TagReport verify_tag_uniqueness(const Ensemble& e);

/// Stream key derived from a lineage digest.
std::uint64_t lineage_key(const TagPath& tag);

}  // namespace decoh
