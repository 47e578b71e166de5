#pragma once

// Single-branch physics of the toy model: free spreading of a localized
// Gaussian packet, the per-period offset scale, lattice discretization of a
// Gaussian, and reflection at the box walls.

#include <cstdint>
#include <limits>
#include <vector>

namespace decoh {

/// Constants of the one-particle box model.
///
/// `w` is the position standard deviation of a freshly localized packet and
/// doubles as the pitch of the offspring lattice.
struct PhysicalParams {
    double m = 1.0;     ///< mass
    double w = 1.0;     ///< localization width
    double tau = 1.0;   ///< decoherence period
    double hbar = 1.0;  ///< reduced Planck constant
    double L = 20.0;    ///< box length

    /// Throws std::invalid_argument naming the first violated invariant:
    /// all fields finite and > 0, w <= L/20, finite positive step scale.
    void validate() const;

    /// (tau*hbar/(m*w))^2, the center variance gained per period.
    double delta_squared() const;
    /// delta^2/(2 tau), the diffusion constant of the center process.
    double diffusion_constant() const;
};

/// A Gaussian packet in the box. `rest_variance` is the variance at the
/// last localization; `variance` is the current value after `age` of free
/// spreading.
struct GaussianPacket {
    double center = 0.0;
    double variance = 1.0;
    double age = 0.0;
    double rest_variance = 1.0;

    static GaussianPacket localized(double center, double variance) {
        return GaussianPacket{center, variance, 0.0, variance};
    }
};

/// var0 + (dt*hbar/(m*sqrt(var0)))^2. Throws std::domain_error for var0 <= 0
/// or dt < 0.
double spread_variance(double var0, double dt, const PhysicalParams& p);

/// Free evolution of a packet by dt from its rest variance.
GaussianPacket advance(const GaussianPacket& packet, double dt, const PhysicalParams& p);

/// Per-period center variance (tau*hbar/(m*w))^2. Accepts tau == 0.
double step_offset_variance(const PhysicalParams& p);

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static Interval whole() { return {}; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct BinWeight {
    std::int64_t index = 0;  ///< lattice index; the bin is centred on index*bin_width
    double center = 0.0;
    double weight = 0.0;
};

/// Probability mass of Gaussian(center, variance) on the fixed lattice of
/// pitch `bin_width` (bin k covers [(k-1/2)h, (k+1/2)h)), truncated at
/// +/-6 sigma and intersected with `support`, renormalized to sum to 1.
/// Bins are returned in increasing index order; zero-width pieces are
/// dropped. Throws std::domain_error when the truncated Gaussian misses the
/// support or the arguments are not positive.
std::vector<BinWeight> bin_weights(double center, double variance, double bin_width,
                                   Interval support = Interval::whole());

/// Gaussian probability mass of [a, b] for N(mu, sigma^2), computed from
/// whichever tail keeps the subtraction well conditioned.
double gaussian_mass(double a, double b, double mu, double sigma);

/// Reflective fold of x into [0, L] (period 2L, upper half mirrored).
double reflect_center(double x, double L);

inline constexpr double kTruncationSigmas = 6.0;

}  // namespace decoh
