#include "decoh/model_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace decoh {

namespace {

void require_positive(double value, const char* name) {
    if (!(std::isfinite(value) && value > 0.0)) {
        throw std::invalid_argument(std::string(name) + " must be finite and > 0, got " +
                                    std::to_string(value));
    }
}

// Upper-tail probability P(Z > z) for a standard normal.
double upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

void PhysicalParams::validate() const {
    require_positive(m, "m");
    require_positive(w, "w");
    require_positive(tau, "tau");
    require_positive(hbar, "hbar");
    require_positive(L, "L");
    if (w > L / 20.0) {
        throw std::invalid_argument("w must satisfy w <= L/20 (w = " + std::to_string(w) +
                                    ", L = " + std::to_string(L) + ")");
    }
    const double d2 = delta_squared();
    if (!(std::isfinite(d2) && d2 > 0.0)) {
        throw std::invalid_argument("step scale (tau*hbar/(m*w))^2 must be finite and > 0");
    }
}

double PhysicalParams::delta_squared() const {
    const double delta = tau * hbar / (m * w);
    return delta * delta;
}

double PhysicalParams::diffusion_constant() const { return delta_squared() / (2.0 * tau); }

double spread_variance(double var0, double dt, const PhysicalParams& p) {
    if (!(std::isfinite(var0) && var0 > 0.0)) {
        throw std::domain_error("spread_variance: var0 must be > 0");
    }
    if (!(std::isfinite(dt) && dt >= 0.0)) {
        throw std::domain_error("spread_variance: dt must be >= 0");
    }
    const double growth = dt * p.hbar / (p.m * std::sqrt(var0));
    return var0 + growth * growth;
}

GaussianPacket advance(const GaussianPacket& packet, double dt, const PhysicalParams& p) {
    GaussianPacket out = packet;
    out.age = packet.age + dt;
    out.variance = spread_variance(packet.rest_variance, out.age, p);
    return out;
}

double step_offset_variance(const PhysicalParams& p) {
    require_positive(p.m, "m");
    require_positive(p.w, "w");
    require_positive(p.hbar, "hbar");
    if (!(std::isfinite(p.tau) && p.tau >= 0.0)) {
        throw std::invalid_argument("tau must be finite and >= 0");
    }
    return p.delta_squared();
}

double gaussian_mass(double a, double b, double mu, double sigma) {
    const double za = (a - mu) / sigma;
    const double zb = (b - mu) / sigma;
    if (za >= 0.0) return upper_tail(za) - upper_tail(zb);
    if (zb <= 0.0) return upper_tail(-zb) - upper_tail(-za);
    return 1.0 - upper_tail(zb) - upper_tail(-za);
}

std::vector<BinWeight> bin_weights(double center, double variance, double bin_width,
                                   Interval support) {
    if (!(std::isfinite(variance) && variance > 0.0)) {
        throw std::domain_error("bin_weights: variance must be > 0");
    }
    if (!(std::isfinite(bin_width) && bin_width > 0.0)) {
        throw std::domain_error("bin_weights: bin_width must be > 0");
    }
    if (!std::isfinite(center)) {
        throw std::domain_error("bin_weights: center must be finite");
    }
    const double sigma = std::sqrt(variance);
    const double lo = std::max(center - kTruncationSigmas * sigma, support.lo);
    const double hi = std::min(center + kTruncationSigmas * sigma, support.hi);
    if (!(hi > lo)) {
        throw std::domain_error("bin_weights: truncated Gaussian does not overlap the support");
    }

    const auto first = static_cast<std::int64_t>(std::floor(lo / bin_width + 0.5));
    const auto last = static_cast<std::int64_t>(std::floor(hi / bin_width + 0.5));

    std::vector<BinWeight> out;
    out.reserve(static_cast<std::size_t>(last - first + 1));
    double total = 0.0;
    for (std::int64_t k = first; k <= last; ++k) {
        const double kc = static_cast<double>(k) * bin_width;
        const double a = std::max(lo, kc - 0.5 * bin_width);
        const double b = std::min(hi, kc + 0.5 * bin_width);
        if (!(b > a)) continue;
        const double mass = gaussian_mass(a, b, center, sigma);
        out.push_back({k, kc, mass});
        total += mass;
    }
    if (!(total > 0.0)) {
        throw std::domain_error("bin_weights: no probability mass inside the support");
    }
    for (auto& bw : out) bw.weight /= total;
    return out;
}

double reflect_center(double x, double L) {
    const double period = 2.0 * L;
    double y = std::fmod(x, period);
    if (y < 0.0) y += period;
    if (y > L) y = period - y;
    return y;
}

}  // namespace decoh
