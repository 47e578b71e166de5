#include "decoh/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace decoh {

std::vector<std::uint64_t> apportion_counts(std::span<const double> weights, std::uint64_t n) {
    if (n < 1) throw std::domain_error("apportion_counts: N must be >= 1");
    if (weights.empty()) throw std::domain_error("apportion_counts: no weights");
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw std::domain_error("apportion_counts: weights must be finite and >= 0");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::domain_error("apportion_counts: weights must sum to 1");
    }

    const double total = static_cast<double>(n);
    std::vector<std::uint64_t> counts(weights.size());
    std::vector<double> remainder(weights.size());
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double exact = weights[i] * total;
        const double fl = std::floor(exact);
        counts[i] = static_cast<std::uint64_t>(fl);
        remainder[i] = exact - fl;
        assigned += counts[i];
    }
    // Rounding of w*N can overshoot by a unit when the weights sum to
    // slightly more than one; take it back from the smallest remainders.
    std::vector<std::size_t> order(weights.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    if (assigned <= n) {
        std::uint64_t left = n - assigned;
        for (std::size_t k = 0; left > 0; k = (k + 1) % order.size(), --left) ++counts[order[k]];
    } else {
        std::uint64_t excess = assigned - n;
        for (auto it = order.rbegin(); excess > 0; ++it) {
            if (it == order.rend()) it = order.rbegin();
            if (counts[*it] > 0) {
                --counts[*it];
                --excess;
            }
        }
    }
    return counts;
}

namespace {

// lambda with sum_j min(1, lambda * pi_j) == k over positive entries; writes
// the resulting probabilities into q.
void water_fill(std::span<const double> pi, double k, std::vector<double>& q) {
    q.assign(pi.size(), 0.0);
    double total = 0.0;
    for (double v : pi) total += v;
    if (total <= 0.0) return;
    double lambda = k / total;
    double largest = 0.0;
    for (double v : pi) largest = std::max(largest, v);
    if (lambda * largest < 1.0) {
        for (std::size_t j = 0; j < pi.size(); ++j) q[j] = lambda * pi[j];
        return;
    }
    std::size_t capped = static_cast<std::size_t>(-1);
    for (;;) {
        std::size_t n_cap = 0;
        double cap_mass = 0.0;
        for (double v : pi) {
            if (v > 0.0 && lambda * v >= 1.0) {
                ++n_cap;
                cap_mass += v;
            }
        }
        // exact arithmetic only grows this set; rounding can flip a unit back and forth
        if (capped != static_cast<std::size_t>(-1) && n_cap <= capped) break;
        capped = n_cap;
        const double rest = total - cap_mass;
        if (rest <= 0.0 || k - static_cast<double>(n_cap) <= 0.0) break;
        lambda = (k - static_cast<double>(n_cap)) / rest;
    }
    for (std::size_t j = 0; j < pi.size(); ++j) q[j] = std::min(1.0, lambda * pi[j]);
}

// Systematic placement of n draws over probabilities q (sum q == n).
void systematic_pick(std::span<const double> q, std::size_t n, double u,
                     std::vector<char>& picked) {
    picked.assign(q.size(), 0);
    std::size_t taken = 0;
    double cumulative = 0.0;
    double next = u;
    for (std::size_t j = 0; j < q.size() && taken < n; ++j) {
        cumulative += q[j];
        if (next < cumulative) {
            picked[j] = 1;
            ++taken;
            next += 1.0;
        }
    }
    // floating-point shortfall: fill with the largest remaining q
    while (taken < n) {
        std::size_t best = q.size();
        for (std::size_t j = 0; j < q.size(); ++j) {
            if (!picked[j] && q[j] > 0.0 && (best == q.size() || q[j] > q[best])) best = j;
        }
        if (best == q.size()) break;
        picked[best] = 1;
        ++taken;
    }
}

}  // namespace

std::vector<Inclusion> select_proportional(std::span<const SamplingGroup> groups,
                                           std::size_t target, RandomStream& rng) {
    const std::size_t n_groups = groups.size();
    std::vector<double> group_sum(n_groups, 0.0);
    std::vector<double> group_max(n_groups, 0.0);
    std::vector<std::size_t> group_pos(n_groups, 0);
    std::size_t positive = 0;
    double total = 0.0;
    for (std::size_t g = 0; g < n_groups; ++g) {
        const auto& grp = groups[g];
        if (!(grp.scale >= 0.0) || !std::isfinite(grp.scale)) {
            throw std::domain_error("select_proportional: group scale must be finite and >= 0");
        }
        // consecutive groups often share one member table
        if (g > 0 && grp.members.data() == groups[g - 1].members.data() &&
            grp.members.size() == groups[g - 1].members.size()) {
            group_sum[g] = group_sum[g - 1];
            group_max[g] = group_max[g - 1];
            group_pos[g] = group_pos[g - 1];
        } else {
            for (double t : grp.members) {
                if (!(t >= 0.0) || !std::isfinite(t)) {
                    throw std::domain_error("select_proportional: weights must be finite and >= 0");
                }
                if (t > 0.0) ++group_pos[g];
                group_sum[g] += t;
                group_max[g] = std::max(group_max[g], t);
            }
        }
        if (grp.scale > 0.0) positive += group_pos[g];
        total += grp.scale * group_sum[g];
    }

    std::vector<Inclusion> out;
    if (positive <= target) {
        out.reserve(positive);
        for (std::size_t g = 0; g < n_groups; ++g) {
            if (groups[g].scale <= 0.0) continue;
            for (std::size_t j = 0; j < groups[g].members.size(); ++j) {
                if (groups[g].members[j] > 0.0) out.push_back({g, j, 1.0});
            }
        }
        return out;
    }
    if (target == 0) return out;

    // Scale c with sum min(1, c*w) == target.
    const double m = static_cast<double>(target);
    double c = m / total;
    std::size_t certain = static_cast<std::size_t>(-1);
    for (;;) {
        std::size_t n_cert = 0;
        double cert_mass = 0.0;
        for (std::size_t g = 0; g < n_groups; ++g) {
            const double s = groups[g].scale;
            if (c * s * group_max[g] < 1.0) continue;
            for (double t : groups[g].members) {
                if (t > 0.0 && c * s * t >= 1.0) {
                    ++n_cert;
                    cert_mass += s * t;
                }
            }
        }
        if (certain != static_cast<std::size_t>(-1) && n_cert <= certain) break;
        certain = n_cert;
        const double rest = total - cert_mass;
        if (rest <= 0.0 || m - static_cast<double>(n_cert) <= 0.0) break;
        c = (m - static_cast<double>(n_cert)) / rest;
    }
    auto is_certain = [c](double s, double t) { return t > 0.0 && c * s * t >= 1.0; };

    // Non-certain inclusion mass of every group.
    std::vector<double> mass(n_groups, 0.0);
    for (std::size_t g = 0; g < n_groups; ++g) {
        const double s = groups[g].scale;
        if (c * s * group_max[g] < 1.0) {
            mass[g] = c * s * group_sum[g];
            continue;
        }
        for (double t : groups[g].members) {
            if (!is_certain(s, t)) mass[g] += c * s * t;
        }
    }
    // Rounding must not turn an integer mass (one draw per equal-weight
    // parent) into a pivotal coin flip.
    for (double& t : mass) {
        const double r = std::round(t);
        if (std::abs(t - r) < 1e-9) t = r;
    }

    // Group draw counts: floor plus an ordered pivotal pass over the
    // fractional parts in random group order.
    std::vector<std::size_t> draws(n_groups, 0);
    std::vector<std::uint32_t> order;
    order.reserve(n_groups);
    std::vector<double> frac(n_groups, 0.0);
    for (std::size_t g = 0; g < n_groups; ++g) {
        const double fl = std::floor(mass[g]);
        draws[g] = static_cast<std::size_t>(fl);
        frac[g] = mass[g] - fl;
        if (frac[g] > 0.0) order.push_back(static_cast<std::uint32_t>(g));
    }
    std::shuffle(order.begin(), order.end(), rng.engine());
    bool has_pending = false;
    std::size_t pending = 0;
    double pending_mass = 0.0;
    for (std::uint32_t g : order) {
        const double b = frac[g];
        if (!has_pending) {
            has_pending = true;
            pending = g;
            pending_mass = b;
            continue;
        }
        const double s = pending_mass + b;
        if (s < 1.0) {
            if (rng.uniform() * s < b) pending = g;
            pending_mass = s;
        } else {
            if (rng.uniform() * (2.0 - s) < 1.0 - b) {
                ++draws[pending];
                pending = g;
            } else {
                ++draws[g];
            }
            pending_mass = s - 1.0;
            if (pending_mass <= 0.0) has_pending = false;
        }
    }
    if (has_pending && pending_mass >= 0.5) ++draws[pending];

    // Place the draws inside each group.
    out.reserve(target + 1);
    std::vector<double> pi;
    std::vector<std::size_t> idx;
    std::vector<double> q;
    std::vector<double> q_next;
    std::vector<char> picked;
    for (std::size_t g = 0; g < n_groups; ++g) {
        const double s = groups[g].scale;
        const auto members = groups[g].members;
        const bool any_certain = c * s * group_max[g] >= 1.0;
        if (!any_certain) {
            if (draws[g] == 0) continue;
            if (draws[g] == 1 && (mass[g] <= 1.0) && group_pos[g] > 1) {
                // single draw, q proportional to the member weights
                const double u = rng.uniform() * group_sum[g];
                double cumulative = 0.0;
                std::size_t chosen = members.size();
                std::size_t largest = 0;
                for (std::size_t j = 0; j < members.size(); ++j) {
                    cumulative += members[j];
                    if (members[j] > members[largest]) largest = j;
                    if (members[j] > 0.0 && u < cumulative) {
                        chosen = j;
                        break;
                    }
                }
                if (chosen == members.size()) chosen = largest;
                out.push_back({g, chosen, c * s * members[chosen]});
                continue;
            }
        }
        pi.clear();
        idx.clear();
        for (std::size_t j = 0; j < members.size(); ++j) {
            const double t = members[j];
            if (t <= 0.0 || s <= 0.0) continue;
            if (any_certain && is_certain(s, t)) continue;
            pi.push_back(c * s * t);
            idx.push_back(j);
        }
        const std::size_t n = std::min(draws[g], pi.size());
        picked.assign(pi.size(), 0);
        if (n == pi.size()) {
            std::fill(picked.begin(), picked.end(), 1);
        } else if (n > 0) {
            const double fl = std::floor(mass[g]);
            const double r = mass[g] - fl;
            const auto f = static_cast<std::size_t>(fl);
            if (r > 0.0 && n == f + 1) {
                water_fill(pi, static_cast<double>(n), q);
            } else if (r > 0.0 && n == f) {
                water_fill(pi, static_cast<double>(n + 1), q_next);
                q.resize(pi.size());
                for (std::size_t j = 0; j < pi.size(); ++j) {
                    q[j] = std::clamp((pi[j] - r * q_next[j]) / (1.0 - r), 0.0, 1.0);
                }
            } else {
                water_fill(pi, static_cast<double>(n), q);
            }
            systematic_pick(q, n, rng.uniform(), picked);
        }

        // Emit in member order, certain members interleaved.
        std::size_t k = 0;
        for (std::size_t j = 0; j < members.size(); ++j) {
            const double t = members[j];
            if (t <= 0.0 || s <= 0.0) continue;
            if (any_certain && is_certain(s, t)) {
                out.push_back({g, j, 1.0});
                continue;
            }
            if (picked[k]) out.push_back({g, j, pi[k]});
            ++k;
        }
    }
    return out;
}

}  // namespace decoh
