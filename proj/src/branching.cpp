#include "decoh/branching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

#include <boost/math/tools/toms748_solve.hpp>

#include "decoh/resampling.hpp"

namespace decoh {

std::string_view to_string(Timing timing) {
    return timing == Timing::deterministic ? "deterministic" : "poisson";
}

std::optional<Timing> parse_timing(std::string_view text) {
    if (text == "deterministic") return Timing::deterministic;
    if (text == "poisson") return Timing::poisson;
    return std::nullopt;
}

std::uint64_t lineage_key(const TagPath& tag) {
    return mix64(tag.digest().hi ^ mix64(tag.digest().lo + tag.depth()));
}

namespace {

double lattice_second_moment(double center, double s, double h) {
    double m2 = 0.0;
    for (const auto& bw : bin_weights(center, s * s, h)) {
        const double d = bw.center - center;
        m2 += bw.weight * d * d;
    }
    return m2;
}

OffspringKernel to_kernel(const std::vector<BinWeight>& bins, std::int64_t base) {
    OffspringKernel k;
    k.base = base;
    k.offsets.reserve(bins.size());
    k.weights.reserve(bins.size());
    for (const auto& bw : bins) {
        k.offsets.push_back(bw.index - base);
        k.weights.push_back(bw.weight);
    }
    return k;
}

std::int64_t lattice_index(double x, double h) {
    return static_cast<std::int64_t>(std::floor(x / h + 0.5));
}

void check_options(const StepOptions& opt) {
    if (opt.fanout < 1) throw std::invalid_argument("fanout must be >= 1");
    if (opt.max_branches < 1) throw std::invalid_argument("max_branches must be >= 1");
}

std::uint64_t checked_product(std::uint64_t a, std::uint64_t b) {
    if (b != 0 && a > std::numeric_limits<std::uint64_t>::max() / b) {
        throw std::overflow_error("count mode: multiplicity x fanout overflows 64 bits");
    }
    return a * b;
}

Branch make_child(const Branch& parent, std::int64_t bin, std::size_t j, double event_time,
                  const PhysicalParams& p, bool walls) {
    Branch c;
    double x = static_cast<double>(bin) * p.w;
    if (walls) x = reflect_center(x, p.L);
    c.packet = GaussianPacket::localized(x, p.w * p.w);
    c.tag = parent.tag.extended(event_time, static_cast<std::uint32_t>(j));
    c.birth_time = event_time;
    c.weight = parent.weight;
    c.multiplicity = parent.multiplicity;
    return c;
}

// Offspring of `b` with kernel `k`; weights/counts per mode.
std::vector<Branch> split(const Branch& b, const OffspringKernel& k, const PhysicalParams& p,
                          Mode mode, double event_time, const StepOptions& opt) {
    std::vector<Branch> out;
    if (mode == Mode::count) {
        const auto counts =
            apportion_counts(k.weights, checked_product(b.multiplicity, opt.fanout));
        for (std::size_t j = 0; j < counts.size(); ++j) {
            if (counts[j] == 0) continue;
            out.push_back(make_child(b, k.base + k.offsets[j], j, event_time, p, opt.walls));
            out.back().multiplicity = counts[j];
        }
        return out;
    }
    out.reserve(k.weights.size());
    for (std::size_t j = 0; j < k.weights.size(); ++j) {
        out.push_back(make_child(b, k.base + k.offsets[j], j, event_time, p, opt.walls));
        out.back().weight = b.weight * k.weights[j];
    }
    return out;
}

double offset_variance_of(const Branch& b, const PhysicalParams& p) {
    const double w2 = p.w * p.w;
    if (!(b.packet.variance > w2)) {
        throw std::invalid_argument("decohere_branch: packet variance must exceed w^2 (got " +
                                    std::to_string(b.packet.variance) + ")");
    }
    return b.packet.variance - w2;
}

}  // namespace

OffspringKernel offspring_kernel(double center, double offset_variance, const PhysicalParams& p,
                                 Discretization d) {
    if (!(std::isfinite(offset_variance) && offset_variance >= 0.0)) {
        throw std::domain_error("offspring_kernel: offset variance must be finite and >= 0");
    }
    const double h = p.w;
    const std::int64_t base = lattice_index(center, h);
    // Width small enough that +/-6 sigma stays inside one bin unless the
    // center sits on an edge.
    const double tiny = 1e-6 * h;
    if (d == Discretization::direct) {
        const double v = offset_variance > tiny * tiny ? offset_variance : tiny * tiny;
        return to_kernel(bin_weights(center, v, h), base);
    }

    const double floor_moment = lattice_second_moment(center, tiny, h);
    if (offset_variance <= floor_moment + 1e-9 * h * h) {
        return to_kernel(bin_weights(center, tiny * tiny, h), base);
    }
    double hi = std::sqrt(offset_variance) + h;
    while (lattice_second_moment(center, hi, h) < offset_variance) hi *= 2.0;
    auto excess = [&](double s) { return lattice_second_moment(center, s, h) - offset_variance; };
    std::uintmax_t iters = 100;
    const auto [lo, up] = boost::math::tools::toms748_solve(
        excess, tiny, hi, excess(tiny), excess(hi), boost::math::tools::eps_tolerance<double>(50),
        iters);
    const double mid = 0.5 * (lo + up);
    return to_kernel(bin_weights(center, mid * mid, h), base);
}

const OffspringKernel& KernelCache::get(double center, double offset_variance,
                                        const PhysicalParams& p, Discretization d) {
    const double u = center / p.w + 0.5;
    const double frac = u - std::floor(u);
    const auto phase = static_cast<std::int64_t>(std::llround(frac * 0x1.0p40));
    const std::int64_t base = lattice_index(center, p.w);
    for (auto& e : entries_) {
        if (e.phase == phase && e.variance == offset_variance && e.w == p.w && e.d == d) {
            e.kernel.base = base;
            return e.kernel;
        }
    }
    if (entries_.size() >= 64) entries_.clear();
    entries_.push_back(
        {phase, offset_variance, p.w, d, offspring_kernel(center, offset_variance, p, d)});
    return entries_.back().kernel;
}

std::vector<Branch> decohere_branch(const Branch& b, const PhysicalParams& p, Mode mode,
                                    double event_time, const StepOptions& opt,
                                    KernelCache& cache) {
    check_options(opt);
    const double ov = offset_variance_of(b, p);
    return split(b, cache.get(b.packet.center, ov, p, opt.discretization), p, mode, event_time,
                 opt);
}

std::vector<Branch> decohere_branch(const Branch& b, const PhysicalParams& p, Mode mode,
                                    double event_time, const StepOptions& opt) {
    thread_local KernelCache cache;
    return decohere_branch(b, p, mode, event_time, opt, cache);
}

TimedOffspring decohere_after_wait(const Branch& b, const PhysicalParams& p, Mode mode,
                                   double now, const StepOptions& opt, RandomStream& rng) {
    const double w2 = p.w * p.w;
    const auto last = b.tag.last();
    for (;;) {
        const double wait = rng.exponential(p.tau);
        const double te = now + wait;
        Branch at = b;
        at.packet = advance(b.packet, te - now, p);
        if (!(at.packet.variance > w2) || (last && !(te > last->time))) continue;
        return {te, decohere_branch(at, p, mode, te, opt)};
    }
}

Branch prune_to_collapse(std::span<const Branch> offspring, Mode mode, RandomStream& rng) {
    if (offspring.empty()) throw std::logic_error("prune_to_collapse: no offspring");
    auto mass = [mode](const Branch& b) {
        return mode == Mode::count ? static_cast<double>(b.multiplicity) : b.weight;
    };
    double total = 0.0;
    for (const auto& b : offspring) total += mass(b);
    const double u = rng.uniform() * total;
    std::size_t pick = offspring.size() - 1;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < offspring.size(); ++i) {
        cumulative += mass(offspring[i]);
        if (u < cumulative) {
            pick = i;
            break;
        }
    }
    Branch out = offspring[pick];
    out.weight = 1.0;
    out.multiplicity = 1;
    return out;
}

namespace {

// Horvitz-Thompson masses -> final ensemble, per mode.
Ensemble finish(Mode mode, double time, std::vector<Branch> kept, std::vector<double> ht,
                std::uint64_t total_count) {
    if (mode == Mode::count) {
        double sum = 0.0;
        for (double m : ht) sum += m;
        for (double& m : ht) m /= sum;
        const auto counts = apportion_counts(ht, total_count);
        std::vector<Branch> out;
        out.reserve(kept.size());
        for (std::size_t i = 0; i < kept.size(); ++i) {
            if (counts[i] == 0) continue;
            kept[i].multiplicity = counts[i];
            out.push_back(std::move(kept[i]));
        }
        return Ensemble(mode, time, std::move(out));
    }
    double sum = 0.0;
    for (double m : ht) sum += m;
    for (std::size_t i = 0; i < kept.size(); ++i) kept[i].weight = ht[i] / sum;
    return Ensemble(mode, time, std::move(kept));
}

}  // namespace

Ensemble cap_resample(const Ensemble& e, std::size_t max_branches, RandomStream& rng) {
    if (max_branches < 1) throw std::invalid_argument("cap_resample: max_branches must be >= 1");
    if (e.size() <= max_branches) return e;
    const auto branches = e.branches();
    std::vector<double> masses(branches.size());
    for (std::size_t i = 0; i < branches.size(); ++i) masses[i] = e.mass(branches[i]);
    std::vector<SamplingGroup> groups(branches.size());
    for (std::size_t i = 0; i < branches.size(); ++i) groups[i] = {1.0, {&masses[i], 1}};
    const auto picked = select_proportional(groups, max_branches, rng);
    std::vector<Branch> kept;
    std::vector<double> ht;
    kept.reserve(picked.size());
    ht.reserve(picked.size());
    for (const auto& inc : picked) {
        kept.push_back(branches[inc.group]);
        ht.push_back(masses[inc.group] / inc.probability);
    }
    return finish(e.mode(), e.time(), std::move(kept), std::move(ht), e.total_count());
}

namespace {

// Poisson timing: events at exponential waits, recursively for offspring
// born inside the step. Collapse mode prunes at every event.
void poisson_evolve(const Branch& b, double from, double to, const PhysicalParams& p, Mode mode,
                    const StepOptions& opt, const RandomStream& step_rng, KernelCache& cache,
                    std::vector<Branch>& out) {
    RandomStream rng = step_rng.substream(lineage_key(b.tag));
    const double w2 = p.w * p.w;
    double now = from;
    Branch cur = b;
    for (;;) {
        const double te = now + rng.exponential(p.tau);
        if (!(te < to)) {
            cur.packet = advance(cur.packet, to - now, p);
            out.push_back(std::move(cur));
            return;
        }
        Branch at = cur;
        at.packet = advance(cur.packet, te - now, p);
        const auto last = cur.tag.last();
        if (!(at.packet.variance > w2) || (last && !(te > last->time))) {
            cur = std::move(at);
            now = te;
            continue;
        }
        auto kids = decohere_branch(at, p, mode, te, opt, cache);
        if (mode == Mode::collapse) {
            RandomStream prune = rng.substream(0x70e5u);
            Branch survivor = prune_to_collapse(kids, mode, prune);
            poisson_evolve(survivor, te, to, p, mode, opt, step_rng, cache, out);
            return;
        }
        for (const auto& kid : kids) poisson_evolve(kid, te, to, p, mode, opt, step_rng, cache, out);
        return;
    }
}

}  // namespace

Ensemble evolve_ensemble_step(const Ensemble& e, const PhysicalParams& p, const StepOptions& opt,
                              RandomStream& rng) {
    check_options(opt);
    const double t0 = e.time();
    const double t1 = t0 + p.tau;
    const Mode mode = e.mode();
    const auto parents = e.branches();
    thread_local KernelCache cache;

    if (opt.timing == Timing::poisson) {
        std::vector<Branch> out;
        for (const auto& b : parents) poisson_evolve(b, t0, t1, p, mode, opt, rng, cache, out);
        if (mode == Mode::collapse) {
            Branch only = out.at(0);
            only.weight = 1.0;
            return Ensemble(mode, t1, {only});
        }
        std::uint64_t total = 0;
        if (mode == Mode::count) {
            for (const auto& b : out) {
                if (total > std::numeric_limits<std::uint64_t>::max() - b.multiplicity) {
                    throw std::overflow_error("count mode: total count overflows 64 bits");
                }
                total += b.multiplicity;
            }
        } else {
            double sum = 0.0;
            for (const auto& b : out) sum += b.weight;
            for (auto& b : out) b.weight /= sum;
        }
        return cap_resample(Ensemble(mode, t1, std::move(out)), opt.max_branches, rng);
    }

    // Deterministic timing: every branch decoheres once at t1.
    std::vector<Branch> spread(parents.begin(), parents.end());
    for (std::size_t i = 0; i < spread.size(); ++i) {
        spread[i].packet = advance(parents[i].packet, p.tau, p);
        offset_variance_of(spread[i], p);
    }

    if (mode == Mode::collapse) {
        const Branch& b = spread.at(0);
        auto kids = decohere_branch(b, p, mode, t1, opt, cache);
        RandomStream prune = rng.substream(lineage_key(b.tag));
        return Ensemble(mode, t1, {prune_to_collapse(kids, mode, prune)});
    }

    // One kernel per distinct (lattice phase, offset variance).
    std::vector<OffspringKernel> store;
    std::map<std::pair<std::int64_t, double>, std::size_t> store_index;
    std::vector<std::size_t> kernel_of(spread.size());
    for (std::size_t i = 0; i < spread.size(); ++i) {
        const double c = spread[i].packet.center;
        const double ov = spread[i].packet.variance - p.w * p.w;
        const double u = c / p.w + 0.5;
        const auto phase = static_cast<std::int64_t>(std::llround((u - std::floor(u)) * 0x1.0p40));
        const auto [it, fresh] = store_index.try_emplace({phase, ov}, store.size());
        if (fresh) store.push_back(offspring_kernel(c, ov, p, opt.discretization));
        kernel_of[i] = it->second;
    }
    auto child_bin = [&](std::size_t i, std::size_t j) {
        return lattice_index(spread[i].packet.center, p.w) + store[kernel_of[i]].offsets[j];
    };

    std::vector<std::vector<double>> count_tables;
    std::vector<SamplingGroup> groups(spread.size());
    std::size_t candidates = 0;
    std::uint64_t total_count = 0;
    if (mode == Mode::count) {
        count_tables.resize(spread.size());
        for (std::size_t i = 0; i < spread.size(); ++i) {
            const auto counts = apportion_counts(
                store[kernel_of[i]].weights, checked_product(spread[i].multiplicity, opt.fanout));
            auto& tab = count_tables[i];
            tab.resize(counts.size());
            for (std::size_t j = 0; j < counts.size(); ++j) {
                tab[j] = static_cast<double>(counts[j]);
                if (counts[j] > 0) ++candidates;
                if (total_count > std::numeric_limits<std::uint64_t>::max() - counts[j]) {
                    throw std::overflow_error("count mode: total count overflows 64 bits");
                }
                total_count += counts[j];
            }
            groups[i] = {1.0, tab};
        }
    } else {
        for (std::size_t i = 0; i < spread.size(); ++i) {
            groups[i] = {spread[i].weight, store[kernel_of[i]].weights};
            candidates += store[kernel_of[i]].weights.size();
        }
    }

    std::vector<Branch> kept;
    std::vector<double> ht;
    if (candidates <= opt.max_branches) {
        kept.reserve(candidates);
        ht.reserve(candidates);
        for (std::size_t i = 0; i < spread.size(); ++i) {
            for (std::size_t j = 0; j < groups[i].members.size(); ++j) {
                const double m = groups[i].scale * groups[i].members[j];
                if (m <= 0.0) continue;
                kept.push_back(make_child(spread[i], child_bin(i, j), j, t1, p, opt.walls));
                ht.push_back(m);
            }
        }
    } else {
        const auto picked = select_proportional(groups, opt.max_branches, rng);
        kept.reserve(picked.size());
        ht.reserve(picked.size());
        for (const auto& inc : picked) {
            const std::size_t g = inc.group;
            const double m = groups[g].scale * groups[g].members[inc.member];
            kept.push_back(make_child(spread[g], child_bin(g, inc.member), inc.member, t1, p, opt.walls));
            ht.push_back(m / inc.probability);
        }
    }
    return finish(mode, t1, std::move(kept), std::move(ht), total_count);
}

TagReport verify_tag_uniqueness(const Ensemble& e) {
    const auto branches = e.branches();
    std::vector<std::size_t> order(branches.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& ta = branches[a].tag;
        const auto& tb = branches[b].tag;
        if (ta.digest() != tb.digest()) return ta.digest() < tb.digest();
        if (ta.depth() != tb.depth()) return ta.depth() < tb.depth();
        return a < b;
    });
    TagReport report;
    for (std::size_t k = 1; k < order.size(); ++k) {
        const auto& a = branches[order[k - 1]];
        const auto& b = branches[order[k]];
        if (a.tag == b.tag) {
            report.unique = false;
            report.first = std::min(order[k - 1], order[k]);
            report.second = std::max(order[k - 1], order[k]);
            report.lineage = a.tag.to_string();
            return report;
        }
    }
    return report;
}

}  // namespace decoh
