#include "decoh/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "decoh/branching.hpp"
#include "decoh/density_oracle.hpp"
#include "decoh/statistics.hpp"

namespace decoh {

bool RunSummary::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

double RunSummary::metric(std::string_view name) const {
    for (const auto& [k, v] : metrics) {
        if (k == name) return v;
    }
    throw std::out_of_range("no metric " + std::string(name));
}

const Check& RunSummary::check(std::string_view name) const {
    for (const auto& c : checks) {
        if (c.name == name) return c;
    }
    throw std::out_of_range("no check " + std::string(name));
}

bool RunSummary::has_check(std::string_view name) const {
    return std::any_of(checks.begin(), checks.end(), [&](const Check& c) { return c.name == name; });
}

namespace {

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

class Recorder {
public:
    explicit Recorder(RunSummary& s) : s_(s) {}
    void metric(std::string name, double v) { s_.metrics.emplace_back(std::move(name), v); }
    void check(std::string name, bool pass, std::string detail) {
        s_.checks.push_back({std::move(name), pass, std::move(detail)});
    }

private:
    RunSummary& s_;
};

RandomStream step_stream(const RandomStream& run, std::uint64_t step) {
    return run.substream(0x5e0000000000ULL + step);
}

SeriesRow ensemble_row(const Ensemble& e, const PhysicalParams& p, std::size_t bins) {
    SeriesRow r;
    r.t = e.time();
    r.n_branches = static_cast<double>(e.size());
    r.n_effective = e.effective_size();
    r.mean_x = ensemble_mean_position(e);
    r.var_x = ensemble_position_variance(e);
    const auto h = position_histogram(e, bins, p);
    r.coarse_entropy_nats = coarse_entropy(h);
    r.tv_uniform = tv_to_uniform(h);
    return r;
}

StepOptions options_for(const RunConfig& c, bool walls) {
    StepOptions o;
    o.fanout = c.fanout;
    o.max_branches = c.max_branches;
    o.timing = c.timing;
    o.walls = walls;
    return o;
}

// ---------------------------------------------------------------- midbox,
// freespread

void run_walk(const RunConfig& c, RunSummary& s, bool walls) {
    Recorder rec(s);
    const auto& p = c.params;
    const RandomStream run(c.seed);
    const StepOptions opt = options_for(c, walls);
    const std::size_t bins = c.bins;
    const double d2 = p.delta_squared();
    const double w2 = p.w * p.w;
    const double D = p.diffusion_constant();

    Ensemble e = Ensemble::midbox(p, c.mode, 1);
    s.series.push_back(ensemble_row(e, p, bins));

    bool conserved = true;
    std::string conserve_detail = c.mode == Mode::count ? "total count x fanout per step"
                                                        : "weights sum to 1";
    std::vector<double> ks_centers;
    std::vector<double> ks_weights;
    const std::uint64_t ks_step = 100;

    for (std::uint64_t k = 1; k <= c.steps; ++k) {
        const std::uint64_t before = e.total_count();
        RandomStream rng = step_stream(run, k);
        e = evolve_ensemble_step(e, p, opt, rng);
        if (c.mode == Mode::count) {
            if (before > std::numeric_limits<std::uint64_t>::max() / c.fanout ||
                e.total_count() != before * c.fanout) {
                conserved = false;
            }
        } else if (std::abs(e.total_mass() - 1.0) > kWeightSumTolerance) {
            conserved = false;
        }
        s.series.push_back(ensemble_row(e, p, bins));
        if (!walls && k == ks_step) {
            // dequantize the lattice with a uniform jitter of one bin
            RandomStream jitter = run.substream(0x717e5ULL);
            for (const auto& b : e.branches()) {
                ks_centers.push_back(b.packet.center + p.w * (jitter.uniform() - 0.5));
                ks_weights.push_back(e.mass(b));
            }
        }
    }

    rec.check(c.mode == Mode::count ? "count_conservation" : "weight_conservation", conserved,
              conserve_detail);
    const auto tags = verify_tag_uniqueness(e);
    rec.check("tag_uniqueness", tags.unique,
              tags.unique ? "no duplicate lineage" : "duplicate lineage " + tags.lineage);

    // Pre-wall window: +/- 6 sigma of the spread stays inside the box.
    auto pre_wall = [&](const SeriesRow& r) {
        return !walls || 6.0 * std::sqrt(w2 + 2.0 * D * r.t) <= 0.5 * p.L;
    };

    if (c.timing == Timing::deterministic) {
        double worst = 0.0;
        std::size_t used = 0;
        for (std::size_t k = 20; k < s.series.size(); ++k) {
            const auto& r = s.series[k];
            if (!pre_wall(r) || r.n_effective < 1e4) continue;
            const double expect = w2 + static_cast<double>(k) * d2;
            worst = std::max(worst, std::abs(r.var_x - expect) / expect);
            ++used;
        }
        if (used > 0) {
            rec.metric("variance_ladder_max_rel_error", worst);
            rec.metric("variance_ladder_steps_checked", static_cast<double>(used));
            rec.check("variance_ladder", worst < 0.05,
                      fmt("max relative error %.4g over steps >= 20 (limit 0.05), %g steps",
                          worst, static_cast<double>(used)));
        }

        std::vector<VarianceSample> window;
        for (const auto& r : s.series) {
            if (pre_wall(r)) window.push_back({r.t, r.var_x, r.n_effective});
        }
        if (window.size() >= 10 && window.back().t - window.front().t >= 50.0 * p.tau) {
            const auto fit = fit_diffusion(window);
            rec.metric("D_estimate", fit.D);
            rec.metric("D_stderr", fit.stderr_D);
            rec.metric("D_intercept", fit.intercept);
            rec.metric("D_target", D);
            const bool ok = fit.D >= 0.9 * D && fit.D <= 1.1 * D;
            rec.check("diffusion_constant", ok,
                      fmt("D = %.6g, target %.6g within 10%%", fit.D, D));
        }
    }

    if (!ks_centers.empty()) {
        RandomStream oracle_rng = run.substream(0x0AC1EULL);
        const auto walkers = classical_random_walk_oracle(p, 100000, ks_step, oracle_rng, false);
        const auto ks = ks_two_sample(ks_centers, ks_weights, walkers, 0.01);
        rec.metric("ks_statistic", ks.statistic);
        rec.metric("ks_p_value", ks.p_value);
        rec.metric("ks_n_effective", ks.n_effective);
        rec.check("ks_oracle_equivalence", ks.pass,
                  fmt("step-100 centers vs random-walk oracle: D = %.4g, p = %.4g (alpha 0.01)",
                      ks.statistic, ks.p_value));
    }

    if (walls) {
        // entropy never drops by more than the sampling bound between steps
        double worst_drop = 0.0;
        bool mono = true;
        for (std::size_t k = 1; k < s.series.size(); ++k) {
            const double n_eff = std::min(s.series[k].n_effective, s.series[k - 1].n_effective);
            const double bound =
                3.0 * std::sqrt((static_cast<double>(bins) - 1.0) / (2.0 * n_eff));
            const double drop = s.series[k - 1].coarse_entropy_nats - s.series[k].coarse_entropy_nats;
            worst_drop = std::max(worst_drop, drop);
            if (drop > bound) mono = false;
        }
        rec.metric("entropy_max_drop", worst_drop);
        rec.check("entropy_monotone", mono,
                  fmt("largest step-to-step decrease %.4g nats", worst_drop));

        const double t_eq = 10.0 * p.L * p.L / D;
        rec.metric("t_equilibration", t_eq);
        double worst_tv = 0.0;
        std::size_t checkpoints = 0;
        for (std::size_t k = 0; k < s.series.size(); k += kCheckpointSteps) {
            if (s.series[k].t + 1e-9 * t_eq < t_eq) continue;
            worst_tv = std::max(worst_tv, s.series[k].tv_uniform);
            ++checkpoints;
        }
        if (checkpoints > 0) {
            rec.metric("equilibration_checkpoints", static_cast<double>(checkpoints));
            rec.metric("tv_max_after_equilibration", worst_tv);
            rec.check("equilibration", worst_tv < 0.05,
                      fmt("max TV %.4g over %g checkpoints at t >= 10 L^2/D (limit 0.05)",
                          worst_tv, static_cast<double>(checkpoints)));
            const double final_s = s.series.back().coarse_entropy_nats;
            const double ln_k = std::log(static_cast<double>(bins));
            rec.metric("entropy_final", final_s);
            rec.check("entropy_final", std::abs(final_s - ln_k) <= 0.01 * ln_k,
                      fmt("final %.6g nats vs ln k = %.6g (1%%)", final_s, ln_k));
        }
    }
    rec.metric("tv_final", s.series.back().tv_uniform);
    rec.metric("entropy_last", s.series.back().coarse_entropy_nats);
}

// ---------------------------------------------------------------- born_test

std::vector<double> leaf_counts(const std::vector<Branch>& leaves,
                                const std::vector<BinWeight>& born, double h) {
    std::vector<double> counts(born.size(), 0.0);
    for (const auto& b : leaves) {
        const auto idx = static_cast<std::int64_t>(std::llround(b.packet.center / h));
        bool placed = false;
        for (std::size_t j = 0; j < born.size(); ++j) {
            if (born[j].index == idx) {
                counts[j] += static_cast<double>(b.multiplicity);
                placed = true;
            }
        }
        if (!placed) throw std::runtime_error("born_test: leaf outside the Born bins");
    }
    return counts;
}

void run_born(const RunConfig& c, RunSummary& s) {
    Recorder rec(s);
    const auto& p = c.params;
    const double w2 = p.w * p.w;
    const double sigma = 2.0 * p.w / 3.0;
    const std::uint64_t target = 10000;
    const std::uint64_t mult = (target + c.fanout - 1) / c.fanout;

    Branch parent;
    parent.packet.center = 0.5 * p.L + 0.5 * p.w;  // on a bin edge: 8 bins inside 6 sigma
    parent.packet.rest_variance = w2;
    parent.packet.age = sigma * p.m * p.w / p.hbar;
    parent.packet.variance = spread_variance(w2, parent.packet.age, p);
    parent.multiplicity = mult;
    const Ensemble start(Mode::count, 0.0, {parent});
    s.series.push_back(ensemble_row(start, p, c.bins));

    StepOptions opt = options_for(c, true);
    opt.discretization = Discretization::direct;
    const double t_event = p.tau;
    const auto leaves = decohere_branch(parent, p, Mode::count, t_event, opt);
    const Ensemble after(Mode::count, t_event, leaves);
    s.series.push_back(ensemble_row(after, p, c.bins));

    const auto born = bin_weights(parent.packet.center, parent.packet.variance - w2, p.w);
    const auto counts = leaf_counts(leaves, born, p.w);
    const double n = static_cast<double>(after.total_count());
    double worst = 0.0;
    for (std::size_t j = 0; j < born.size(); ++j) {
        worst = std::max(worst, std::abs(counts[j] / n - born[j].weight));
    }
    rec.metric("born_bins", static_cast<double>(born.size()));
    rec.metric("born_total_count", n);
    rec.metric("born_max_fraction_error", worst);
    rec.check("born_total", after.total_count() == mult * c.fanout,
              fmt("leaf total %.0f = multiplicity x fanout", n));
    rec.check("born_apportionment_bound", worst < 1.0 / n,
              fmt("max |count/N - p| = %.3g < 1/N = %.3g", worst, 1.0 / n));

    std::vector<double> expected(born.size());
    for (std::size_t j = 0; j < born.size(); ++j) expected[j] = born[j].weight;
    const auto chi = chi_square_pooled(counts, expected, 0.001);
    rec.metric("born_chi_square", chi.statistic);
    rec.metric("born_chi_square_dof", static_cast<double>(chi.dof));
    rec.check("born_chi_square", chi.pass,
              fmt("statistic %.4g < threshold %.4g (alpha 0.001)", chi.statistic, chi.threshold));

    // Poisson-timed event: Born weights at the realized event time.
    RandomStream rng = RandomStream(c.seed).substream(0xB0A7ULL);
    const auto timed = decohere_after_wait(parent, p, Mode::count, 0.0, opt, rng);
    const auto at = advance(parent.packet, timed.event_time, p);
    const auto born_t = bin_weights(parent.packet.center, at.variance - w2, p.w);
    const auto counts_t = leaf_counts(timed.offspring, born_t, p.w);
    std::vector<double> expected_t(born_t.size());
    for (std::size_t j = 0; j < born_t.size(); ++j) expected_t[j] = born_t[j].weight;
    const auto chi_t = chi_square_pooled(counts_t, expected_t, 0.001);
    rec.metric("born_poisson_event_time", timed.event_time);
    rec.metric("born_poisson_bins", static_cast<double>(born_t.size()));
    rec.metric("born_poisson_chi_square", chi_t.statistic);
    rec.check("born_poisson_chi_square", chi_t.pass,
              fmt("statistic %.4g < threshold %.4g (alpha 0.001)", chi_t.statistic,
                  chi_t.threshold));
}

// ---------------------------------------------------------------- peres_test

void run_peres(const RunConfig& c, RunSummary& s) {
    Recorder rec(s);
    const auto& p = c.params;
    const std::size_t n = default_grid_size(p);
    const auto setup = peres_setup(p, n);
    const BoxHamiltonian h(setup.grid, p);
    const auto left = unitary_step(setup.left, setup.overlap_time, h);
    const auto right = unitary_step(setup.right, setup.overlap_time, h);
    const std::complex<double> amp(1.0 / std::numbers::sqrt2, 0.0);

    TaggedGridState coherent{{left, right}, {amp, amp}, {TagPath{}, TagPath{}}};
    TaggedGridState tagged{{left, right},
                           {amp, amp},
                           {TagPath{}.extended(0.0, 0), TagPath{}.extended(0.0, 1)}};

    const auto region = setup.fringe_region;
    const double vis_coherent = interference_visibility(coherent.density(), setup.grid, region);
    const double vis_tagged = interference_visibility(tagged.density(), setup.grid, region);
    const double fringe_coherent = fringe_content(coherent, region);
    const double fringe_tagged = fringe_content(tagged, region);
    rec.metric("grid_points", static_cast<double>(n));
    rec.metric("overlap_time", setup.overlap_time);
    rec.metric("visibility_coherent", vis_coherent);
    rec.metric("visibility_tagged_envelope", vis_tagged);
    rec.metric("fringe_content_coherent", fringe_coherent);
    rec.metric("fringe_content_tagged", fringe_tagged);
    rec.check("coherent_visibility", vis_coherent > 0.5,
              fmt("coherent visibility %.4g (needs > 0.5)", vis_coherent));
    rec.check("tagged_fringes_absent", fringe_tagged < 1e-12,
              fmt("tagged fringe content %.3g of envelope (needs < 1e-12)", fringe_tagged));
    rec.check("fringe_separation", fringe_coherent >= 1e6 * fringe_tagged,
              fmt("coherent %.4g vs tagged %.3g (factor >= 1e6)", fringe_coherent,
                  fringe_tagged));

    // Random steps: the tag invariant must survive arbitrary sequences.
    StepOptions opt = options_for(c, true);
    opt.timing = Timing::poisson;
    opt.max_branches = std::min<std::size_t>(c.max_branches, kPeresCap);
    const RandomStream run(c.seed);
    Ensemble e = Ensemble::midbox(p, Mode::weighted, 1);
    s.series.push_back(ensemble_row(e, p, c.bins));
    bool unique = true;
    std::string first_dup;
    for (std::uint64_t k = 1; k <= c.steps; ++k) {
        RandomStream rng = step_stream(run, k);
        e = evolve_ensemble_step(e, p, opt, rng);
        const auto rep = verify_tag_uniqueness(e);
        if (!rep.unique && unique) {
            unique = false;
            first_dup = rep.lineage;
        }
        s.series.push_back(ensemble_row(e, p, c.bins));
    }
    rec.metric("random_steps", static_cast<double>(c.steps));
    rec.check("tag_uniqueness", unique,
              unique ? fmt("unique after %.0f random steps", static_cast<double>(c.steps))
                     : "duplicate lineage " + first_dup);
}

// ---------------------------------------------------------------- collapse

Ensemble pooled(const std::vector<Ensemble>& runs, double t) {
    std::vector<Branch> all;
    all.reserve(runs.size());
    const double w = 1.0 / static_cast<double>(runs.size());
    for (const auto& r : runs) {
        Branch b = r.branches()[0];
        b.weight = w;
        all.push_back(b);
    }
    return Ensemble(Mode::weighted, t, std::move(all));
}

void run_collapse(const RunConfig& c, RunSummary& s) {
    Recorder rec(s);
    const auto& p = c.params;
    const RandomStream run(c.seed);
    const std::size_t m = kCollapseTrajectories;
    const StepOptions opt = options_for(c, true);

    std::vector<Ensemble> traj(m, Ensemble::midbox(p, Mode::collapse, 1));
    std::vector<RandomStream> streams;
    streams.reserve(m);
    for (std::size_t i = 0; i < m; ++i) streams.push_back(run.substream(0xC0000000ULL + i));
    std::vector<Ensemble> biased(m, Ensemble::midbox(p, Mode::collapse, 1));
    Ensemble ref = Ensemble::midbox(p, Mode::weighted, 1);

    s.series.push_back(ensemble_row(pooled(traj, 0.0), p, c.bins));
    for (std::uint64_t k = 1; k <= c.steps; ++k) {
        for (std::size_t i = 0; i < m; ++i) {
            RandomStream rng = streams[i].substream(k);
            traj[i] = evolve_ensemble_step(traj[i], p, opt, rng);
            // fixture: always keep the leftmost offspring
            Branch b = biased[i].branches()[0];
            b.packet = advance(b.packet, p.tau, p);
            const auto kids = decohere_branch(b, p, Mode::collapse, biased[i].time() + p.tau, opt);
            Branch left = *std::min_element(kids.begin(), kids.end(), [](const Branch& a, const Branch& z) {
                return a.packet.center < z.packet.center;
            });
            left.weight = 1.0;
            biased[i] = Ensemble(Mode::collapse, biased[i].time() + p.tau, {left});
        }
        RandomStream rng = step_stream(run, k);
        ref = evolve_ensemble_step(ref, p, opt, rng);
        s.series.push_back(ensemble_row(pooled(traj, ref.time()), p, c.bins));
    }

    const auto zm = expectation_compare(traj, ref, Observable::position_mean, p);
    const auto zv = expectation_compare(traj, ref, Observable::position_variance, p);
    const auto zb = expectation_compare(biased, ref, Observable::position_mean, p);
    rec.metric("trajectories", static_cast<double>(m));
    rec.metric("reference_branches", static_cast<double>(ref.size()));
    rec.metric("reference_n_effective", ref.effective_size());
    rec.metric("z_position_mean", zm.z);
    rec.metric("z_position_variance", zv.z);
    rec.metric("z_biased_fixture", zb.z);
    rec.metric("trajectory_mean_position", zm.trajectory_mean);
    rec.metric("reference_mean_position", zm.reference);
    rec.metric("trajectory_mean_sq_displacement", zv.trajectory_mean);
    rec.metric("reference_mean_sq_displacement", zv.reference);
    rec.check("pruning_invariance_mean", std::abs(zm.z) < 3.0, fmt("|z| = %.4g < 3", std::abs(zm.z)));
    rec.check("pruning_invariance_variance", std::abs(zv.z) < 3.0,
              fmt("|z| = %.4g < 3", std::abs(zv.z)));
    rec.check("biased_fixture_rejected", std::abs(zb.z) > 3.0,
              fmt("always-leftmost pruning |z| = %.4g > 3", std::abs(zb.z)));
}

// ---------------------------------------------------------------- liouville

SeriesRow grid_row(double t, const GridDensityMatrix& rho, double entropy, std::size_t bins) {
    SeriesRow r;
    r.t = t;
    r.n_branches = static_cast<double>(rho.grid.n);
    r.n_effective = std::exp(entropy);
    const auto dens = position_density(rho);
    double s0 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    std::vector<double> hist(bins, 0.0);
    const double width = rho.grid.L / static_cast<double>(bins);
    for (std::size_t i = 0; i < dens.size(); ++i) {
        const double x = rho.grid.x(i);
        const double m = dens[i] * rho.grid.dx;
        s0 += m;
        s1 += m * x;
        s2 += m * x * x;
        const auto j = std::min(bins - 1, static_cast<std::size_t>(x / width));
        hist[j] += m;
    }
    for (double& v : hist) v /= s0;
    r.mean_x = s1 / s0;
    r.var_x = s2 / s0 - r.mean_x * r.mean_x;
    r.coarse_entropy_nats = coarse_entropy(hist);
    r.tv_uniform = tv_to_uniform(hist);
    return r;
}

void run_liouville(const RunConfig& c, RunSummary& s) {
    Recorder rec(s);
    const auto& p = c.params;
    const std::size_t n = default_grid_size(p);
    const Grid grid = make_grid(n, p);
    const BoxHamiltonian h(grid, p);
    const RandomStream run(c.seed);
    rec.metric("grid_points", static_cast<double>(n));

    // 20 random mixed states, `steps` unitary periods each
    RandomStream state_rng = run.substream(0x11005ULL);
    std::vector<GridDensityMatrix> states;
    for (int i = 0; i < 20; ++i) states.push_back(random_density_matrix(grid, n, state_rng));

    // series: state 0, step by step
    {
        GridDensityMatrix rho = states[0];
        const double s0 = von_neumann_entropy(rho);
        s.series.push_back(grid_row(0.0, rho, s0, c.bins));
        const Eigen::MatrixXcd u = h.propagator(p.tau);
        for (std::uint64_t k = 1; k <= c.steps; ++k) {
            rho.rho = u * rho.rho * u.adjoint();
            s.series.push_back(grid_row(static_cast<double>(k) * p.tau, rho,
                                        von_neumann_entropy(rho), c.bins));
        }
    }

    double worst = 0.0;
    for (const auto& rho : states) {
        const double before = von_neumann_entropy(rho);
        const auto out = unitary_evolve(rho, p.tau, c.steps, h);
        worst = std::max(worst, std::abs(von_neumann_entropy(out) - before));
    }
    rec.metric("liouville_max_abs_delta_S", worst);
    rec.check("liouville_conservation", worst < 1e-8,
              fmt("max |dS| = %.3g over 20 states (limit 1e-8)", worst));

    // channel: 100 states with ranks spread over 1..n
    RandomStream chan_rng = run.substream(0xC4A7ULL);
    std::vector<std::pair<double, double>> ent;  // (before, after)
    double worst_trace = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
        const std::size_t rank = 1 + i * (n - 1) / 99;
        const auto rho = random_density_matrix(grid, rank, chan_rng);
        const auto out = grw_localization_channel(rho, p);
        worst_trace = std::max(worst_trace, std::abs(out.trace() - rho.trace()));
        ent.emplace_back(von_neumann_entropy(rho), von_neumann_entropy(out));
    }
    double worst_drop = -INFINITY;
    for (const auto& [b, a] : ent) worst_drop = std::max(worst_drop, b - a);
    std::sort(ent.begin(), ent.end());
    double min_gain = INFINITY;
    for (std::size_t i = 0; i < 20; ++i) min_gain = std::min(min_gain, ent[i].second - ent[i].first);
    rec.metric("channel_max_entropy_drop", worst_drop);
    rec.metric("channel_min_gain_lowest20", min_gain);
    rec.metric("channel_max_trace_error", worst_trace);
    rec.check("channel_monotone", worst_drop <= 1e-10,
              fmt("max S(before) - S(after) = %.3g (limit 1e-10)", worst_drop));
    rec.check("channel_strict_increase", min_gain > 0.01,
              fmt("min gain on the 20 lowest-entropy states %.4g nats (> 0.01)", min_gain));
    rec.check("channel_trace_preserving", worst_trace < 1e-9,
              fmt("max trace change %.3g (limit 1e-9)", worst_trace));

    const auto mixed = maximally_mixed(grid);
    const auto fixed = grw_localization_channel(mixed, p);
    const double dev = (fixed.rho - mixed.rho).cwiseAbs().maxCoeff();
    rec.metric("channel_fixed_point_deviation", dev);
    rec.check("channel_fixed_point", dev < 1e-9,
              fmt("maximally mixed state moves by %.3g elementwise (limit 1e-9)", dev));
}

}  // namespace

std::string summary_json(const RunSummary& s) {
    const auto& c = s.config;
    JsonWriter j;
    j.begin_object();
    j.value("scenario", to_string(c.scenario));
    j.begin_object("config");
    j.value("scenario", to_string(c.scenario));
    j.value("m", c.params.m);
    j.value("w", c.params.w);
    j.value("tau", c.params.tau);
    j.value("hbar", c.params.hbar);
    j.value("L", c.params.L);
    j.value("mode", to_string(c.mode));
    j.value("steps", c.steps);
    j.value("fanout", static_cast<std::uint64_t>(c.fanout));
    j.value("max_branches", c.max_branches);
    j.value("bins", c.bins);
    j.value("seed", c.seed);
    j.value("timing", to_string(c.timing));
    j.value("output_dir", c.output_dir);
    j.end_object();
    j.value("series_file", s.series_path.filename().string());
    j.value("series_rows", static_cast<std::uint64_t>(s.series.size()));
    j.begin_object("metrics");
    for (const auto& [k, v] : s.metrics) j.value(k, v);
    j.end_object();
    j.begin_array("checks");
    for (const auto& ck : s.checks) {
        j.begin_object();
        j.value("name", ck.name);
        j.value("pass", ck.pass);
        j.value("detail", ck.detail);
        j.end_object();
    }
    j.end_array();
    j.value("all_pass", s.all_pass());
    j.end_object();
    return j.str();
}

RunSummary run_scenario(const RunConfig& c, bool write_files) {
    c.validate();
    const auto start = std::chrono::steady_clock::now();
    RunSummary s;
    s.config = c;
    const std::string name(to_string(c.scenario));
    s.series_path = std::filesystem::path(c.output_dir) / (name + ".csv");
    s.summary_path = std::filesystem::path(c.output_dir) / (name + ".summary.json");
    if (write_files) {
        std::error_code ec;
        std::filesystem::create_directories(c.output_dir, ec);
        if (ec || !std::filesystem::is_directory(c.output_dir)) {
            throw std::runtime_error("cannot create output directory " + c.output_dir);
        }
    }

    switch (c.scenario) {
        case Scenario::midbox: run_walk(c, s, true); break;
        case Scenario::freespread: run_walk(c, s, false); break;
        case Scenario::born_test: run_born(c, s); break;
        case Scenario::peres_test: run_peres(c, s); break;
        case Scenario::collapse_compare: run_collapse(c, s); break;
        case Scenario::liouville_check: run_liouville(c, s); break;
    }

    if (write_files) {
        write_atomic(s.series_path, format_csv(s.series));
        write_atomic(s.summary_path, summary_json(s));
    }
    s.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return s;
}

}  // namespace decoh
