#include "decoh/statistics.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace decoh {

namespace {

void require_nonempty(const Ensemble& e, const char* what) {
    if (e.empty()) throw std::domain_error(std::string(what) + ": empty ensemble");
}

struct PairHash {
    std::size_t operator()(const std::pair<double, double>& k) const {
        const auto a = std::hash<double>{}(k.first);
        const auto b = std::hash<double>{}(k.second);
        return a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
    }
};

// Adds the folded mass of N(c, v) to the bins of [0, L].
void add_component(std::vector<double>& h, double c, double v, double mass, double L) {
    const std::size_t k = h.size();
    const double width = L / static_cast<double>(k);
    const double sigma = std::sqrt(v);
    const double reach = (kTruncationSigmas + 2.0) * sigma;
    const double period = 2.0 * L;
    const auto n_lo = static_cast<long>(std::floor((-reach - L) / period)) - 1;
    const auto n_hi = static_cast<long>(std::ceil((L + reach + L) / period)) + 1;
    for (long n = n_lo; n <= n_hi; ++n) {
        for (const double mu : {c + period * static_cast<double>(n), -c + period * static_cast<double>(n)}) {
            if (mu + reach < 0.0 || mu - reach > L) continue;
            const double lo = std::max(0.0, mu - reach);
            const double hi = std::min(L, mu + reach);
            const auto j0 = static_cast<std::size_t>(std::clamp(std::floor(lo / width), 0.0, double(k - 1)));
            const auto j1 = static_cast<std::size_t>(std::clamp(std::floor(hi / width), 0.0, double(k - 1)));
            for (std::size_t j = j0; j <= j1; ++j) {
                const double a = static_cast<double>(j) * width;
                const double b = j + 1 == k ? L : static_cast<double>(j + 1) * width;
                h[j] += mass * gaussian_mass(a, b, mu, sigma);
            }
        }
    }
}

}  // namespace

double ensemble_mean_position(const Ensemble& e) {
    require_nonempty(e, "ensemble_mean_position");
    double s0 = 0.0;
    double s1 = 0.0;
    for (const auto& b : e.branches()) {
        const double m = e.mass(b);
        s0 += m;
        s1 += m * b.packet.center;
    }
    return s1 / s0;
}

double ensemble_position_variance(const Ensemble& e) {
    require_nonempty(e, "ensemble_position_variance");
    const double mean = ensemble_mean_position(e);
    double s0 = 0.0;
    double s2 = 0.0;
    for (const auto& b : e.branches()) {
        const double m = e.mass(b);
        const double d = b.packet.center - mean;
        s0 += m;
        s2 += m * (d * d + b.packet.variance);
    }
    return s2 / s0;
}

DiffusionEstimate fit_diffusion(std::span<const VarianceSample> s) {
    if (s.size() < 3) throw std::domain_error("fit_diffusion: need at least 3 samples");
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (!(s[i].t > s[i - 1].t)) {
            throw std::domain_error("fit_diffusion: times must be strictly increasing");
        }
    }
    const double n = static_cast<double>(s.size());
    double mt = 0.0;
    double mv = 0.0;
    for (const auto& x : s) {
        mt += x.t;
        mv += x.var;
    }
    mt /= n;
    mv /= n;
    double stt = 0.0;
    double stv = 0.0;
    for (const auto& x : s) {
        stt += (x.t - mt) * (x.t - mt);
        stv += (x.t - mt) * (x.var - mv);
    }
    if (!(stt > 0.0)) throw std::domain_error("fit_diffusion: degenerate time span");
    const double slope = stv / stt;
    const double c = mv - slope * mt;
    double rss = 0.0;
    for (const auto& x : s) {
        const double r = x.var - (slope * x.t + c);
        rss += r * r;
    }
    const double se_slope = std::sqrt(rss / (n - 2.0) / stt);
    return {0.5 * slope, 0.5 * se_slope, c};
}

std::vector<double> position_histogram(const Ensemble& e, std::size_t k, const PhysicalParams& p) {
    if (k < 2) throw std::invalid_argument("position_histogram: bins must be >= 2");
    if (p.L / static_cast<double>(k) < p.w) {
        throw std::invalid_argument("position_histogram: bin width L/k = " +
                                    std::to_string(p.L / static_cast<double>(k)) +
                                    " is finer than w = " + std::to_string(p.w));
    }
    require_nonempty(e, "position_histogram");

    // Aggregate identical components; lattice-resident fresh packets use a
    // direct index, everything else a hash map.
    const double h = p.w;
    const double fresh = p.w * p.w;
    const auto n_lattice = static_cast<std::size_t>(std::floor(p.L / h)) + 1;
    std::vector<double> lattice(n_lattice, 0.0);
    std::unordered_map<std::pair<double, double>, double, PairHash> other;
    double total = 0.0;
    for (const auto& b : e.branches()) {
        const double m = e.mass(b);
        total += m;
        const double c = b.packet.center;
        if (b.packet.variance == fresh && c >= 0.0 && c <= p.L) {
            const double idx = std::round(c / h);
            if (static_cast<double>(idx) * h == c && idx < static_cast<double>(n_lattice)) {
                lattice[static_cast<std::size_t>(idx)] += m;
                continue;
            }
        }
        other[{c, b.packet.variance}] += m;
    }

    std::vector<double> hist(k, 0.0);
    for (std::size_t i = 0; i < n_lattice; ++i) {
        if (lattice[i] > 0.0) add_component(hist, static_cast<double>(i) * h, fresh, lattice[i] / total, p.L);
    }
    // deterministic order for the map entries
    std::vector<std::pair<std::pair<double, double>, double>> rest(other.begin(), other.end());
    std::sort(rest.begin(), rest.end());
    for (const auto& [key, m] : rest) add_component(hist, key.first, key.second, m / total, p.L);
    const double sum = std::accumulate(hist.begin(), hist.end(), 0.0);
    for (double& x : hist) x /= sum;
    return hist;
}

double tv_to_uniform(std::span<const double> h) {
    const double u = 1.0 / static_cast<double>(h.size());
    double s = 0.0;
    for (double x : h) s += std::abs(x - u);
    return 0.5 * s;
}

double coarse_entropy(std::span<const double> h) {
    double s = 0.0;
    for (double x : h) {
        if (x > 0.0) s -= x * std::log(x);
    }
    return s;
}

EquilibrationReport equilibration_report(std::span<const double> h) {
    return {tv_to_uniform(h), coarse_entropy(h), h.size()};
}

ChiSquareResult chi_square_frequencies(std::span<const double> observed,
                                       std::span<const double> expected, double alpha) {
    if (observed.size() != expected.size()) {
        throw std::invalid_argument("chi_square: observed and expected differ in length");
    }
    if (observed.size() < 2) throw std::invalid_argument("chi_square: need at least two cells");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("chi_square: alpha in (0, 1)");
    const double psum = std::accumulate(expected.begin(), expected.end(), 0.0);
    if (std::abs(psum - 1.0) > 1e-9) {
        throw std::invalid_argument("chi_square: expected probabilities must sum to 1");
    }
    const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double np = n * expected[i];
        if (!(np >= 5.0)) {
            throw std::invalid_argument("chi_square: expected count " + std::to_string(np) +
                                        " < 5 in cell " + std::to_string(i));
        }
        const double d = observed[i] - np;
        stat += d * d / np;
    }
    ChiSquareResult r;
    r.statistic = stat;
    r.dof = observed.size() - 1;
    const boost::math::chi_squared dist(static_cast<double>(r.dof));
    r.threshold = boost::math::quantile(boost::math::complement(dist, alpha));
    r.p_value = boost::math::cdf(boost::math::complement(dist, stat));
    r.pass = stat < r.threshold;
    return r;
}

ChiSquareResult chi_square_pooled(std::span<const double> observed,
                                  std::span<const double> expected, double alpha) {
    if (observed.size() != expected.size()) {
        throw std::invalid_argument("chi_square: observed and expected differ in length");
    }
    const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
    std::vector<double> o(observed.begin(), observed.end());
    std::vector<double> e(expected.begin(), expected.end());
    // merge small cells into their inward neighbour, from both ends
    while (o.size() > 1 && n * e.front() < 5.0) {
        o[1] += o[0];
        e[1] += e[0];
        o.erase(o.begin());
        e.erase(e.begin());
    }
    while (o.size() > 1 && n * e.back() < 5.0) {
        o[o.size() - 2] += o.back();
        e[e.size() - 2] += e.back();
        o.pop_back();
        e.pop_back();
    }
    for (std::size_t i = 1; i + 1 < o.size();) {
        if (n * e[i] < 5.0) {
            o[i + 1] += o[i];
            e[i + 1] += e[i];
            o.erase(o.begin() + static_cast<std::ptrdiff_t>(i));
            e.erase(e.begin() + static_cast<std::ptrdiff_t>(i));
        } else {
            ++i;
        }
    }
    return chi_square_frequencies(o, e, alpha);
}

double observable_value(const Branch& b, Observable o, const PhysicalParams& p) {
    if (o == Observable::position_mean) return b.packet.center;
    const double d = b.packet.center - 0.5 * p.L;
    return d * d + b.packet.variance;
}

ExpectationComparison expectation_compare(std::span<const Ensemble> collapse_runs,
                                          const Ensemble& reference, Observable o,
                                          const PhysicalParams& p) {
    if (collapse_runs.size() < 100) {
        throw std::domain_error("expectation_compare: need at least 100 trajectories");
    }
    require_nonempty(reference, "expectation_compare");
    const double t = reference.time();
    const double tol = 1e-9 * std::max(1.0, std::abs(t));
    double s1 = 0.0;
    double s2 = 0.0;
    for (const auto& run : collapse_runs) {
        if (std::abs(run.time() - t) > tol) {
            throw std::domain_error("expectation_compare: trajectory time " +
                                    std::to_string(run.time()) + " differs from reference " +
                                    std::to_string(t));
        }
        require_nonempty(run, "expectation_compare");
        const double v = observable_value(run.branches()[0], o, p);
        s1 += v;
        s2 += v * v;
    }
    const double m = static_cast<double>(collapse_runs.size());
    const double mean = s1 / m;
    const double var = std::max(0.0, (s2 - m * mean * mean) / (m - 1.0));

    double r0 = 0.0;
    double r1 = 0.0;
    for (const auto& b : reference.branches()) {
        const double w = reference.mass(b);
        r0 += w;
        r1 += w * observable_value(b, o, p);
    }
    const double ref = r1 / r0;
    double r2 = 0.0;
    for (const auto& b : reference.branches()) {
        const double d = observable_value(b, o, p) - ref;
        r2 += reference.mass(b) * d * d;
    }
    const double ref_var = r2 / r0 / reference.effective_size();

    ExpectationComparison out;
    out.trajectory_mean = mean;
    out.reference = ref;
    out.trajectories = collapse_runs.size();
    out.stderr_total = std::sqrt(var / m + ref_var);
    out.z = out.stderr_total > 0.0 ? (mean - ref) / out.stderr_total
                                   : (mean == ref ? 0.0 : std::copysign(INFINITY, mean - ref));
    return out;
}

double kolmogorov_q(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-17) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> x, std::span<const double> x_weights,
                       std::span<const double> y, double alpha) {
    if (x.empty() || y.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    if (x.size() != x_weights.size()) {
        throw std::invalid_argument("ks_two_sample: weights and sample differ in length");
    }
    std::vector<std::size_t> ix(x.size());
    std::iota(ix.begin(), ix.end(), std::size_t{0});
    std::sort(ix.begin(), ix.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ys(y.begin(), y.end());
    std::sort(ys.begin(), ys.end());

    double wsum = 0.0;
    double w2 = 0.0;
    for (double w : x_weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("ks_two_sample: negative weight");
        wsum += w;
        w2 += w * w;
    }
    const double ny = static_cast<double>(ys.size());
    double fx = 0.0;
    double d = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < ix.size() || j < ys.size()) {
        const double vx = i < ix.size() ? x[ix[i]] : INFINITY;
        const double vy = j < ys.size() ? ys[j] : INFINITY;
        const double v = std::min(vx, vy);
        while (i < ix.size() && x[ix[i]] == v) fx += x_weights[ix[i++]] / wsum;
        while (j < ys.size() && ys[j] == v) ++j;
        d = std::max(d, std::abs(fx - static_cast<double>(j) / ny));
    }
    KsResult r;
    r.statistic = d;
    const double n1 = wsum * wsum / w2;
    r.n_effective = n1 * ny / (n1 + ny);
    const double sq = std::sqrt(r.n_effective);
    r.p_value = kolmogorov_q((sq + 0.12 + 0.11 / sq) * d);
    r.pass = r.p_value >= alpha;
    return r;
}

}  // namespace decoh
