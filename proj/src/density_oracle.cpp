#include "decoh/density_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace decoh {

using cd = std::complex<double>;

Grid make_grid(std::size_t n, const PhysicalParams& p) {
    if (n < 32) throw std::invalid_argument("grid: n must be >= 32, got " + std::to_string(n));
    Grid g{n, p.L, p.L / static_cast<double>(n + 1)};
    if (g.dx > p.w / 4.0) {
        throw std::invalid_argument("grid: dx = " + std::to_string(g.dx) +
                                    " does not resolve w (need dx <= w/4)");
    }
    return g;
}

std::size_t default_grid_size(const PhysicalParams& p) {
    std::size_t n = 32;
    while (n < 1024 && p.L / static_cast<double>(n + 1) > p.w / 4.0) n *= 2;
    return n;
}

double GridWavefunction::norm() const { return psi.squaredNorm() * grid.dx; }

void GridWavefunction::validate() const {
    if (std::abs(norm() - 1.0) > 1e-10) {
        throw std::domain_error("wavefunction norm " + std::to_string(norm()) + " != 1");
    }
}

double GridDensityMatrix::trace() const { return rho.trace().real() * grid.dx; }

void GridDensityMatrix::validate() const {
    const double scale = std::max(1.0, rho.cwiseAbs().maxCoeff());
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw std::domain_error("density matrix is not Hermitian");
    }
    if (std::abs(trace() - 1.0) > 1e-10) {
        throw std::domain_error("density matrix trace " + std::to_string(trace()) + " != 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho * grid.dx, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-12) {
        throw std::domain_error("density matrix has a negative eigenvalue");
    }
}

BoxHamiltonian::BoxHamiltonian(const Grid& grid, const PhysicalParams& p)
    : grid_(grid), hbar_(p.hbar) {
    const auto n = static_cast<Eigen::Index>(grid.n);
    const double c = p.hbar * p.hbar / (2.0 * p.m * grid.dx * grid.dx);
    h_ = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        h_(i, i) = 2.0 * c;
        if (i + 1 < n) {
            h_(i, i + 1) = -c;
            h_(i + 1, i) = -c;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h_);
    if (es.info() != Eigen::Success) throw std::runtime_error("Hamiltonian eigensolver failed");
    energies_ = es.eigenvalues();
    modes_ = es.eigenvectors();
}

Eigen::MatrixXcd BoxHamiltonian::propagator(double dt) const {
    Eigen::VectorXcd phase(energies_.size());
    for (Eigen::Index i = 0; i < energies_.size(); ++i) {
        phase(i) = std::exp(cd(0.0, -energies_(i) * dt / hbar_));
    }
    const Eigen::MatrixXcd v = modes_.cast<cd>();
    return v * phase.asDiagonal() * v.transpose();
}

BoxHamiltonian build_box_hamiltonian(std::size_t n, const PhysicalParams& p) {
    return BoxHamiltonian(make_grid(n, p), p);
}

GridDensityMatrix unitary_step(const GridDensityMatrix& rho, double dt, const BoxHamiltonian& h) {
    const Eigen::MatrixXcd u = h.propagator(dt);
    GridDensityMatrix out{u * rho.rho * u.adjoint(), rho.grid};
    return out;
}

GridWavefunction unitary_step(const GridWavefunction& psi, double dt, const BoxHamiltonian& h) {
    return {h.propagator(dt) * psi.psi, psi.grid};
}

GridDensityMatrix unitary_evolve(const GridDensityMatrix& rho, double dt, std::size_t steps,
                                 const BoxHamiltonian& h) {
    const Eigen::MatrixXcd v = h.modes().cast<cd>();
    Eigen::MatrixXcd r = v.transpose() * rho.rho * v.conjugate();
    const auto n = r.rows();
    Eigen::VectorXcd phase(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        phase(i) = std::exp(cd(0.0, -h.energies()(i) * dt / h.hbar()));
    }
    const Eigen::MatrixXcd factor = phase * phase.adjoint();
    for (std::size_t s = 0; s < steps; ++s) r = r.cwiseProduct(factor);
    return {v * r * v.adjoint(), rho.grid};
}

Eigen::MatrixXd grw_channel_factors(const Grid& grid, const PhysicalParams& p) {
    const double alpha = 1.0 / (2.0 * p.w * p.w);
    const double norm = grid.dx * std::sqrt(alpha / std::numbers::pi);
    const auto n = static_cast<Eigen::Index>(grid.n);
    const auto ext = static_cast<long>(std::ceil(10.0 * p.w / grid.dx));
    // K_z(x_i) K_z(x_j) = K^2 at the midpoint times exp(-alpha (x_i-x_j)^2/4);
    // the midpoint sum depends only on i + j.
    std::vector<double> mid(static_cast<std::size_t>(2 * n - 1), 0.0);
    for (Eigen::Index s = 0; s < 2 * n - 1; ++s) {
        const double xm = 0.5 * (grid.x(0) + grid.x(static_cast<std::size_t>(s)));
        double sum = 0.0;
        for (long z = -ext; z < static_cast<long>(grid.n) + ext; ++z) {
            const double d = static_cast<double>(z + 1) * grid.dx - xm;
            sum += std::exp(-alpha * d * d);
        }
        mid[static_cast<std::size_t>(s)] = norm * sum;
    }
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = static_cast<double>(i - j) * grid.dx;
            m(i, j) = mid[static_cast<std::size_t>(i + j)] * std::exp(-0.25 * alpha * d * d);
        }
    }
    return m;
}

GridDensityMatrix grw_localization_channel(const GridDensityMatrix& rho, const PhysicalParams& p) {
    const Eigen::MatrixXd m = grw_channel_factors(rho.grid, p);
    return {rho.rho.cwiseProduct(m.cast<cd>()), rho.grid};
}

double von_neumann_entropy(const GridDensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.rho * rho.grid.dx,
                                                       Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("entropy eigensolver failed");
    double s = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        const double l = es.eigenvalues()(i);
        if (l < -1e-10) {
            throw std::domain_error("von_neumann_entropy: eigenvalue " + std::to_string(l) +
                                    " below -1e-10");
        }
        const double c = std::clamp(l, 0.0, 1.0);
        if (c > 0.0) s -= c * std::log(c);
    }
    return s;
}

GridWavefunction gaussian_wavefunction(const Grid& grid, double center, double sigma, double k0) {
    GridWavefunction out{Eigen::VectorXcd(static_cast<Eigen::Index>(grid.n)), grid};
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double d = grid.x(i) - center;
        out.psi(static_cast<Eigen::Index>(i)) =
            std::exp(-d * d / (4.0 * sigma * sigma)) * std::exp(cd(0.0, k0 * grid.x(i)));
    }
    out.psi /= std::sqrt(out.norm());
    return out;
}

GridWavefunction superpose(const GridWavefunction& a, const GridWavefunction& b) {
    GridWavefunction out{a.psi + b.psi, a.grid};
    out.psi /= std::sqrt(out.norm());
    return out;
}

GridDensityMatrix pure_state(const GridWavefunction& psi) {
    return {psi.psi * psi.psi.adjoint(), psi.grid};
}

GridDensityMatrix maximally_mixed(const Grid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.n);
    return {Eigen::MatrixXcd::Identity(n, n) / (static_cast<double>(grid.n) * grid.dx), grid};
}

GridDensityMatrix random_density_matrix(const Grid& grid, std::size_t rank, RandomStream& rng) {
    if (rank < 1 || rank > grid.n) throw std::invalid_argument("random state: rank out of range");
    const auto n = static_cast<Eigen::Index>(grid.n);
    Eigen::MatrixXcd g(n, static_cast<Eigen::Index>(rank));
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double re = rng.normal();
            const double im = rng.normal();
            g(i, j) = cd(re, im);
        }
    }
    Eigen::MatrixXcd rho = g * g.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    rho /= rho.trace().real() * grid.dx;
    return {rho, grid};
}

std::vector<double> position_density(const GridWavefunction& psi) {
    std::vector<double> out(psi.grid.n);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::norm(psi.psi(static_cast<Eigen::Index>(i)));
    return out;
}

std::vector<double> position_density(const GridDensityMatrix& rho) {
    std::vector<double> out(rho.grid.n);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        out[i] = rho.rho(k, k).real();
    }
    return out;
}

namespace {

std::pair<double, double> moments(const std::vector<double>& n, const Grid& g) {
    double s0 = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    for (std::size_t i = 0; i < n.size(); ++i) {
        s0 += n[i];
        s1 += n[i] * g.x(i);
        s2 += n[i] * g.x(i) * g.x(i);
    }
    const double mean = s1 / s0;
    return {mean, s2 / s0 - mean * mean};
}

}  // namespace

double position_mean(const GridDensityMatrix& rho) {
    return moments(position_density(rho), rho.grid).first;
}

double position_variance(const GridDensityMatrix& rho) {
    return moments(position_density(rho), rho.grid).second;
}

double position_variance(const GridWavefunction& psi) {
    return moments(position_density(psi), psi.grid).second;
}

std::vector<double> TaggedGridState::density() const {
    if (components.empty() || amplitudes.size() != components.size() ||
        tags.size() != components.size()) {
        throw std::invalid_argument("TaggedGridState: components, amplitudes and tags must match");
    }
    const Grid& g = components.front().grid;
    // Components sharing a tag add coherently; distinct tags are orthogonal.
    std::vector<char> done(components.size(), 0);
    std::vector<double> out(g.n, 0.0);
    for (std::size_t a = 0; a < components.size(); ++a) {
        if (done[a]) continue;
        Eigen::VectorXcd sum = amplitudes[a] * components[a].psi;
        for (std::size_t b = a + 1; b < components.size(); ++b) {
            if (!done[b] && tags[b] == tags[a]) {
                sum += amplitudes[b] * components[b].psi;
                done[b] = 1;
            }
        }
        for (std::size_t i = 0; i < g.n; ++i) out[i] += std::norm(sum(static_cast<Eigen::Index>(i)));
    }
    double total = 0.0;
    for (double v : out) total += v * g.dx;
    for (double& v : out) v /= total;
    return out;
}

std::vector<double> TaggedGridState::incoherent_density() const {
    const Grid& g = components.at(0).grid;
    std::vector<double> out(g.n, 0.0);
    for (std::size_t a = 0; a < components.size(); ++a) {
        const double w = std::norm(amplitudes.at(a));
        for (std::size_t i = 0; i < g.n; ++i) {
            out[i] += w * std::norm(components[a].psi(static_cast<Eigen::Index>(i)));
        }
    }
    double total = 0.0;
    for (double v : out) total += v * g.dx;
    for (double& v : out) v /= total;
    return out;
}

namespace {

std::vector<std::size_t> region_points(const Grid& grid, Interval region) {
    if (!(region.lo >= 0.0 && region.hi <= grid.L && region.lo < region.hi)) {
        throw std::domain_error("region must be a non-empty interval inside [0, L]");
    }
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < grid.n; ++i) {
        if (region.contains(grid.x(i))) idx.push_back(i);
    }
    if (idx.empty()) throw std::domain_error("region holds no grid point");
    return idx;
}

}  // namespace

double interference_visibility(std::span<const double> density, const Grid& grid,
                               Interval region) {
    double lo = INFINITY;
    double hi = -INFINITY;
    for (std::size_t i : region_points(grid, region)) {
        lo = std::min(lo, density[i]);
        hi = std::max(hi, density[i]);
    }
    return hi + lo > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
}

double fringe_content(const TaggedGridState& state, Interval region) {
    const auto n = state.density();
    const auto inc = state.incoherent_density();
    double dev = 0.0;
    double env = 0.0;
    for (std::size_t i : region_points(state.components.at(0).grid, region)) {
        dev = std::max(dev, std::abs(n[i] - inc[i]));
        env = std::max(env, inc[i]);
    }
    return env > 0.0 ? dev / env : 0.0;
}

PeresSetup peres_setup(const PhysicalParams& p, std::size_t n) {
    if (p.L < 40.0 * p.w) {
        throw std::invalid_argument("peres_test needs L >= 40 w for two packets 20 w apart");
    }
    PeresSetup s;
    s.grid = make_grid(n, p);
    s.k0 = 2.0 / p.w;
    const double c = 0.5 * p.L;
    s.left = gaussian_wavefunction(s.grid, c - 10.0 * p.w, p.w, s.k0);
    s.right = gaussian_wavefunction(s.grid, c + 10.0 * p.w, p.w, -s.k0);
    s.overlap_time = 10.0 * p.w * p.m / (p.hbar * s.k0);
    s.fringe_region = {c - 2.0 * p.w, c + 2.0 * p.w};
    return s;
}

std::vector<double> classical_random_walk_oracle(const PhysicalParams& p, std::size_t n_walkers,
                                                 std::size_t steps, RandomStream& rng,
                                                 bool walls) {
    if (n_walkers < 1000) throw std::invalid_argument("random walk oracle: need >= 1000 walkers");
    const double delta = std::sqrt(p.delta_squared());
    std::vector<double> x(n_walkers, 0.5 * p.L);
    for (std::size_t s = 0; s < steps; ++s) {
        for (double& v : x) {
            v += delta * rng.normal();
            if (walls) v = reflect_center(v, p.L);
        }
    }
    return x;
}

std::vector<double> reflected_gaussian_bins(double x0, double s2, double L, std::size_t k) {
    if (k < 1 || !(L > 0.0) || !(s2 >= 0.0)) {
        throw std::invalid_argument("reflected_gaussian_bins: bad arguments");
    }
    const double width = L / static_cast<double>(k);
    std::vector<double> out(k, 1.0 / static_cast<double>(k));
    for (int n = 1; n < 100000; ++n) {
        const double q = n * std::numbers::pi / L;
        const double damp = std::exp(-0.5 * q * q * s2);
        if (damp < 1e-18) break;
        const double amp = 2.0 / L * std::cos(q * x0) * damp;
        for (std::size_t j = 0; j < k; ++j) {
            const double a = static_cast<double>(j) * width;
            const double b = a + width;
            out[j] += amp * (std::sin(q * b) - std::sin(q * a)) / q;
        }
    }
    return out;
}

}  // namespace decoh
