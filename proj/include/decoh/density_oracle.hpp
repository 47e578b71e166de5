#pragma once

// Exact small-grid quantum mechanics used as ground truth: the box
// Hamiltonian, unitary propagation, the Gaussian localization channel,
// von Neumann entropy, interference measures and classical references.

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "decoh/model_core.hpp"
#include "decoh/random_stream.hpp"
#include "decoh/tag_path.hpp"

namespace decoh {

/// Interior points x_i = (i + 1) dx of [0, L], dx = L / (n + 1).
struct Grid {
    std::size_t n = 0;
    double L = 0.0;
    double dx = 0.0;

    double x(std::size_t i) const { return static_cast<double>(i + 1) * dx; }
};

/// Throws std::invalid_argument unless n >= 32 and dx <= w/4.
Grid make_grid(std::size_t n, const PhysicalParams& p);

/// Smallest power of two >= 32 with dx <= w/4 (at most 1024).
std::size_t default_grid_size(const PhysicalParams& p);

struct GridWavefunction {
    Eigen::VectorXcd psi;
    Grid grid;

    double norm() const;  ///< sum |psi|^2 dx
    /// Throws std::domain_error unless the norm is 1 within 1e-10.
    void validate() const;
};

struct GridDensityMatrix {
    Eigen::MatrixXcd rho;
    Grid grid;

    double trace() const;  ///< Tr(rho) dx
    /// Hermitian within 1e-12, trace 1 within 1e-10, eigenvalues of rho dx
    /// >= -1e-12; std::domain_error naming the failed property otherwise.
    void validate() const;
};

/// Central-difference -(hbar^2/2m) d^2/dx^2 with Dirichlet walls, with its
/// eigendecomposition.
class BoxHamiltonian {
public:
    BoxHamiltonian(const Grid& grid, const PhysicalParams& p);

    const Grid& grid() const { return grid_; }
    const Eigen::MatrixXd& matrix() const { return h_; }
    const Eigen::VectorXd& energies() const { return energies_; }
    const Eigen::MatrixXd& modes() const { return modes_; }
    double hbar() const { return hbar_; }

    /// exp(-i H dt / hbar).
    Eigen::MatrixXcd propagator(double dt) const;

private:
    Grid grid_;
    double hbar_;
    Eigen::MatrixXd h_;
    Eigen::VectorXd energies_;
    Eigen::MatrixXd modes_;
};

BoxHamiltonian build_box_hamiltonian(std::size_t n, const PhysicalParams& p);

/// rho -> U rho U^dagger with U = exp(-i H dt / hbar).
GridDensityMatrix unitary_step(const GridDensityMatrix& rho, double dt, const BoxHamiltonian& h);
GridWavefunction unitary_step(const GridWavefunction& psi, double dt, const BoxHamiltonian& h);

/// Repeated unitary steps carried out in the eigenbasis of H, where each
/// step is a phase factor per matrix element. Equal to `steps` applications
/// of unitary_step up to rounding.
GridDensityMatrix unitary_evolve(const GridDensityMatrix& rho, double dt, std::size_t steps,
                                 const BoxHamiltonian& h);

/// Schur factors M_ij = sum_z dx K_z(x_i) K_z(x_j), K_z(x)^2 =
/// sqrt(alpha/pi) exp(-alpha (x - z)^2), alpha = 1/(2 w^2), z on the grid
/// lattice extended 10 w beyond the walls.
Eigen::MatrixXd grw_channel_factors(const Grid& grid, const PhysicalParams& p);

/// rho -> sum_z dx K_z rho K_z.
GridDensityMatrix grw_localization_channel(const GridDensityMatrix& rho, const PhysicalParams& p);

/// -sum lambda ln lambda over eigenvalues of rho dx. Throws std::domain_error
/// for an eigenvalue below -1e-10.
double von_neumann_entropy(const GridDensityMatrix& rho);

GridWavefunction gaussian_wavefunction(const Grid& grid, double center, double sigma,
                                       double k0 = 0.0);
GridWavefunction superpose(const GridWavefunction& a, const GridWavefunction& b);
GridDensityMatrix pure_state(const GridWavefunction& psi);
GridDensityMatrix maximally_mixed(const Grid& grid);

/// Random state of the given rank (rank == n: Ginibre), unit trace.
GridDensityMatrix random_density_matrix(const Grid& grid, std::size_t rank, RandomStream& rng);

std::vector<double> position_density(const GridWavefunction& psi);
std::vector<double> position_density(const GridDensityMatrix& rho);
double position_mean(const GridDensityMatrix& rho);
double position_variance(const GridDensityMatrix& rho);
double position_variance(const GridWavefunction& psi);

/// Components with lineage tags. The density includes the cross term of a
/// pair only when their tags are equal (overlap 1); distinct tags are
/// orthogonal and contribute nothing.
struct TaggedGridState {
    std::vector<GridWavefunction> components;  ///< each normalized
    std::vector<std::complex<double>> amplitudes;
    std::vector<TagPath> tags;

    std::vector<double> density() const;
    /// Sum of |c_a|^2 |psi_a|^2 (no cross terms), normalized.
    std::vector<double> incoherent_density() const;
};

/// (max - min)/(max + min) of `density` over grid points inside `region`.
/// Throws std::domain_error if the region is not inside [0, L] or holds no
/// grid point.
double interference_visibility(std::span<const double> density, const Grid& grid,
                               Interval region);

/// max |n - n_incoherent| / max n_incoherent over the region.
double fringe_content(const TaggedGridState& state, Interval region);

/// Two packets of width w at L/2 -/+ 10 w moving toward each other with
/// wavenumber k0 = 2/w; `overlap_time` is when their centers meet.
struct PeresSetup {
    Grid grid;
    GridWavefunction left;
    GridWavefunction right;
    double k0 = 0.0;
    double overlap_time = 0.0;
    Interval fringe_region;
};

/// Throws std::invalid_argument unless L >= 40 w.
PeresSetup peres_setup(const PhysicalParams& p, std::size_t n);

/// Walkers from L/2 with Gaussian steps of variance delta^2 per period,
/// reflected at the walls when `walls`. Throws std::invalid_argument for
/// fewer than 1000 walkers.
std::vector<double> classical_random_walk_oracle(const PhysicalParams& p, std::size_t n_walkers,
                                                 std::size_t steps, RandomStream& rng,
                                                 bool walls = true);

/// Bin masses over k bins of [0, L] of a Gaussian N(x0, s2) folded by
/// reflecting walls, from the cosine series of the reflecting diffusion
/// equation.
std::vector<double> reflected_gaussian_bins(double x0, double s2, double L, std::size_t k);

}  // namespace decoh
