#pragma once

// Observables over ensembles and the test statistics used by the checks.

#include <cstddef>
#include <span>
#include <vector>

#include "decoh/ensemble.hpp"
#include "decoh/model_core.hpp"

namespace decoh {

struct VarianceSample {
    double t = 0.0;
    double var = 0.0;
    double n_effective = 0.0;
};

struct DiffusionEstimate {
    double D = 0.0;
    double stderr_D = 0.0;
    double intercept = 0.0;
};

struct EquilibrationReport {
    double tv_distance = 0.0;
    double coarse_entropy = 0.0;
    std::size_t n_bins = 0;
};

/// Mass-weighted mean of branch centers. Throws std::domain_error if empty.
double ensemble_mean_position(const Ensemble& e);

/// Mass-weighted variance of branch centers plus the mass-weighted mean of
/// packet variances (the exact variance of the Gaussian mixture). Throws
/// std::domain_error if empty.
double ensemble_position_variance(const Ensemble& e);

/// OLS fit of var(t) = 2 D t + c. Throws std::domain_error for fewer than
/// three samples, non-increasing times or zero time span.
DiffusionEstimate fit_diffusion(std::span<const VarianceSample> s);

/// Mass of every component integrated over k equal bins of [0, L], with the
/// Gaussian tails folded back at the walls (method of images). Sums to 1.
/// Throws std::invalid_argument unless k >= 2 and L/k >= w.
std::vector<double> position_histogram(const Ensemble& e, std::size_t k, const PhysicalParams& p);

/// (1/2) sum |h_i - 1/k|.
double tv_to_uniform(std::span<const double> h);

/// -sum h_i ln h_i in nats with 0 ln 0 = 0.
double coarse_entropy(std::span<const double> h);

EquilibrationReport equilibration_report(std::span<const double> h);

struct ChiSquareResult {
    double statistic = 0.0;
    std::size_t dof = 0;
    double threshold = 0.0;  ///< upper alpha-quantile of chi^2(dof)
    double p_value = 1.0;
    bool pass = false;
};

/// Pearson statistic sum (o_i - N p_i)^2 / (N p_i), dof = cells - 1, pass
/// iff statistic < upper alpha quantile. Throws std::invalid_argument when
/// sizes differ, expected does not sum to 1 within 1e-9, fewer than two
/// cells, or any N p_i < 5 (diagnostic names the cell).
ChiSquareResult chi_square_frequencies(std::span<const double> observed,
                                       std::span<const double> expected, double alpha = 0.001);

/// Adjacent cells merged from both ends inward until every N p_i >= 5, then
/// chi_square_frequencies. Cells must be in a meaningful order (e.g.
/// lattice order).
ChiSquareResult chi_square_pooled(std::span<const double> observed,
                                  std::span<const double> expected, double alpha = 0.001);

enum class Observable { position_mean, position_variance };

/// Per-branch value: the center, or the squared displacement from L/2
/// plus the packet variance.
double observable_value(const Branch& b, Observable o, const PhysicalParams& p);

struct ExpectationComparison {
    double z = 0.0;
    double trajectory_mean = 0.0;
    double reference = 0.0;
    double stderr_total = 0.0;
    std::size_t trajectories = 0;
};

/// (mean over trajectories - ensemble expectation) / standard error. The
/// error combines the trajectory sample variance / M with the reference's
/// own sampling variance (weighted variance / Kish size). Throws
/// std::domain_error for fewer than 100 trajectories or mismatched times.
ExpectationComparison expectation_compare(std::span<const Ensemble> collapse_runs,
                                          const Ensemble& reference, Observable o,
                                          const PhysicalParams& p);

struct KsResult {
    double statistic = 0.0;
    double n_effective = 0.0;  ///< n1 n2 / (n1 + n2)
    double p_value = 1.0;
    bool pass = false;
};

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_q(double lambda);

/// Two-sample KS between a weighted sample (Kish size as n1) and an
/// unweighted one; p from Q((sqrt(ne) + 0.12 + 0.11/sqrt(ne)) D).
KsResult ks_two_sample(std::span<const double> x, std::span<const double> x_weights,
                       std::span<const double> y, double alpha = 0.01);

}  // namespace decoh
