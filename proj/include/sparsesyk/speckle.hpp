// speckle.hpp: speckle detuning fields, Hermite–Gauss trap modes and the
// rank-two couplings they induce
//
// Lengths are in units of the trap width; detunings in units of the mean detuning.

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sparsesyk/disorder.hpp"
#include "sparsesyk/rng.hpp"

namespace ssyk {

// Uniform periodic n x n lattice x_j = -L + j dx, dx = 2L / n; contains the origin.
struct Grid2D {
    int n = 128;
    double half_extent = 6.0;

    double spacing() const { return 2.0 * half_extent / n; }
    double coordinate(int j) const { return -half_extent + j * spacing(); }
    Eigen::Index size() const { return static_cast<Eigen::Index>(n) * n; }
    bool operator==(const Grid2D&) const = default;
};

struct SpeckleParams {
    // 1/e half-width of the intensity autocovariance exp(-dr^2 / l^2).
    double correlation_length = 0.25;
    double contrast = 0.3;
    double mean_detuning = 1.0;
};

struct SpeckleField {
    Grid2D grid;
    Eigen::ArrayXd intensity;  // |a(r)|^2, row-major (y outer, x inner); E[I] = 1
    Eigen::ArrayXd detuning;   // mean_detuning (1 + s (I - 1))
    SpeckleParams params;
};

// Throws DomainError for contrast outside [0, 0.8), correlation length below
// two grid spacings or a nonpositive mean detuning, and NumericalError if a
// nonpositive detuning value appears anyway.
SpeckleField generate_speckle(const Grid2D& grid, const SpeckleParams& params, Rng& rng);

// Normalized autocovariance of the intensity along x and y, averaged over both
// axes, for lags 0..max_lag grid steps.
std::vector<double> intensity_autocovariance(const SpeckleField& field, int max_lag);

struct ModeSet {
    Grid2D grid;
    double width = 1.0;
    std::vector<std::pair<int, int>> quantum_numbers;  // (n_x, n_y)
    Eigen::MatrixXd modes;                             // grid points x N

    int count() const { return static_cast<int>(modes.cols()); }
};

// 1D harmonic-oscillator eigenfunction of width w.
double hermite_gauss_1d(int n, double x, double width);

// First N 2D Hermite–Gauss modes ordered by shell n_x + n_y, then by
// decreasing n_x. Throws DomainError when the grid extent is below 8 widths
// and NumericalError when the Gram matrix deviates from identity by > 1e-6.
ModeSet hermite_gauss_modes(const Grid2D& grid, int n_modes, double width = 1.0);

Eigen::MatrixXd gram_matrix(const ModeSet& modes);

// J_ik = (sqrt(E) / 2) sum_r phi_i phi_k / (Delta / mean) dA.
RankTwoCoupling speckle_couplings(const SpeckleField& field, const ModeSet& modes, double energy_scale);

// Dissipative proxy K_ij = (K / sqrt(N)) sum_r phi_i phi_j / (Delta / mean)^2 dA,
// so that a uniform field gives entries with mean square K^2 / N^2 over the matrix.
Eigen::MatrixXd speckle_jump_couplings(const SpeckleField& field, const ModeSet& modes, double k_scale);

struct SpeckleConfig {
    Grid2D grid;
    SpeckleParams params;
    double width = 1.0;
    double energy_scale = 1.0;
    double k_scale = 1.0;
};

struct SpeckleSample {
    Eigen::MatrixXd j;  // rank-two coupling (real for real modes)
    Eigen::MatrixXd k;
};

// Field f draws from make_stream(seed, f).
std::vector<SpeckleSample> speckle_ensemble(const SpeckleConfig& config, int n_modes, std::size_t n_fields,
                                            std::uint64_t seed, unsigned threads = 1);

struct ClassStatistics {
    CouplingClass coupling_class = CouplingClass::Diagonal;
    std::size_t entries = 0;   // distinct tensor entries in the class
    std::size_t samples = 0;   // pooled samples
    double mean_abs = 0.0;     // mean |E[J]| over entries
    double variance = 0.0;     // per-entry variance, averaged over entries
    // KS statistics of the pooled standardized samples vs N(0, 1) and vs the
    // unit-variance K0 law. Entries of one field are correlated, so pooled
    // p-values would be miscalibrated; the p-values below use one entry per
    // field (cycling through the class), which gives independent samples.
    double ks_gaussian = 0.0;
    double ks_bessel = 0.0;
    double ks_gaussian_p = 0.0;
    double ks_bessel_p = 0.0;
};

// Class-resolved statistics of the low-rank tensors built from each sample's
// J matrix. Each entry is standardized by its own ensemble mean and standard
// deviation before pooling. Requires at least 100 samples.
std::vector<ClassStatistics> class_variance_scan(const std::vector<SpeckleSample>& ensemble);

struct DecorrelationPoint {
    int R = 0;
    std::size_t sums = 0;        // independent R-field sums used
    double correlation = 0.0;    // mean over entry pairs of corr(|sum J^red|^2, |sum K|^2)
    double standard_error = 0.0; // delete-a-block jackknife over groups
};

struct DecorrelationScan {
    std::vector<DecorrelationPoint> points;
    double c = 0.0;          // |corr| ~ c / R
    double r_squared = 0.0;  // of the c / R fit
    bool decreasing = false;
};

// For each R, partitions the ensemble into disjoint groups of R fields, sums
// J^red_ijkl and K_ik over each group and correlates the squared magnitudes
// across groups, separately for every off-diagonal entry (i<j, k<l disjoint).
// With independent_k the K of each group comes from a different group.
DecorrelationScan jk_decorrelation(const std::vector<SpeckleSample>& ensemble, const std::vector<int>& r_list,
                                   bool independent_k = false);

} // namespace ssyk
