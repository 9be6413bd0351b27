// divergence.hpp: convolved Bessel densities and Kullback–Leibler divergences

#pragma once

#include <vector>

#include "sparsesyk/disorder.hpp"

namespace ssyk {

// Midpoint grid over [-half_width, half_width]: x_j = -L + (j + 1/2) dx. The
// midpoint offset keeps x = 0 off the grid, which matters for the K0 log singularity.
struct GridSpec {
    double half_width = 12.0;
    int n_points = 1 << 14;  // must be even

    double spacing() const { return 2.0 * half_width / n_points; }
};

struct DensityGrid {
    std::vector<double> x;
    std::vector<double> values;
    double dx = 0.0;
    double normalization_residual = 0.0;  // |sum f dx - 1|

    double moment(int k) const;
};

std::vector<double> grid_points(const GridSpec& spec);

// Chernoff bound on P(|X| > L) for a sum of R products with scale s:
// 2 min_theta (1 - s^2 theta^2)^{-R/2} e^{-theta L}.
double convolved_bessel_tail_bound(BesselScale scale, int R, double L);

// Density of a sum of R independent Gaussian products. R = 1 and R = 2 use the
// closed forms (K0 and Laplace laws); R >= 3 inverts the characteristic function
// (1 + s^2 t^2)^{-R/2} by FFT. Throws NumericalError when the grid misses more
// than 1e-8 of the mass.
DensityGrid convolved_bessel_density(BesselScale scale, int R, const GridSpec& spec);

DensityGrid gaussian_density(double variance, const GridSpec& spec);

// D(P || Q) = sum p log(p / q) dx over points with p > 1e-300. Throws
// DomainError for mismatched grids or q = 0 where p > 0.
double kl_numeric(const DensityGrid& p, const DensityGrid& q);

struct KlPoint {
    int R = 0;
    double forward = 0.0;  // D(Gaussian || R-fold Bessel sum), both unit variance
    double reverse = 0.0;  // D(R-fold Bessel sum || Gaussian)
    double half_width = 0.0;
};

struct KlFit {
    // D R^2 = c + d / R by least squares; c is the 1/R^2 coefficient.
    double c = 0.0;
    double c_stderr = 0.0;
    double c_ci_low = 0.0;   // 95% interval using Student t with n-2 dof
    double c_ci_high = 0.0;
    double d = 0.0;
    // Pure D = c / R^2 least squares, and whether its worst residual exceeds
    // 10% of the smallest D (a sign the scan is not asymptotic yet).
    double c_leading_only = 0.0;
    bool asymptotic_warning = false;
};

struct KlScan {
    std::vector<KlPoint> points;
    KlFit forward_fit;
    KlFit reverse_fit;
    bool strictly_decreasing = false;  // forward D over the R list
};

// Scans R over r_list (at least three values, all >= 4). Each Bessel sum is
// rescaled to unit variance and compared with the unit-variance Gaussian; the
// grid half-width adapts so that both tails beyond it carry < 1e-9 mass.
KlScan kl_scaling_scan(const std::vector<int>& r_list, double dx = 1.0 / 1024.0);

} // namespace ssyk
