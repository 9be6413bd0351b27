// sdsolver.hpp: large-N Schwinger–Dyson equations on the Keldysh contour at
// infinite temperature, with random-Lindblad dissipation
//
// Components G_ab(t) = -i <T_C psi_a(t) psi-bar_b(0)>, a, b in {+, -}. The free
// half-filled propagator is G^{+-} = i/2, G^{-+} = -i/2, G^{++} = -(i/2) sgn t,
// G^{--} = (i/2) sgn t with sgn 0 = 0. K^2 has the dimension of a rate, so the
// equations are invariant under (J, K^2, t) -> (lambda J, lambda K^2, t / lambda).

#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

namespace ssyk {

enum Contour : int { Plus = 0, Minus = 1 };

// t_j = (j - n/2) dt for j = 0..n-1, dt = 2T / n; periodic, so -t_j = t_{(n-j) mod n}.
struct TimeGrid {
    double half_extent = 50.0;  // T
    int n = 4096;

    double dt() const { return 2.0 * half_extent / n; }
    double time(int j) const { return (j - n / 2) * dt(); }
    int origin() const { return n / 2; }
    int mirror(int j) const { return (n - j) % n; }
    void validate() const;
};

struct KeldyshGreen {
    TimeGrid grid;
    std::array<Eigen::ArrayXcd, 4> components;  // index 2a + b

    Eigen::ArrayXcd& operator()(int a, int b) { return components[static_cast<std::size_t>(2 * a + b)]; }
    const Eigen::ArrayXcd& operator()(int a, int b) const { return components[static_cast<std::size_t>(2 * a + b)]; }

    static KeldyshGreen zeros(const TimeGrid& grid);
};

// F(w_k) = int dt e^{i w_k t} f(t) with w_k = 2 pi k / (n dt) (k >= n/2 aliasing
// to negative frequencies), and its inverse. A kernel delta(t) is the on-grid
// spike 1/dt at the origin and maps to 1.
Eigen::ArrayXcd to_frequency(const Eigen::ArrayXcd& f, const TimeGrid& grid);
Eigen::ArrayXcd to_time(const Eigen::ArrayXcd& f, const TimeGrid& grid);
double frequency(int k, const TimeGrid& grid);

KeldyshGreen free_green(const TimeGrid& grid);

struct DissipationParams {
    double J = 1.0;
    double K = 0.0;
    double ratio_rn = 1.0;  // R / N

    static constexpr double s(int a, int b) { return a == b ? 1.0 : -1.0; }
};

struct ThetaResult {
    KeldyshGreen sigma;  // Sigma^theta_ab = -(K^2 / 4) G_ab^2
    KeldyshGreen green;  // [M delta - Sigma^theta]^{-1}, M = [[1, 0], [-2, 1]]
    bool regularized = false;
};

ThetaResult theta_step(const KeldyshGreen& g, double K);

// Sigma_ab(t) = -(J^2 R / N) s_ab G_ab^3 - (K^2 R / N) (G^theta_ab(t) + G^theta_ba(-t)) G_ab(t).
KeldyshGreen fermion_step(const KeldyshGreen& g, const KeldyshGreen& g_theta, const DissipationParams& params);

// Inverse free propagator [[w, i eta], [-i eta, -w]]. The broadening eta is
// the +i0 that selects the infinite-temperature distribution; it acts like an
// infinitely weak bath at half filling.
Eigen::Matrix2cd free_inverse(int k, const TimeGrid& grid, double eta);

// G = [G0^{-1} - Sigma]^{-1}, inverted per frequency in contour space. A
// vanishing Sigma returns free_green exactly.
KeldyshGreen dyson(const KeldyshGreen& sigma, double eta);

struct SolverOptions {
    double mixing = 0.3;
    double tol = 1e-8;
    int max_iter = 5000;
    double broadening = 1e-6;  // eta
};

struct SdSolution {
    KeldyshGreen green;
    std::vector<double> residual_history;  // max |G_new - G_old| per iteration
    int iterations = 0;
    bool theta_regularized = false;
    // max |G^K| of the last unprojected Dyson output; O(dt) at the fixed point.
    double keldysh_defect = 0.0;
};

// Damped fixed-point iteration starting from a damped free propagator, with
// each iterate projected onto G^K = 0 (infinite temperature). Throws
// ConvergenceError (best residual, oscillation flag) after max_iter.
SdSolution solve_sd(const DissipationParams& params, const TimeGrid& grid, const SolverOptions& options = {});

// One more Sigma -> Dyson -> projection pass from g; returns max |G' - g|.
double sd_equation_residual(const KeldyshGreen& g, const DissipationParams& params, double eta = 1e-6);

// max |G_ab(t) + conj(G_{b-bar a-bar}(-t))| over components and times.
double conjugation_defect(const KeldyshGreen& g);

// max |G^{++} + G^{--}|, |G^{+-} + G^{-+}|: the Keldysh component.
double keldysh_defect(const KeldyshGreen& g);

double max_abs_difference(const KeldyshGreen& a, const KeldyshGreen& b);

} // namespace ssyk
