#include "sparsesyk/sdsolver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "sparsesyk/error.hpp"

namespace ssyk {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;

void TimeGrid::validate() const
{
    if (n < 8 || n % 2 != 0) throw DomainError("TimeGrid: n must be even and >= 8");
    if (!(half_extent > 0.0)) throw DomainError("TimeGrid: T must be positive");
}

KeldyshGreen KeldyshGreen::zeros(const TimeGrid& grid)
{
    KeldyshGreen g{grid, {}};
    for (auto& c : g.components) c = Eigen::ArrayXcd::Zero(grid.n);
    return g;
}

namespace {

Eigen::FFT<double>& fft_engine()
{
    thread_local Eigen::FFT<double> fft;
    return fft;
}

double alternating(int k)
{
    return (k % 2 == 0) ? 1.0 : -1.0;
}

} // namespace

double frequency(int k, const TimeGrid& grid)
{
    const int shifted = k < grid.n / 2 ? k : k - grid.n;
    return 2.0 * std::numbers::pi * shifted / (grid.n * grid.dt());
}

Eigen::ArrayXcd to_frequency(const Eigen::ArrayXcd& f, const TimeGrid& grid)
{
    // With t_j = (j - n/2) dt, e^{i w_k t_j} = (-1)^k e^{2 pi i k j / n}:
    // an unnormalized inverse DFT. Eigen's inv divides by n.
    std::vector<Complex> in(f.data(), f.data() + f.size()), out;
    fft_engine().inv(out, in);
    Eigen::ArrayXcd result(grid.n);
    const double scale = grid.dt() * grid.n;
    for (int k = 0; k < grid.n; ++k) result(k) = scale * alternating(k) * out[static_cast<std::size_t>(k)];
    return result;
}

Eigen::ArrayXcd to_time(const Eigen::ArrayXcd& f, const TimeGrid& grid)
{
    std::vector<Complex> in(static_cast<std::size_t>(grid.n)), out;
    for (int k = 0; k < grid.n; ++k) in[static_cast<std::size_t>(k)] = alternating(k) * f(k);
    fft_engine().fwd(out, in);
    Eigen::ArrayXcd result(grid.n);
    const double scale = 1.0 / (grid.n * grid.dt());
    for (int j = 0; j < grid.n; ++j) result(j) = scale * out[static_cast<std::size_t>(j)];
    return result;
}

KeldyshGreen free_green(const TimeGrid& grid)
{
    grid.validate();
    KeldyshGreen g = KeldyshGreen::zeros(grid);
    const Complex half_i(0.0, 0.5);
    for (int j = 0; j < grid.n; ++j) {
        const double t = grid.time(j);
        const double sgn = (t > 0.0) - (t < 0.0);
        g(Plus, Plus)(j) = -half_i * sgn;
        g(Minus, Minus)(j) = half_i * sgn;
        g(Plus, Minus)(j) = half_i;
        g(Minus, Plus)(j) = -half_i;
    }
    return g;
}

namespace {

using FrequencyBlock = std::array<Eigen::ArrayXcd, 4>;

FrequencyBlock to_frequency(const KeldyshGreen& g)
{
    FrequencyBlock out;
    for (std::size_t c = 0; c < 4; ++c) out[c] = to_frequency(g.components[c], g.grid);
    return out;
}

KeldyshGreen to_time(const FrequencyBlock& f, const TimeGrid& grid)
{
    KeldyshGreen g{grid, {}};
    for (std::size_t c = 0; c < 4; ++c) g.components[c] = to_time(f[c], grid);
    return g;
}

Matrix2c block_at(const FrequencyBlock& f, int k)
{
    Matrix2c m;
    m << f[0](k), f[1](k), f[2](k), f[3](k);
    return m;
}

void store(FrequencyBlock& f, int k, const Matrix2c& m)
{
    f[0](k) = m(0, 0);
    f[1](k) = m(0, 1);
    f[2](k) = m(1, 0);
    f[3](k) = m(1, 1);
}

// Relative size of the determinant below which a 2x2 block counts as singular.
constexpr double kSingularTol = 1e-13;

bool near_singular(const Matrix2c& m)
{
    const double scale = m.cwiseAbs().maxCoeff();
    return scale == 0.0 || std::abs(m.determinant()) < kSingularTol * scale * scale;
}

} // namespace

ThetaResult theta_step(const KeldyshGreen& g, double K)
{
    const TimeGrid& grid = g.grid;
    ThetaResult out{KeldyshGreen::zeros(grid), KeldyshGreen::zeros(grid), false};
    const double k2 = K * K;
    for (std::size_t c = 0; c < 4; ++c) out.sigma.components[c] = -0.25 * k2 * g.components[c].square();

    const FrequencyBlock sigma_w = to_frequency(out.sigma);
    FrequencyBlock green_w;
    for (auto& c : green_w) c.resize(grid.n);
    Matrix2c m;
    m << 1.0, 0.0, -2.0, 1.0;
    for (int k = 0; k < grid.n; ++k) {
        Matrix2c a = m - block_at(sigma_w, k);
        if (near_singular(a)) {
            // Shift towards the constant term; only hit for pathological inputs.
            a += 1e-10 * m;
            out.regularized = true;
        }
        store(green_w, k, a.inverse());
    }
    out.green = to_time(green_w, grid);
    return out;
}

KeldyshGreen fermion_step(const KeldyshGreen& g, const KeldyshGreen& g_theta, const DissipationParams& params)
{
    const TimeGrid& grid = g.grid;
    KeldyshGreen sigma = KeldyshGreen::zeros(grid);
    const double j_term = params.J * params.J * params.ratio_rn;
    const double k_term = params.K * params.K * params.ratio_rn;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const Eigen::ArrayXcd& gab = g(a, b);
            Eigen::ArrayXcd& out = sigma(a, b);
            out = -j_term * DissipationParams::s(a, b) * gab.cube();
            if (k_term == 0.0) continue;
            const Eigen::ArrayXcd& ta = g_theta(a, b);
            const Eigen::ArrayXcd& tb = g_theta(b, a);
            for (int j = 0; j < grid.n; ++j) out(j) -= k_term * (ta(j) + tb(grid.mirror(j))) * gab(j);
            // The spike of G^theta at t = 0 multiplies G_ab(0), which jumps
            // for a == b; use the midpoint of the one-sided limits there.
            const int o = grid.origin();
            const Complex midpoint = 0.5 * (gab(o + 1) + gab(o - 1));
            out(o) += k_term * (ta(o) + tb(o)) * (gab(o) - midpoint);
        }
    }
    return sigma;
}

Matrix2c free_inverse(int k, const TimeGrid& grid, double eta)
{
    const double w = frequency(k, grid);
    Matrix2c m;
    m << w, Complex(0.0, eta), Complex(0.0, -eta), -w;
    return m;
}

KeldyshGreen dyson(const KeldyshGreen& sigma, double eta)
{
    const TimeGrid& grid = sigma.grid;
    bool vanishing = true;
    for (const auto& c : sigma.components) vanishing = vanishing && (c == 0.0).all();
    if (vanishing) return free_green(grid);

    const FrequencyBlock sigma_w = to_frequency(sigma);
    FrequencyBlock out;
    for (auto& c : out) c.resize(grid.n);
    for (int k = 0; k < grid.n; ++k) {
        const Matrix2c inverse = free_inverse(k, grid, eta) - block_at(sigma_w, k);
        if (near_singular(inverse)) {
            throw NumericalError("dyson: singular Dyson matrix at frequency index " + std::to_string(k));
        }
        store(out, k, inverse.inverse());
    }
    return to_time(out, grid);
}

double max_abs_difference(const KeldyshGreen& a, const KeldyshGreen& b)
{
    double worst = 0.0;
    for (std::size_t c = 0; c < 4; ++c) worst = std::max(worst, (a.components[c] - b.components[c]).abs().maxCoeff());
    return worst;
}

namespace {

KeldyshGreen iterate_once(const KeldyshGreen& g, const DissipationParams& params, double eta, bool& regularized)
{
    KeldyshGreen g_theta = KeldyshGreen::zeros(g.grid);
    if (params.K != 0.0) {
        ThetaResult theta = theta_step(g, params.K);
        regularized = regularized || theta.regularized;
        g_theta = std::move(theta.green);
    }
    return dyson(fermion_step(g, g_theta, params), eta);
}

// At infinite temperature and half filling the Keldysh component vanishes:
// G^{++} + G^{--} = G^{+-} + G^{-+} = 0. The fixed point satisfies this by
// itself up to an O(dt) leak from the on-grid delta spikes, but the iteration
// map is not contracting along the distribution direction once J and K are
// both on, so the constraint is imposed each step.
void project_infinite_temperature(KeldyshGreen& g)
{
    const Eigen::ArrayXcd time_ordered = 0.5 * (g(Plus, Plus) - g(Minus, Minus));
    const Eigen::ArrayXcd lesser = 0.5 * (g(Plus, Minus) - g(Minus, Plus));
    g(Plus, Plus) = time_ordered;
    g(Minus, Minus) = -time_ordered;
    g(Plus, Minus) = lesser;
    g(Minus, Plus) = -lesser;
}

// The free propagator has a delta-like spectral function, which a discrete
// iteration cannot broaden; start instead from the free form damped at the
// scale of the couplings. Only the fixed point matters.
KeldyshGreen initial_guess(const TimeGrid& grid, const DissipationParams& params)
{
    KeldyshGreen g = free_green(grid);
    const double rate = std::max(params.J, params.K * params.K) * std::sqrt(params.ratio_rn);
    for (auto& c : g.components)
        for (int j = 0; j < grid.n; ++j) c(j) *= std::exp(-rate * std::abs(grid.time(j)));
    return g;
}

// Undamped oscillation: over the recent window the residual neither shrinks
// overall nor changes monotonically.
bool looks_oscillating(const std::vector<double>& history)
{
    constexpr std::size_t window = 20;
    if (history.size() < window + 1) return false;
    const auto begin = history.end() - static_cast<std::ptrdiff_t>(window);
    int sign_changes = 0;
    for (auto it = begin + 2; it != history.end(); ++it) {
        const double d1 = *(it - 1) - *(it - 2);
        const double d2 = *it - *(it - 1);
        if (d1 * d2 < 0.0) ++sign_changes;
    }
    return sign_changes > static_cast<int>(window) / 2 && history.back() > 0.5 * *(begin - 1);
}

} // namespace

SdSolution solve_sd(const DissipationParams& params, const TimeGrid& grid, const SolverOptions& options)
{
    grid.validate();
    if (!(options.mixing > 0.0 && options.mixing <= 1.0)) throw DomainError("solve_sd: mixing must lie in (0, 1]");
    if (!(options.tol > 0.0)) throw DomainError("solve_sd: tol must be positive");
    if (options.max_iter < 1) throw DomainError("solve_sd: max_iter must be >= 1");
    if (params.J < 0.0 || params.K < 0.0 || params.ratio_rn <= 0.0) {
        throw DomainError("solve_sd: need J >= 0, K >= 0 and R/N > 0");
    }

    SdSolution sol{initial_guess(grid, params), {}, 0, false};
    for (int it = 1; it <= options.max_iter; ++it) {
        KeldyshGreen next = iterate_once(sol.green, params, options.broadening, sol.theta_regularized);
        sol.keldysh_defect = keldysh_defect(next);
        project_infinite_temperature(next);
        const double residual = max_abs_difference(next, sol.green);
        if (!std::isfinite(residual)) throw NumericalError("solve_sd: iteration produced non-finite values");
        sol.residual_history.push_back(residual);
        sol.iterations = it;
        if (residual < options.tol) {
            sol.green = std::move(next);
            return sol;
        }
        for (std::size_t c = 0; c < 4; ++c) {
            sol.green.components[c] =
                (1.0 - options.mixing) * sol.green.components[c] + options.mixing * next.components[c];
        }
    }
    const double best = *std::min_element(sol.residual_history.begin(), sol.residual_history.end());
    const bool oscillating = looks_oscillating(sol.residual_history);
    std::string msg = "solve_sd: no convergence after " + std::to_string(options.max_iter) +
                      " iterations (best residual " + std::to_string(best) + ")";
    if (oscillating) msg += "; residual oscillates, try a smaller mixing";
    throw ConvergenceError(msg, best, oscillating);
}

double sd_equation_residual(const KeldyshGreen& g, const DissipationParams& params, double eta)
{
    bool regularized = false;
    KeldyshGreen next = iterate_once(g, params, eta, regularized);
    project_infinite_temperature(next);
    return max_abs_difference(next, g);
}

double keldysh_defect(const KeldyshGreen& g)
{
    return std::max((g(Plus, Plus) + g(Minus, Minus)).abs().maxCoeff(),
                    (g(Plus, Minus) + g(Minus, Plus)).abs().maxCoeff());
}

double conjugation_defect(const KeldyshGreen& g)
{
    double worst = 0.0;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const Eigen::ArrayXcd& lhs = g(a, b);
            const Eigen::ArrayXcd& partner = g(1 - b, 1 - a);
            // The edge sample t = -T has no mirror image on the grid.
            for (int j = 1; j < g.grid.n; ++j) {
                worst = std::max(worst, std::abs(lhs(j) + std::conj(partner(g.grid.mirror(j)))));
            }
        }
    }
    return worst;
}

} // namespace ssyk
