#include "sparsesyk/trotter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sparsesyk/error.hpp"
#include "sparsesyk/rng.hpp"

namespace ssyk {

namespace {

void require_common_basis(const std::vector<HamiltonianMatrix>& layers)
{
    if (layers.empty()) throw DomainError("trotter: at least one layer is required");
    const Eigen::Index dim = layers.front().dimension();
    for (const auto& h : layers) {
        if (h.dimension() != dim || !(*h.basis == *layers.front().basis)) {
            throw DomainError("trotter: layers must share one basis");
        }
    }
}

} // namespace

double normalized_frobenius(const Eigen::MatrixXcd& a)
{
    if (a.rows() == 0) return 0.0;
    return a.norm() / std::sqrt(static_cast<double>(a.rows()));
}

double unitarity_defect(const Eigen::MatrixXcd& u)
{
    const Eigen::MatrixXcd g = u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    return g.cwiseAbs().maxCoeff();
}

UnitaryMatrix exact_evolution(const HamiltonianMatrix& h, double t)
{
    if (t == 0.0) return {h.basis, Eigen::MatrixXcd::Identity(h.dimension(), h.dimension())};
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h.matrix);
    if (eig.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "eigendecomposition failed (D = " << h.dimension() << ", max |H| = " << h.matrix.cwiseAbs().maxCoeff()
            << ")";
        throw NumericalError(msg.str());
    }
    const Eigen::VectorXcd phases =
        (eig.eigenvalues().cast<Complex>() * Complex(0.0, -t)).array().exp().matrix();
    return {h.basis, eig.eigenvectors() * phases.asDiagonal() * eig.eigenvectors().adjoint()};
}

UnitaryMatrix layer_unitary(const HamiltonianMatrix& h, double dt)
{
    return exact_evolution(h, dt);
}

UnitaryMatrix cycle_unitary(const std::vector<HamiltonianMatrix>& layers, double dt)
{
    require_common_basis(layers);
    UnitaryMatrix w = layer_unitary(layers.front(), dt);
    for (std::size_t a = 1; a < layers.size(); ++a) w.matrix = layer_unitary(layers[a], dt).matrix * w.matrix;
    return w;
}

UnitaryMatrix trotter_evolution(const CircuitSchedule& schedule)
{
    require_common_basis(schedule.layers);
    if (!(schedule.dt > 0.0)) throw DomainError("trotter_evolution: dt must be positive");
    if (schedule.n_cycles < 0) throw DomainError("trotter_evolution: n_cycles must be >= 0");
    const Eigen::Index dim = schedule.layers.front().dimension();
    UnitaryMatrix u{schedule.layers.front().basis, Eigen::MatrixXcd::Identity(dim, dim)};
    if (schedule.n_cycles == 0) return u;

    if (!schedule.reshuffle) {
        const Eigen::MatrixXcd w = cycle_unitary(schedule.layers, schedule.dt).matrix;
        for (int n = 0; n < schedule.n_cycles; ++n) u.matrix = w * u.matrix;
        return u;
    }

    std::vector<Eigen::MatrixXcd> steps;
    for (const auto& h : schedule.layers) steps.push_back(layer_unitary(h, schedule.dt).matrix);
    std::vector<std::size_t> order(steps.size());
    Rng rng(schedule.shuffle_seed);
    for (int n = 0; n < schedule.n_cycles; ++n) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t a : order) u.matrix = steps[a] * u.matrix;
    }
    return u;
}

Eigen::MatrixXcd commutator_sum(const std::vector<HamiltonianMatrix>& layers)
{
    require_common_basis(layers);
    const Eigen::Index dim = layers.front().dimension();
    // sum_{a<b} [H_a, H_b] = sum_b [S_{b-1}, H_b] with S the running prefix sum.
    Eigen::MatrixXcd prefix = layers.front().matrix;
    Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t b = 1; b < layers.size(); ++b) {
        const Eigen::MatrixXcd& h = layers[b].matrix;
        total.noalias() += prefix * h;
        total.noalias() -= h * prefix;
        prefix += h;
    }
    return total;
}

double commutator_norm_sq(const std::vector<HamiltonianMatrix>& layers)
{
    const double norm = normalized_frobenius(commutator_sum(layers));
    return norm * norm;
}

double bch_error_estimate(const std::vector<HamiltonianMatrix>& layers, double dt, int n)
{
    if (layers.size() < 2) return 0.0;
    const double t_n = n * dt;
    return 0.5 * t_n * dt * normalized_frobenius(commutator_sum(layers));
}

DeltaU delta_u(const std::vector<HamiltonianMatrix>& layers, double dt, int n_max)
{
    require_common_basis(layers);
    if (n_max < 1) throw DomainError("delta_u: n_max must be >= 1");
    if (!(dt > 0.0)) throw DomainError("delta_u: dt must be positive");
    const Eigen::MatrixXcd w = cycle_unitary(layers, dt).matrix;
    const Eigen::MatrixXcd step = exact_evolution(sum_layers(layers), dt).matrix;
    const Eigen::Index dim = w.rows();

    DeltaU out;
    out.distance.reserve(static_cast<std::size_t>(n_max));
    Eigen::MatrixXcd trotter = Eigen::MatrixXcd::Identity(dim, dim);
    Eigen::MatrixXcd exact = Eigen::MatrixXcd::Identity(dim, dim);
    double total = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        trotter = w * trotter;
        exact = step * exact;
        const double d = normalized_frobenius(exact - trotter);
        out.distance.push_back(d);
        total += d;
    }
    out.mean = total / n_max;
    return out;
}

long long trotter_steps_required(double T, double J, int R, int N, double eps, double M)
{
    if (!(eps > 0.0)) throw DomainError("trotter_steps_required: eps must be positive");
    if (N < 1 || R < 1) throw DomainError("trotter_steps_required: N and R must be >= 1");
    const double x = M * T * T * J * J * R / (N * eps);
    // Guard against x landing a few ulps above an integer.
    return static_cast<long long>(std::ceil(x - 1e-12 * std::abs(x)));
}

} // namespace ssyk
