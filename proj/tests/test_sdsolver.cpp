#include <doctest.h>

#include <cmath>

#include "sparsesyk/error.hpp"
#include "sparsesyk/sdsolver.hpp"
#include "sparsesyk/stats.hpp"

using namespace ssyk;
using Complex = std::complex<double>;

namespace {

const TimeGrid kGrid{50.0, 4096};

KeldyshGreen damped_free(const TimeGrid& grid, double rate)
{
    KeldyshGreen g = free_green(grid);
    for (auto& c : g.components)
        for (int j = 0; j < grid.n; ++j) c(j) *= std::exp(-rate * std::abs(grid.time(j)));
    return g;
}

double max_abs(const Eigen::ArrayXcd& a) { return a.abs().maxCoeff(); }

} // namespace

TEST_CASE("time grid")
{
    const TimeGrid g{10.0, 8};
    CHECK(g.dt() == 2.5);
    CHECK(g.time(0) == -10.0);
    CHECK(g.time(g.origin()) == 0.0);
    CHECK(g.time(g.mirror(3)) == -g.time(3));
    CHECK_THROWS_AS(TimeGrid({10.0, 7}).validate(), DomainError);
    CHECK_THROWS_AS(TimeGrid({0.0, 8}).validate(), DomainError);
}

TEST_CASE("free propagator")
{
    const KeldyshGreen g = free_green(kGrid);
    const int o = kGrid.origin();
    CHECK(g(Plus, Minus)(o + 5) == Complex(0.0, 0.5));
    CHECK(g(Minus, Plus)(o - 5) == Complex(0.0, -0.5));
    CHECK(g(Plus, Plus)(o + 5) == Complex(0.0, -0.5));
    CHECK(g(Plus, Plus)(o - 5) == Complex(0.0, 0.5));
    CHECK(g(Plus, Plus)(o) == Complex(0.0, 0.0));
    CHECK(g(Minus, Minus)(o + 5) == Complex(0.0, 0.5));
    CHECK(keldysh_defect(g) == 0.0);
    CHECK(conjugation_defect(g) < 1e-15);
}

TEST_CASE("Fourier transforms")
{
    SUBCASE("round trip")
    {
        Eigen::ArrayXcd f(kGrid.n);
        for (int j = 0; j < kGrid.n; ++j) f(j) = Complex(std::sin(0.3 * j), std::cos(0.01 * j * j));
        CHECK(max_abs(to_time(to_frequency(f, kGrid), kGrid) - f) < 1e-12);
    }
    SUBCASE("delta spike maps to one")
    {
        Eigen::ArrayXcd f = Eigen::ArrayXcd::Zero(kGrid.n);
        f(kGrid.origin()) = 1.0 / kGrid.dt();
        CHECK(max_abs(to_frequency(f, kGrid) - 1.0) < 1e-12);
    }
    SUBCASE("damped retarded propagator is 1 / (w + i eta)")
    {
        const double eta = 0.5;
        const KeldyshGreen g = damped_free(kGrid, eta);
        const Eigen::ArrayXcd retarded = g(Plus, Plus) - g(Plus, Minus);
        const Eigen::ArrayXcd w = to_frequency(retarded, kGrid);
        for (int k : {0, 1, 5, 20, 100, kGrid.n - 20}) {
            const Complex expected = 1.0 / Complex(frequency(k, kGrid), eta);
            CHECK(std::abs(w(k) - expected) < 2.0 * kGrid.dt());
        }
        CHECK(frequency(kGrid.n - 1, kGrid) < 0.0);
    }
}

TEST_CASE("theta propagator")
{
    SUBCASE("K = 0 gives M^-1 delta")
    {
        const ThetaResult r = theta_step(free_green(kGrid), 0.0);
        const int o = kGrid.origin();
        const double spike = 1.0 / kGrid.dt();
        CHECK(std::abs(r.green(Plus, Plus)(o) - spike) < 1e-9);
        CHECK(std::abs(r.green(Minus, Minus)(o) - spike) < 1e-9);
        CHECK(std::abs(r.green(Minus, Plus)(o) - 2.0 * spike) < 1e-9);
        CHECK(max_abs(r.green(Plus, Minus)) < 1e-9);
        CHECK(std::abs(r.green(Plus, Plus)(o + 3)) < 1e-9);
        CHECK_FALSE(r.regularized);
    }
    SUBCASE("self-energy scales as K^2")
    {
        const KeldyshGreen g = damped_free(kGrid, 0.3);
        const ThetaResult a = theta_step(g, 1.0), b = theta_step(g, 2.0);
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(max_abs(b.sigma.components[c] - 4.0 * a.sigma.components[c]) < 1e-14);
            CHECK(max_abs(a.sigma.components[c] + 0.25 * g.components[c].square()) < 1e-15);
        }
    }
}

TEST_CASE("fermion self-energy")
{
    const KeldyshGreen g = damped_free(kGrid, 0.2);
    const KeldyshGreen none = KeldyshGreen::zeros(kGrid);
    const DissipationParams p{1.5, 0.0, 0.5};
    const KeldyshGreen s = fermion_step(g, none, p);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            const double sign = a == b ? 1.0 : -1.0;
            CHECK(max_abs(s(a, b) + 2.25 * 0.5 * sign * g(a, b).cube()) < 1e-15);
        }

    // Dissipative term away from t = 0: -(K^2 R/N) (G^th_ab(t) + G^th_ba(-t)) G_ab(t).
    KeldyshGreen theta = damped_free(kGrid, 0.7);
    theta(Plus, Minus) *= 3.0;
    const KeldyshGreen sk = fermion_step(g, theta, {0.0, 2.0, 1.0});
    const int j = kGrid.origin() + 17;
    const Complex expected = -4.0 * (theta(Plus, Minus)(j) + theta(Minus, Plus)(kGrid.mirror(j))) * g(Plus, Minus)(j);
    CHECK(std::abs(sk(Plus, Minus)(j) - expected) < 1e-14);
}

TEST_CASE("Dyson inversion per frequency")
{
    const double eta = 1e-6;
    KeldyshGreen sigma = damped_free(kGrid, 0.4);
    for (auto& c : sigma.components) c *= 0.3;
    const KeldyshGreen g = dyson(sigma, eta);
    std::array<Eigen::ArrayXcd, 4> gw, sw;
    for (std::size_t c = 0; c < 4; ++c) {
        gw[c] = to_frequency(g.components[c], kGrid);
        sw[c] = to_frequency(sigma.components[c], kGrid);
    }
    for (int k : {0, 3, 50, 700, kGrid.n - 9}) {
        Eigen::Matrix2cd s;
        s << sw[0](k), sw[1](k), sw[2](k), sw[3](k);
        const Eigen::Matrix2cd ref = (free_inverse(k, kGrid, eta) - s).inverse();
        CHECK(std::abs(gw[0](k) - ref(0, 0)) < 1e-9);
        CHECK(std::abs(gw[1](k) - ref(0, 1)) < 1e-9);
        CHECK(std::abs(gw[2](k) - ref(1, 0)) < 1e-9);
        CHECK(std::abs(gw[3](k) - ref(1, 1)) < 1e-9);
    }
    CHECK(max_abs_difference(dyson(KeldyshGreen::zeros(kGrid), eta), free_green(kGrid)) == 0.0);
}

TEST_CASE("solver: trivial and dissipative limits")
{
    SUBCASE("J = K = 0 returns the free propagator")
    {
        const SdSolution s = solve_sd({0.0, 0.0, 1.0}, kGrid);
        CHECK(max_abs_difference(s.green, free_green(kGrid)) == 0.0);
        CHECK(s.iterations == 1);
    }
    SUBCASE("J = 0, K > 0 decays exponentially")
    {
        const SdSolution s = solve_sd({0.0, 1.0, 1.0}, kGrid);
        std::vector<double> t, log_g;
        for (int j = kGrid.origin() + 1; kGrid.time(j) <= 10.0; ++j) {
            t.push_back(kGrid.time(j));
            log_g.push_back(std::log(std::abs(s.green(Plus, Minus)(j))));
        }
        const auto fit = stats::fit_line(t, log_g);
        CHECK(fit.slope < -0.05);
        CHECK(fit.r_squared > 0.99);
    }
}

TEST_CASE("solver: convergence and self-consistency")
{
    const SolverOptions opts;
    for (auto p : {DissipationParams{1.0, 0.0, 1.0}, DissipationParams{1.0, 0.5, 1.0}}) {
        CAPTURE(p.K);
        const SdSolution s = solve_sd(p, kGrid, opts);
        const auto& h = s.residual_history;
        REQUIRE(h.size() >= 11);
        for (std::size_t k = h.size() - 10; k < h.size(); ++k) CHECK(h[k] < h[k - 1]);
        CHECK(h.back() < opts.tol);
        CHECK(conjugation_defect(s.green) <= 10.0 * opts.tol);
        CHECK(keldysh_defect(s.green) == 0.0);
        CHECK(s.keldysh_defect < 10.0 * kGrid.dt());
        if (p.K == 0.0) {
            CHECK(sd_equation_residual(s.green, p) <= 2.0 * opts.tol);
            // Equal-time anticommutator; the K term shifts it by O(K^2) on any grid.
            const int o = kGrid.origin();
            CHECK(std::abs(s.green(Plus, Minus)(o) - s.green(Minus, Plus)(o)) == doctest::Approx(1.0).epsilon(1e-3));
        }
    }
}

TEST_CASE("solver: scaling symmetry (J, K^2, t) -> (l J, l K^2, t / l)")
{
    const double lambda = 2.0;
    const DissipationParams p{1.0, 0.5, 1.0};
    const DissipationParams q{lambda * p.J, std::sqrt(lambda) * p.K, 1.0};
    const SdSolution a = solve_sd(p, kGrid);
    const SdSolution b = solve_sd(q, {kGrid.half_extent / lambda, kGrid.n});
    // Same grid index means t' = t / lambda.
    double scale = 0.0;
    for (const auto& c : a.green.components) scale = std::max(scale, max_abs(c));
    CHECK(max_abs_difference(a.green, KeldyshGreen{kGrid, b.green.components}) < 0.01 * scale);
}

TEST_CASE("solver: validation and failure modes")
{
    const DissipationParams p{1.0, 0.0, 1.0};
    CHECK_THROWS_AS(solve_sd(p, kGrid, {0.0}), DomainError);
    CHECK_THROWS_AS(solve_sd(p, kGrid, {1.5}), DomainError);
    CHECK_THROWS_AS(solve_sd(p, kGrid, {0.3, 0.0}), DomainError);
    CHECK_THROWS_AS(solve_sd({-1.0, 0.0, 1.0}, kGrid), DomainError);
    CHECK_THROWS_AS(solve_sd({1.0, 0.0, 0.0}, kGrid), DomainError);
    try {
        solve_sd(p, kGrid, {0.3, 1e-8, 3});
        FAIL("expected ConvergenceError");
    } catch (const ConvergenceError& e) {
        CHECK(e.best_residual() > 1e-8);
    }
}
