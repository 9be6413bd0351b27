// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "sparsesyk/disorder.hpp"
#include "sparsesyk/divergence.hpp"
#include "sparsesyk/hamiltonian.hpp"
#include "sparsesyk/observables.hpp"
#include "sparsesyk/parallel.hpp"
#include "sparsesyk/rng.hpp"
#include "sparsesyk/sdsolver.hpp"
#include "sparsesyk/speckle.hpp"
#include "sparsesyk/stats.hpp"
#include "sparsesyk/trotter.hpp"

using namespace ssyk;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const unsigned kThreads = default_threads();

// ---- 1 ------------------------------------------------------------------------

Outcome bessel_law()
{
    const int n = 10;
    const double J = 1.0;
    const double sigma = calibrated_rank_two_sigma(n, J);
    const std::size_t draws = 100000;
    // One disjoint-index entry per realization keeps the draws independent.
    const std::vector<double> re = parallel_map(draws, kThreads, [&](std::size_t s) {
        Rng rng = make_stream(101, s);
        const CouplingTensor t = lowrank_tensor(sample_rank_two(n, sigma, rng)).tensor;
        return t(0, 1, 2, 3).real();
    });
    const BesselScale scale{std::sqrt(J) / n, std::sqrt(J) / n};
    const auto ks = stats::ks_one_sample(re, [&](double x) { return bessel_cdf(x, scale); });
    return {ks.p_value > 0.01, fmt("KS D = %.4f, p = %.3g (need p > 0.01)", ks.statistic, ks.p_value)};
}

// ---- 2 ------------------------------------------------------------------------

Outcome kl_scaling()
{
    const KlScan scan = kl_scaling_scan({8, 16, 32, 64});
    const double c = scan.forward_fit.c;
    std::string ds;
    for (const auto& p : scan.points) ds += fmt("%s%.3g", ds.empty() ? "" : ",", p.forward);
    return {c >= 0.56 && c <= 0.94 && scan.strictly_decreasing,
            fmt("c = %.3f in [0.56, 0.94]; D = {%s}; decreasing = %d", c, ds.c_str(), scan.strictly_decreasing)};
}

// ---- 3 ------------------------------------------------------------------------

double mean_offdiag_abs2(const CouplingTensor& t)
{
    const auto& m = t.pair_matrix();
    double sum = 0.0;
    std::size_t count = 0;
    for (Eigen::Index p = 0; p < m.rows(); ++p)
        for (Eigen::Index q = p; q < m.cols(); ++q)
            if (t.class_of(p, q) == CouplingClass::OffDiagonal) {
                sum += std::norm(m(p, q));
                ++count;
            }
    return sum / static_cast<double>(count);
}

Outcome variance_conventions()
{
    const int n = 10;
    const double J = 1.0;
    const std::size_t reps = 400;
    auto average = [&](auto&& make) {
        const auto v = parallel_map(reps, kThreads, make);
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(reps);
    };
    const double dense = average([&](std::size_t s) {
        Rng rng = make_stream(31, s);
        return mean_offdiag_abs2(sample_dense_gaussian(n, J, rng));
    });
    const double sigma = calibrated_rank_two_sigma(n, J);
    const double single = average([&](std::size_t s) {
        Rng rng = make_stream(32, s);
        return mean_offdiag_abs2(lowrank_tensor(sample_rank_two(n, sigma, rng)).tensor);
    });
    const double layered = average([&](std::size_t s) {
        CouplingTensor total(n, VarianceConvention::Reduced2JsqN4);
        for (int a = 0; a < n; ++a) {
            Rng rng = make_stream(33, s, static_cast<std::uint64_t>(a));
            total += lowrank_tensor(sample_rank_two(n, sigma, rng)).tensor;
        }
        return mean_offdiag_abs2(total);
    });
    const double n3 = 2.0 * J * J / std::pow(n, 3), n4 = 2.0 * J * J / std::pow(n, 4);
    const double e1 = dense / n3 - 1.0, e2 = single / n4 - 1.0, e3 = layered / n3 - 1.0;
    return {std::abs(e1) < 0.05 && std::abs(e2) < 0.05 && std::abs(e3) < 0.10,
            fmt("dense/(2J^2/N^3) - 1 = %+.3f, single layer/(2J^2/N^4) - 1 = %+.3f, R = N sum/(2J^2/N^3) - 1 = %+.3f",
                e1, e2, e3)};
}

// ---- 4 ------------------------------------------------------------------------

Outcome commutator_bound()
{
    const double J = 1.0;
    const std::size_t reps = 50;
    bool within = true;
    double worst_ratio = 0.0;
    std::vector<double> slopes;
    for (int n : {6, 8, 10}) {
        const BasisPtr basis = make_basis(n, Sector::fixed(n / 2));
        std::vector<double> log_r, log_c;
        for (int R : {4, 8}) {
            const auto v = parallel_map(reps, kThreads, [&](std::size_t s) {
                return commutator_norm_sq(build_layers(basis, J, R, stream_seed(400 + n * 16 + R, s)).layers);
            });
            double mean = 0.0;
            for (double x : v) mean += x / static_cast<double>(reps);
            const double bound = 2e2 * std::pow(J, 4) * R * R / (double(n) * n);
            worst_ratio = std::max(worst_ratio, mean / bound);
            within = within && mean <= bound;
            log_r.push_back(std::log(R));
            log_c.push_back(std::log(mean));
        }
        slopes.push_back((log_c[1] - log_c[0]) / (log_r[1] - log_r[0]));
    }
    bool exponent_ok = true;
    for (double s : slopes) exponent_ok = exponent_ok && std::abs(s - 2.0) <= 0.4;
    return {within && exponent_ok, fmt("max mean/bound = %.3g (<= 1); R exponents N=6,8,10: %.2f %.2f %.2f (2.0 +- 0.4)",
                                       worst_ratio, slopes[0], slopes[1], slopes[2])};
}

// ---- 5 ------------------------------------------------------------------------

Outcome trotter_convergence()
{
    const int n = 8, R = 8;
    const double J = 1.0, T = 1.0;
    const std::size_t reps = 10;
    const BasisPtr basis = make_basis(n, Sector::fixed(n / 2));
    std::vector<double> du;
    for (double dt : {0.1, 0.05, 0.02, 0.01}) {
        const auto v = parallel_map(reps, kThreads, [&](std::size_t s) {
            return delta_u(build_layers(basis, J, R, stream_seed(500, s)).layers, dt,
                           static_cast<int>(std::lround(T / dt)))
                .mean;
        });
        double mean = 0.0;
        for (double x : v) mean += x / static_cast<double>(reps);
        du.push_back(mean);
    }
    bool monotone = true;
    for (std::size_t k = 1; k < du.size(); ++k) monotone = monotone && du[k] < du[k - 1];
    double single = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s)
        single = std::max(single, delta_u(build_layers(basis, J, 1, stream_seed(501, s)).layers, 0.01, 100).mean);
    return {monotone && single < 1e-9,
            fmt("dU(dt = 0.1, 0.05, 0.02, 0.01) = %.3g %.3g %.3g %.3g; dU(R = 1) = %.2g (< 1e-9)", du[0], du[1],
                du[2], du[3], single)};
}

// ---- 6 ------------------------------------------------------------------------

Outcome sff_morphology()
{
    const int n = 10;
    const double J = 1.0, dt = 0.01;
    const std::size_t reps = 50;
    const BasisPtr basis = make_basis(n, Sector::fixed(n / 2));
    const double d = static_cast<double>(basis->dimension());

    // Stroboscopic log grid: multiples of dt from dt to 2000.
    std::vector<double> times{0.0};
    for (double t : log_time_grid(dt, 2000.0, 160)) {
        const double snapped = std::max(1.0, std::round(t / dt)) * dt;
        if (snapped > times.back()) times.push_back(snapped);
    }

    const TimeSeries dense = disorder_average(
        [&](std::size_t s) {
            Rng rng = make_stream(600, s);
            return sff_exact(build_hamiltonian(basis, sample_dense_gaussian(n, J, rng)), times);
        },
        reps, kThreads);

    // Plateau: mean over t >= 500; dip: minimum; ramp: log-log slope between the
    // dip and the first time the curve reaches 80% of the plateau.
    double plateau = 0.0;
    int late = 0;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] >= 500.0) {
            plateau += dense.values[k];
            ++late;
        }
    plateau /= late;
    std::size_t dip = 1;
    for (std::size_t k = 1; k < times.size(); ++k)
        if (dense.values[k] < dense.values[dip]) dip = k;
    std::size_t reach = dip;
    while (reach + 1 < times.size() && dense.values[reach] < 0.8 * plateau) ++reach;
    std::vector<double> lx, ly;
    for (std::size_t k = dip; k <= reach; ++k) {
        lx.push_back(std::log(times[k]));
        ly.push_back(std::log(dense.values[k]));
    }
    const double ramp = lx.size() >= 3 ? stats::fit_line(lx, ly).slope : 0.0;
    const bool sff0 = dense.values.front() == 1.0;
    const bool plateau_ok = std::abs(plateau * d - 1.0) < 0.2;
    const bool dip_ok = dense.values[dip] < plateau;
    const bool ramp_ok = ramp > 0.5;

    // Trotter accuracy: the circuit approximates the low-rank H_sim with R = N layers.
    const auto per = parallel_map(reps, kThreads, [&](std::size_t s) {
        const LayerSet set = build_layers(basis, J, n, stream_seed(601, s));
        return std::pair{sff_exact(set.h_sim, times), sff_trotter(set.layers, dt, times)};
    });
    const TimeSeries ex = disorder_average([&](std::size_t s) { return per[s].first; }, reps, 1);
    const TimeSeries tr = disorder_average([&](std::size_t s) { return per[s].second; }, reps, 1);
    double worst = 0.0, worst_t = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double rel = std::abs(tr.values[k] - ex.values[k]) / ex.values[k];
        if (rel > worst) {
            worst = rel;
            worst_t = times[k];
        }
    }
    const bool trotter_ok = worst <= 0.05;
    return {sff0 && plateau_ok && dip_ok && ramp_ok && trotter_ok,
            fmt("SFF(0) = %.15g; plateau*D = %.3f; dip %.3g/D at t = %.3g; ramp slope %.2f; "
                "Trotter max rel dev %.3g at t = %.4g (<= 0.05)",
                dense.values.front(), plateau * d, dense.values[dip] * d, times[dip], ramp, worst, worst_t)};
}

// ---- 7 ------------------------------------------------------------------------

Outcome speckle_classes()
{
    const auto ens = speckle_ensemble(SpeckleConfig{}, 10, 200, 7, kThreads);
    const auto cls = class_variance_scan(ens);
    const ClassStatistics& dg = cls[0];
    const ClassStatistics& od = cls[2];
    const bool ratio = od.variance < dg.variance / 5.0;
    const bool bessel = od.ks_bessel < od.ks_gaussian;
    const bool gauss = dg.ks_gaussian_p > 0.01;
    return {ratio && bessel && gauss,
            fmt("var O/D = %.3g (< 0.2); O: KS Bessel %.4f vs Gaussian %.4f; D: Gaussian KS p = %.3g (> 0.01)",
                od.variance / dg.variance, od.ks_bessel, od.ks_gaussian, dg.ks_gaussian_p)};
}

// ---- 8 ------------------------------------------------------------------------

Outcome jk_decorrelation_scan()
{
    const auto ens = speckle_ensemble(SpeckleConfig{}, 10, 3200, 9, kThreads);
    const DecorrelationScan scan = jk_decorrelation(ens, {1, 2, 4, 8, 16});
    std::string cs;
    for (const auto& p : scan.points) cs += fmt("%s%.3f", cs.empty() ? "" : ",", p.correlation);
    return {scan.decreasing && scan.r_squared > 0.8,
            fmt("|corr| over R = 1..16: {%s}; c = %.3f, fit R^2 = %.3f (> 0.8)", cs.c_str(), scan.c, scan.r_squared)};
}

// ---- 9 ------------------------------------------------------------------------

Outcome sd_solver()
{
    const TimeGrid grid{50.0, 4096};
    const SolverOptions opts;
    const SdSolution free = solve_sd({0.0, 0.0, 1.0}, grid, opts);
    const double free_dev = max_abs_difference(free.green, free_green(grid));

    const SdSolution k0 = solve_sd({1.0, 0.0, 1.0}, grid, opts);
    const SdSolution kh = solve_sd({1.0, 0.5, 1.0}, grid, opts);
    const double residual = k0.residual_history.back();

    const int o = grid.origin();
    int first_rise = -1;
    for (int j = o + 1; j < grid.n; ++j) {
        if (grid.time(j) <= 2.0) continue;
        if (std::abs(k0.green(Plus, Minus)(j)) > std::abs(k0.green(Plus, Minus)(j - 1))) {
            first_rise = j;
            break;
        }
    }
    int violations = 0;
    double first_violation = 0.0;
    for (int j = o + 1; j < grid.n; ++j)
        if (std::abs(kh.green(Plus, Minus)(j)) > std::abs(k0.green(Plus, Minus)(j))) {
            if (violations++ == 0) first_violation = grid.time(j);
        }
    const bool ok = free_dev <= opts.tol && residual < 1e-8 && first_rise < 0 && violations == 0;
    return {ok, fmt("free dev %.2g; K=0 residual %.2g (%d it); |G+-| first rises at t = %.3g (none allowed); "
                    "K=J/2 above K=0 at %d times, first t = %.3g",
                    free_dev, residual, k0.iterations, first_rise < 0 ? -1.0 : grid.time(first_rise), violations,
                    first_violation)};
}

// ---- 10 -----------------------------------------------------------------------

Outcome level_statistics()
{
    const int n = 12;
    const std::size_t reps = 20;
    const BasisPtr basis = make_basis(n, Sector::fixed(6));
    const auto r = parallel_map(reps, kThreads, [&](std::size_t s) {
        Rng rng = make_stream(1000, s);
        return level_spacing_r(build_hamiltonian(basis, sample_dense_gaussian(n, 1.0, rng))).r_mean;
    });
    double mean = 0.0;
    for (double x : r) mean += x / static_cast<double>(reps);
    double nearest = 0.0, best = 1e9;
    for (double ref : {0.536, 0.600, 0.674})
        if (std::abs(mean / ref - 1.0) < best) {
            best = std::abs(mean / ref - 1.0);
            nearest = ref;
        }

    Rng rng(1001);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double poisson = 0.0;
    for (int k = 0; k < 20; ++k) {
        std::vector<double> levels(4000);
        for (double& e : levels) e = u(rng);
        poisson += gap_ratio(levels).r_mean / 20.0;
    }
    std::normal_distribution<double> g(0.0, 1.0);
    double gue = 0.0;
    for (int k = 0; k < 6; ++k) {
        Eigen::MatrixXcd a(500, 500);
        for (Eigen::Index i = 0; i < 500; ++i)
            for (Eigen::Index j = 0; j < 500; ++j) a(i, j) = Complex(g(rng), g(rng));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
        const Eigen::VectorXd e = es.eigenvalues();
        gue += gap_ratio(std::vector<double>(e.data(), e.data() + e.size())).r_mean / 6.0;
    }
    const double p_ref = 2.0 * std::log(2.0) - 1.0;
    const bool ok = best < 0.02 && std::abs(poisson / p_ref - 1.0) < 0.02 && std::abs(gue / 0.600 - 1.0) < 0.02;
    return {ok, fmt("r = %.4f (nearest %.3f, %.2f%%); Poisson %.4f vs %.4f; GUE %.4f vs 0.600", mean, nearest,
                    100.0 * best, poisson, p_ref, gue)};
}

} // namespace

int main()
{
    const std::vector<Criterion> criteria{
        {1, "Bessel law of single low-rank couplings", 60, bessel_law},
        {2, "KL divergence scaling c/R^2", 60, kl_scaling},
        {3, "variance conventions", 60, variance_conventions},
        {4, "commutator bound and R^2 scaling", 600, commutator_bound},
        {5, "Trotter convergence", 900, trotter_convergence},
        {6, "SFF morphology and Trotterized SFF", 1800, sff_morphology},
        {7, "speckle class structure", 600, speckle_classes},
        {8, "J-K decorrelation", 600, jk_decorrelation_scan},
        {9, "Schwinger-Dyson solver", 900, sd_solver},
        {10, "level statistics", 600, level_statistics},
    };
    int failures = 0;
    for (const Criterion& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs <= c.budget_seconds;
        const bool pass = out.pass && in_time;
        if (!pass) ++failures;
        std::printf("%s [%d] %s: %s; %.1f s (budget %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                    out.detail.c_str(), secs, c.budget_seconds);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
