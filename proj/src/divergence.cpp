#include "sparsesyk/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/distributions/students_t.hpp>
#include <unsupported/Eigen/FFT>

#include "sparsesyk/error.hpp"
#include "sparsesyk/stats.hpp"

namespace ssyk {

double DensityGrid::moment(int k) const
{
    double total = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) total += std::pow(x[j], k) * values[j];
    return total * dx;
}

std::vector<double> grid_points(const GridSpec& spec)
{
    if (spec.n_points < 2 || spec.n_points % 2 != 0) throw DomainError("GridSpec: n_points must be even and >= 2");
    if (!(spec.half_width > 0.0)) throw DomainError("GridSpec: half_width must be positive");
    const double dx = spec.spacing();
    std::vector<double> x(static_cast<std::size_t>(spec.n_points));
    for (int j = 0; j < spec.n_points; ++j) x[static_cast<std::size_t>(j)] = -spec.half_width + (j + 0.5) * dx;
    return x;
}

double convolved_bessel_tail_bound(BesselScale scale, int R, double L)
{
    const double s = scale.product();
    // log of the bound as a function of u = s theta in (0, 1); convex, so a
    // golden-section search finds the minimum.
    auto log_bound = [&](double u) { return -0.5 * R * std::log1p(-u * u) - u * L / s; };
    double a = 0.0, b = 1.0 - 1e-12;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
        const double c = b - g * (b - a);
        const double d = a + g * (b - a);
        if (log_bound(c) < log_bound(d)) b = d; else a = c;
    }
    return std::min(1.0, 2.0 * std::exp(log_bound(0.5 * (a + b))));
}

namespace {

DensityGrid finish(std::vector<double> x, std::vector<double> values, double dx)
{
    double total = 0.0;
    for (double v : values) total += v;
    DensityGrid g{std::move(x), std::move(values), dx, 0.0};
    g.normalization_residual = std::abs(total * dx - 1.0);
    return g;
}

} // namespace

DensityGrid convolved_bessel_density(BesselScale scale, int R, const GridSpec& spec)
{
    if (R < 1) throw DomainError("convolved_bessel_density: R must be >= 1");
    const double s = scale.product();
    if (!(s > 0.0)) throw DomainError("convolved_bessel_density: scale must be positive");
    const double tail = convolved_bessel_tail_bound(scale, R, spec.half_width);
    if (tail > 1e-8) {
        throw NumericalError("convolved_bessel_density: grid half-width " + std::to_string(spec.half_width) +
                             " leaves tail mass up to " + std::to_string(tail));
    }
    std::vector<double> x = grid_points(spec);
    const double dx = spec.spacing();
    const std::size_t n = x.size();

    if (R == 1) {
        std::vector<double> values(n);
        for (std::size_t j = 0; j < n; ++j) values[j] = bessel_pdf(x[j], scale);
        return finish(std::move(x), std::move(values), dx);
    }
    if (R == 2) {
        // The CF 1 / (1 + s^2 t^2) is the Laplace one. Its t^-2 tail would make
        // the truncated transform converge only like dx near the kink at 0.
        std::vector<double> values(n);
        for (std::size_t j = 0; j < n; ++j) values[j] = std::exp(-std::abs(x[j]) / s) / (2.0 * s);
        return finish(std::move(x), std::move(values), dx);
    }

    // f(x_j) = (dt / 2 pi) sum_k phi(t_k) e^{-i t_k x_j} with t_k = (k - n/2) dt,
    // dt = 2 pi / (n dx). Writing x_j = x_0 + j dx turns the sum into a forward
    // DFT of phi(t_k) e^{-i t_k x_0}, times (-1)^j.
    const double dt = 2.0 * std::numbers::pi / (static_cast<double>(n) * dx);
    const double x0 = x.front();
    std::vector<std::complex<double>> in(n), out;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = (static_cast<double>(k) - static_cast<double>(n / 2)) * dt;
        const double phi = std::pow(1.0 + s * s * t * t, -0.5 * R);
        in[k] = phi * std::polar(1.0, -t * x0);
    }
    Eigen::FFT<double> fft;
    fft.fwd(out, in);
    std::vector<double> values(n);
    const double peak = std::abs(out[n / 2].real()) * dt / (2.0 * std::numbers::pi);
    for (std::size_t j = 0; j < n; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        double v = sign * out[j].real() * dt / (2.0 * std::numbers::pi);
        // Round-off from the transform is ~1e-16 of the peak; clip it at zero.
        if (v < 0.0 && -v < 1e-12 * peak) v = 0.0;
        values[j] = v;
    }
    return finish(std::move(x), std::move(values), dx);
}

DensityGrid gaussian_density(double variance, const GridSpec& spec)
{
    if (!(variance > 0.0)) throw DomainError("gaussian_density: variance must be positive");
    std::vector<double> x = grid_points(spec);
    std::vector<double> values(x.size());
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * variance);
    for (std::size_t j = 0; j < x.size(); ++j) values[j] = norm * std::exp(-x[j] * x[j] / (2.0 * variance));
    return finish(std::move(x), std::move(values), spec.spacing());
}

double kl_numeric(const DensityGrid& p, const DensityGrid& q)
{
    if (p.x.size() != q.x.size() || p.dx != q.dx || (!p.x.empty() && p.x.front() != q.x.front())) {
        throw DomainError("kl_numeric: densities live on different grids");
    }
    double total = 0.0;
    for (std::size_t j = 0; j < p.values.size(); ++j) {
        const double pj = p.values[j];
        if (!(pj > 1e-300)) continue;
        const double qj = q.values[j];
        if (!(qj > 0.0)) {
            throw DomainError("kl_numeric: q vanishes at x = " + std::to_string(p.x[j]) + " where p > 0");
        }
        total += pj * std::log(pj / qj);
    }
    return total * p.dx;
}

namespace {

KlFit fit_scan(const std::vector<int>& r, const std::vector<double>& d)
{
    const std::size_t n = r.size();
    std::vector<double> inv_r(n), scaled(n);
    for (std::size_t k = 0; k < n; ++k) {
        inv_r[k] = 1.0 / r[k];
        scaled[k] = d[k] * r[k] * r[k];
    }
    const stats::LineFit line = stats::fit_line(inv_r, scaled);
    KlFit fit;
    fit.c = line.intercept;
    fit.d = line.slope;
    fit.c_stderr = line.intercept_stderr;
    double t_crit = 1.96;
    if (n > 2) {
        const boost::math::students_t dist(static_cast<double>(n - 2));
        t_crit = boost::math::quantile(boost::math::complement(dist, 0.025));
    }
    fit.c_ci_low = fit.c - t_crit * fit.c_stderr;
    fit.c_ci_high = fit.c + t_crit * fit.c_stderr;

    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = 1.0 / (static_cast<double>(r[k]) * r[k]);
    const stats::ProportionalFit prop = stats::fit_proportional(x, d);
    fit.c_leading_only = prop.coefficient;
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k) worst = std::max(worst, std::abs(d[k] - prop.coefficient * x[k]));
    fit.asymptotic_warning = worst > 0.1 * *std::min_element(d.begin(), d.end());
    return fit;
}

} // namespace

KlScan kl_scaling_scan(const std::vector<int>& r_list, double dx)
{
    if (r_list.size() < 3) throw DomainError("kl_scaling_scan: need at least three R values");
    for (int r : r_list) {
        if (r < 4) throw DomainError("kl_scaling_scan: all R must be >= 4");
    }
    if (!(dx > 0.0)) throw DomainError("kl_scaling_scan: dx must be positive");

    KlScan scan;
    std::vector<double> forward, reverse;
    for (int r : r_list) {
        // Unit variance: R products of scale s with R s^2 = 1.
        const double sigma = std::pow(static_cast<double>(r), -0.25);
        const BesselScale scale{sigma, sigma};
        double half_width = 6.5;  // Gaussian tail beyond is < 1e-10
        while (convolved_bessel_tail_bound(scale, r, half_width) > 1e-9) half_width += 0.5;
        int n_points = 2 * static_cast<int>(std::ceil(half_width / dx));
        const GridSpec spec{n_points * dx / 2.0, n_points};

        const DensityGrid q = convolved_bessel_density(scale, r, spec);
        const DensityGrid p = gaussian_density(1.0, spec);
        KlPoint point{r, kl_numeric(p, q), kl_numeric(q, p), spec.half_width};
        forward.push_back(point.forward);
        reverse.push_back(point.reverse);
        scan.points.push_back(point);
    }
    scan.forward_fit = fit_scan(r_list, forward);
    scan.reverse_fit = fit_scan(r_list, reverse);
    scan.strictly_decreasing = true;
    for (std::size_t k = 1; k < forward.size(); ++k) {
        if (!(r_list[k] > r_list[k - 1] && forward[k] < forward[k - 1])) scan.strictly_decreasing = false;
    }
    return scan;
}

} // namespace ssyk
