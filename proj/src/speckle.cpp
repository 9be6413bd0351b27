#include "sparsesyk/speckle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <unsupported/Eigen/FFT>

#include "sparsesyk/error.hpp"
#include "sparsesyk/parallel.hpp"
#include "sparsesyk/stats.hpp"

namespace ssyk {

namespace {

using CVector = std::vector<std::complex<double>>;

// In-place 2D transform of a row-major n x n array.
void fft2(CVector& data, int n, bool inverse)
{
    Eigen::FFT<double> fft;
    CVector line(static_cast<std::size_t>(n)), out;
    const auto un = static_cast<std::size_t>(n);
    for (std::size_t r = 0; r < un; ++r) {
        std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(r * un), n, line.begin());
        inverse ? fft.inv(out, line) : fft.fwd(out, line);
        std::copy(out.begin(), out.end(), data.begin() + static_cast<std::ptrdiff_t>(r * un));
    }
    for (std::size_t c = 0; c < un; ++c) {
        for (std::size_t r = 0; r < un; ++r) line[r] = data[r * un + c];
        inverse ? fft.inv(out, line) : fft.fwd(out, line);
        for (std::size_t r = 0; r < un; ++r) data[r * un + c] = out[r];
    }
}

double wavenumber(int k, int n, double dx)
{
    const int shifted = k <= n / 2 ? k : k - n;
    return 2.0 * std::numbers::pi * shifted / (n * dx);
}

} // namespace

SpeckleField generate_speckle(const Grid2D& grid, const SpeckleParams& params, Rng& rng)
{
    if (grid.n < 8 || grid.n % 2 != 0) throw DomainError("generate_speckle: grid size must be even and >= 8");
    if (!(params.contrast >= 0.0 && params.contrast < 0.8)) {
        throw DomainError("generate_speckle: contrast must lie in [0, 0.8) to keep detuning above 0.2 of its mean");
    }
    if (!(params.mean_detuning > 0.0)) throw DomainError("generate_speckle: mean detuning must be positive");
    if (!(params.correlation_length >= 2.0 * grid.spacing())) {
        throw DomainError("generate_speckle: correlation length below two grid spacings");
    }

    // Field a = h * w with h a Gaussian of width rho = l / sqrt(2): the
    // amplitude correlation is exp(-dr^2 / (2 l^2)) and the intensity
    // autocovariance its square.
    const int n = grid.n;
    const double dx = grid.spacing();
    const double rho = params.correlation_length / std::sqrt(2.0);
    const auto points = static_cast<std::size_t>(grid.size());
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    CVector spectrum(points);
    double filter_power = 0.0;
    for (int ky = 0; ky < n; ++ky) {
        const double qy = wavenumber(ky, n, dx);
        for (int kx = 0; kx < n; ++kx) {
            const double qx = wavenumber(kx, n, dx);
            const double h = std::exp(-0.5 * rho * rho * (qx * qx + qy * qy));
            const double re = normal(rng);
            const double im = normal(rng);
            spectrum[static_cast<std::size_t>(ky) * n + kx] = h * std::complex<double>(re, im);
            filter_power += h * h;
        }
    }
    fft2(spectrum, n, true);
    // inv carries 1/points; E|a|^2 = filter_power / points^2 before rescaling.
    const double norm = static_cast<double>(points) / std::sqrt(filter_power);

    SpeckleField field{grid, Eigen::ArrayXd(grid.size()), Eigen::ArrayXd(grid.size()), params};
    for (std::size_t p = 0; p < points; ++p) {
        const auto idx = static_cast<Eigen::Index>(p);
        field.intensity(idx) = std::norm(spectrum[p] * norm);
        field.detuning(idx) = params.mean_detuning * (1.0 + params.contrast * (field.intensity(idx) - 1.0));
    }
    const double lowest = field.detuning.minCoeff();
    if (!(lowest > 0.0)) {
        throw NumericalError("generate_speckle: nonpositive detuning " + std::to_string(lowest) +
                             " (contrast " + std::to_string(params.contrast) + ")");
    }
    return field;
}

std::vector<double> intensity_autocovariance(const SpeckleField& field, int max_lag)
{
    const int n = field.grid.n;
    if (max_lag < 0 || max_lag >= n) throw DomainError("intensity_autocovariance: lag out of range");
    const Eigen::ArrayXd d = field.intensity - field.intensity.mean();
    const double var = d.square().mean();
    std::vector<double> out(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int lag = 0; lag <= max_lag; ++lag) {
        double total = 0.0;
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                const double here = d(y * n + x);
                total += here * d(y * n + (x + lag) % n);
                total += here * d(((y + lag) % n) * n + x);
            }
        }
        out[static_cast<std::size_t>(lag)] = total / (2.0 * n * n * var);
    }
    return out;
}

double hermite_gauss_1d(int n, double x, double width)
{
    const double u = x / width;
    const double norm = 1.0 / std::sqrt(std::pow(2.0, n) * std::tgamma(n + 1.0) * std::sqrt(std::numbers::pi) * width);
    return norm * std::hermite(static_cast<unsigned>(n), u) * std::exp(-0.5 * u * u);
}

ModeSet hermite_gauss_modes(const Grid2D& grid, int n_modes, double width)
{
    if (n_modes < 1) throw DomainError("hermite_gauss_modes: need at least one mode");
    if (!(width > 0.0)) throw DomainError("hermite_gauss_modes: width must be positive");
    if (2.0 * grid.half_extent < 8.0 * width) throw DomainError("hermite_gauss_modes: grid extent below 8 widths");

    ModeSet set{grid, width, {}, Eigen::MatrixXd(grid.size(), n_modes)};
    for (int shell = 0; static_cast<int>(set.quantum_numbers.size()) < n_modes; ++shell) {
        for (int nx = shell; nx >= 0 && static_cast<int>(set.quantum_numbers.size()) < n_modes; --nx) {
            set.quantum_numbers.emplace_back(nx, shell - nx);
        }
    }
    const int n = grid.n;
    for (int m = 0; m < n_modes; ++m) {
        const auto [nx, ny] = set.quantum_numbers[static_cast<std::size_t>(m)];
        std::vector<double> fx(static_cast<std::size_t>(n)), fy(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j) {
            fx[static_cast<std::size_t>(j)] = hermite_gauss_1d(nx, grid.coordinate(j), width);
            fy[static_cast<std::size_t>(j)] = hermite_gauss_1d(ny, grid.coordinate(j), width);
        }
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x)
                set.modes(y * n + x, m) = fx[static_cast<std::size_t>(x)] * fy[static_cast<std::size_t>(y)];
    }
    const Eigen::MatrixXd gram = gram_matrix(set);
    const double defect = (gram - Eigen::MatrixXd::Identity(n_modes, n_modes)).cwiseAbs().maxCoeff();
    if (defect > 1e-6) {
        throw NumericalError("hermite_gauss_modes: grid under-resolves " + std::to_string(n_modes) +
                             " modes (Gram defect " + std::to_string(defect) + ")");
    }
    return set;
}

Eigen::MatrixXd gram_matrix(const ModeSet& modes)
{
    const double area = modes.grid.spacing() * modes.grid.spacing();
    return modes.modes.transpose() * modes.modes * area;
}

namespace {

Eigen::MatrixXd weighted_overlap(const SpeckleField& field, const ModeSet& modes, int power)
{
    if (!(field.grid == modes.grid)) throw DomainError("speckle: field and modes live on different grids");
    const Eigen::ArrayXd ratio = field.detuning / field.params.mean_detuning;
    const Eigen::VectorXd weight = ratio.pow(-power).matrix();
    const double area = field.grid.spacing() * field.grid.spacing();
    Eigen::MatrixXd m = modes.modes.transpose() * weight.asDiagonal() * modes.modes * area;
    // Symmetrize exactly; the product above is symmetric only up to rounding.
    return 0.5 * (m + m.transpose());
}

} // namespace

RankTwoCoupling speckle_couplings(const SpeckleField& field, const ModeSet& modes, double energy_scale)
{
    if (energy_scale < 0.0) throw DomainError("speckle_couplings: energy scale must be >= 0");
    const Eigen::MatrixXd j = 0.5 * std::sqrt(energy_scale) * weighted_overlap(field, modes, 1);
    return RankTwoCoupling::from_upper(j.cast<Complex>(), 0.0);
}

Eigen::MatrixXd speckle_jump_couplings(const SpeckleField& field, const ModeSet& modes, double k_scale)
{
    return k_scale / std::sqrt(static_cast<double>(modes.count())) * weighted_overlap(field, modes, 2);
}

std::vector<SpeckleSample> speckle_ensemble(const SpeckleConfig& config, int n_modes, std::size_t n_fields,
                                            std::uint64_t seed, unsigned threads)
{
    const ModeSet modes = hermite_gauss_modes(config.grid, n_modes, config.width);
    return parallel_map(n_fields, threads, [&](std::size_t f) {
        Rng rng = make_stream(seed, f);
        const SpeckleField field = generate_speckle(config.grid, config.params, rng);
        return SpeckleSample{speckle_couplings(field, modes, config.energy_scale).matrix().real(),
                             speckle_jump_couplings(field, modes, config.k_scale)};
    });
}

namespace {

double reduced_entry(const Eigen::MatrixXd& j, int a, int b, int c, int d)
{
    return j(a, c) * j(b, d) - j(b, c) * j(a, d);
}

} // namespace

std::vector<ClassStatistics> class_variance_scan(const std::vector<SpeckleSample>& ensemble)
{
    if (ensemble.size() < 100) throw DomainError("class_variance_scan: need at least 100 samples");
    const int n = static_cast<int>(ensemble.front().j.rows());
    const PairIndex pairs(n);
    const std::size_t m = ensemble.size();

    std::vector<ClassStatistics> out(3);
    // standardized[class][entry][field]
    std::vector<std::vector<std::vector<double>>> standardized(3);
    for (int c = 0; c < 3; ++c) out[static_cast<std::size_t>(c)].coupling_class = static_cast<CouplingClass>(c);

    std::vector<double> values(m);
    for (Eigen::Index p = 0; p < pairs.size(); ++p) {
        const auto [a, b] = pairs.pair(p);
        for (Eigen::Index q = p; q < pairs.size(); ++q) {
            const auto [c, d] = pairs.pair(q);
            const auto cls = static_cast<std::size_t>(classify_indices(a, b, c, d));
            for (std::size_t s = 0; s < m; ++s) values[s] = reduced_entry(ensemble[s].j, a, b, c, d);
            const stats::Moments mo = stats::moments(values);
            ClassStatistics& st = out[cls];
            ++st.entries;
            st.mean_abs += std::abs(mo.mean);
            st.variance += mo.variance;
            if (!(mo.variance > 0.0)) continue;
            const double sd = std::sqrt(mo.variance);
            std::vector<double> z(m);
            for (std::size_t s = 0; s < m; ++s) z[s] = (values[s] - mo.mean) / sd;
            standardized[cls].push_back(std::move(z));
        }
    }
    const BesselScale unit{1.0, 1.0};
    const auto bessel = [&](double x) { return bessel_cdf(x, unit); };
    for (std::size_t c = 0; c < 3; ++c) {
        ClassStatistics& st = out[c];
        if (st.entries == 0) continue;
        st.mean_abs /= static_cast<double>(st.entries);
        st.variance /= static_cast<double>(st.entries);
        const auto& entries = standardized[c];
        if (entries.empty()) continue;
        std::vector<double> pooled, independent;
        for (const auto& e : entries) pooled.insert(pooled.end(), e.begin(), e.end());
        for (std::size_t s = 0; s < m; ++s) independent.push_back(entries[s % entries.size()][s]);
        st.samples = pooled.size();
        st.ks_gaussian = stats::ks_one_sample(pooled, stats::standard_normal_cdf).statistic;
        st.ks_bessel = stats::ks_one_sample(pooled, bessel).statistic;
        st.ks_gaussian_p = stats::ks_one_sample(independent, stats::standard_normal_cdf).p_value;
        st.ks_bessel_p = stats::ks_one_sample(independent, bessel).p_value;
    }
    return out;
}

namespace {

// Running sums for a Pearson correlation that can be merged across blocks.
struct PearsonSums {
    double n = 0, x = 0, y = 0, xx = 0, yy = 0, xy = 0;

    void add(double a, double b)
    {
        n += 1;
        x += a;
        y += b;
        xx += a * a;
        yy += b * b;
        xy += a * b;
    }

    PearsonSums minus(const PearsonSums& o) const
    {
        return {n - o.n, x - o.x, y - o.y, xx - o.xx, yy - o.yy, xy - o.xy};
    }

    double correlation() const
    {
        const double sxy = xy - x * y / n;
        const double sxx = xx - x * x / n;
        const double syy = yy - y * y / n;
        return sxy / std::sqrt(sxx * syy);
    }
};

} // namespace

DecorrelationScan jk_decorrelation(const std::vector<SpeckleSample>& ensemble, const std::vector<int>& r_list,
                                   bool independent_k)
{
    if (ensemble.empty()) throw DomainError("jk_decorrelation: empty ensemble");
    const int n = static_cast<int>(ensemble.front().j.rows());
    if (n < 4) throw DomainError("jk_decorrelation: need at least four modes");

    struct Entry {
        int a, b, c, d;
    };
    std::vector<Entry> entries;
    const PairIndex pairs(n);
    for (Eigen::Index p = 0; p < pairs.size(); ++p) {
        const auto [a, b] = pairs.pair(p);
        for (Eigen::Index q = p + 1; q < pairs.size(); ++q) {
            const auto [c, d] = pairs.pair(q);
            if (classify_indices(a, b, c, d) == CouplingClass::OffDiagonal) entries.push_back({a, b, c, d});
        }
    }

    DecorrelationScan scan;
    for (int r : r_list) {
        if (r < 1) throw DomainError("jk_decorrelation: R must be >= 1");
        const std::size_t groups = ensemble.size() / static_cast<std::size_t>(r);
        if (groups < 10) throw DomainError("jk_decorrelation: ensemble too small for R = " + std::to_string(r));
        std::vector<Eigen::MatrixXd> j_sums, k_sums;
        for (std::size_t g = 0; g < groups; ++g) {
            Eigen::MatrixXd ks = Eigen::MatrixXd::Zero(n, n);
            const std::size_t kg = independent_k ? (g + 1) % groups : g;
            for (int a = 0; a < r; ++a) ks += ensemble[kg * r + static_cast<std::size_t>(a)].k;
            k_sums.push_back(std::move(ks));
        }
        // Per entry: sums over all groups and over each jackknife block.
        const std::size_t blocks = std::min<std::size_t>(20, groups);
        double total = 0.0;
        std::vector<double> leave_out(blocks, 0.0);
        for (const Entry& e : entries) {
            PearsonSums all;
            std::vector<PearsonSums> block(blocks);
            for (std::size_t g = 0; g < groups; ++g) {
                double sum = 0.0;
                for (int a = 0; a < r; ++a) {
                    sum += reduced_entry(ensemble[g * r + static_cast<std::size_t>(a)].j, e.a, e.b, e.c, e.d);
                }
                const double kv = k_sums[g](e.a, e.c);
                all.add(sum * sum, kv * kv);
                block[g * blocks / groups].add(sum * sum, kv * kv);
            }
            total += all.correlation();
            for (std::size_t b = 0; b < blocks; ++b) leave_out[b] += all.minus(block[b]).correlation();
        }
        const double count = static_cast<double>(entries.size());
        const double mean = total / count;
        double jack_mean = 0.0;
        for (double& v : leave_out) {
            v /= count;
            jack_mean += v;
        }
        jack_mean /= static_cast<double>(blocks);
        double spread = 0.0;
        for (double v : leave_out) spread += (v - jack_mean) * (v - jack_mean);
        const double b = static_cast<double>(blocks);
        scan.points.push_back({r, groups, mean, std::sqrt((b - 1.0) / b * spread)});
    }

    std::vector<double> inv_r, abs_corr;
    for (const auto& p : scan.points) {
        inv_r.push_back(1.0 / p.R);
        abs_corr.push_back(std::abs(p.correlation));
    }
    if (scan.points.size() >= 2) {
        const stats::ProportionalFit fit = stats::fit_proportional(inv_r, abs_corr);
        scan.c = fit.coefficient;
        scan.r_squared = fit.r_squared;
    }
    scan.decreasing = true;
    for (std::size_t k = 1; k < abs_corr.size(); ++k) {
        if (!(abs_corr[k] < abs_corr[k - 1])) scan.decreasing = false;
    }
    return scan;
}

} // namespace ssyk
