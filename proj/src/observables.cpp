#include "sparsesyk/observables.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "sparsesyk/error.hpp"
#include "sparsesyk/parallel.hpp"
#include "sparsesyk/trotter.hpp"

namespace ssyk {

void TimeSeries::validate() const
{
    if (times.size() != values.size()) throw DomainError("TimeSeries: times and values differ in length");
    if (!stderr_values.empty() && stderr_values.size() != values.size()) {
        throw DomainError("TimeSeries: stderr length mismatch");
    }
    for (std::size_t k = 1; k < times.size(); ++k) {
        if (!(times[k] > times[k - 1])) throw DomainError("TimeSeries: times must be strictly increasing");
    }
}

std::vector<double> linear_time_grid(double t_min, double t_max, int count)
{
    if (count < 2 || !(t_max > t_min)) throw DomainError("linear_time_grid: need count >= 2 and t_max > t_min");
    std::vector<double> t(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) t[static_cast<std::size_t>(k)] = t_min + (t_max - t_min) * k / (count - 1);
    return t;
}

std::vector<double> log_time_grid(double t_min, double t_max, int count)
{
    if (count < 2 || !(t_min > 0.0) || !(t_max > t_min)) {
        throw DomainError("log_time_grid: need count >= 2 and 0 < t_min < t_max");
    }
    std::vector<double> t(static_cast<std::size_t>(count));
    const double ratio = std::log(t_max / t_min);
    for (int k = 0; k < count; ++k) t[static_cast<std::size_t>(k)] = t_min * std::exp(ratio * k / (count - 1));
    return t;
}

std::string describe(const Sector& s)
{
    return s.is_fixed() ? "Q=" + std::to_string(s.charge) : "full";
}

Eigen::VectorXd energy_levels(const HamiltonianMatrix& h)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h.matrix, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("energy_levels: eigendecomposition failed");
    return eig.eigenvalues();
}

namespace {

TimeSeries series_for(const HamiltonianMatrix& h, const std::vector<double>& times, std::string name)
{
    TimeSeries out;
    out.times = times;
    out.values.reserve(times.size());
    out.meta.observable = std::move(name);
    out.meta.n_sites = h.basis->n_sites();
    out.meta.sector = describe(h.basis->sector());
    out.meta.seed = h.provenance.seed;
    return out;
}

} // namespace

TimeSeries sff_exact(const HamiltonianMatrix& h, const std::vector<double>& times)
{
    TimeSeries out = series_for(h, times, "sff");
    const Eigen::VectorXd e = energy_levels(h);
    const double d = static_cast<double>(e.size());
    for (double t : times) {
        Complex sum = 0.0;
        for (Eigen::Index k = 0; k < e.size(); ++k) sum += std::polar(1.0, -e(k) * t);
        out.values.push_back(std::norm(sum) / (d * d));
    }
    out.validate();
    return out;
}

TimeSeries sff_trace(const HamiltonianMatrix& h, const std::vector<double>& times)
{
    TimeSeries out = series_for(h, times, "sff");
    const double d = static_cast<double>(h.dimension());
    for (double t : times) {
        const Complex tr = exact_evolution(h, t).matrix.trace();
        out.values.push_back(std::norm(tr) / (d * d));
    }
    out.validate();
    return out;
}

TimeSeries sff_trotter(const std::vector<HamiltonianMatrix>& layers, double dt, const std::vector<double>& times)
{
    if (!(dt > 0.0)) throw DomainError("sff_trotter: dt must be positive");
    std::vector<long long> steps;
    for (double t : times) {
        const double n = t / dt;
        const double rounded = std::round(n);
        if (std::abs(n - rounded) > 1e-9 * std::max(1.0, std::abs(n)) || rounded < 0) {
            throw DomainError("sff_trotter: time " + std::to_string(t) + " is not a multiple of dt");
        }
        steps.push_back(static_cast<long long>(rounded));
    }
    const Eigen::MatrixXcd w = cycle_unitary(layers, dt).matrix;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(w, false);
    if (eig.info() != Eigen::Success) throw NumericalError("sff_trotter: eigendecomposition of the cycle failed");
    // Project eigenvalues back onto the unit circle before raising them to large powers.
    Eigen::VectorXcd phases = eig.eigenvalues();
    for (Eigen::Index k = 0; k < phases.size(); ++k) phases(k) /= std::abs(phases(k));

    TimeSeries out = series_for(layers.front(), times, "sff_trotter");
    out.meta.layers = static_cast<int>(layers.size());
    for (long long n : steps) {
        Complex sum = 0.0;
        for (Eigen::Index k = 0; k < phases.size(); ++k) sum += std::polar(1.0, std::arg(phases(k)) * static_cast<double>(n));
        const double d = static_cast<double>(phases.size());
        out.values.push_back(std::norm(sum) / (d * d));
    }
    out.validate();
    return out;
}

double mean_relative_deviation(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size() || a.empty()) throw DomainError("relative deviation: size mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) total += std::abs(a[k] - b[k]) / std::abs(b[k]);
    return total / static_cast<double>(a.size());
}

double max_relative_deviation(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size() || a.empty()) throw DomainError("relative deviation: size mismatch");
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]) / std::abs(b[k]));
    return worst;
}

namespace {

Eigen::MatrixXcd site_operator(const BasisPtr& basis, int site, OtocOperator kind)
{
    const Eigen::Index dim = basis->dimension();
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        const State s = basis->state(col);
        if (kind == OtocOperator::Number) {
            op(col, col) = (s >> site) & 1u ? 1.0 : -1.0;
            continue;
        }
        for (const Amplitude a : {annihilate(s, site), create(s, site)}) {
            if (!a.sign) continue;
            op(*basis->index_of(a.state), col) += static_cast<double>(a.sign);
        }
    }
    return op;
}

} // namespace

OtocResult otoc(const HamiltonianMatrix& h, int site_w, int site_v, const std::vector<double>& times,
                OtocOperator kind)
{
    const int n = h.basis->n_sites();
    if (site_w == site_v) throw DomainError("otoc: sites must be distinct");
    if (site_w < 0 || site_v < 0 || site_w >= n || site_v >= n) throw DomainError("otoc: site out of range");
    if (h.basis->sector().is_fixed()) throw DomainError("otoc: requires the full Fock space");

    const Eigen::MatrixXcd w = site_operator(h.basis, site_w, kind);
    const Eigen::MatrixXcd v = site_operator(h.basis, site_v, kind);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(h.matrix);
    if (eig.info() != Eigen::Success) throw NumericalError("otoc: eigendecomposition failed");
    const Eigen::MatrixXcd& p = eig.eigenvectors();
    const Eigen::VectorXd& e = eig.eigenvalues();
    const Eigen::MatrixXcd w_eig = p.adjoint() * w * p;
    const Eigen::MatrixXcd v_eig = p.adjoint() * v * p;
    const Eigen::Index dim = h.dimension();

    OtocResult out{series_for(h, times, "otoc_f"), series_for(h, times, "otoc_c"), 0.0};
    Eigen::MatrixXcd wt(dim, dim);
    for (double t : times) {
        // W(t) = e^{iHt} W e^{-iHt} in the eigenbasis.
        for (Eigen::Index c = 0; c < dim; ++c)
            for (Eigen::Index r = 0; r < dim; ++r) wt(r, c) = w_eig(r, c) * std::polar(1.0, (e(r) - e(c)) * t);
        const Eigen::MatrixXcd a = wt * v_eig;
        const Complex f = (a * a).trace() / static_cast<double>(dim);
        out.f.values.push_back(f.real());
        out.max_imaginary = std::max(out.max_imaginary, std::abs(f.imag()));
    }
    const double f0 = kind == OtocOperator::Quadrature ? -1.0 : 1.0;
    for (double f : out.f.values) out.c.values.push_back(2.0 * (1.0 - f / f0));
    out.f.validate();
    return out;
}

GapRatio gap_ratio(std::vector<double> levels, double degeneracy_tol)
{
    if (levels.size() < 8) throw DomainError("gap_ratio: need at least 8 levels");
    std::sort(levels.begin(), levels.end());
    const std::size_t lo = levels.size() / 4;
    const std::size_t hi = levels.size() - levels.size() / 4;
    const double scale = std::max(1.0, levels.back() - levels.front());
    GapRatio out;
    double total = 0.0;
    for (std::size_t k = lo + 1; k + 1 < hi; ++k) {
        const double s1 = levels[k] - levels[k - 1];
        const double s2 = levels[k + 1] - levels[k];
        if (s1 < degeneracy_tol * scale || s2 < degeneracy_tol * scale) {
            ++out.degenerate_gaps;
            continue;
        }
        total += std::min(s1, s2) / std::max(s1, s2);
        ++out.n_ratios;
    }
    out.degenerate = out.degenerate_gaps > 0;
    if (out.n_ratios == 0) throw NumericalError("gap_ratio: spectrum is fully degenerate");
    out.r_mean = total / static_cast<double>(out.n_ratios);
    return out;
}

GapRatio level_spacing_r(const HamiltonianMatrix& h)
{
    if (!h.basis->sector().is_fixed()) throw DomainError("level_spacing_r: requires a FixedCharge sector");
    const Eigen::VectorXd e = energy_levels(h);
    return gap_ratio(std::vector<double>(e.data(), e.data() + e.size()));
}

TimeSeries disorder_average(const std::function<TimeSeries(std::size_t)>& generator, std::size_t n_realizations,
                            unsigned threads)
{
    if (n_realizations < 2) throw DomainError("disorder_average: need at least two realizations");
    const std::vector<TimeSeries> runs = parallel_map(n_realizations, threads, generator);
    TimeSeries out;
    out.times = runs.front().times;
    out.meta = runs.front().meta;
    out.meta.ensemble_size = static_cast<int>(n_realizations);
    const std::size_t points = out.times.size();
    out.values.assign(points, 0.0);
    out.stderr_values.assign(points, 0.0);
    const double n = static_cast<double>(n_realizations);
    for (const auto& r : runs) {
        if (r.values.size() != points) throw DomainError("disorder_average: realizations differ in length");
        for (std::size_t k = 0; k < points; ++k) out.values[k] += r.values[k];
    }
    for (auto& v : out.values) v /= n;
    for (const auto& r : runs) {
        for (std::size_t k = 0; k < points; ++k) {
            const double d = r.values[k] - out.values[k];
            out.stderr_values[k] += d * d;
        }
    }
    for (auto& s : out.stderr_values) s = std::sqrt(s / (n - 1.0) / n);
    return out;
}

} // namespace ssyk
