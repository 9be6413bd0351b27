#include "sparsesyk/disorder.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "sparsesyk/error.hpp"

namespace ssyk {

std::string to_string(CouplingClass c)
{
    switch (c) {
    case CouplingClass::Diagonal: return "D";
    case CouplingClass::AlmostDiagonal: return "A";
    case CouplingClass::OffDiagonal: return "O";
    }
    return "?";
}

std::string to_string(VarianceConvention v)
{
    return v == VarianceConvention::Dense2JsqN3 ? "Dense2JsqN3" : "Reduced2JsqN4";
}

CouplingClass coupling_class_from_string(const std::string& s)
{
    if (s == "D") return CouplingClass::Diagonal;
    if (s == "A") return CouplingClass::AlmostDiagonal;
    if (s == "O") return CouplingClass::OffDiagonal;
    throw DomainError("unknown coupling class '" + s + "'");
}

VarianceConvention variance_convention_from_string(const std::string& s)
{
    if (s == "Dense2JsqN3") return VarianceConvention::Dense2JsqN3;
    if (s == "Reduced2JsqN4") return VarianceConvention::Reduced2JsqN4;
    throw DomainError("unknown variance convention '" + s + "'");
}

CouplingClass classify_indices(int i, int j, int k, int l)
{
    if (!(i < j) || !(k < l)) throw DomainError("classify_indices: pairs must satisfy i < j and k < l");
    const int shared = (i == k) + (i == l) + (j == k) + (j == l);
    if (shared == 2) return CouplingClass::Diagonal;
    if (shared == 1) return CouplingClass::AlmostDiagonal;
    return CouplingClass::OffDiagonal;
}

PairIndex::PairIndex(int n_sites) : n_sites_(n_sites)
{
    if (n_sites < 2) throw DomainError("PairIndex: need at least two sites");
    for (int i = 0; i < n_sites; ++i)
        for (int j = i + 1; j < n_sites; ++j) pairs_.emplace_back(i, j);
}

Eigen::Index PairIndex::index(int i, int j) const
{
    if (!(0 <= i && i < j && j < n_sites_)) throw DomainError("PairIndex: expected 0 <= i < j < N");
    // Pairs starting at i are preceded by sum_{m<i} (N - 1 - m) entries.
    return static_cast<Eigen::Index>(i * (2 * n_sites_ - i - 1) / 2 + (j - i - 1));
}

CouplingTensor::CouplingTensor(int n_sites, VarianceConvention convention)
    : index_(n_sites), convention_(convention), entries_(Eigen::MatrixXcd::Zero(index_.size(), index_.size()))
{
}

void CouplingTensor::set_pair_entry(Eigen::Index p, Eigen::Index q, Complex value)
{
    if (p == q) {
        if (value.imag() != 0.0) throw DomainError("CouplingTensor: diagonal pair entries must be real");
        entries_(p, p) = value;
        return;
    }
    entries_(p, q) = value;
    entries_(q, p) = std::conj(value);
}

Complex CouplingTensor::operator()(int i, int j, int k, int l) const
{
    if (i == j || k == l) return 0.0;
    double sign = 1.0;
    if (i > j) {
        std::swap(i, j);
        sign = -sign;
    }
    if (k > l) {
        std::swap(k, l);
        sign = -sign;
    }
    return sign * entries_(index_.index(i, j), index_.index(k, l));
}

CouplingClass CouplingTensor::class_of(Eigen::Index p, Eigen::Index q) const
{
    const auto [i, j] = index_.pair(p);
    const auto [k, l] = index_.pair(q);
    return classify_indices(i, j, k, l);
}

CouplingTensor& CouplingTensor::operator+=(const CouplingTensor& other)
{
    if (other.n_sites() != n_sites()) throw DomainError("CouplingTensor: n_sites mismatch in sum");
    entries_ += other.entries_;
    return *this;
}

CouplingTensor& CouplingTensor::operator*=(double factor)
{
    entries_ *= factor;
    return *this;
}

bool CouplingTensor::operator==(const CouplingTensor& other) const
{
    return n_sites() == other.n_sites() && convention_ == other.convention_ && entries_ == other.entries_;
}

CouplingTensor operator+(CouplingTensor a, const CouplingTensor& b)
{
    a += b;
    return a;
}

CouplingTensor operator*(double factor, CouplingTensor t)
{
    t *= factor;
    return t;
}

double hermiticity_defect(const CouplingTensor& t)
{
    return (t.pair_matrix() - t.pair_matrix().adjoint()).cwiseAbs().maxCoeff();
}

RankTwoCoupling RankTwoCoupling::from_upper(const Eigen::MatrixXcd& upper, double variance_param)
{
    if (upper.rows() != upper.cols()) throw DomainError("RankTwoCoupling: matrix must be square");
    Eigen::MatrixXcd m(upper.rows(), upper.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        m(i, i) = upper(i, i).real();
        for (Eigen::Index k = i + 1; k < m.cols(); ++k) {
            m(i, k) = upper(i, k);
            m(k, i) = std::conj(upper(i, k));
        }
    }
    return RankTwoCoupling(std::move(m), variance_param);
}

namespace {

// Complex Gaussian with E|z|^2 = variance, or a real one with the same second moment.
Complex draw_entry(double variance, bool real_only, Rng& rng)
{
    std::normal_distribution<double> normal;
    if (real_only) return std::sqrt(variance) * normal(rng);
    const double s = std::sqrt(variance / 2.0);
    const double re = normal(rng);
    const double im = normal(rng);
    return {s * re, s * im};
}

template <typename VarianceOf>
CouplingTensor sample_gaussian_tensor(int n_sites, VarianceConvention convention, VarianceOf variance_of,
                                      Rng& rng, SamplingOptions options)
{
    CouplingTensor t(n_sites, convention);
    std::normal_distribution<double> normal;
    const Eigen::Index n_pairs = t.pairs().size();
    for (Eigen::Index p = 0; p < n_pairs; ++p) {
        for (Eigen::Index q = p; q < n_pairs; ++q) {
            const double variance = variance_of(t.class_of(p, q));
            if (p == q) {
                t.set_pair_entry(p, q, std::sqrt(variance) * normal(rng));
            } else {
                t.set_pair_entry(p, q, draw_entry(variance, options.real_only, rng));
            }
        }
    }
    return t;
}

} // namespace

CouplingTensor sample_dense_gaussian(int n_sites, double J, Rng& rng, SamplingOptions options)
{
    if (n_sites < 4) throw DomainError("sample_dense_gaussian: requires N >= 4");
    const double n = n_sites;
    const double variance = 2.0 * J * J / (n * n * n);
    return sample_gaussian_tensor(
        n_sites, VarianceConvention::Dense2JsqN3, [variance](CouplingClass) { return variance; }, rng, options);
}

RankTwoCoupling sample_rank_two(int n_sites, double sigma, Rng& rng, SamplingOptions options)
{
    if (n_sites < 1) throw DomainError("sample_rank_two: requires N >= 1");
    if (sigma < 0.0) throw DomainError("sample_rank_two: sigma must be >= 0");
    const double variance = sigma * sigma;
    std::normal_distribution<double> normal;
    Eigen::MatrixXcd upper = Eigen::MatrixXcd::Zero(n_sites, n_sites);
    for (int i = 0; i < n_sites; ++i) {
        upper(i, i) = sigma * normal(rng);
        for (int k = i + 1; k < n_sites; ++k) upper(i, k) = draw_entry(variance, options.real_only, rng);
    }
    return RankTwoCoupling::from_upper(upper, variance);
}

double calibrated_rank_two_sigma(int n_sites, double J)
{
    if (n_sites < 1 || J < 0.0) throw DomainError("calibrated_rank_two_sigma: need N >= 1 and J >= 0");
    return std::sqrt(J) / n_sites;
}

LowRankCoupling lowrank_tensor(const RankTwoCoupling& j2)
{
    const int n = j2.n_sites();
    const Eigen::MatrixXcd& J = j2.matrix();
    LowRankCoupling out{CouplingTensor(n, VarianceConvention::Reduced2JsqN4), Eigen::MatrixXcd()};
    const PairIndex& pairs = out.tensor.pairs();
    for (Eigen::Index p = 0; p < pairs.size(); ++p) {
        const auto [i, j] = pairs.pair(p);
        for (Eigen::Index q = p; q < pairs.size(); ++q) {
            const auto [k, l] = pairs.pair(q);
            Complex value = J(i, k) * J(j, l) - J(j, k) * J(i, l);
            // On the diagonal the expression is |J_ii J_jj| - |J_ij|^2, real up to rounding.
            if (p == q) value = value.real();
            out.tensor.set_pair_entry(p, q, value);
        }
    }
    const Eigen::MatrixXcd square = J * J;
    out.mass = -0.5 * (square + square.adjoint()) / 2.0;
    return out;
}

CouplingTensor sample_modsyk(int n_sites, double sigma_d, double sigma_a, double sigma_o, Rng& rng,
                             SamplingOptions options)
{
    if (n_sites < 4) throw DomainError("sample_modsyk: requires N >= 4");
    if (sigma_d < 0.0 || sigma_a < 0.0 || sigma_o < 0.0) throw DomainError("sample_modsyk: sigmas must be >= 0");
    const std::array<double, 3> variance{sigma_d * sigma_d, sigma_a * sigma_a, sigma_o * sigma_o};
    return sample_gaussian_tensor(
        n_sites, VarianceConvention::Dense2JsqN3,
        [&variance](CouplingClass c) { return variance[static_cast<std::size_t>(c)]; }, rng, options);
}

double bessel_pdf(double x, BesselScale scale)
{
    const double s = scale.product();
    if (!(s > 0.0)) throw DomainError("bessel_pdf: sigma1 * sigma2 must be positive");
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    const double u = std::abs(x) / s;
    if (u > 700.0) return 0.0;  // K0(u) ~ e^{-u} underflows; the library throws instead
    return std::cyl_bessel_k(0.0, u) / (std::numbers::pi * s);
}

namespace {

// Cumulative integral of K0 tabulated on a uniform grid; queries add a
// Gauss–Legendre correction inside the cell.
class K0Integral {
public:
    static constexpr double kStep = 0.05;
    static constexpr double kMax = 60.0;

    K0Integral()
    {
        const auto n = static_cast<std::size_t>(kMax / kStep) + 1;
        table_.resize(n);
        table_[0] = 0.0;
        table_[1] = head(kStep);
        for (std::size_t m = 2; m < n; ++m) table_[m] = table_[m - 1] + segment((m - 1) * kStep, m * kStep);
    }

    double operator()(double z) const
    {
        if (z <= 0.0) return 0.0;
        if (z >= kMax) return std::numbers::pi / 2.0;
        const auto m = static_cast<std::size_t>(z / kStep);
        if (m == 0) return head(z);
        return table_[m] + segment(m * kStep, z);
    }

private:
    static double k0(double u) { return std::cyl_bessel_k(0.0, u); }

    static double head(double z)
    {
        boost::math::quadrature::tanh_sinh<double> integrator;
        return integrator.integrate(k0, 0.0, z);
    }

    static double segment(double a, double b)
    {
        return boost::math::quadrature::gauss<double, 20>::integrate(k0, a, b);
    }

    std::vector<double> table_;
};

const K0Integral& k0_integral()
{
    static const K0Integral table;
    return table;
}

} // namespace

double bessel_cdf(double x, BesselScale scale)
{
    const double s = scale.product();
    if (!(s > 0.0)) throw DomainError("bessel_cdf: sigma1 * sigma2 must be positive");
    const double half_mass = k0_integral()(std::abs(x) / s) / std::numbers::pi;
    return x >= 0.0 ? 0.5 + half_mass : 0.5 - half_mass;
}

double sample_bessel(BesselScale scale, Rng& rng)
{
    std::normal_distribution<double> normal;
    const double g1 = scale.sigma1 * normal(rng);
    const double g2 = scale.sigma2 * normal(rng);
    return g1 * g2;
}

nlohmann::json to_json(const CouplingTensor& t)
{
    nlohmann::json entries = nlohmann::json::array();
    const PairIndex& pairs = t.pairs();
    for (Eigen::Index p = 0; p < pairs.size(); ++p) {
        const auto [i, j] = pairs.pair(p);
        for (Eigen::Index q = p; q < pairs.size(); ++q) {
            const auto [k, l] = pairs.pair(q);
            const Complex v = t.pair_entry(p, q);
            entries.push_back({{"i", i}, {"j", j}, {"k", k}, {"l", l}, {"re", v.real()}, {"im", v.imag()},
                               {"class", to_string(t.class_of(p, q))}});
        }
    }
    return {{"schema_version", 1},
            {"n_sites", t.n_sites()},
            {"variance_convention", to_string(t.variance_convention())},
            {"entries", std::move(entries)}};
}

CouplingTensor coupling_tensor_from_json(const nlohmann::json& j)
{
    try {
        if (j.at("schema_version").get<int>() != 1) throw DomainError("coupling tensor: unsupported schema_version");
        CouplingTensor t(j.at("n_sites").get<int>(),
                         variance_convention_from_string(j.at("variance_convention").get<std::string>()));
        for (const auto& e : j.at("entries")) {
            const int i = e.at("i"), jj = e.at("j"), k = e.at("k"), l = e.at("l");
            const Eigen::Index p = t.pairs().index(i, jj);
            const Eigen::Index q = t.pairs().index(k, l);
            if (p > q) throw DomainError("coupling tensor: entries must list P <= Q");
            if (coupling_class_from_string(e.at("class")) != t.class_of(p, q)) {
                throw DomainError("coupling tensor: class tag does not match indices");
            }
            t.set_pair_entry(p, q, Complex(e.at("re").get<double>(), e.at("im").get<double>()));
        }
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("coupling tensor: malformed JSON: ") + e.what());
    }
}

} // namespace ssyk
