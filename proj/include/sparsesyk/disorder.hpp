// disorder.hpp: coupling distributions: dense Gaussian SYK tensors, rank-two
// matrices, the low-rank tensors built from them, modSYK and the Bessel law.

#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sparsesyk/rng.hpp"

namespace ssyk {

using Complex = std::complex<double>;

enum class CouplingClass { Diagonal, AlmostDiagonal, OffDiagonal };

enum class VarianceConvention { Dense2JsqN3, Reduced2JsqN4 };

std::string to_string(CouplingClass c);
std::string to_string(VarianceConvention v);
CouplingClass coupling_class_from_string(const std::string& s);
VarianceConvention variance_convention_from_string(const std::string& s);

// Class of the canonical entry (i<j),(k<l). Throws DomainError for unsorted pairs.
CouplingClass classify_indices(int i, int j, int k, int l);

// Enumeration of unordered pairs i<j in lexicographic order.
class PairIndex {
public:
    explicit PairIndex(int n_sites);

    int n_sites() const { return n_sites_; }
    Eigen::Index size() const { return static_cast<Eigen::Index>(pairs_.size()); }
    std::pair<int, int> pair(Eigen::Index p) const { return pairs_[static_cast<std::size_t>(p)]; }
    Eigen::Index index(int i, int j) const;  // requires i < j

private:
    int n_sites_;
    std::vector<std::pair<int, int>> pairs_;
};

// Rank-4 coupling set J_ijkl stored as a Hermitian matrix over canonical pairs:
// entry (P, Q) with P = (i<j), Q = (k<l) multiplies c†_i c†_j c_k c_l.
// Hermiticity of the matrix is exactly J_lkji = conj(J_ijkl).
class CouplingTensor {
public:
    CouplingTensor(int n_sites, VarianceConvention convention);

    int n_sites() const { return index_.n_sites(); }
    const PairIndex& pairs() const { return index_; }
    VarianceConvention variance_convention() const { return convention_; }

    const Eigen::MatrixXcd& pair_matrix() const { return entries_; }
    Complex pair_entry(Eigen::Index p, Eigen::Index q) const { return entries_(p, q); }

    // Sets (p, q) and its Hermitian partner. Diagonal entries (p == q) must be real.
    void set_pair_entry(Eigen::Index p, Eigen::Index q, Complex value);

    // J_ijkl for arbitrary indices via the antisymmetric extension; zero when i == j or k == l.
    Complex operator()(int i, int j, int k, int l) const;

    CouplingClass class_of(Eigen::Index p, Eigen::Index q) const;

    CouplingTensor& operator+=(const CouplingTensor& other);
    CouplingTensor& operator*=(double factor);

    bool operator==(const CouplingTensor& other) const;

private:
    PairIndex index_;
    VarianceConvention convention_;
    Eigen::MatrixXcd entries_;
};

CouplingTensor operator+(CouplingTensor a, const CouplingTensor& b);
CouplingTensor operator*(double factor, CouplingTensor t);

// Max deviation from Hermiticity of the pair matrix (exactly zero for sampled tensors).
double hermiticity_defect(const CouplingTensor& t);

// Hermitian N x N rank-two coupling J_ik, stored as a full matrix.
class RankTwoCoupling {
public:
    // Builds the matrix from the upper triangle and the real part of the
    // diagonal of `upper`, so Hermiticity holds exactly.
    static RankTwoCoupling from_upper(const Eigen::MatrixXcd& upper, double variance_param);

    int n_sites() const { return static_cast<int>(matrix_.rows()); }
    const Eigen::MatrixXcd& matrix() const { return matrix_; }
    double variance_param() const { return variance_; }

private:
    RankTwoCoupling(Eigen::MatrixXcd m, double variance) : matrix_(std::move(m)), variance_(variance) {}

    Eigen::MatrixXcd matrix_;
    double variance_;
};

struct SamplingOptions {
    // Draw real couplings only (cross-check mode); complex Hermitian otherwise.
    bool real_only = false;
};

// Dense cSYK couplings with E|J_PQ|^2 = 2 J^2 / N^3 for every independent entry.
CouplingTensor sample_dense_gaussian(int n_sites, double J, Rng& rng, SamplingOptions options = {});

// Hermitian rank-two matrix with E|J_ik|^2 = sigma^2 (diagonal real, mean zero).
RankTwoCoupling sample_rank_two(int n_sites, double sigma, Rng& rng, SamplingOptions options = {});

// Per-element rank-two standard deviation that calibrates the low-rank tensor
// to E|J^red|^2 = 2 J^2 / N^4 on disjoint index sets: sigma^2 = J / N^2.
double calibrated_rank_two_sigma(int n_sites, double J);

struct LowRankCoupling {
    CouplingTensor tensor;
    // Quadratic term accompanying the tensor so that the layer Hamiltonian is
    // the normal-ordered -O^2/2 with O = sum J_ik c†_i c_k: M = -J^2 / 2.
    Eigen::MatrixXcd mass;
};

// J^red_ijkl = J_ik J_jl - J_jk J_il on canonical pairs, plus the mass matrix.
LowRankCoupling lowrank_tensor(const RankTwoCoupling& j2);

// modSYK: independent Gaussians whose variance depends on the coupling class.
// Each sigma is the standard deviation of |J| for its class.
CouplingTensor sample_modsyk(int n_sites, double sigma_d, double sigma_a, double sigma_o, Rng& rng,
                             SamplingOptions options = {});

struct BesselScale {
    double sigma1 = 1.0;
    double sigma2 = 1.0;

    double product() const { return sigma1 * sigma2; }
};

// Density of a product of two zero-mean Gaussians with standard deviations
// sigma1, sigma2: K0(|x| / s) / (pi s), s = sigma1 sigma2. Returns +infinity at x = 0.
double bessel_pdf(double x, BesselScale scale);

// CDF of the same law (numerical quadrature of the K0 density).
double bessel_cdf(double x, BesselScale scale);

double sample_bessel(BesselScale scale, Rng& rng);

// JSON round trip: {schema_version, n_sites, variance_convention,
// entries: [{i, j, k, l, re, im, class}]} listing each independent entry (P <= Q) once.
nlohmann::json to_json(const CouplingTensor& t);
CouplingTensor coupling_tensor_from_json(const nlohmann::json& j);

} // namespace ssyk
