// fock.hpp: fermionic many-body bases and Jordan–Wigner operator matrices
//
// Convention: site 0 is the least significant bit of an occupation bitstring
// and c_i = (prod_{m<i} Z_m) sigma^-_i, so moving an operator past an occupied
// lower site costs a factor -1.

#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Sparse>

namespace ssyk {

using State = std::uint32_t;
using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor, std::int64_t>;

struct Sector {
    enum class Kind { FullSpace, FixedCharge };

    Kind kind = Kind::FullSpace;
    int charge = 0;  // meaningful for FixedCharge only

    static Sector full() { return {Kind::FullSpace, 0}; }
    static Sector fixed(int q) { return {Kind::FixedCharge, q}; }

    bool is_fixed() const { return kind == Kind::FixedCharge; }
    bool operator==(const Sector&) const = default;
};

class FockBasis {
public:
    static constexpr int kDefaultMaxSites = 16;

    // Throws DomainError for an invalid charge or N < 1, CapacityError when
    // n_sites exceeds max_sites.
    FockBasis(int n_sites, Sector sector, int max_sites = kDefaultMaxSites);

    int n_sites() const { return n_sites_; }
    Sector sector() const { return sector_; }
    Eigen::Index dimension() const { return static_cast<Eigen::Index>(states_.size()); }
    std::span<const State> states() const { return states_; }
    State state(Eigen::Index index) const { return states_[static_cast<std::size_t>(index)]; }

    std::optional<Eigen::Index> index_of(State s) const;

    bool operator==(const FockBasis& other) const
    {
        return n_sites_ == other.n_sites_ && sector_ == other.sector_;
    }

private:
    int n_sites_;
    Sector sector_;
    std::vector<State> states_;
    std::vector<std::int32_t> lookup_;  // 2^N entries, -1 for states outside the basis
};

using BasisPtr = std::shared_ptr<const FockBasis>;

BasisPtr make_basis(int n_sites, Sector sector, int max_sites = FockBasis::kDefaultMaxSites);

// Half-filling sector for even N, floor(N/2) otherwise.
BasisPtr make_half_filling_basis(int n_sites);

// Result of applying a single creation or annihilation operator to a bitstring.
// sign == 0 means the state was annihilated.
struct Amplitude {
    State state = 0;
    int sign = 0;
};

constexpr int jw_sign(State s, int site)
{
    const State below = s & ((State{1} << site) - 1u);
    return (std::popcount(below) & 1) ? -1 : 1;
}

constexpr Amplitude annihilate(State s, int site)
{
    const State bit = State{1} << site;
    if (!(s & bit)) return {s, 0};
    return {s ^ bit, jw_sign(s, site)};
}

constexpr Amplitude create(State s, int site)
{
    const State bit = State{1} << site;
    if (s & bit) return {s, 0};
    return {s ^ bit, jw_sign(s, site)};
}

// c†_i c†_j c_k c_l |s>, applied right to left.
constexpr Amplitude apply_two_body(State s, int i, int j, int k, int l)
{
    Amplitude a = annihilate(s, l);
    if (!a.sign) return a;
    int sign = a.sign;
    a = annihilate(a.state, k);
    if (!a.sign) return a;
    sign *= a.sign;
    a = create(a.state, j);
    if (!a.sign) return a;
    sign *= a.sign;
    a = create(a.state, i);
    if (!a.sign) return a;
    return {a.state, sign * a.sign};
}

// c†_i c_l |s>.
constexpr Amplitude apply_hopping(State s, int i, int l)
{
    Amplitude a = annihilate(s, l);
    if (!a.sign) return a;
    const int sign = a.sign;
    a = create(a.state, i);
    if (!a.sign) return a;
    return {a.state, sign * a.sign};
}

// Sparse operator acting from col_basis to row_basis (equal for charge-conserving terms).
struct OperatorMatrix {
    BasisPtr row_basis;
    BasisPtr col_basis;
    SparseMatrix entries;

    bool is_square() const { return row_basis == col_basis || *row_basis == *col_basis; }
};

// c_site. For a FixedCharge(Q) basis the result maps sector Q onto Q-1 and
// carries a freshly built row basis; Q = 0 yields an empty 0 x D block.
OperatorMatrix annihilator(const BasisPtr& basis, int site);

// c†_site (adjoint of annihilator, mapping Q onto Q+1 in a fixed sector).
OperatorMatrix creator(const BasisPtr& basis, int site);

// c†_i c†_j c_k c_l on the given basis; charge conserving, so always square.
OperatorMatrix two_body_term(const BasisPtr& basis, int i, int j, int k, int l);

// Total charge operator, diagonal.
OperatorMatrix number_operator(const BasisPtr& basis);

// Maximum absolute deviation of m from its adjoint.
double hermiticity_defect(const SparseMatrix& m);

} // namespace ssyk
