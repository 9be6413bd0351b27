#include "sparsesyk/fock.hpp"

#include <string>

#include "sparsesyk/error.hpp"

namespace ssyk {

FockBasis::FockBasis(int n_sites, Sector sector, int max_sites)
    : n_sites_(n_sites), sector_(sector)
{
    if (n_sites < 1) throw DomainError("FockBasis: n_sites must be >= 1");
    if (n_sites > max_sites || n_sites > 30) {
        throw CapacityError("FockBasis: n_sites = " + std::to_string(n_sites) +
                            " exceeds the configured cap of " + std::to_string(max_sites));
    }
    if (sector.is_fixed() && (sector.charge < 0 || sector.charge > n_sites)) {
        throw DomainError("FockBasis: charge must satisfy 0 <= Q <= N");
    }

    const State full = State{1} << n_sites;
    lookup_.assign(full, -1);
    for (State s = 0; s < full; ++s) {
        if (sector.is_fixed() && std::popcount(s) != sector.charge) continue;
        lookup_[s] = static_cast<std::int32_t>(states_.size());
        states_.push_back(s);
    }
}

std::optional<Eigen::Index> FockBasis::index_of(State s) const
{
    if (s >= lookup_.size() || lookup_[s] < 0) return std::nullopt;
    return lookup_[s];
}

BasisPtr make_basis(int n_sites, Sector sector, int max_sites)
{
    return std::make_shared<const FockBasis>(n_sites, sector, max_sites);
}

BasisPtr make_half_filling_basis(int n_sites)
{
    return make_basis(n_sites, Sector::fixed(n_sites / 2));
}

namespace {

void check_site(const FockBasis& basis, int site, const char* who)
{
    if (site < 0 || site >= basis.n_sites()) {
        throw DomainError(std::string(who) + ": site " + std::to_string(site) + " out of range [0, " +
                          std::to_string(basis.n_sites()) + ")");
    }
}

BasisPtr shifted_basis(const BasisPtr& basis, int delta)
{
    if (!basis->sector().is_fixed()) return basis;
    const int q = basis->sector().charge + delta;
    if (q < 0 || q > basis->n_sites()) return nullptr;
    return make_basis(basis->n_sites(), Sector::fixed(q));
}

template <typename Apply>
OperatorMatrix single_mode_operator(const BasisPtr& basis, int delta, Apply apply)
{
    BasisPtr target = shifted_basis(basis, delta);
    OperatorMatrix op;
    op.col_basis = basis;
    op.row_basis = target ? target : basis;
    const Eigen::Index rows = target ? target->dimension() : 0;
    op.entries.resize(rows, basis->dimension());
    if (!target) return op;

    std::vector<Eigen::Triplet<Complex, std::int64_t>> triplets;
    triplets.reserve(static_cast<std::size_t>(basis->dimension()));
    for (Eigen::Index col = 0; col < basis->dimension(); ++col) {
        const Amplitude a = apply(basis->state(col));
        if (!a.sign) continue;
        const auto row = target->index_of(a.state);
        if (row) triplets.emplace_back(*row, col, Complex(a.sign, 0.0));
    }
    op.entries.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

} // namespace

OperatorMatrix annihilator(const BasisPtr& basis, int site)
{
    check_site(*basis, site, "annihilator");
    return single_mode_operator(basis, -1, [site](State s) { return annihilate(s, site); });
}

OperatorMatrix creator(const BasisPtr& basis, int site)
{
    check_site(*basis, site, "creator");
    return single_mode_operator(basis, +1, [site](State s) { return create(s, site); });
}

OperatorMatrix two_body_term(const BasisPtr& basis, int i, int j, int k, int l)
{
    for (int site : {i, j, k, l}) check_site(*basis, site, "two_body_term");
    OperatorMatrix op{basis, basis, SparseMatrix(basis->dimension(), basis->dimension())};
    std::vector<Eigen::Triplet<Complex, std::int64_t>> triplets;
    for (Eigen::Index col = 0; col < basis->dimension(); ++col) {
        const Amplitude a = apply_two_body(basis->state(col), i, j, k, l);
        if (!a.sign) continue;
        triplets.emplace_back(*basis->index_of(a.state), col, Complex(a.sign, 0.0));
    }
    op.entries.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

OperatorMatrix number_operator(const BasisPtr& basis)
{
    OperatorMatrix op{basis, basis, SparseMatrix(basis->dimension(), basis->dimension())};
    std::vector<Eigen::Triplet<Complex, std::int64_t>> triplets;
    for (Eigen::Index s = 0; s < basis->dimension(); ++s) {
        triplets.emplace_back(s, s, Complex(std::popcount(basis->state(s)), 0.0));
    }
    op.entries.setFromTriplets(triplets.begin(), triplets.end());
    return op;
}

double hermiticity_defect(const SparseMatrix& m)
{
    const SparseMatrix diff = m - SparseMatrix(m.adjoint());
    double worst = 0.0;
    for (Eigen::Index k = 0; k < diff.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
    }
    return worst;
}

} // namespace ssyk
