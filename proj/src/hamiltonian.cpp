#include "sparsesyk/hamiltonian.hpp"

#include <bit>
#include <fstream>

#include "sparsesyk/error.hpp"
#include "sparsesyk/rng.hpp"

namespace ssyk {

HamiltonianMatrix build_hamiltonian(const BasisPtr& basis, const CouplingTensor& tensor,
                                    const std::optional<Eigen::MatrixXcd>& mass)
{
    if (!basis) throw DomainError("build_hamiltonian: null basis");
    const int n = basis->n_sites();
    if (tensor.n_sites() != n) throw DomainError("build_hamiltonian: tensor and basis disagree on N");
    if (mass && (mass->rows() != n || mass->cols() != n)) {
        throw DomainError("build_hamiltonian: mass matrix must be N x N");
    }
    if (mass && (*mass - mass->adjoint()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, mass->cwiseAbs().maxCoeff())) {
        throw DomainError("build_hamiltonian: mass matrix must be Hermitian");
    }

    const Eigen::Index dim = basis->dimension();
    HamiltonianMatrix h{basis, Eigen::MatrixXcd::Zero(dim, dim), {}};
    const PairIndex& pairs = tensor.pairs();
    const Eigen::MatrixXcd& t = tensor.pair_matrix();

    for (Eigen::Index col = 0; col < dim; ++col) {
        const State s = basis->state(col);
        for (Eigen::Index q = 0; q < pairs.size(); ++q) {
            const auto [k, l] = pairs.pair(q);
            Amplitude a = annihilate(s, l);
            if (!a.sign) continue;
            Amplitude b = annihilate(a.state, k);
            if (!b.sign) continue;
            const int lowered_sign = a.sign * b.sign;
            for (Eigen::Index p = 0; p < pairs.size(); ++p) {
                const Complex coeff = t(p, q);
                if (coeff == 0.0) continue;
                const auto [i, j] = pairs.pair(p);
                const Amplitude c = create(b.state, j);
                if (!c.sign) continue;
                const Amplitude d = create(c.state, i);
                if (!d.sign) continue;
                const auto row = basis->index_of(d.state);
                if (!row) continue;
                h.matrix(*row, col) += coeff * static_cast<double>(lowered_sign * c.sign * d.sign);
            }
        }
    }
    if (mass) h.matrix += build_quadratic(basis, *mass);
    return h;
}

Eigen::MatrixXcd build_quadratic(const BasisPtr& basis, const Eigen::MatrixXcd& m)
{
    const int n = basis->n_sites();
    if (m.rows() != n || m.cols() != n) throw DomainError("build_quadratic: matrix must be N x N");
    const Eigen::Index dim = basis->dimension();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        const State s = basis->state(col);
        for (int l = 0; l < n; ++l) {
            for (int i = 0; i < n; ++i) {
                if (m(i, l) == 0.0) continue;
                const Amplitude a = apply_hopping(s, i, l);
                if (!a.sign) continue;
                const auto row = basis->index_of(a.state);
                if (row) out(*row, col) += m(i, l) * static_cast<double>(a.sign);
            }
        }
    }
    return out;
}

LayerSet build_layers(const BasisPtr& basis, double J, int R, std::uint64_t seed, LayerOptions options)
{
    if (!basis) throw DomainError("build_layers: null basis");
    if (R < 1) throw DomainError("build_layers: R must be >= 1");
    if (J < 0.0) throw DomainError("build_layers: J must be >= 0");
    const int n = basis->n_sites();
    const double sigma = calibrated_rank_two_sigma(n, J);

    LayerSet set{basis, {}, {}, {}};
    set.layers.reserve(static_cast<std::size_t>(R));
    set.couplings.reserve(static_cast<std::size_t>(R));
    for (int alpha = 0; alpha < R; ++alpha) {
        Rng rng = make_stream(seed, static_cast<std::uint64_t>(alpha));
        const RankTwoCoupling j2 = sample_rank_two(n, sigma, rng, {options.real_only});
        LowRankCoupling coupling = lowrank_tensor(j2);
        HamiltonianMatrix layer = options.include_mass ? build_hamiltonian(basis, coupling.tensor, coupling.mass)
                                                       : build_hamiltonian(basis, coupling.tensor);
        layer.provenance = {seed, "lowrank", alpha};
        set.layers.push_back(std::move(layer));
        set.couplings.push_back(std::move(coupling));
    }
    set.h_sim = sum_layers(set.layers);
    set.h_sim.provenance = {seed, "lowrank-sum", -1};
    return set;
}

HamiltonianMatrix sum_layers(const std::vector<HamiltonianMatrix>& layers)
{
    if (layers.empty()) throw DomainError("sum_layers: no layers");
    HamiltonianMatrix total{layers.front().basis, layers.front().matrix, {layers.front().provenance.seed, "sum", -1}};
    for (std::size_t a = 1; a < layers.size(); ++a) {
        if (layers[a].matrix.rows() != total.matrix.rows()) throw DomainError("sum_layers: dimension mismatch");
        total.matrix += layers[a].matrix;
    }
    return total;
}

MassWeight mass_term_weight(const LayerSet& set)
{
    MassWeight out;
    for (const auto& c : set.couplings) {
        const double mass_norm = build_quadratic(set.basis, c.mass).norm();
        const double interaction_norm = build_hamiltonian(set.basis, c.tensor).matrix.norm();
        if (interaction_norm == 0.0) throw NumericalError("mass_term_weight: interaction part vanishes");
        out.per_layer.push_back(mass_norm / interaction_norm);
    }
    double total = 0.0;
    for (double r : out.per_layer) total += r;
    out.mean = out.per_layer.empty() ? 0.0 : total / static_cast<double>(out.per_layer.size());
    return out;
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary dump assumes a little-endian host");

template <typename T>
void put(std::ofstream& out, T value)
{
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in)
{
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw IoError("hamiltonian dump: truncated file");
    return value;
}

} // namespace

void write_hamiltonian_binary(const std::filesystem::path& path, const HamiltonianMatrix& h)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    const Sector sector = h.basis->sector();
    put<std::int32_t>(out, h.basis->n_sites());
    put<std::int64_t>(out, h.dimension());
    put<std::int32_t>(out, sector.is_fixed() ? 1 : 0);
    put<std::int32_t>(out, sector.charge);
    for (Eigen::Index r = 0; r < h.dimension(); ++r) {
        for (Eigen::Index c = 0; c < h.dimension(); ++c) {
            put(out, h.matrix(r, c).real());
            put(out, h.matrix(r, c).imag());
        }
    }
    if (!out) throw IoError("write failed for " + path.string());
}

HamiltonianMatrix read_hamiltonian_binary(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    const auto n = get<std::int32_t>(in);
    const auto dim = get<std::int64_t>(in);
    const auto kind = get<std::int32_t>(in);
    const auto charge = get<std::int32_t>(in);
    BasisPtr basis = make_basis(n, kind == 1 ? Sector::fixed(charge) : Sector::full());
    if (basis->dimension() != dim) throw IoError("hamiltonian dump: dimension does not match header");
    HamiltonianMatrix h{basis, Eigen::MatrixXcd(dim, dim), {0, "dump", -1}};
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            const double re = get<double>(in);
            const double im = get<double>(in);
            h.matrix(r, c) = {re, im};
        }
    }
    return h;
}

} // namespace ssyk
