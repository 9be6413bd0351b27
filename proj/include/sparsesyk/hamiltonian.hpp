// hamiltonian.hpp: dense many-body Hamiltonians and layered families

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparsesyk/disorder.hpp"
#include "sparsesyk/fock.hpp"

namespace ssyk {

struct Provenance {
    std::uint64_t seed = 0;
    std::string model;  // "dense", "lowrank", "modsyk", "sum", ...
    int layer = -1;     // -1 when the matrix is not a single layer
};

struct HamiltonianMatrix {
    BasisPtr basis;
    Eigen::MatrixXcd matrix;
    Provenance provenance;

    Eigen::Index dimension() const { return matrix.rows(); }
};

// H = sum_{P,Q} T(P,Q) c†_i c†_j c_k c_l + sum_{il} M_il c†_i c_l, with P=(i<j), Q=(k<l).
// The mass matrix must be N x N and Hermitian.
HamiltonianMatrix build_hamiltonian(const BasisPtr& basis, const CouplingTensor& tensor,
                                    const std::optional<Eigen::MatrixXcd>& mass = std::nullopt);

// Quadratic form sum_{il} M_il c†_i c_l (M need not be Hermitian here).
Eigen::MatrixXcd build_quadratic(const BasisPtr& basis, const Eigen::MatrixXcd& m);

struct LayerOptions {
    // Keep the -J^2/2 mass term in each layer. Off by default: it is subleading
    // at large N and the simulated Hamiltonian is the sum of interaction parts.
    bool include_mass = false;
    bool real_only = false;
};

struct LayerSet {
    BasisPtr basis;
    std::vector<HamiltonianMatrix> layers;
    HamiltonianMatrix h_sim;
    std::vector<LowRankCoupling> couplings;  // one per layer, in order
};

// R independent low-rank layers with rank-two sigma^2 = J / N^2, so that the
// summed tensor has E|J|^2 = 2 R J^2 / N^4 on disjoint index sets. Layer alpha
// draws from make_stream(seed, alpha).
LayerSet build_layers(const BasisPtr& basis, double J, int R, std::uint64_t seed, LayerOptions options = {});

// Sum of layer matrices in the given order.
HamiltonianMatrix sum_layers(const std::vector<HamiltonianMatrix>& layers);

struct MassWeight {
    std::vector<double> per_layer;  // ||mass part||_F / ||interaction part||_F
    double mean = 0.0;
};

MassWeight mass_term_weight(const LayerSet& set);

// Binary dump, little-endian: int32 N, int64 D, int32 sector kind (0 full,
// 1 fixed), int32 charge, then D*D row-major (re, im) float64 pairs.
void write_hamiltonian_binary(const std::filesystem::path& path, const HamiltonianMatrix& h);
HamiltonianMatrix read_hamiltonian_binary(const std::filesystem::path& path);

} // namespace ssyk
