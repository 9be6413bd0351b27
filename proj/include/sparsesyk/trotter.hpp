// trotter.hpp: layer unitaries, cycled Trotter products and their error metrics
//
// Operator distances use the Frobenius norm divided by sqrt(D), so a unitary
// has norm 1 and the distance between two unitaries is at most 2.

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sparsesyk/hamiltonian.hpp"

namespace ssyk {

struct UnitaryMatrix {
    BasisPtr basis;
    Eigen::MatrixXcd matrix;
};

struct CircuitSchedule {
    std::vector<HamiltonianMatrix> layers;
    double dt = 0.0;
    int n_cycles = 0;
    // Experimental: draw a fresh layer order for every cycle.
    bool reshuffle = false;
    std::uint64_t shuffle_seed = 0;
};

double normalized_frobenius(const Eigen::MatrixXcd& a);

// max |U†U - I|.
double unitarity_defect(const Eigen::MatrixXcd& u);

// exp(-i H t) from the Hermitian eigendecomposition of H.
UnitaryMatrix exact_evolution(const HamiltonianMatrix& h, double t);
UnitaryMatrix layer_unitary(const HamiltonianMatrix& h, double dt);

// One cycle W = U_R ... U_2 U_1: layer 1 acts first.
UnitaryMatrix cycle_unitary(const std::vector<HamiltonianMatrix>& layers, double dt);

// W^n, or the reshuffled product when schedule.reshuffle is set.
UnitaryMatrix trotter_evolution(const CircuitSchedule& schedule);

// sum_{alpha<beta} [H_alpha, H_beta].
Eigen::MatrixXcd commutator_sum(const std::vector<HamiltonianMatrix>& layers);

// ||sum_{alpha<beta} [H_alpha, H_beta]||^2 in the normalized Frobenius norm.
double commutator_norm_sq(const std::vector<HamiltonianMatrix>& layers);

// Leading BCH error after n cycles: (t_n dt / 2) ||sum [H_alpha, H_beta]||, t_n = n dt.
double bch_error_estimate(const std::vector<HamiltonianMatrix>& layers, double dt, int n);

struct DeltaU {
    double mean = 0.0;             // (1/n_max) sum_n distance(n)
    std::vector<double> distance;  // ||U_sim(t_n) - W^n|| for n = 1..n_max
};

// Uses running products, so the cost is O(n_max) matrix multiplications.
DeltaU delta_u(const std::vector<HamiltonianMatrix>& layers, double dt, int n_max);

// ceil(M T^2 J^2 R / (N eps)).
long long trotter_steps_required(double T, double J, int R, int N, double eps, double M = 1.0);

} // namespace ssyk
