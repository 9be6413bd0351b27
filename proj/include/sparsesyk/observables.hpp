// observables.hpp: spectral form factor, OTOCs, gap ratios and disorder averages

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sparsesyk/hamiltonian.hpp"

namespace ssyk {

struct SeriesMeta {
    std::string observable;
    int n_sites = 0;
    int layers = 0;  // R, 0 for a non-layered model
    std::string sector;
    int ensemble_size = 1;
    std::uint64_t seed = 0;
};

struct TimeSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::vector<double> stderr_values;  // empty for a single realization
    SeriesMeta meta;

    // Throws DomainError unless times are strictly increasing and sizes agree.
    void validate() const;
};

std::vector<double> linear_time_grid(double t_min, double t_max, int count);
std::vector<double> log_time_grid(double t_min, double t_max, int count);

std::string describe(const Sector& s);

// Eigenvalues of a Hermitian Hamiltonian, ascending.
Eigen::VectorXd energy_levels(const HamiltonianMatrix& h);

// |Tr e^{-iHt}|^2 / D^2 from the spectrum.
TimeSeries sff_exact(const HamiltonianMatrix& h, const std::vector<double>& times);

// Same quantity from the explicit trace of exp(-iHt); slow cross-check path.
TimeSeries sff_trace(const HamiltonianMatrix& h, const std::vector<double>& times);

// Trotterized SFF |Tr W^n|^2 / D^2 at stroboscopic times t = n dt, where W is
// one full cycle over all layers. Throws DomainError when a requested time is
// not an integer multiple of dt.
TimeSeries sff_trotter(const std::vector<HamiltonianMatrix>& layers, double dt, const std::vector<double>& times);

// Mean relative absolute deviation |a - b| / |b| over matched points.
double mean_relative_deviation(const std::vector<double>& a, const std::vector<double>& b);
double max_relative_deviation(const std::vector<double>& a, const std::vector<double>& b);

enum class OtocOperator {
    Quadrature,  // W = c_w + c†_w
    Number,      // W = 2 n_w - 1
};

struct OtocResult {
    TimeSeries f;  // Re Tr[W(t) V W(t) V] / D
    TimeSeries c;  // 2 (1 - F(t) / F(0))
    double max_imaginary = 0.0;
};

// Infinite-temperature OTOC. The Hamiltonian must live on the full Fock space
// because the quadratures change the charge.
OtocResult otoc(const HamiltonianMatrix& h, int site_w, int site_v, const std::vector<double>& times,
                OtocOperator kind = OtocOperator::Quadrature);

struct GapRatio {
    double r_mean = 0.0;
    std::size_t n_ratios = 0;
    std::size_t degenerate_gaps = 0;
    bool degenerate = false;  // set when gaps below tolerance were found
};

// Mean of min(s_n, s_{n+1}) / max(s_n, s_{n+1}) over the central half of the sorted levels.
GapRatio gap_ratio(std::vector<double> levels, double degeneracy_tol = 1e-10);

// Requires a FixedCharge basis.
GapRatio level_spacing_r(const HamiltonianMatrix& h);

// Pointwise mean and standard error over realizations 0..n-1 of `generator`.
// The generator receives the realization index and must derive its own
// random stream from it, which keeps results independent of `threads`.
TimeSeries disorder_average(const std::function<TimeSeries(std::size_t)>& generator, std::size_t n_realizations,
                            unsigned threads = 1);

} // namespace ssyk
