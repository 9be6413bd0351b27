#include <doctest.h>

#include <filesystem>

#include "oracles.hpp"
#include "sparsesyk/error.hpp"
#include "sparsesyk/hamiltonian.hpp"
#include "sparsesyk/rng.hpp"

using namespace ssyk;
using oracle::Mat;

namespace {

// Full-space H from Kronecker Jordan-Wigner matrices, summing every canonical
// (P, Q) entry with its operator string.
Mat oracle_hamiltonian(const CouplingTensor& t, const Mat& mass)
{
    const int n = t.n_sites();
    auto c = oracle::all_annihilators(n);
    const Eigen::Index d = Eigen::Index{1} << n;
    Mat h = Mat::Zero(d, d);
    for (Eigen::Index p = 0; p < t.pairs().size(); ++p)
        for (Eigen::Index q = 0; q < t.pairs().size(); ++q) {
            auto [i, j] = t.pairs().pair(p);
            auto [k, l] = t.pairs().pair(q);
            h += t.pair_entry(p, q) * c[i].adjoint() * c[j].adjoint() * c[k] * c[l];
        }
    for (int i = 0; i < n; ++i)
        for (int l = 0; l < n; ++l) h += mass(i, l) * c[i].adjoint() * c[l];
    return h;
}

Mat sector_block(const Mat& full, const FockBasis& b)
{
    Mat out(b.dimension(), b.dimension());
    for (Eigen::Index r = 0; r < b.dimension(); ++r)
        for (Eigen::Index s = 0; s < b.dimension(); ++s) out(r, s) = full(b.state(r), b.state(s));
    return out;
}

} // namespace

TEST_CASE("zero tensor gives the zero matrix")
{
    auto b = make_basis(4, Sector::full());
    CouplingTensor t(4, VarianceConvention::Dense2JsqN3);
    CHECK(oracle::max_abs(build_hamiltonian(b, t).matrix) == 0.0);
    CHECK(oracle::max_abs(build_hamiltonian(b, t, Mat::Zero(4, 4)).matrix) == 0.0);
}

TEST_CASE("single diagonal entry on two sites")
{
    auto b = make_basis(2, Sector::full());
    CouplingTensor t(2, VarianceConvention::Dense2JsqN3);
    t.set_pair_entry(0, 0, 1.0);
    // c+0 c+1 c0 c1 = -n0 n1
    Mat expected = Mat::Zero(4, 4);
    expected(3, 3) = -1.0;
    CHECK(oracle::max_abs(build_hamiltonian(b, t).matrix - expected) == 0.0);
}

TEST_CASE("random tensors match the operator-string oracle")
{
    const int n = 5;
    Rng rng(17);
    CouplingTensor t = sample_dense_gaussian(n, 1.0, rng);
    Mat mass = Mat::Random(n, n);
    mass = (mass + mass.adjoint()).eval();
    const Mat ref = oracle_hamiltonian(t, mass);

    auto full = make_basis(n, Sector::full());
    const HamiltonianMatrix h = build_hamiltonian(full, t, mass);
    CHECK(oracle::max_abs(h.matrix - ref) < 1e-13);
    CHECK(oracle::max_abs(h.matrix - h.matrix.adjoint()) < 1e-12);

    for (int q = 0; q <= n; ++q) {
        auto b = make_basis(n, Sector::fixed(q));
        CHECK(oracle::max_abs(build_hamiltonian(b, t, mass).matrix - sector_block(ref, *b)) < 1e-13);
    }
    CHECK_THROWS_AS(build_hamiltonian(make_basis(6, Sector::full()), t), DomainError);
    CHECK_THROWS_AS(build_hamiltonian(full, t, Mat::Random(n, n)), DomainError);
}

TEST_CASE("N = 6 spectrum is real and the trace matches the diagonal sum")
{
    const int n = 6;
    Rng rng(2);
    CouplingTensor t = sample_dense_gaussian(n, 1.0, rng);
    auto b = make_basis(n, Sector::full());
    const HamiltonianMatrix h = build_hamiltonian(b, t);
    Eigen::ComplexEigenSolver<Mat> es(h.matrix);
    CHECK(es.eigenvalues().imag().cwiseAbs().maxCoeff() < 1e-10);
    // Tr c+i c+j ci cj-type terms: only P = Q contributes, each -n_i n_j summed
    // over 2^(N-2) states with both sites filled.
    Complex trace = 0.0;
    for (Eigen::Index p = 0; p < t.pairs().size(); ++p) trace -= t.pair_entry(p, p) * std::pow(2.0, n - 2);
    CHECK(std::abs(h.matrix.trace() - trace) < 1e-12);
}

TEST_CASE("charge conservation in fixed sectors")
{
    Rng rng(6);
    CouplingTensor t = sample_dense_gaussian(8, 1.0, rng);
    auto full = make_basis(8, Sector::full());
    const Mat h = build_hamiltonian(full, t).matrix;
    Mat num = Mat::Zero(h.rows(), h.cols());
    for (Eigen::Index s = 0; s < h.rows(); ++s) num(s, s) = std::popcount(full->state(s));
    CHECK(oracle::max_abs(h * num - num * h) < 1e-12);
}

TEST_CASE("build_hamiltonian is linear in the tensor")
{
    Rng rng(1);
    const int n = 6;
    CouplingTensor a = sample_dense_gaussian(n, 1.0, rng), b = sample_dense_gaussian(n, 1.0, rng);
    auto basis = make_basis(n, Sector::fixed(3));
    const Mat lhs = build_hamiltonian(basis, 0.7 * a + (-1.3) * b).matrix;
    const Mat rhs = 0.7 * build_hamiltonian(basis, a).matrix - 1.3 * build_hamiltonian(basis, b).matrix;
    CHECK(oracle::max_abs(lhs - rhs) < 1e-12);
}

TEST_CASE("low-rank layer equals -O^2/2 with O = sum J_ik c+i ck")
{
    for (int n : {4, 5, 6}) {
        Rng rng(100 + static_cast<std::uint64_t>(n));
        RankTwoCoupling j = sample_rank_two(n, 0.8, rng);
        LowRankCoupling lr = lowrank_tensor(j);
        auto c = oracle::all_annihilators(n);
        const Eigen::Index d = Eigen::Index{1} << n;
        Mat o = Mat::Zero(d, d);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) o += j.matrix()(i, k) * c[i].adjoint() * c[k];
        const Mat ref = -0.5 * o * o;
        auto full = make_basis(n, Sector::full());
        CHECK(oracle::max_abs(build_hamiltonian(full, lr.tensor, lr.mass).matrix - ref) < 1e-13);
        auto half = make_basis(n, Sector::fixed(n / 2));
        CHECK(oracle::max_abs(build_hamiltonian(half, lr.tensor, lr.mass).matrix - sector_block(ref, *half)) < 1e-13);
    }
}

TEST_CASE("layer families")
{
    auto basis = make_basis(6, Sector::fixed(3));
    SUBCASE("R = 1 sum is the single layer")
    {
        LayerSet s = build_layers(basis, 1.0, 1, 5);
        CHECK(s.layers.size() == 1);
        CHECK(oracle::max_abs(s.h_sim.matrix - s.layers[0].matrix) == 0.0);
        CHECK(s.layers[0].provenance.layer == 0);
        CHECK(s.layers[0].provenance.model == "lowrank");
    }
    SUBCASE("sum matches and is order independent")
    {
        LayerSet s = build_layers(basis, 1.0, 5, 9);
        Mat sum = Mat::Zero(basis->dimension(), basis->dimension());
        for (const auto& l : s.layers) sum += l.matrix;
        CHECK(oracle::max_abs(s.h_sim.matrix - sum) < 1e-12);
        std::vector<HamiltonianMatrix> rev(s.layers.rbegin(), s.layers.rend());
        CHECK(oracle::max_abs(sum_layers(rev).matrix - s.h_sim.matrix) < 1e-12);
        for (const auto& l : s.layers) CHECK(oracle::max_abs(l.matrix - l.matrix.adjoint()) < 1e-12);
    }
    SUBCASE("deterministic per seed")
    {
        LayerSet a = build_layers(basis, 1.0, 3, 4), b = build_layers(basis, 1.0, 3, 4);
        CHECK(oracle::max_abs(a.h_sim.matrix - b.h_sim.matrix) == 0.0);
    }
    SUBCASE("mass option adds the quadratic part")
    {
        LayerOptions with{true, false};
        LayerSet a = build_layers(basis, 1.0, 2, 4, with), b = build_layers(basis, 1.0, 2, 4);
        const Mat diff = a.layers[0].matrix - b.layers[0].matrix;
        CHECK(oracle::max_abs(diff - build_quadratic(basis, a.couplings[0].mass)) < 1e-13);
    }
    CHECK_THROWS_AS(build_layers(basis, 1.0, 0, 1), DomainError);
}

TEST_CASE("summed layer tensors reach the dense variance at R = N")
{
    const int n = 10;
    auto basis = make_basis(4, Sector::full());  // tensors only; the basis is not used for statistics
    (void)basis;
    std::vector<double> abs2;
    const double sigma = calibrated_rank_two_sigma(n, 1.0);
    for (int s = 0; s < 60; ++s) {
        CouplingTensor total(n, VarianceConvention::Reduced2JsqN4);
        for (int a = 0; a < n; ++a) {
            Rng rng = make_stream(stream_seed(31, static_cast<std::uint64_t>(s)), static_cast<std::uint64_t>(a));
            total += lowrank_tensor(sample_rank_two(n, sigma, rng)).tensor;
        }
        const auto& m = total.pair_matrix();
        for (Eigen::Index p = 0; p < m.rows(); ++p)
            for (Eigen::Index q = p + 1; q < m.cols(); ++q)
                if (total.class_of(p, q) == CouplingClass::OffDiagonal) abs2.push_back(std::norm(m(p, q)));
    }
    CHECK(oracle::mean(abs2) == doctest::Approx(2.0 / 1000.0).epsilon(0.1));
}

TEST_CASE("mass term weight")
{
    SUBCASE("zero mass")
    {
        auto basis = make_basis(4, Sector::full());
        LayerSet s = build_layers(basis, 1.0, 2, 3);
        for (auto& c : s.couplings) c.mass.setZero();
        CHECK(mass_term_weight(s).mean == 0.0);
    }
    SUBCASE("diagonal rank-two matrix, closed form")
    {
        const int n = 5;
        const double lambda = 0.9;
        auto basis = make_basis(n, Sector::full());
        LowRankCoupling lr = lowrank_tensor(RankTwoCoupling::from_upper(lambda * Mat::Identity(n, n), 0.0));
        LayerSet s{basis, {}, {}, {lr}};
        // H_int = -lambda^2 sum_{i<j} n_i n_j, mass = -lambda^2/2 N
        double num2 = 0.0, pairs2 = 0.0;
        for (State st = 0; st < (1u << n); ++st) {
            const int k = std::popcount(st);
            num2 += k * k;
            pairs2 += std::pow(k * (k - 1) / 2.0, 2);
        }
        const double expected = 0.5 * std::sqrt(num2) / std::sqrt(pairs2);
        CHECK(mass_term_weight(s).mean == doctest::Approx(expected).epsilon(1e-12));
        CHECK(oracle::max_abs(build_quadratic(basis, lr.mass) + 0.5 * lambda * lambda * Mat(number_operator(basis).entries)) < 1e-14);
    }
    SUBCASE("decreases with N")
    {
        auto small = build_layers(make_basis(6, Sector::fixed(3)), 1.0, 6, 1);
        auto large = build_layers(make_basis(10, Sector::fixed(5)), 1.0, 6, 1);
        CHECK(mass_term_weight(large).mean < mass_term_weight(small).mean);
    }
}

TEST_CASE("binary dump round trip")
{
    auto basis = make_basis(6, Sector::fixed(2));
    Rng rng(3);
    HamiltonianMatrix h = build_hamiltonian(basis, sample_dense_gaussian(6, 1.0, rng));
    const auto path = std::filesystem::temp_directory_path() / "sparsesyk_test_h.bin";
    write_hamiltonian_binary(path, h);
    CHECK(std::filesystem::file_size(path) == 4 + 8 + 4 + 4 + 16 * static_cast<std::uintmax_t>(h.dimension() * h.dimension()));
    HamiltonianMatrix back = read_hamiltonian_binary(path);
    CHECK(back.basis->sector() == Sector::fixed(2));
    CHECK(back.basis->n_sites() == 6);
    CHECK(oracle::max_abs(back.matrix - h.matrix) == 0.0);
    std::filesystem::remove(path);
    CHECK_THROWS(read_hamiltonian_binary(path));
}
