#include "sparsesyk/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sparsesyk/disorder.hpp"
#include "sparsesyk/divergence.hpp"
#include "sparsesyk/error.hpp"
#include "sparsesyk/hamiltonian.hpp"
#include "sparsesyk/io.hpp"
#include "sparsesyk/observables.hpp"
#include "sparsesyk/parallel.hpp"
#include "sparsesyk/rng.hpp"
#include "sparsesyk/sdsolver.hpp"
#include "sparsesyk/speckle.hpp"
#include "sparsesyk/stats.hpp"
#include "sparsesyk/trotter.hpp"

namespace ssyk::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---- config access ---------------------------------------------------------

int get_int(const json& c, const char* key)
{
    const json& v = c.at(key);
    if (v.is_number_integer()) return v.get<int>();
    const double d = v.get<double>();
    if (d != std::floor(d)) throw DomainError(std::string("config key '") + key + "' must be an integer");
    return static_cast<int>(d);
}

double get_double(const json& c, const char* key) { return c.at(key).get<double>(); }
std::uint64_t get_seed(const json& c) { return c.at("seed").get<std::uint64_t>(); }
std::string get_string(const json& c, const char* key) { return c.at(key).get<std::string>(); }

std::vector<int> get_int_list(const json& c, const char* key)
{
    std::vector<int> out;
    for (const auto& v : c.at(key)) out.push_back(v.get<int>());
    if (out.empty()) throw DomainError(std::string("config key '") + key + "' must be a nonempty list");
    return out;
}

std::vector<double> get_double_list(const json& c, const char* key)
{
    std::vector<double> out;
    for (const auto& v : c.at(key)) out.push_back(v.get<double>());
    if (out.empty()) throw DomainError(std::string("config key '") + key + "' must be a nonempty list");
    return out;
}

unsigned get_threads(const json& c)
{
    const int t = get_int(c, "threads");
    if (t < 0) throw DomainError("threads must be >= 0 (0 = all cores)");
    return t == 0 ? default_threads() : static_cast<unsigned>(t);
}

void require(bool ok, const std::string& message)
{
    if (!ok) throw DomainError(message);
}

Sector get_sector(const json& c, int n_sites)
{
    const json& v = c.at("sector");
    if (v.is_number_integer()) return Sector::fixed(v.get<int>());
    const std::string s = v.get<std::string>();
    if (s == "full") return Sector::full();
    if (s == "half") return Sector::fixed(n_sites / 2);
    throw DomainError("sector must be \"full\", \"half\" or an integer charge, got '" + s + "'");
}

// ---- model construction ----------------------------------------------------

enum class Model { Dense, LowRank, ModSyk };

Model get_model(const json& c)
{
    const std::string m = get_string(c, "model");
    if (m == "dense") return Model::Dense;
    if (m == "lowrank") return Model::LowRank;
    if (m == "modsyk") return Model::ModSyk;
    throw DomainError("model must be one of dense, lowrank, modsyk; got '" + m + "'");
}

// Class standard deviations for modSYK; null entries fall back to the dense value.
std::array<double, 3> modsyk_sigmas(const json& c, int n_sites, double J)
{
    const double dense = std::sqrt(2.0 * J * J / std::pow(n_sites, 3));
    std::array<double, 3> s{dense, dense, dense};
    const char* keys[3] = {"sigma_d", "sigma_a", "sigma_o"};
    for (int k = 0; k < 3; ++k)
        if (!c.at(keys[k]).is_null()) s[static_cast<std::size_t>(k)] = c.at(keys[k]).get<double>();
    return s;
}

struct Realization {
    HamiltonianMatrix h;
    std::vector<HamiltonianMatrix> layers;  // empty unless the model is layered
};

// Realization r of the configured model. Dense and modSYK draw from
// make_stream(seed, r); layered models seed build_layers with stream_seed(seed, r).
Realization realize(const json& c, const BasisPtr& basis, std::size_t r)
{
    const int n = basis->n_sites();
    const double J = get_double(c, "J");
    const std::uint64_t seed = get_seed(c);
    switch (get_model(c)) {
    case Model::Dense: {
        Rng rng = make_stream(seed, r);
        HamiltonianMatrix h = build_hamiltonian(basis, sample_dense_gaussian(n, J, rng));
        h.provenance = {seed, "dense", -1};
        return {std::move(h), {}};
    }
    case Model::ModSyk: {
        Rng rng = make_stream(seed, r);
        const auto s = modsyk_sigmas(c, n, J);
        HamiltonianMatrix h = build_hamiltonian(basis, sample_modsyk(n, s[0], s[1], s[2], rng));
        h.provenance = {seed, "modsyk", -1};
        return {std::move(h), {}};
    }
    case Model::LowRank: {
        LayerOptions opts;
        opts.include_mass = c.at("include_mass").get<bool>();
        LayerSet set = build_layers(basis, J, get_int(c, "R"), stream_seed(seed, r), opts);
        return {std::move(set.h_sim), std::move(set.layers)};
    }
    }
    throw DomainError("unreachable model");
}

json model_defaults()
{
    return {{"model", "dense"}, {"N", 10},          {"J", 1.0},         {"R", 10},
            {"seed", 7},        {"include_mass", false}, {"sigma_d", nullptr}, {"sigma_a", nullptr},
            {"sigma_o", nullptr}};
}

json merged(json base, const json& extra)
{
    for (auto it = extra.begin(); it != extra.end(); ++it) base[it.key()] = it.value();
    return base;
}

std::vector<double> column_of(const std::vector<Complex>& v, bool imag)
{
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = imag ? v[i].imag() : v[i].real();
    return out;
}

// ---- sample ----------------------------------------------------------------

CouplingTensor sample_tensor(const json& c)
{
    const int n = get_int(c, "N");
    const double J = get_double(c, "J");
    const std::uint64_t seed = get_seed(c);
    const SamplingOptions opts{c.at("real_only").get<bool>()};
    switch (get_model(c)) {
    case Model::Dense: {
        Rng rng = make_stream(seed, 0);
        return sample_dense_gaussian(n, J, rng, opts);
    }
    case Model::ModSyk: {
        Rng rng = make_stream(seed, 0);
        const auto s = modsyk_sigmas(c, n, J);
        return sample_modsyk(n, s[0], s[1], s[2], rng, opts);
    }
    case Model::LowRank: {
        const int R = get_int(c, "R");
        require(R >= 1, "R must be >= 1");
        require(n >= 4, "lowrank sampling requires N >= 4");
        const double sigma = calibrated_rank_two_sigma(n, J);
        CouplingTensor total(n, VarianceConvention::Reduced2JsqN4);
        for (int a = 0; a < R; ++a) {
            Rng rng = make_stream(seed, static_cast<std::uint64_t>(a));
            total += lowrank_tensor(sample_rank_two(n, sigma, rng, opts)).tensor;
        }
        return total;
    }
    }
    throw DomainError("unreachable model");
}

json cmd_sample(const json& c, const fs::path& out)
{
    const CouplingTensor t = sample_tensor(c);
    io::RunDirectory run(out, c);
    io::write_json(run.file("tensor.json"), to_json(t));

    std::array<double, 3> sum{};
    std::array<std::size_t, 3> count{};
    const auto& m = t.pair_matrix();
    for (Eigen::Index p = 0; p < m.rows(); ++p)
        for (Eigen::Index q = p; q < m.cols(); ++q) {
            const auto k = static_cast<std::size_t>(t.class_of(p, q));
            sum[k] += std::norm(m(p, q));
            ++count[k];
        }
    json classes = json::object();
    for (std::size_t k = 0; k < 3; ++k)
        classes[to_string(static_cast<CouplingClass>(k))] = {
            {"entries", count[k]}, {"mean_abs_sq", count[k] ? sum[k] / static_cast<double>(count[k]) : 0.0}};
    json summary = {{"command", "sample"}, {"n_sites", t.n_sites()}, {"classes", classes}};
    run.write_summary(summary);
    run.write_sidecar();
    return summary;
}

// ---- build -----------------------------------------------------------------

json cmd_build(const json& c, const fs::path& out)
{
    const int n = get_int(c, "N");
    const BasisPtr basis = make_basis(n, get_sector(c, n));
    const Realization r = realize(c, basis, 0);
    io::RunDirectory run(out, c);
    write_hamiltonian_binary(run.file("hamiltonian.bin"), r.h);
    const Eigen::MatrixXcd& h = r.h.matrix;
    json summary = {{"command", "build"},
                    {"n_sites", n},
                    {"sector", describe(basis->sector())},
                    {"dimension", r.h.dimension()},
                    {"hermiticity_defect", (h - h.adjoint()).cwiseAbs().maxCoeff()},
                    {"trace_real", h.trace().real()},
                    {"normalized_frobenius", normalized_frobenius(h)},
                    {"layers", r.layers.size()}};
    run.write_summary(summary);
    run.write_sidecar();
    return summary;
}

// ---- trotter-scan ------------------------------------------------------------

json cmd_trotter_scan(const json& c, const fs::path& out)
{
    const std::vector<int> n_list = get_int_list(c, "N");
    const std::vector<int> r_list = get_int_list(c, "R");
    const std::vector<double> dt_list = get_double_list(c, "dt");
    const double T = get_double(c, "T");
    const int realizations = get_int(c, "realizations");
    const unsigned threads = get_threads(c);
    const std::size_t cells = n_list.size() * r_list.size() * dt_list.size();
    require(T > 0.0, "T must be positive");
    require(realizations >= 1, "realizations must be >= 1");
    if (cells > static_cast<std::size_t>(get_int(c, "max_cells")))
        throw CapacityError("trotter-scan: " + std::to_string(cells) + " cells exceed max_cells");

    io::Table table;
    std::vector<double> col_n, col_r, col_dt, col_steps, col_mean, col_err, col_final;
    json rows = json::array();
    for (int n : n_list) {
        const BasisPtr basis = make_basis(n, get_sector(c, n));
        for (int R : r_list) {
            json cfg = merged(c, {{"model", "lowrank"}, {"R", R}});
            for (double dt : dt_list) {
                require(dt > 0.0, "dt values must be positive");
                const int n_max = std::max(1, static_cast<int>(std::lround(T / dt)));
                const auto per = parallel_map(static_cast<std::size_t>(realizations), threads, [&](std::size_t i) {
                    const Realization real = realize(cfg, basis, i);
                    const DeltaU d = delta_u(real.layers, dt, n_max);
                    return std::pair{d.mean, d.distance.back()};
                });
                std::vector<double> means, finals;
                for (const auto& [m, f] : per) {
                    means.push_back(m);
                    finals.push_back(f);
                }
                const stats::Moments mom = stats::moments(means);
                col_n.push_back(n);
                col_r.push_back(R);
                col_dt.push_back(dt);
                col_steps.push_back(n_max);
                col_mean.push_back(mom.mean);
                col_err.push_back(mom.standard_error);
                col_final.push_back(stats::mean(finals));
            }
        }
    }
    table.add("N", col_n);
    table.add("R", col_r);
    table.add("dt", col_dt);
    table.add("n_max", col_steps);
    table.add("delta_u", col_mean);
    table.add("delta_u_stderr", col_err);
    table.add("final_distance", col_final);

    io::RunDirectory run(out, c);
    run.write_table("delta_u.csv", table);
    json summary = {{"command", "trotter-scan"}, {"cells", cells}, {"delta_u", col_mean}};
    run.write_summary(summary);
    run.write_sidecar();
    return summary;
}

// ---- sff ---------------------------------------------------------------------

std::vector<double> sff_times(const json& c)
{
    const double t_min = get_double(c, "t_min");
    const double t_max = get_double(c, "t_max");
    const int count = get_int(c, "n_times");
    std::vector<double> times = log_time_grid(t_min, t_max, count);
    if (!c.at("trotter_dt").is_null()) {
        // Snap onto the stroboscopic lattice n * dt and drop duplicates.
        const double dt = get_double(c, "trotter_dt");
        require(dt > 0.0, "trotter_dt must be positive");
        for (double& t : times) t = std::max(1.0, std::round(t / dt)) * dt;
        times.erase(std::unique(times.begin(), times.end()), times.end());
    }
    times.insert(times.begin(), 0.0);
    return times;
}

json cmd_sff(const json& c, const fs::path& out)
{
    const int n = get_int(c, "N");
    const BasisPtr basis = make_basis(n, get_sector(c, n));
    const int realizations = get_int(c, "realizations");
    const unsigned threads = get_threads(c);
    require(realizations >= 2, "realizations must be >= 2 for an ensemble average");
    const bool trotter = !c.at("trotter_dt").is_null();
    if (trotter) require(get_model(c) == Model::LowRank, "trotter_dt requires model = lowrank (layers)");
    const std::vector<double> times = sff_times(c);

    const auto per = parallel_map(static_cast<std::size_t>(realizations), threads, [&](std::size_t i) {
        const Realization r = realize(c, basis, i);
        std::pair<TimeSeries, TimeSeries> res{sff_exact(r.h, times), {}};
        if (trotter) res.second = sff_trotter(r.layers, get_double(c, "trotter_dt"), times);
        return res;
    });
    auto average = [&](bool second) {
        return disorder_average([&](std::size_t i) { return second ? per[i].second : per[i].first; },
                                per.size(), 1);
    };
    const TimeSeries exact = average(false);

    io::Table table;
    table.add("t", exact.times);
    table.add("sff", exact.values);
    table.add("sff_stderr", exact.stderr_values);
    json summary = {{"command", "sff"}, {"dimension", basis->dimension()}, {"sff0", exact.values.front()},
                    {"plateau_reference", 1.0 / static_cast<double>(basis->dimension())}};
    if (trotter) {
        const TimeSeries tr = average(true);
        table.add("sff_trotter", tr.values);
        table.add("sff_trotter_stderr", tr.stderr_values);
        summary["max_relative_deviation"] = max_relative_deviation(tr.values, exact.values);
    }
    io::RunDirectory run(out, c);
    run.write_table("sff.csv", table);
    run.write_summary(summary);
    run.write_sidecar();
    return summary;
}

// ---- otoc --------------------------------------------------------------------

json cmd_otoc(const json& c, const fs::path& out)
{
    const int n = get_int(c, "N");
    const BasisPtr basis = make_basis(n, Sector::full());
    const int realizations = get_int(c, "realizations");
    require(realizations >= 2, "realizations must be >= 2 for an ensemble average");
    const std::string op = get_string(c, "operator");
    require(op == "quadrature" || op == "number", "operator must be quadrature or number");
    const OtocOperator kind = op == "number" ? OtocOperator::Number : OtocOperator::Quadrature;
    const std::vector<double> times = linear_time_grid(0.0, get_double(c, "t_max"), get_int(c, "n_times"));
    const int w = get_int(c, "site_w");
    const int v = get_int(c, "site_v");

    const auto per = parallel_map(static_cast<std::size_t>(realizations), get_threads(c), [&](std::size_t i) {
        return otoc(realize(c, basis, i).h, w, v, times, kind);
    });
    const TimeSeries f = disorder_average([&](std::size_t i) { return per[i].f; }, per.size(), 1);
    const TimeSeries cc = disorder_average([&](std::size_t i) { return per[i].c; }, per.size(), 1);
    double max_imag = 0.0;
    for (const auto& r : per) max_imag = std::max(max_imag, r.max_imaginary);

    io::Table table;
    table.add("t", f.times);
    table.add("F", f.values);
    table.add("F_stderr", f.stderr_values);
    table.add("C", cc.values);
    table.add("C_stderr", cc.stderr_values);
    io::RunDirectory run(out, c);
    run.write_table("otoc.csv", table);
    json summary = {{"command", "otoc"}, {"max_imaginary", max_imag}, {"F0", f.values.front()}};
    run.write_summary(summary);
    run.write_sidecar();
    return summary;
}

// ---- kl-scan -----------------------------------------------------------------

json fit_json(const KlFit& f)
{
    return {{"c", f.c},           {"c_stderr", f.c_stderr},
            {"c_ci_low", f.c_ci_low}, {"c_ci_high", f.c_ci_high},
            {"d", f.d},           {"c_leading_only", f.c_leading_only},
            {"asymptotic_warning", f.asymptotic_warning}};
}

json cmd_kl_scan(const json& c, const fs::path& out)
{
    const KlScan scan = kl_scaling_scan(get_int_list(c, "r_list"), get_double(c, "dx"));
    io::Table table;
    std::vector<double> r, fwd, rev, hw;
    for (const auto& p : scan.points) {
        r.push_back(p.R);
        fwd.push_back(p.forward);
        rev.push_back(p.reverse);
        hw.push_back(p.half_width);
    }
    table.add("R", r);
    table.add("kl_forward", fwd);
    table.add("kl_reverse", rev);
    table.add("half_width", hw);
    io::RunDirectory run(out, c);
    run.write_table("kl.csv", table);
    json summary = {{"command", "kl-scan"},
                    {"forward_fit", fit_json(scan.forward_fit)},
                    {"reverse_fit", fit_json(scan.reverse_fit)},
                    {"strictly_decreasing", scan.strictly_decreasing}};
    run.write_summary(summary);
    run.write_sidecar();
    return summary;
}

// ---- speckle -----------------------------------------------------------------

json cmd_speckle(const json& c, const fs::path& out)
{
    SpeckleConfig cfg;
    cfg.grid.n = get_int(c, "grid_n");
    cfg.grid.half_extent = get_double(c, "half_extent");
    cfg.params.correlation_length = get_double(c, "correlation_length");
    cfg.params.contrast = get_double(c, "contrast");
    cfg.width = get_double(c, "width");
    cfg.energy_scale = get_double(c, "energy_scale");
    cfg.k_scale = get_double(c, "k_scale");
    const int n = get_int(c, "N");
    const std::uint64_t seed = get_seed(c);
    const unsigned threads = get_threads(c);
    const int fields = get_int(c, "fields");
    const int dec_fields = get_int(c, "decorrelation_fields");
    require(fields >= 100, "fields must be >= 100");

    const auto ensemble = speckle_ensemble(cfg, n, static_cast<std::size_t>(fields), seed, threads);
    const auto classes = class_variance_scan(ensemble);

    io::RunDirectory run(out, c);
    io::Table ct;
    std::vector<double> cls, entries, samples, mean_abs, var, ksg, ksb, pg, pb;
    for (const auto& s : classes) {
        cls.push_back(static_cast<double>(s.coupling_class));
        entries.push_back(static_cast<double>(s.entries));
        samples.push_back(static_cast<double>(s.samples));
        mean_abs.push_back(s.mean_abs);
        var.push_back(s.variance);
        ksg.push_back(s.ks_gaussian);
        ksb.push_back(s.ks_bessel);
        pg.push_back(s.ks_gaussian_p);
        pb.push_back(s.ks_bessel_p);
    }
    ct.add("class", cls);
    ct.add("entries", entries);
    ct.add("samples", samples);
    ct.add("mean_abs", mean_abs);
    ct.add("variance", var);
    ct.add("ks_gaussian", ksg);
    ct.add("ks_bessel", ksb);
    ct.add("ks_gaussian_p", pg);
    ct.add("ks_bessel_p", pb);
    run.write_table("classes.csv", ct);

    json summary = {{"command", "speckle"},
                    {"variance_ratio_o_to_d", classes[2].variance / classes[0].variance},
                    {"variance_ratio_a_to_d", classes[1].variance / classes[0].variance}};
    if (dec_fields > 0) {
        const auto big = speckle_ensemble(cfg, n, static_cast<std::size_t>(dec_fields), stream_seed(seed, 1u << 20),
                                          threads);
        const DecorrelationScan scan = jk_decorrelation(big, get_int_list(c, "r_list"), c.at("independent_k").get<bool>());
        io::Table dt;
        std::vector<double> r, sums, corr, err;
        for (const auto& p : scan.points) {
            r.push_back(p.R);
            sums.push_back(static_cast<double>(p.sums));
            corr.push_back(p.correlation);
            err.push_back(p.standard_error);
        }
        dt.add("R", r);
        dt.add("sums", sums);
        dt.add("correlation", corr);
        dt.add("stderr", err);
        run.write_table("decorrelation.csv", dt);
        summary["decorrelation"] = {{"c", scan.c}, {"r_squared", scan.r_squared}, {"decreasing", scan.decreasing}};
    }
    for (const auto& s : classes)
        summary["classes"][to_string(s.coupling_class)] = {{"variance", s.variance},
                                                          {"ks_gaussian", s.ks_gaussian},
                                                          {"ks_bessel", s.ks_bessel},
                                                          {"ks_gaussian_p", s.ks_gaussian_p},
                                                          {"ks_bessel_p", s.ks_bessel_p}};
    run.write_summary(summary);
    run.write_sidecar();
    return summary;
}

// ---- sd-solve ----------------------------------------------------------------

json cmd_sd(const json& c, const fs::path& out)
{
    const DissipationParams params{get_double(c, "J"), get_double(c, "K"), get_double(c, "ratio_rn")};
    require(params.J >= 0.0 && params.K >= 0.0 && params.ratio_rn > 0.0, "need J >= 0, K >= 0, ratio_rn > 0");
    const TimeGrid grid{get_double(c, "half_extent"), get_int(c, "n_t")};
    SolverOptions opts;
    opts.mixing = get_double(c, "mixing");
    opts.tol = get_double(c, "tol");
    opts.max_iter = get_int(c, "max_iter");
    opts.broadening = get_double(c, "broadening");

    const SdSolution sol = solve_sd(params, grid, opts);
    io::RunDirectory run(out, c);
    io::Table table;
    std::vector<double> t(static_cast<std::size_t>(grid.n));
    for (int j = 0; j < grid.n; ++j) t[static_cast<std::size_t>(j)] = grid.time(j);
    table.add("t", t);
    const char* names[4] = {"pp", "pm", "mp", "mm"};
    for (int k = 0; k < 4; ++k) {
        const Eigen::ArrayXcd& g = sol.green.components[static_cast<std::size_t>(k)];
        const std::vector<Complex> v(g.data(), g.data() + g.size());
        table.add(std::string("re_") + names[k], column_of(v, false));
        table.add(std::string("im_") + names[k], column_of(v, true));
    }
    run.write_table("green.csv", table);
    io::Table res;
    std::vector<double> it(sol.residual_history.size());
    std::iota(it.begin(), it.end(), 1.0);
    res.add("iteration", it);
    res.add("residual", sol.residual_history);
    run.write_table("residual.csv", res);

    json summary = {{"command", "sd-solve"},
                    {"iterations", sol.iterations},
                    {"residual", sol.residual_history.empty() ? 0.0 : sol.residual_history.back()},
                    {"conjugation_defect", conjugation_defect(sol.green)},
                    {"keldysh_defect", sol.keldysh_defect},
                    {"theta_regularized", sol.theta_regularized}};
    run.write_summary(summary);
    run.write_sidecar();
    return summary;
}

// ---- levels ------------------------------------------------------------------

json cmd_levels(const json& c, const fs::path& out)
{
    const int n = get_int(c, "N");
    const BasisPtr basis = make_basis(n, Sector::fixed(get_int(c, "Q")));
    const int realizations = get_int(c, "realizations");
    require(realizations >= 1, "realizations must be >= 1");
    const auto per = parallel_map(static_cast<std::size_t>(realizations), get_threads(c),
                                  [&](std::size_t i) { return level_spacing_r(realize(c, basis, i).h); });
    std::vector<double> idx, r, count, degenerate;
    for (std::size_t i = 0; i < per.size(); ++i) {
        idx.push_back(static_cast<double>(i));
        r.push_back(per[i].r_mean);
        count.push_back(static_cast<double>(per[i].n_ratios));
        degenerate.push_back(static_cast<double>(per[i].degenerate_gaps));
    }
    io::Table table;
    table.add("realization", idx);
    table.add("r_mean", r);
    table.add("n_ratios", count);
    table.add("degenerate_gaps", degenerate);
    io::RunDirectory run(out, c);
    run.write_table("levels.csv", table);
    const stats::Moments m = stats::moments(r);
    json summary = {{"command", "levels"}, {"r_mean", m.mean}, {"r_stderr", m.standard_error},
                    {"dimension", basis->dimension()}};
    run.write_summary(summary);
    run.write_sidecar();
    return summary;
}

std::vector<CommandSpec> build_commands()
{
    const json threads = {{"threads", 0}};
    std::vector<CommandSpec> out;
    out.push_back({"sample", "sample a coupling tensor and its class statistics",
                   merged(model_defaults(), {{"real_only", false}}), cmd_sample});
    out.push_back({"build", "build a many-body Hamiltonian and write it in binary form",
                   merged(model_defaults(), {{"sector", "half"}}), cmd_build});
    out.push_back({"trotter-scan", "Trotter distance between the cycled circuit and exact evolution",
                   merged(model_defaults(), merged(threads, {{"N", {8}},
                                                             {"R", {8}},
                                                             {"dt", {0.1, 0.05, 0.02, 0.01}},
                                                             {"T", 1.0},
                                                             {"realizations", 10},
                                                             {"sector", "half"},
                                                             {"max_cells", 64}})),
                   cmd_trotter_scan});
    out.push_back({"sff", "disorder-averaged spectral form factor",
                   merged(model_defaults(), merged(threads, {{"realizations", 50},
                                                             {"sector", "half"},
                                                             {"t_min", 0.01},
                                                             {"t_max", 1e4},
                                                             {"n_times", 120},
                                                             {"trotter_dt", nullptr}})),
                   cmd_sff});
    out.push_back({"otoc", "infinite-temperature out-of-time-order correlator",
                   merged(model_defaults(), merged(threads, {{"N", 8},
                                                             {"realizations", 10},
                                                             {"operator", "quadrature"},
                                                             {"site_w", 0},
                                                             {"site_v", 1},
                                                             {"t_max", 20.0},
                                                             {"n_times", 81}})),
                   cmd_otoc});
    out.push_back({"kl-scan", "KL divergence between the Gaussian and R-fold Bessel sums",
                   {{"r_list", {8, 16, 32, 64}}, {"dx", 1.0 / 1024.0}}, cmd_kl_scan});
    out.push_back({"speckle", "couplings induced by speckle fields: class statistics and J-K decorrelation",
                   merged(threads, {{"N", 10},
                                    {"seed", 7},
                                    {"fields", 200},
                                    {"decorrelation_fields", 3200},
                                    {"r_list", {1, 2, 4, 8, 16}},
                                    {"independent_k", false},
                                    {"grid_n", 128},
                                    {"half_extent", 6.0},
                                    {"correlation_length", 0.25},
                                    {"contrast", 0.3},
                                    {"width", 1.0},
                                    {"energy_scale", 1.0},
                                    {"k_scale", 1.0}}),
                   cmd_speckle});
    out.push_back({"sd-solve", "Schwinger-Dyson solution with random-Lindblad dissipation",
                   {{"J", 1.0},
                    {"K", 0.0},
                    {"ratio_rn", 1.0},
                    {"half_extent", 50.0},
                    {"n_t", 4096},
                    {"mixing", 0.3},
                    {"tol", 1e-8},
                    {"max_iter", 5000},
                    {"broadening", 1e-6}},
                   cmd_sd});
    out.push_back({"levels", "mean gap ratio in a fixed charge sector",
                   merged(model_defaults(), merged(threads, {{"N", 12}, {"Q", 6}, {"realizations", 20}})),
                   cmd_levels});
    return out;
}

bool compatible(const json& def, const json& value)
{
    if (def.is_null()) return true;
    if (def.is_number()) {
        if (!value.is_number()) return false;
        return !def.is_number_integer() || value.is_number_integer() ||
               value.get<double>() == std::floor(value.get<double>());
    }
    if (def.is_array()) return value.is_array();
    if (def.is_string() && def == "half") return value.is_string() || value.is_number_integer();
    return def.type() == value.type();
}

} // namespace

const std::vector<CommandSpec>& commands()
{
    static const std::vector<CommandSpec> table = build_commands();
    return table;
}

const CommandSpec& find_command(const std::string& name)
{
    for (const auto& c : commands())
        if (c.name == name) return c;
    throw DomainError("unknown command '" + name + "'");
}

json resolve_config(const CommandSpec& spec, const json& config)
{
    json out = spec.defaults;
    if (config.is_null()) return out;
    if (!config.is_object()) throw DomainError("config must be a JSON object");
    for (auto it = config.begin(); it != config.end(); ++it) {
        if (it.key() == "schema_version") {
            if (it.value() != io::kSchemaVersion) throw DomainError("unsupported config schema_version");
            continue;
        }
        if (!spec.defaults.contains(it.key()))
            throw DomainError(spec.name + ": unknown config key '" + it.key() + "'");
        if (!compatible(spec.defaults.at(it.key()), it.value()))
            throw DomainError(spec.name + ": config key '" + it.key() + "' has the wrong type");
        out[it.key()] = it.value();
    }
    return out;
}

void apply_override(json& config, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw DomainError("override must look like key=value: '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    if (!config.is_object()) config = json::object();
    config[json::json_pointer("/" + [&] {
        std::string p = key;
        std::replace(p.begin(), p.end(), '.', '/');
        return p;
    }())] = value;
}

json run_command(const std::string& name, const json& config, const fs::path& out_dir)
{
    const CommandSpec& spec = find_command(name);
    return spec.run(resolve_config(spec, config), out_dir);
}

} // namespace ssyk::cli
