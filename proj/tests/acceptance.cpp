// One PASS/FAIL line per acceptance criterion. Exits non-zero when any fails.
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "ergmcal/errors.hpp"
#include "ergmcal/oracle.hpp"
#include "ergmcal/pipeline.hpp"

using namespace ergmcal;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = ERGMCAL_SOURCE_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

std::string fmt(double x, int precision = 3) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(precision) << x;
    return os.str();
}

std::string vec(const Vector& v, int precision = 3) {
    std::string out = "(";
    for (Eigen::Index k = 0; k < v.size(); ++k) out += (k ? ", " : "") + fmt(v[k], precision);
    return out + ")";
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "ergmcal_acceptance" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig config_for(const char* file, RunMode mode, const std::string& out) {
    RunConfig cfg = load_config(kSource / "configs" / file);
    cfg.mode = mode;
    cfg.out = scratch(out);
    return cfg;
}

PipelineReport quiet_run(const RunConfig& cfg) {
    std::ostringstream log;
    return run_pipeline(cfg, log);
}

Vector col_mean(const Matrix& m) { return m.colwise().mean().transpose(); }

Vector col_sd(const Matrix& m) {
    const Matrix c = m.rowwise() - m.colwise().mean();
    return (c.array().square().colwise().sum() / static_cast<double>(m.rows() - 1)).sqrt().transpose();
}

std::optional<fs::path> missing(std::initializer_list<const char*> files) {
    for (const char* f : files)
        if (!fs::exists(kSource / f)) return kSource / f;
    return std::nullopt;
}

Outcome dataset_missing(const fs::path& p) {
    return {false, "dataset missing: " + p.string() + " (see data/README.md)"};
}

// Toy network MPLE
Outcome toy_mple() {
    const double start = cpu_seconds();
    const Graph g = load_edge_list(kSource / "data/toy/toy30.edges", 1, 30);
    const ModeEstimate fit = mple(change_stat_matrix(g, ModelSpec::parse("edges, triangles")));
    const double secs = cpu_seconds() - start;
    const bool ok = std::abs(fit.theta[0] + 3.08) <= 0.02 && std::abs(fit.theta[1] - 0.95) <= 0.02 && secs < 1.0;
    return {ok, "MPLE " + vec(fit.theta, 4) + " vs (-3.08, 0.95) +-0.02, " + fmt(secs) + " s CPU (< 1 s)"};
}

// E-road pseudo-posterior, calibrated posterior and calibrated-vs-AEA TV share one calibrate run.
struct RoadRuns {
    std::optional<PipelineReport> calibrate;
    double calibrate_secs = 0.0;
    std::optional<PipelineReport> aea;
    std::string error;
};

RoadRuns& road_runs() {
    static RoadRuns runs = [] {
        RoadRuns r;
        if (missing({"data/euroroad/euroroad.edges"})) return r;
        try {
            double t = cpu_seconds();
            r.calibrate = quiet_run(config_for("euroroad.ini", RunMode::Calibrate, "euroroad_calibrate"));
            r.calibrate_secs = cpu_seconds() - t;
            r.aea = quiet_run(config_for("euroroad.ini", RunMode::Aea, "euroroad_aea"));
        } catch (const std::exception& e) {
            r.error = e.what();
        }
        return r;
    }();
    return runs;
}

Outcome road_pseudo() {
    if (auto m = missing({"data/euroroad/euroroad.edges"})) return dataset_missing(*m);
    const RoadRuns& r = road_runs();
    if (!r.calibrate) return {false, "run failed: " + r.error};
    const Matrix& d = r.calibrate->raw->draws;
    const Vector mean = col_mean(d), sd = col_sd(d);
    const Vector ref_mean = Eigen::Vector2d(-4.496, -0.388), ref_sd = Eigen::Vector2d(0.089, 0.021);
    const double secs = r.calibrate->timings.stages().front().second;
    bool ok = secs < 120.0;
    for (int k = 0; k < 2; ++k)
        ok = ok && std::abs(mean[k] - ref_mean[k]) <= 0.03 && std::abs(sd[k] / ref_sd[k] - 1.0) <= 0.2;
    return {ok, "mean " + vec(mean) + " sd " + vec(sd) + " vs " + vec(ref_mean) + " " + vec(ref_sd) +
                    " (+-0.03, +-20%), " + fmt(secs, 1) + " s"};
}

Outcome road_calibrated() {
    if (auto m = missing({"data/euroroad/euroroad.edges"})) return dataset_missing(*m);
    const RoadRuns& r = road_runs();
    if (!r.calibrate) return {false, "run failed: " + r.error};
    const Matrix& d = r.calibrate->calibrated->draws;
    const Vector mean = col_mean(d), sd = col_sd(d);
    const Vector ref_mean = Eigen::Vector2d(-4.840, -0.311), ref_sd = Eigen::Vector2d(0.127, 0.029);
    bool ok = r.calibrate_secs < 300.0;
    for (int k = 0; k < 2; ++k)
        ok = ok && std::abs(mean[k] - ref_mean[k]) <= 0.1 && std::abs(sd[k] / ref_sd[k] - 1.0) <= 0.25;
    return {ok, "mean " + vec(mean) + " sd " + vec(sd) + " vs " + vec(ref_mean) + " " + vec(ref_sd) +
                    " (+-0.1, +-25%), " + fmt(r.calibrate_secs, 1) + " s"};
}

Outcome road_tv() {
    if (auto m = missing({"data/euroroad/euroroad.edges"})) return dataset_missing(*m);
    const RoadRuns& r = road_runs();
    if (!r.calibrate || !r.aea) return {false, "run failed: " + r.error};
    const double tv = tv_distance_2d(r.calibrate->calibrated->draws, r.aea->aea->draws);
    return {tv <= 0.10, "TV(calibrated, AEA 1e4 aux) = " + fmt(tv) + " (<= 0.10)"};
}

Outcome faux_pseudo() {
    if (auto m = missing({"data/fauxmesa/fauxmesa.edges", "data/fauxmesa/grade.csv"})) return dataset_missing(*m);
    try {
        const double t = cpu_seconds();
        const PipelineReport r = quiet_run(config_for("fauxmesa.ini", RunMode::Pseudo, "fauxmesa_pseudo"));
        const double secs = cpu_seconds() - t;
        Vector ref(8);
        ref << -6.250, 1.805, 1.821, 2.090, 2.353, 2.487, 2.827, 1.136;
        const Vector mean = col_mean(r.raw->draws);
        const double worst = (mean - ref).lpNorm<Eigen::Infinity>();
        return {worst <= 0.1 && secs < 180.0,
                "mean " + vec(mean) + ", max |diff| " + fmt(worst) + " (<= 0.1), " + fmt(secs, 1) + " s"};
    } catch (const std::exception& e) {
        return {false, std::string("run failed: ") + e.what()};
    }
}

Outcome oracle_suite() {
    const double t = cpu_seconds();
    try {
        const PipelineReport r = quiet_run(config_for("oracle4.ini", RunMode::OracleTest, "oracle"));
        const double secs = cpu_seconds() - t;
        std::string detail;
        bool ok = secs < 120.0;
        for (const auto& c : r.oracle_checks) {
            ok = ok && c.passed;
            detail += c.name + (c.passed ? " ok; " : " FAILED; ");
        }
        return {ok, detail + fmt(secs, 1) + " s (< 120 s)"};
    } catch (const std::exception& e) {
        return {false, e.what()};
    }
}

Outcome calibration_identities() {
    // exact true-posterior mode and curvature on the 4-node fixture
    const Graph obs = load_edge_list(kSource / "data/oracle/fixture4.edges", 1, 4);
    const ModelSpec model = ModelSpec::parse("edges, triangles");
    const GaussianPrior prior = GaussianPrior::isotropic(2, 30.0);
    const StatisticTable table = enumerate_statistics(model, obs);
    const Vector s_obs = sufficient_statistics(obs, model);
    const Vector theta_star = exact_posterior_mode(Vector::Zero(2), s_obs, table, &prior);
    const Matrix h_star = -enumerate(theta_star, table).cov_stats + prior.hessian();

    const auto csm = change_stat_matrix(obs, model);
    const PseudoPosteriorSurface surface(csm, prior);
    MpleOptions opts;
    opts.grad_tol = 1e-11;
    const ModeEstimate pl = mple(csm, &prior, opts);
    const CalibrationMap map = build_map(theta_star, h_star, pl.theta, pl.hessian);

    const double residual = (map.w.transpose() * pl.hessian * map.w - h_star).norm() / h_star.norm();
    const double shift = (map.forward(theta_star) - pl.theta).lpNorm<Eigen::Infinity>();
    auto f = [&](const Vector& t) { return calibrated_log_density(t, surface, map); };
    const double h = 1e-4;
    Vector grad(2);
    Matrix hess(2, 2);
    for (int i = 0; i < 2; ++i) {
        Vector up = theta_star, dn = theta_star;
        up[i] += h;
        dn[i] -= h;
        grad[i] = (f(up) - f(dn)) / (2 * h);
        for (int j = 0; j < 2; ++j) {
            Vector pp = theta_star, pm = theta_star, mp = theta_star, mm = theta_star;
            pp[i] += h, pp[j] += h;
            pm[i] += h, pm[j] -= h;
            mp[i] -= h, mp[j] += h;
            mm[i] -= h, mm[j] -= h;
            hess(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h);
        }
    }
    const double g_inf = grad.lpNorm<Eigen::Infinity>();
    const double h_rel = (hess - h_star).norm() / h_star.norm();
    const bool ok = residual < 1e-10 && shift < 1e-12 && g_inf < 1e-5 && h_rel < 1e-3;
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << "curvature residual " << residual << " (< 1e-10), |g(theta*) - "
       << "theta_PL| " << shift << " (< 1e-12), |grad| " << g_inf << " (< 1e-5), Hessian rel. err " << h_rel
       << " (< 1e-3)";
    return {ok, os.str()};
}

Outcome pl_derivatives() {
    std::mt19937_64 rng(2024);
    const ModelSpec m = ModelSpec::parse("edges, kstar{k=2}, triangles, gwesp{decay=0.5}");
    std::normal_distribution<double> z(0.0, 0.3);
    double worst_g = 0.0, worst_h = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 10 + rep;
        Graph g(n);
        std::bernoulli_distribution coin(0.15 + 0.01 * rep);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (coin(rng)) g.toggle({i, j});
        const PseudoLikelihood pl(change_stat_matrix(g, m));
        Vector theta(m.dim());
        for (int k = 0; k < m.dim(); ++k) theta[k] = z(rng);
        const double h = 1e-5;
        Vector fd_g(m.dim());
        Matrix fd_h(m.dim(), m.dim());
        for (int k = 0; k < m.dim(); ++k) {
            Vector up = theta, dn = theta;
            up[k] += h;
            dn[k] -= h;
            fd_g[k] = (pl.log_value(up) - pl.log_value(dn)) / (2 * h);
            fd_h.col(k) = (pl.gradient(up) - pl.gradient(dn)) / (2 * h);
        }
        const Vector grad = pl.gradient(theta);
        const Matrix hess = pl.hessian(theta);
        worst_g = std::max(worst_g, (grad - fd_g).norm() / std::max(1.0, grad.norm()));
        worst_h = std::max(worst_h, (hess - fd_h).norm() / hess.norm());
    }
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << "20 instances, worst gradient rel. err " << worst_g
       << " (< 1e-6), worst Hessian rel. err " << worst_h << " (< 1e-4)";
    return {worst_g < 1e-6 && worst_h < 1e-4, os.str()};
}

Outcome diagnostics_sanity() {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> z(0.0, 1.0);
    const int t = 20000;
    Vector iid(t), ar(t);
    for (int i = 0; i < t; ++i) iid[i] = z(rng);
    ar[0] = z(rng) / std::sqrt(0.75);
    for (int i = 1; i < t; ++i) ar[i] = 0.5 * ar[i - 1] + z(rng);
    const double e_iid = ess(iid), e_ar = ess(ar), analytic = t / 3.0;

    Matrix a(4000, 2), b(4000, 2), far(4000, 2);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        a.row(r) << z(rng), z(rng);
        b.row(r) << z(rng) + 0.7, z(rng);
        far.row(r) << z(rng) + 50, z(rng) + 50;
    }
    const double same = tv_distance_2d(a, a), ab = tv_distance_2d(a, b), ba = tv_distance_2d(b, a);
    const double disjoint = tv_distance_2d(a, far);
    const bool ok = std::abs(e_iid - t) <= 0.1 * t && std::abs(e_ar - analytic) <= 0.15 * analytic && same == 0.0 &&
                    std::abs(disjoint - 1.0) < 1e-12 && std::abs(ab - ba) < 1e-12 && ab > 0.0 && ab <= 1.0;
    return {ok, "ESS iid " + fmt(e_iid, 0) + "/" + std::to_string(t) + ", ESS AR(1) " + fmt(e_ar, 0) + " vs " +
                    fmt(analytic, 0) + ", TV same " + fmt(same) + " disjoint " + fmt(disjoint) + " ab " + fmt(ab) +
                    " ba " + fmt(ba)};
}

Outcome degeneracy_reproduction() {
    const double t = cpu_seconds();
    try {
        const PipelineReport r = quiet_run(config_for("toy.ini", RunMode::DegeneracyCheck, "toy_degeneracy"));
        const double secs = cpu_seconds() - t;
        const DegeneracyReport& d = *r.degeneracy;
        // share of simulated networks near the observed edge count as well as in the dense mode
        std::int64_t near_obs = 0;
        for (auto e : d.edge_counts)
            if (e <= 2 * d.observed_edges) ++near_obs;
        const double sparse_share = static_cast<double>(near_obs) / static_cast<double>(d.edge_counts.size());
        const bool ok = d.degenerate && d.dense_share > 0.0 && secs < 120.0;
        return {ok, "flag " + std::string(d.degenerate ? "raised" : "not raised") + ", " +
                        fmt(100 * d.dense_share, 1) + "% of " + std::to_string(d.edge_counts.size()) +
                        " networks above 90% density, " + fmt(100 * sparse_share, 1) +
                        "% within twice the observed edges, " + fmt(secs, 1) + " s (< 120 s)"};
    } catch (const std::exception& e) {
        return {false, std::string("run failed: ") + e.what()};
    }
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome reproducibility() {
    try {
        const RunConfig a = config_for("toy.ini", RunMode::Calibrate, "repro_a");
        const RunConfig b = config_for("toy.ini", RunMode::Calibrate, "repro_b");
        quiet_run(a);
        quiet_run(b);
        std::string detail;
        bool ok = true;
        for (const char* f : {"chain_raw.csv", "chain_calibrated.csv"}) {
            const std::string x = slurp(a.out / f), y = slurp(b.out / f);
            const bool same = !x.empty() && x == y;
            ok = ok && same;
            detail += std::string(f) + (same ? " identical (" + std::to_string(x.size()) + " bytes); " : " DIFFERS; ");
        }
        return {ok, detail + "toy config, seed " + std::to_string(*a.seed)};
    } catch (const std::exception& e) {
        return {false, std::string("run failed: ") + e.what()};
    }
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"toy MPLE", toy_mple},
        {"E-road pseudo-posterior", road_pseudo},
        {"E-road calibrated posterior", road_calibrated},
        {"E-road calibrated vs AEA TV", road_tv},
        {"Faux Mesa pseudo-posterior", faux_pseudo},
        {"oracle equivalence", oracle_suite},
        {"calibration identities", calibration_identities},
        {"pseudolikelihood gradient/Hessian", pl_derivatives},
        {"diagnostics sanity", diagnostics_sanity},
        {"degeneracy reproduction", degeneracy_reproduction},
        {"reproducibility", reproducibility},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failures;
        std::cout << "criterion " << std::setw(2) << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << "  "
                  << criteria[i].first << ": " << o.detail << std::endl;
    }
    std::cout << criteria.size() - failures << "/" << criteria.size() << " criteria passed" << std::endl;
    return failures == 0 ? 0 : 1;
}
