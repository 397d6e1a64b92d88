#include "ergmcal/pipeline.hpp"

#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "ergmcal/errors.hpp"
#include "ergmcal/oracle.hpp"

namespace ergmcal {

namespace {

enum Stage : std::uint64_t { kPseudoChain = 1, kRobbinsMonro, kHessian, kCalibratedChain, kAea, kDegeneracy,
                             kReference, kOracle };

class CpuTimer {
  public:
    CpuTimer() : start_(std::clock()) {}
    double seconds() const { return static_cast<double>(std::clock() - start_) / CLOCKS_PER_SEC; }

  private:
    std::clock_t start_;
};

template <class F>
auto stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), name + ": " + e.what());
    }
}

std::ofstream open_output(const std::filesystem::path& path, PipelineReport& report) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    report.artifacts.push_back(path);
    return out;
}

// Pieces shared by every mode that samples the pseudo-posterior.
struct PseudoFit {
    ChangeStatMatrix csm;
    GaussianPrior prior;
    ModeEstimate mple_fit;
    ModeEstimate mode;
    ProposalSpec proposal;
};

GaussianPrior make_prior(const RunConfig& cfg, int d) {
    return GaussianPrior(broadcast(cfg.prior_mean, d, "[prior] mean"), cfg.prior_variance * Matrix::Identity(d, d));
}

PseudoFit fit_pseudo(const RunConfig& cfg, const Graph& g, const ModelSpec& model, const std::vector<double>& tuning,
                     PipelineReport& report, std::ostream& log) {
    const int d = model.dim();
    ChangeStatMatrix csm = change_stat_matrix(g, model);
    const PseudoLikelihood pl(csm);
    GaussianPrior prior = make_prior(cfg, d);
    ModeEstimate mple_fit;
    ModeEstimate mode;
    try {
        mple_fit = mple(pl, nullptr);
        MpleOptions opts;
        opts.start = mple_fit.theta;
        mode = mple(pl, &prior, opts);
    } catch (const SeparationError&) {
        // no finite MPLE: the prior still gives a proper pseudo-posterior
        mode = mple(pl, &prior);
        mple_fit = mode;
        mple_fit.hessian = pl.hessian(mode.theta);
        report.warnings.push_back("no unique finite MPLE (separation or collinear statistics); proposal "
                                  "curvature taken at the pseudo-posterior mode");
        log << "warning: " << report.warnings.back() << '\n';
    }
    ProposalSpec proposal =
        ProposalSpec::from_curvature(broadcast(tuning, d, "tuning"), prior, pl.hessian(mple_fit.theta));
    report.theta_mple = mple_fit.theta;
    report.theta_pl = mode.theta;
    return {std::move(csm), std::move(prior), std::move(mple_fit), std::move(mode), std::move(proposal)};
}

void write_vector(std::ostream& os, const std::string& name, const Vector& v) {
    os << std::left << std::setw(22) << name << std::right;
    for (Eigen::Index k = 0; k < v.size(); ++k) os << ' ' << std::setw(10) << std::fixed << std::setprecision(4) << v[k];
    os.unsetf(std::ios::floatfield);
    os << '\n';
}

void write_densities(const McmcChain& chain, const std::vector<std::string>& labels, const std::filesystem::path& dir,
                     const std::string& prefix, PipelineReport& report) {
    for (int k = 0; k < chain.dim(); ++k) {
        auto out = open_output(dir / (prefix + labels[static_cast<std::size_t>(k)] + ".csv"), report);
        write_density_csv(out, kde_grid(chain.draws.col(k)));
    }
}

void save_chain(const std::filesystem::path& path, const McmcChain& chain, PipelineReport& report) {
    save_chain_csv(path, chain);
    report.artifacts.push_back(path);
}

void write_efficiency(std::ostream& os, const PipelineReport& report, double min_ess) {
    os << "stage timings (CPU seconds)\n";
    report.timings.write(os);
    if (report.timings.total() > 0.0) {
        os << "efficiency ratio (min ESS / total CPU) " << std::fixed << std::setprecision(2)
           << efficiency_ratio(min_ess, report.timings.total()) << '\n';
        os.unsetf(std::ios::floatfield);
    }
}

// Pseudo-posterior stage followed, when asked, by the calibration stages.
void run_calibration(const RunConfig& cfg, const Graph& g, const ModelSpec& model, bool calibrate,
                     PipelineReport& report, std::ostream& log) {
    const std::uint64_t seed = *cfg.seed;
    std::optional<PseudoFit> fit;
    {
        CpuTimer timer;
        fit = stage("pseudo-posterior", [&] {
            PseudoFit f = fit_pseudo(cfg, g, model, cfg.tuning, report, log);
            const PseudoPosteriorSurface surface(f.csm, f.prior);
            const Vector start = cfg.chain_start ? broadcast(*cfg.chain_start, model.dim(), "[sampler] start") : f.mode.theta;
            report.raw = mh_pseudo_posterior(surface, f.proposal, start,
                                             {cfg.iterations, cfg.burn_in, stage_seed(seed, kPseudoChain)});
            return f;
        });
        report.timings.add("pseudo-posterior", timer.seconds());
        log << "pseudo-posterior: acceptance " << report.raw->acceptance_rate() << '\n';
    }
    if (!calibrate) return;

    {
        CpuTimer timer;
        report.robbins_monro = stage("robbins-monro", [&] {
            const Vector start = cfg.rm_start ? broadcast(*cfg.rm_start, model.dim(), "[calibration] start") : fit->mple_fit.theta;
            return robbins_monro_map(start, cfg.robbins_monro, g, model, fit->prior, stage_seed(seed, kRobbinsMonro));
        });
        report.timings.add("robbins-monro", timer.seconds());
        const auto& rm = *report.robbins_monro;
        log << "robbins-monro: " << rm.iterations << " iterations" << (rm.converged ? "" : " (not converged)") << '\n';
        if (rm.dense_start) {
            report.warnings.push_back("graphs simulated at the Robbins-Monro start are more than " +
                                      std::to_string(cfg.robbins_monro.dense_warning) +
                                      " dense; the start may lie in a degenerate region");
            log << "warning: " << report.warnings.back() << '\n';
        }
        if (!rm.converged) {
            report.warnings.push_back("Robbins-Monro reached max_iters without meeting the tolerance");
            log << "warning: " << report.warnings.back() << '\n';
        }
    }
    {
        CpuTimer timer;
        stage("mode-curvature calibration", [&] {
            Rng rng(stage_seed(seed, kHessian));
            const BoundModel bound(model, g);
            report.refined = refine_mode(report.robbins_monro->theta, bound.sufficient(g), bound, g, cfg.hessian,
                                         cfg.refinement, fit->prior, rng);
            const Vector& theta_star = report.refined->theta;
            report.map = build_map(theta_star, report.refined->hessian.h, fit->mode.theta, fit->mode.hessian);
            if (cfg.calibrated_sampler == "correct") {
                report.calibrated = correct_sample(*report.raw, *report.map);
            } else {
                const PseudoPosteriorSurface surface(fit->csm, fit->prior);
                const CalibrationMap& map = *report.map;
                const Matrix cov = map.v * fit->proposal.covariance() * map.v.transpose();
                report.calibrated = mh_sample([&](const Vector& th) { return calibrated_log_density(th, surface, map); },
                                              ProposalSpec(cov), theta_star,
                                              {cfg.iterations, cfg.burn_in, stage_seed(seed, kCalibratedChain)});
            }
            return 0;
        });
        report.timings.add("mode-curvature calibration", timer.seconds());
        const auto& rf = *report.refined;
        const auto& he = rf.hessian;
        log << "newton refinement: " << rf.steps_taken << " step(s), last step " << rf.last_step << " sd\n";
        if (rf.step_refused) {
            report.warnings.push_back("Newton step of " + std::to_string(rf.last_step) +
                                      " posterior sd exceeds newton_max_step; theta* kept at the last accepted point");
            log << "warning: " << report.warnings.back() << '\n';
        }
        log << "H* sample: thinning " << he.thin << ", min ESS " << he.min_ess << '\n';
        if (!he.ess_target_met) {
            report.warnings.push_back("H* sample reached hessian_max_thin with min ESS " + std::to_string(he.min_ess) +
                                      "; the true-posterior curvature may be underestimated");
            log << "warning: " << report.warnings.back() << '\n';
        }
    }
}

void write_calibration_outputs(const RunConfig& cfg, PipelineReport& report) {
    const auto& dir = cfg.out;
    save_chain(dir / "chain_raw.csv", *report.raw, report);
    const SummaryTable raw = summarize(*report.raw, report.labels);
    std::optional<SummaryTable> cal;
    if (report.calibrated) {
        save_chain(dir / "chain_calibrated.csv", *report.calibrated, report);
        auto out = open_output(dir / "calibration_map.txt", report);
        write_calibration_map(out, *report.map);
        cal = summarize(*report.calibrated, report.labels);
        write_densities(*report.calibrated, report.labels, dir, "density_", report);
        write_densities(*report.raw, report.labels, dir, "density_raw_", report);
    } else {
        write_densities(*report.raw, report.labels, dir, "density_", report);
    }

    auto out = open_output(dir / "summary.txt", report);
    out << "mode " << mode_name(cfg.mode) << ", seed " << *cfg.seed << '\n';
    write_vector(out, "MPLE", report.theta_mple);
    write_vector(out, "pseudo-posterior mode", report.theta_pl);
    out << '\n';
    write_summary(out, raw, "pseudo-posterior");
    if (cal) {
        const auto& rm = *report.robbins_monro;
        out << '\n';
        write_vector(out, "theta* (Robbins-Monro)", rm.theta);
        out << "Robbins-Monro iterations " << rm.iterations << (rm.converged ? "" : " (not converged)") << '\n';
        if (report.refined) {
            const auto& rf = *report.refined;
            write_vector(out, "theta* (Newton)", report.map->theta_star);
            out << "Newton steps " << rf.steps_taken << (rf.step_refused ? " (a longer step was refused)" : "") << '\n';
            out << "H* sample thinning " << rf.hessian.thin << ", min ESS " << rf.hessian.min_ess << '\n';
        }
        out << '\n';
        write_summary(out, *cal, "calibrated posterior");
    }
    out << '\n';
    write_efficiency(out, report, (cal ? *cal : raw).min_ess);
    for (const auto& w : report.warnings) out << "warning: " << w << '\n';

    auto t = open_output(dir / "timings.txt", report);
    report.timings.write(t);
}

void run_aea(const RunConfig& cfg, const Graph& g, const ModelSpec& model, PipelineReport& report, std::ostream& log) {
    std::optional<PseudoFit> fit;
    {
        CpuTimer timer;
        fit = stage("pseudo-posterior fit", [&] { return fit_pseudo(cfg, g, model, cfg.aea_tuning, report, log); });
        report.timings.add("proposal setup", timer.seconds());
    }
    {
        CpuTimer timer;
        report.aea = stage("approximate exchange", [&] {
            ExchangeSettings s{{cfg.aea_iterations, cfg.aea_burn_in, stage_seed(*cfg.seed, kAea)}, cfg.aux_iters};
            const Vector start = cfg.chain_start ? broadcast(*cfg.chain_start, model.dim(), "[sampler] start") : fit->mode.theta;
            return approximate_exchange(g, model, fit->prior, fit->proposal, start, s);
        });
        report.timings.add("approximate exchange", timer.seconds());
    }
    log << "approximate exchange: acceptance " << report.aea->acceptance_rate() << '\n';
    save_chain(cfg.out / "chain_aea.csv", *report.aea, report);
    write_densities(*report.aea, report.labels, cfg.out, "density_", report);
    const SummaryTable table = summarize(*report.aea, report.labels);
    auto out = open_output(cfg.out / "summary.txt", report);
    out << "mode aea, seed " << *cfg.seed << ", auxiliary iterations " << cfg.aux_iters << '\n';
    write_summary(out, table, "approximate exchange");
    out << '\n';
    write_efficiency(out, report, table.min_ess);
    auto t = open_output(cfg.out / "timings.txt", report);
    report.timings.write(t);
}

void run_degeneracy(const RunConfig& cfg, const Graph& g, const ModelSpec& model, PipelineReport& report,
                    std::ostream& log) {
    run_calibration(cfg, g, model, true, report, log);
    {
        CpuTimer timer;
        report.degeneracy = stage("degeneracy check", [&] {
            return degeneracy_check(*report.calibrated, g, model, cfg.degeneracy, stage_seed(*cfg.seed, kDegeneracy));
        });
        if (cfg.reference_theta) {
            const Vector theta = broadcast(*cfg.reference_theta, model.dim(), "[degeneracy] reference_theta");
            SimulationSettings sim;
            sim.draws = cfg.reference_graphs;
            Rng rng(stage_seed(*cfg.seed, kReference));
            const GraphSample s = simulate_stats(theta, BoundModel(model, g), g, sim, rng);
            double mean = 0.0;
            for (auto e : s.edge_counts) mean += static_cast<double>(e);
            report.reference_mean_edges = mean / static_cast<double>(s.edge_counts.size());
        }
        report.timings.add("degeneracy check", timer.seconds());
    }
    write_calibration_outputs(cfg, report);
    const auto& dg = *report.degeneracy;
    auto hist = open_output(cfg.out / "degeneracy_edges.csv", report);
    write_edge_histogram_csv(hist, dg.edge_counts);
    auto out = open_output(cfg.out / "degeneracy.txt", report);
    out << "simulated networks " << dg.edge_counts.size() << '\n';
    out << "observed edges " << dg.observed_edges << " of " << dg.dyads << " dyads\n";
    out << "share above " << cfg.degeneracy.dense_density << " density " << dg.dense_share << '\n';
    if (report.reference_mean_edges) out << "reference mean edges " << *report.reference_mean_edges << '\n';
    out << "degenerate " << (dg.degenerate ? "yes" : "no") << '\n';
    log << "degeneracy check: " << dg.dense_share * 100.0 << "% of simulated networks above "
        << cfg.degeneracy.dense_density * 100.0 << "% density, flag " << (dg.degenerate ? "RAISED" : "not raised")
        << '\n';
}

void run_oracle(const RunConfig& cfg, const Graph& g, const ModelSpec& model, PipelineReport& report,
                std::ostream& log) {
    const int d = model.dim();
    const std::uint64_t seed = *cfg.seed;
    const GaussianPrior prior = make_prior(cfg, d);
    const StatisticTable table = enumerate_statistics(model, g);
    const Vector s_obs = sufficient_statistics(g, model);
    auto add = [&](std::string name, bool ok, std::string detail) {
        log << (ok ? "PASS " : "FAIL ") << name << ": " << detail << '\n';
        report.oracle_checks.push_back({std::move(name), ok, std::move(detail)});
    };
    auto fmt = [](double v) {
        std::ostringstream s;
        s << std::setprecision(4) << v;
        return s.str();
    };

    // two enumeration orders
    {
        const StatisticTable other = enumerate_statistics(model, g, EnumerationOrder::ReversedBits);
        Rng rng(stage_seed(seed, kOracle));
        Vector theta(d);
        for (int k = 0; k < d; ++k) theta[k] = 2.0 * rng.uniform() - 1.0;
        const auto a = enumerate(theta, table);
        const auto b = enumerate(theta, other);
        const double diff = std::max({std::abs(a.log_z - b.log_z), (a.mean_stats - b.mean_stats).lpNorm<Eigen::Infinity>(),
                                      (a.cov_stats - b.cov_stats).lpNorm<Eigen::Infinity>()});
        add("enumeration orders", diff < 1e-9, "max difference " + fmt(diff));
    }

    // TNT long-run means
    {
        Rng root(stage_seed(seed, kOracle + 1));
        const BoundModel bound(model, g);
        double worst = 0.0;
        for (int r = 0; r < cfg.oracle_random_thetas; ++r) {
            Vector theta(d);
            for (int k = 0; k < d; ++k) theta[k] = 2.0 * root.uniform() - 1.0;
            Rng rng = root.split(static_cast<std::uint64_t>(r));
            const GraphSample s = simulate_stats(theta, bound, g, {1000, 20000, 10}, rng);
            const auto exact = enumerate(theta, table);
            for (int k = 0; k < d; ++k) {
                const Vector col = s.stats.col(k);
                const double mean = col.mean();
                const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(col.size() - 1));
                double z = 0.0;
                if (sd > 0.0) z = std::abs(mean - exact.mean_stats[k]) / (sd / std::sqrt(ess(col)));
                else z = std::abs(mean - exact.mean_stats[k]) > 1e-12 ? 1e9 : 0.0;
                worst = std::max(worst, z);
            }
        }
        add("TNT means vs enumeration", worst < 3.0, "largest |z| " + fmt(worst) + " (bound 3 MC-SE)");
    }

    ParameterGrid grid{broadcast(cfg.grid_lo, d, "[oracle] grid_lo"), broadcast(cfg.grid_hi, d, "[oracle] grid_hi"),
                       std::vector<int>()};
    for (int k = 0; k < d; ++k) {
        grid.points.push_back(cfg.grid_points.size() == 1 ? cfg.grid_points[0] : cfg.grid_points.at(static_cast<std::size_t>(k)));
    }
    const PosteriorGrid post = exact_posterior_grid(g, model, &prior, grid);
    const Vector exact_mode = exact_posterior_mode(post.argmax, s_obs, table, &prior);

    // Robbins-Monro vs grid argmax
    {
        RobbinsMonroConfig rm = cfg.robbins_monro;
        rm.alpha = cfg.oracle_rm_alpha;
        rm.max_iters = cfg.oracle_rm_iters;
        rm.tol = 0.0;  // run the full budget
        rm.max_saturated_share = 1.0;
        rm.empty_fraction = 0.0;
        const auto res = robbins_monro_map(Vector::Zero(d), rm, g, model, prior, stage_seed(seed, kOracle + 2));
        const double err = (res.theta - post.argmax).lpNorm<Eigen::Infinity>();
        add("Robbins-Monro vs grid argmax", err < 0.05, "max |diff| " + fmt(err) + " (bound 0.05)");
    }

    // Monte Carlo Hessian vs exact
    {
        const int reps = cfg.oracle_hessian_replicates;
        std::vector<Matrix> hs;
        Rng root(stage_seed(seed, kOracle + 3));
        for (int r = 0; r < reps; ++r) {
            Rng rng = root.split(static_cast<std::uint64_t>(r));
            const GraphSample s = simulate_stats(exact_mode, BoundModel(model, g), g, cfg.hessian.sim, rng);
            hs.push_back(estimate_true_hessian(exact_mode, s, prior));
        }
        Matrix mean = Matrix::Zero(d, d);
        for (const auto& h : hs) mean += h / reps;
        Matrix var = Matrix::Zero(d, d);
        for (const auto& h : hs) var += (h - mean).array().square().matrix() / (reps - 1);
        const Matrix exact = -enumerate(exact_mode, table).cov_stats + prior.hessian();
        double worst = 0.0;
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) {
                const double se = std::sqrt(var(a, b) / reps);
                worst = std::max(worst, std::abs(mean(a, b) - exact(a, b)) / std::max(se, 1e-12));
            }
        }
        add("Hessian estimate vs enumeration", worst < 3.0, "largest |z| " + fmt(worst) + " (bound 3 replicate-SE)");
    }

    // approximate exchange marginals vs exact grid
    {
        ExchangeSettings s{{cfg.oracle_aea_iterations, cfg.oracle_aea_burn_in, stage_seed(seed, kOracle + 4)},
                           cfg.oracle_aux_iters};
        // proposal scaled to the exact posterior spread
        const ProposalSpec proposal(post.covariance * (2.38 * 2.38 / d));
        const McmcChain chain = approximate_exchange(g, model, prior, proposal, exact_mode, s);
        double worst = 0.0;
        for (int k = 0; k < d; ++k) worst = std::max(worst, marginal_tv(chain.draws.col(k), post, k, 40));
        add("approximate exchange marginals vs exact grid", worst <= 0.1, "largest TV " + fmt(worst) + " (bound 0.1)");
    }

    auto out = open_output(cfg.out / "oracle_report.txt", report);
    for (const auto& c : report.oracle_checks) out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    for (const auto& c : report.oracle_checks) {
        if (!c.passed) throw VerificationError("oracle comparison failed: " + c.name + " (" + c.detail + ")");
    }
}

}  // namespace

std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage) { return Rng(seed).split(stage).next(); }

Graph load_graph(const RunConfig& cfg) {
    Graph g = load_edge_list(cfg.edges, cfg.index_base, cfg.nodes);
    if (!cfg.attributes.empty()) load_attributes(cfg.attributes, g, cfg.index_base);
    return g;
}

PipelineReport run_pipeline(const RunConfig& cfg, std::ostream& log) {
    validate(cfg);
    PipelineReport report;
    report.mode = cfg.mode;
    const Graph g = stage("load data", [&] { return load_graph(cfg); });
    const ModelSpec model = stage("model", [&] {
        ModelSpec m = ModelSpec::parse(cfg.terms);
        m.check_against(g);
        return m;
    });
    report.labels = model.labels();
    log << "graph: " << g.num_nodes() << " nodes, " << g.num_edges() << " edges; model: " << cfg.terms << '\n';

    std::error_code ec;
    std::filesystem::create_directories(cfg.out, ec);
    if (ec) throw DataError("cannot create output directory " + cfg.out.string() + ": " + ec.message());

    switch (cfg.mode) {
        case RunMode::Pseudo:
            run_calibration(cfg, g, model, false, report, log);
            write_calibration_outputs(cfg, report);
            break;
        case RunMode::Calibrate:
            run_calibration(cfg, g, model, true, report, log);
            write_calibration_outputs(cfg, report);
            break;
        case RunMode::Aea:
            run_aea(cfg, g, model, report, log);
            break;
        case RunMode::DegeneracyCheck:
            run_degeneracy(cfg, g, model, report, log);
            break;
        case RunMode::OracleTest:
            stage("oracle test", [&] {
                run_oracle(cfg, g, model, report, log);
                return 0;
            });
            break;
    }
    return report;
}

}  // namespace ergmcal
