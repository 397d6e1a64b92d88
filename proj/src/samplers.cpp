#include "ergmcal/samplers.hpp"

#include <chrono>
#include <cmath>

#include "ergmcal/errors.hpp"

namespace ergmcal {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_settings(const ChainSettings& s) {
    if (s.iterations < 1) throw ConfigError("chain needs at least one iteration");
    if (s.burn_in < 0 || s.burn_in >= s.iterations) throw ConfigError("burn-in must lie in [0, iterations)");
}

double proposal_probability(std::int64_t edges, std::int64_t dyads, bool present) {
    if (edges == 0) return 1.0 / static_cast<double>(dyads);
    double q = 0.5 / static_cast<double>(dyads);
    if (present) q += 0.5 / static_cast<double>(edges);
    return q;
}

// One TNT step; reports the toggled dyad through `toggled` when accepted.
bool tnt_step_impl(Graph& g, const Vector& theta, const BoundModel& model, Rng& rng, std::vector<double>& buf,
                   Vector* stat_change, Dyad* toggled) {
    const std::int64_t dyads = g.num_dyads();
    if (dyads == 0) return false;
    const std::int64_t edges = g.num_edges();
    Dyad d;
    if (edges > 0 && rng.uniform() < 0.5) {
        d = g.edges()[rng.below(static_cast<std::uint64_t>(edges))];
    } else {
        const int n = g.num_nodes();
        int a = static_cast<int>(rng.below(n));
        int b = static_cast<int>(rng.below(n - 1));
        if (b >= a) ++b;
        d = a < b ? Dyad{a, b} : Dyad{b, a};
    }
    const bool present = g.has_edge(d);
    buf.resize(model.dim());
    model.change(g, d, buf);
    double dot = 0.0;
    for (int k = 0; k < model.dim(); ++k) dot += theta[k] * buf[k];
    const double log_accept = (present ? -dot : dot) + tnt_log_proposal_ratio(edges, dyads, present);
    if (log_accept < 0.0 && !(std::log(rng.uniform()) < log_accept)) return false;
    g.toggle_unchecked(d);
    if (stat_change) {
        const double sign = present ? -1.0 : 1.0;
        for (int k = 0; k < model.dim(); ++k) (*stat_change)[k] += sign * buf[k];
    }
    if (toggled) *toggled = d;
    return true;
}

}  // namespace

ProposalSpec::ProposalSpec(Matrix covariance, Vector tuning) : covariance_(std::move(covariance)), tuning_(std::move(tuning)) {
    if (covariance_.rows() != covariance_.cols() || covariance_.rows() < 1) {
        throw ConfigError("proposal covariance must be square");
    }
    covariance_ = 0.5 * (covariance_ + covariance_.transpose()).eval();
    Eigen::LLT<Matrix> llt(covariance_);
    if (llt.info() != Eigen::Success) throw NotDefiniteError("proposal covariance is not positive definite");
    chol_ = llt.matrixL();
    if (tuning_.size() == 0) tuning_ = Vector::Ones(covariance_.rows());
}

ProposalSpec ProposalSpec::from_curvature(const Vector& tuning, const GaussianPrior& prior,
                                          const Matrix& hess_log_pl_at_mple) {
    const int d = prior.dim();
    if (tuning.size() != d || hess_log_pl_at_mple.rows() != d) throw ConfigError("proposal tuning has the wrong dimension");
    if ((tuning.array() <= 0.0).any()) throw ConfigError("proposal tuning entries must be positive");
    const Matrix precision = prior.precision() - hess_log_pl_at_mple;
    Eigen::LLT<Matrix> llt(precision);
    if (llt.info() != Eigen::Success) throw NotDefiniteError("B0 + C^-1 is not positive definite");
    const Matrix inner = llt.solve(Matrix::Identity(d, d));
    const auto t = tuning.asDiagonal();
    return ProposalSpec(t * inner * t, tuning);
}

Vector ProposalSpec::draw(const Vector& theta, Rng& rng) const {
    Vector z(dim());
    for (int k = 0; k < dim(); ++k) z[k] = rng.normal();
    return theta + chol_ * z;
}

McmcChain mh_sample(const LogDensity& target, const ProposalSpec& proposal, const Vector& theta0,
                    const ChainSettings& settings) {
    check_settings(settings);
    if (theta0.size() != proposal.dim()) throw ConfigError("initial value and proposal dimensions differ");
    if (!theta0.allFinite()) throw DomainError("initial value is not finite");
    const auto start = std::chrono::steady_clock::now();
    Rng rng(settings.seed);

    Vector theta = theta0;
    double lp = target(theta);
    if (!std::isfinite(lp)) throw DomainError("log target is not finite at the initial value");

    McmcChain chain;
    const int kept = settings.iterations - settings.burn_in;
    chain.draws.resize(kept, theta.size());
    chain.log_target.resize(kept);
    chain.burn_in = settings.burn_in;
    chain.seed = settings.seed;
    chain.iterations = settings.iterations;
    for (int t = 0; t < settings.iterations; ++t) {
        Vector prop = proposal.draw(theta, rng);
        const double lp_new = target(prop);
        const double u = rng.uniform();
        if (std::isfinite(lp_new) && std::log(u) < lp_new - lp) {
            theta = std::move(prop);
            lp = lp_new;
            ++chain.accepted;
        }
        if (t >= settings.burn_in) {
            chain.draws.row(t - settings.burn_in) = theta.transpose();
            chain.log_target[t - settings.burn_in] = lp;
        }
    }
    chain.wall_time = seconds_since(start);
    return chain;
}

McmcChain mh_pseudo_posterior(const PseudoPosteriorSurface& surface, const ProposalSpec& proposal,
                              const Vector& theta0, const ChainSettings& settings) {
    if (surface.dim() != proposal.dim()) throw ConfigError("proposal and model dimensions differ");
    return mh_sample([&surface](const Vector& th) { return surface.log_density(th); }, proposal, theta0, settings);
}

double tnt_log_proposal_ratio(std::int64_t edges, std::int64_t dyads, bool present) {
    const std::int64_t edges_after = present ? edges - 1 : edges + 1;
    return std::log(proposal_probability(edges_after, dyads, !present) / proposal_probability(edges, dyads, present));
}

bool tnt_step(Graph& g, const Vector& theta, const BoundModel& model, Rng& rng, Vector* stat_change) {
    if (theta.size() != model.dim()) throw ConfigError("parameter and model dimensions differ");
    thread_local std::vector<double> buf;
    return tnt_step_impl(g, theta, model, rng, buf, stat_change, nullptr);
}

GraphSample simulate_stats(const Vector& theta, const BoundModel& model, const Graph& start,
                           const SimulationSettings& settings, Rng& rng) {
    if (settings.draws < 1) throw ConfigError("simulation needs at least one draw");
    if (settings.burn < 0 || settings.thin < 1) throw ConfigError("simulation burn must be >= 0 and thin >= 1");
    if (theta.size() != model.dim()) throw ConfigError("parameter and model dimensions differ");
    if (start.num_nodes() != model.num_nodes()) throw ConfigError("start graph does not match the bound model");

    Graph g = start;
    Vector stats = model.sufficient(g);
    std::vector<double> buf;
    GraphSample out;
    out.stats.resize(settings.draws, model.dim());
    out.edge_counts.reserve(settings.draws);
    out.thinning = settings.thin;
    out.aux_iters = settings.burn + settings.draws * settings.thin;
    for (int t = 0; t < settings.burn; ++t) tnt_step_impl(g, theta, model, rng, buf, &stats, nullptr);
    for (int r = 0; r < settings.draws; ++r) {
        for (int t = 0; t < settings.thin; ++t) tnt_step_impl(g, theta, model, rng, buf, &stats, nullptr);
        out.stats.row(r) = stats.transpose();
        out.edge_counts.push_back(g.num_edges());
    }
    return out;
}

GraphSample simulate_stats(const Vector& theta, const ModelSpec& model, int n, const SimulationSettings& settings,
                           std::uint64_t seed) {
    const Graph start(n);
    Rng rng(seed);
    return simulate_stats(theta, BoundModel(model, start), start, settings, rng);
}

double exchange_log_ratio(const Vector& theta, const Vector& proposed, const Vector& aux_minus_observed,
                          const GaussianPrior& prior) {
    return (theta - proposed).dot(aux_minus_observed) + prior.log_density(proposed) - prior.log_density(theta);
}

McmcChain approximate_exchange(const Graph& observed, const ModelSpec& model, const GaussianPrior& prior,
                               const ProposalSpec& proposal, const Vector& theta0, const ExchangeSettings& settings) {
    check_settings(settings.chain);
    if (settings.aux_iters < 1) throw ConfigError("approximate exchange needs at least one auxiliary iteration");
    if (theta0.size() != model.dim() || proposal.dim() != model.dim() || prior.dim() != model.dim()) {
        throw ConfigError("initial value, proposal, prior and model dimensions must agree");
    }
    if (!theta0.allFinite()) throw DomainError("initial value is not finite");
    const auto start = std::chrono::steady_clock::now();

    const BoundModel bound(model, observed);
    const Vector s_obs = bound.sufficient(observed);
    Graph work = observed;
    std::vector<Dyad> undo;
    undo.reserve(settings.aux_iters);
    std::vector<double> buf;
    Rng rng(settings.chain.seed);

    McmcChain chain;
    const int kept = settings.chain.iterations - settings.chain.burn_in;
    chain.draws.resize(kept, model.dim());
    chain.log_target.resize(kept);
    chain.burn_in = settings.chain.burn_in;
    chain.seed = settings.chain.seed;
    chain.iterations = settings.chain.iterations;

    Vector theta = theta0;
    Vector delta(model.dim());
    for (int t = 0; t < settings.chain.iterations; ++t) {
        const Vector prop = proposal.draw(theta, rng);
        delta.setZero();
        undo.clear();
        for (int m = 0; m < settings.aux_iters; ++m) {
            Dyad toggled;
            if (tnt_step_impl(work, prop, bound, rng, buf, &delta, &toggled)) undo.push_back(toggled);
        }
        const double log_accept = exchange_log_ratio(theta, prop, delta, prior);
        if (std::log(rng.uniform()) < log_accept) {
            theta = prop;
            ++chain.accepted;
        }
        for (auto it = undo.rbegin(); it != undo.rend(); ++it) work.toggle_unchecked(*it);
        if (t >= settings.chain.burn_in) {
            chain.draws.row(t - settings.chain.burn_in) = theta.transpose();
            chain.log_target[t - settings.chain.burn_in] = theta.dot(s_obs) + prior.log_density(theta);
        }
    }
    chain.wall_time = seconds_since(start);
    return chain;
}

}  // namespace ergmcal
