#ifndef ERGMCAL_SAMPLERS_HPP_
#define ERGMCAL_SAMPLERS_HPP_

#include <cstdint>
#include <functional>

#include "ergmcal/pseudolikelihood.hpp"
#include "ergmcal/rng.hpp"
#include "ergmcal/statistics.hpp"

namespace ergmcal {

using LogDensity = std::function<double(const Vector&)>;

/// Symmetric Gaussian random-walk proposal theta' ~ N(theta, covariance).
class ProposalSpec {
  public:
    explicit ProposalSpec(Matrix covariance, Vector tuning = Vector());

    /// covariance = T (B0 + C^-1)^-1 T with T = diag(tuning), B0 the prior
    /// precision and C^-1 = -hess_log_pl at the MPLE.
    static ProposalSpec from_curvature(const Vector& tuning, const GaussianPrior& prior, const Matrix& hess_log_pl_at_mple);

    int dim() const noexcept { return static_cast<int>(covariance_.rows()); }
    const Matrix& covariance() const noexcept { return covariance_; }
    const Vector& tuning() const noexcept { return tuning_; }

    Vector draw(const Vector& theta, Rng& rng) const;

  private:
    Matrix covariance_;
    Matrix chol_;
    Vector tuning_;
};

struct ChainSettings {
    int iterations = 40000;  ///< total, including burn-in
    int burn_in = 10000;
    std::uint64_t seed = 1;
};

/// Retained draws of one Markov chain.
struct McmcChain {
    Matrix draws;       ///< (iterations - burn_in) x d
    Vector log_target;  ///< log target (up to a constant) at each retained draw
    std::int64_t accepted = 0;
    std::int64_t iterations = 0;
    int burn_in = 0;
    std::uint64_t seed = 0;
    double wall_time = 0.0;

    Eigen::Index size() const noexcept { return draws.rows(); }
    int dim() const noexcept { return static_cast<int>(draws.cols()); }
    double acceptance_rate() const noexcept {
        return iterations == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(iterations);
    }
};

/// Random-walk Metropolis-Hastings on an arbitrary log-density.
McmcChain mh_sample(const LogDensity& target, const ProposalSpec& proposal, const Vector& theta0,
                    const ChainSettings& settings);

/// Metropolis-Hastings targeting the pseudo-posterior.
McmcChain mh_pseudo_posterior(const PseudoPosteriorSurface& surface, const ProposalSpec& proposal,
                              const Vector& theta0, const ChainSettings& settings);

/// One tie-no-tie Metropolis step on g targeting p(y | theta).
///
/// With probability 1/2 a uniformly chosen existing edge is proposed for
/// removal, otherwise a uniformly chosen dyad is toggled (always the latter
/// when g is empty). The acceptance ratio carries the exact proposal
/// asymmetry so the kernel is reversible. When accepted and stat_change is
/// non-null the signed change statistic is added to it.
bool tnt_step(Graph& g, const Vector& theta, const BoundModel& model, Rng& rng, Vector* stat_change = nullptr);

/// Log of q(y'->y)/q(y->y') for toggling a dyad that is currently `present`
/// in a graph with `edges` edges out of `dyads`.
double tnt_log_proposal_ratio(std::int64_t edges, std::int64_t dyads, bool present);

struct SimulationSettings {
    int burn = 1000;
    int draws = 400;
    int thin = 30;
};

/// Sufficient statistics of graphs visited by one TNT chain.
struct GraphSample {
    Matrix stats;                       ///< N x d
    std::vector<std::int64_t> edge_counts;
    int aux_iters = 0;                  ///< TNT steps run in total
    int thinning = 1;

    Eigen::Index size() const noexcept { return stats.rows(); }
};

/// Runs `burn` TNT steps from `start`, then records s(y') every `thin` steps
/// until `draws` rows are collected.
GraphSample simulate_stats(const Vector& theta, const BoundModel& model, const Graph& start,
                           const SimulationSettings& settings, Rng& rng);
/// Convenience form starting from the empty graph on n nodes.
GraphSample simulate_stats(const Vector& theta, const ModelSpec& model, int n, const SimulationSettings& settings,
                           std::uint64_t seed);

/// Log acceptance ratio of the exchange move theta -> theta' with auxiliary
/// graph y' drawn at theta' and a symmetric proposal:
/// (theta - theta')'(s(y') - s(y)) + log p(theta') - log p(theta).
double exchange_log_ratio(const Vector& theta, const Vector& proposed, const Vector& aux_minus_observed,
                          const GaussianPrior& prior);

struct ExchangeSettings {
    ChainSettings chain;
    int aux_iters = 10000;
};

/// Approximate exchange algorithm. The auxiliary TNT chain restarts at the
/// observed graph for every proposal. log_target holds theta's(y) + log p(theta)
/// (the likelihood normaliser is unavailable).
McmcChain approximate_exchange(const Graph& observed, const ModelSpec& model, const GaussianPrior& prior,
                               const ProposalSpec& proposal, const Vector& theta0, const ExchangeSettings& settings);

}  // namespace ergmcal

#endif  // ERGMCAL_SAMPLERS_HPP_
