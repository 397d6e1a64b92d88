#ifndef ERGMCAL_ORACLE_HPP_
#define ERGMCAL_ORACLE_HPP_

#include <vector>

#include "ergmcal/pseudolikelihood.hpp"

namespace ergmcal {

/// Largest node count accepted by the enumeration routines (2^15 graphs).
inline constexpr int kMaxEnumerationNodes = 6;

/// Sufficient statistics of every graph on a fixed node set, merged into
/// distinct statistic vectors with multiplicities.
struct StatisticTable {
    Matrix stats;           ///< distinct s(y) rows
    Vector multiplicity;    ///< number of graphs sharing each row
    int n = 0;

    Eigen::Index size() const noexcept { return stats.rows(); }
};

enum class EnumerationOrder {
    GrayCode,     ///< one dyad toggle per step, statistics updated by change statistics
    ReversedBits, ///< bit b of the counter drives dyad D-1-b; full recount per graph
};

/// All 2^D graphs on the nodes of `nodes` (attributes are carried over).
/// Throws ConfigError when the node count exceeds kMaxEnumerationNodes.
StatisticTable enumerate_statistics(const ModelSpec& model, const Graph& nodes,
                                    EnumerationOrder order = EnumerationOrder::GrayCode);

struct EnumerationResult {
    double log_z = 0.0;
    Vector mean_stats;
    Matrix cov_stats;
    int n = 0;
};

/// Exact log z(theta), E[s(y)] and Var[s(y)] under p(y | theta).
EnumerationResult enumerate(const Vector& theta, const StatisticTable& table);
EnumerationResult enumerate(const Vector& theta, const ModelSpec& model, int n);

/// Exact log p(y | theta) = theta's(y) - log z(theta).
double exact_log_likelihood(const Vector& theta, const Vector& observed_stats, const StatisticTable& table);

/// Regular grid: axis k has `points[k]` values from lo[k] to hi[k] inclusive.
struct ParameterGrid {
    Vector lo;
    Vector hi;
    std::vector<int> points;

    int dim() const noexcept { return static_cast<int>(lo.size()); }
    double step(int k) const { return (hi[k] - lo[k]) / (points[k] - 1); }
    Eigen::Index size() const;
    /// Grid point with flat index `index` (last axis fastest).
    Vector at(Eigen::Index index) const;
};

struct PosteriorGrid {
    ParameterGrid grid;
    Vector log_density;  ///< unnormalised log posterior per grid point
    Vector mass;         ///< normalised probability per grid cell
    Vector argmax;
    Vector mean;
    Matrix covariance;
};

/// log pi(theta | y) = log p(y | theta) + log p(theta) on every grid point,
/// normalised by cell quadrature. `prior` may be null for a flat prior.
PosteriorGrid exact_posterior_grid(const Graph& observed, const ModelSpec& model, const GaussianPrior* prior,
                                   const ParameterGrid& grid);

/// Marginal of the grid posterior along axis k, aggregated into `bins`
/// equal-width bins spanning the grid axis.
std::vector<double> grid_marginal(const PosteriorGrid& post, int k, int bins);

/// TV distance between the histogram of `draws` (same bins as grid_marginal;
/// draws outside the axis count in the nearest end bin) and the exact marginal.
double marginal_tv(const Vector& draws, const PosteriorGrid& post, int k, int bins);

/// Newton ascent on the exact log posterior, started at `start`.
Vector exact_posterior_mode(const Vector& start, const Vector& observed_stats, const StatisticTable& table,
                            const GaussianPrior* prior);

}  // namespace ergmcal

#endif  // ERGMCAL_ORACLE_HPP_
