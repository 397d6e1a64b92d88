#ifndef ERGMCAL_DIAGNOSTICS_HPP_
#define ERGMCAL_DIAGNOSTICS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "ergmcal/samplers.hpp"

namespace ergmcal {

/// Effective sample size T / (1 + 2 sum_k rho_k), with the autocorrelation sum
/// truncated by Geyer's initial positive sequence rule. Clipped to (0, T].
/// Throws ConfigError for series shorter than 10 and DomainError for
/// constant series.
double ess(const Vector& series);

/// Per-column ESS of a draws matrix.
Vector ess_columns(const Matrix& draws);

struct GridSpec {
    int bins_x = 100;
    int bins_y = 100;
    double padding = 0.05;  ///< fraction of the range added on each side
};

/// Total variation distance between two 2-d samples, estimated from
/// normalised histograms on a shared grid over the union bounding box.
double tv_distance_2d(const Matrix& a, const Matrix& b, const GridSpec& grid = {});

/// Normalised 2-d histogram cell frequencies (bins_x * bins_y, row-major in x)
/// over the given box, as used by tv_distance_2d.
std::vector<double> histogram_2d(const Matrix& sample, double x_lo, double x_hi, double y_lo, double y_hi,
                                 const GridSpec& grid);

/// Minimum ESS per CPU second.
double efficiency_ratio(double min_ess, double cpu_seconds);
double relative_efficiency(double er, double er_baseline);

struct SummaryTable {
    std::vector<std::string> labels;
    Vector mean;
    Vector sd;
    Vector ess;
    double min_ess = 0.0;
    double acceptance_rate = 0.0;
    double wall_time = 0.0;
};

SummaryTable summarize(const McmcChain& chain, const std::vector<std::string>& labels);
void write_summary(std::ostream& os, const SummaryTable& table, const std::string& title);

/// Gaussian kernel density estimate on an evenly spaced grid (Silverman bandwidth).
struct DensityGrid {
    std::vector<double> x;
    std::vector<double> density;
};
DensityGrid kde_grid(const Vector& series, int points = 512);

struct DegeneracySettings {
    int subsample = 600;          ///< parameter draws taken from the chain
    int networks_per_theta = 1;
    int steps = 13000;            ///< TNT steps per simulated network
    double dense_density = 0.9;   ///< "highly connected" threshold
    double flag_share = 0.1;      ///< flag when more than this share is highly connected
};

struct DegeneracyReport {
    std::vector<std::int64_t> edge_counts;
    std::int64_t observed_edges = 0;
    std::int64_t dyads = 0;
    double dense_share = 0.0;
    bool degenerate = false;
};

/// Posterior-predictive check: simulate networks at evenly spaced draws of the
/// chain (starting each TNT run at the observed graph) and report their edge
/// counts. Raises the flag when too many simulated graphs are nearly complete.
DegeneracyReport degeneracy_check(const McmcChain& chain, const Graph& observed, const ModelSpec& model,
                                  const DegeneracySettings& settings, std::uint64_t seed);

}  // namespace ergmcal

#endif  // ERGMCAL_DIAGNOSTICS_HPP_
