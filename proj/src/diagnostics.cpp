#include "ergmcal/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include "ergmcal/errors.hpp"

namespace ergmcal {

double ess(const Vector& series) {
    const auto t = series.size();
    if (t < 10) throw ConfigError("ESS needs a series of length >= 10");
    const Vector x = series.array() - series.mean();
    const double gamma0 = x.squaredNorm() / static_cast<double>(t);
    if (!(gamma0 > 0.0)) throw DomainError("ESS is undefined for a constant series");

    auto rho = [&](Eigen::Index k) {
        if (k >= t) return 0.0;
        return x.head(t - k).dot(x.tail(t - k)) / static_cast<double>(t) / gamma0;
    };
    // initial positive sequence on paired sums rho_{2m} + rho_{2m+1}
    double tau = -1.0;
    for (Eigen::Index m = 0; 2 * m < t; ++m) {
        const double pair = rho(2 * m) + rho(2 * m + 1);
        if (!(pair > 0.0)) break;
        tau += 2.0 * pair;
    }
    const double out = static_cast<double>(t) / tau;
    return std::clamp(out, std::numeric_limits<double>::min(), static_cast<double>(t));
}

Vector ess_columns(const Matrix& draws) {
    Vector out(draws.cols());
    for (Eigen::Index c = 0; c < draws.cols(); ++c) out[c] = ess(draws.col(c));
    return out;
}

std::vector<double> histogram_2d(const Matrix& sample, double x_lo, double x_hi, double y_lo, double y_hi,
                                 const GridSpec& grid) {
    std::vector<double> cells(static_cast<std::size_t>(grid.bins_x) * grid.bins_y, 0.0);
    auto bin = [](double v, double lo, double hi, int bins) {
        const int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
        return std::clamp(b, 0, bins - 1);
    };
    for (Eigen::Index r = 0; r < sample.rows(); ++r) {
        const int bx = bin(sample(r, 0), x_lo, x_hi, grid.bins_x);
        const int by = bin(sample(r, 1), y_lo, y_hi, grid.bins_y);
        cells[static_cast<std::size_t>(bx) * grid.bins_y + by] += 1.0;
    }
    for (auto& c : cells) c /= static_cast<double>(sample.rows());
    return cells;
}

double tv_distance_2d(const Matrix& a, const Matrix& b, const GridSpec& grid) {
    if (a.cols() != 2 || b.cols() != 2) throw ConfigError("total variation distance is only supported in 2 dimensions");
    if (a.rows() == 0 || b.rows() == 0) throw ConfigError("total variation distance needs non-empty samples");
    if (grid.bins_x < 1 || grid.bins_y < 1) throw ConfigError("TV grid needs at least one bin per axis");
    auto range = [&](int col) {
        double lo = std::min(a.col(col).minCoeff(), b.col(col).minCoeff());
        double hi = std::max(a.col(col).maxCoeff(), b.col(col).maxCoeff());
        double pad = grid.padding * (hi - lo);
        if (!(pad > 0.0)) pad = 0.5;
        return std::pair{lo - pad, hi + pad};
    };
    const auto [x_lo, x_hi] = range(0);
    const auto [y_lo, y_hi] = range(1);
    const auto fa = histogram_2d(a, x_lo, x_hi, y_lo, y_hi, grid);
    const auto fb = histogram_2d(b, x_lo, x_hi, y_lo, y_hi, grid);
    double total = 0.0;
    for (std::size_t k = 0; k < fa.size(); ++k) total += std::abs(fa[k] - fb[k]);
    return std::clamp(0.5 * total, 0.0, 1.0);
}

double efficiency_ratio(double min_ess, double cpu_seconds) {
    if (!(cpu_seconds > 0.0)) throw ConfigError("CPU time must be positive");
    return min_ess / cpu_seconds;
}

double relative_efficiency(double er, double er_baseline) {
    if (!(er_baseline > 0.0)) throw ConfigError("baseline efficiency ratio must be positive");
    return er / er_baseline;
}

SummaryTable summarize(const McmcChain& chain, const std::vector<std::string>& labels) {
    if (static_cast<int>(labels.size()) != chain.dim()) throw ConfigError("one label per parameter is required");
    SummaryTable t;
    t.labels = labels;
    t.mean = chain.draws.colwise().mean().transpose();
    const Matrix centred = chain.draws.rowwise() - t.mean.transpose();
    const double denom = std::max<double>(1.0, static_cast<double>(chain.size() - 1));
    t.sd = (centred.array().square().colwise().sum() / denom).sqrt().transpose();
    t.ess.resize(chain.dim());
    for (int k = 0; k < chain.dim(); ++k) {
        try {
            t.ess[k] = ess(chain.draws.col(k));
        } catch (const DomainError&) {
            t.ess[k] = 0.0;  // the chain never moved
        }
    }
    t.min_ess = t.ess.minCoeff();
    t.acceptance_rate = chain.acceptance_rate();
    t.wall_time = chain.wall_time;
    return t;
}

void write_summary(std::ostream& os, const SummaryTable& table, const std::string& title) {
    os << title << '\n';
    os << std::left << std::setw(24) << "parameter" << std::right << std::setw(12) << "mean" << std::setw(12) << "sd"
       << std::setw(12) << "ess" << '\n';
    os << std::fixed;
    for (std::size_t k = 0; k < table.labels.size(); ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        os << std::left << std::setw(24) << table.labels[k] << std::right << std::setprecision(4) << std::setw(12)
           << table.mean[i] << std::setw(12) << table.sd[i] << std::setprecision(1) << std::setw(12) << table.ess[i]
           << '\n';
    }
    os << std::setprecision(1) << "min ESS " << table.min_ess << ", acceptance " << std::setprecision(3)
       << table.acceptance_rate << ", wall time " << std::setprecision(2) << table.wall_time << " s\n";
    os.unsetf(std::ios::floatfield);
}

DensityGrid kde_grid(const Vector& series, int points) {
    const auto n = series.size();
    if (n < 2 || points < 2) throw ConfigError("density estimate needs at least two values and two grid points");
    std::vector<double> sorted(series.data(), series.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const double mean = series.mean();
    const double sd = std::sqrt((series.array() - mean).square().sum() / static_cast<double>(n - 1));
    auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(n - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, sorted.size() - 1);
        return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };
    const double iqr = quantile(0.75) - quantile(0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0.0)) spread = sd > 0.0 ? sd : 1.0;
    const double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);

    DensityGrid out;
    const double lo = sorted.front() - 3.0 * h;
    const double hi = sorted.back() + 3.0 * h;
    const double norm = 1.0 / (static_cast<double>(n) * h * std::sqrt(2.0 * std::numbers::pi));
    for (int p = 0; p < points; ++p) {
        const double x = lo + (hi - lo) * p / (points - 1);
        double acc = 0.0;
        // only values within 8 bandwidths contribute measurably
        auto first = std::lower_bound(sorted.begin(), sorted.end(), x - 8.0 * h);
        auto last = std::upper_bound(sorted.begin(), sorted.end(), x + 8.0 * h);
        for (auto it = first; it != last; ++it) {
            const double z = (x - *it) / h;
            acc += std::exp(-0.5 * z * z);
        }
        out.x.push_back(x);
        out.density.push_back(acc * norm);
    }
    return out;
}

DegeneracyReport degeneracy_check(const McmcChain& chain, const Graph& observed, const ModelSpec& model,
                                  const DegeneracySettings& settings, std::uint64_t seed) {
    if (chain.size() == 0) throw ConfigError("degeneracy check needs a non-empty chain");
    if (settings.subsample < 1 || settings.networks_per_theta < 1 || settings.steps < 1) {
        throw ConfigError("degeneracy check settings must be positive");
    }
    const BoundModel bound(model, observed);
    const Rng root(seed);
    DegeneracyReport out;
    out.observed_edges = observed.num_edges();
    out.dyads = observed.num_dyads();

    const auto total = chain.size();
    const int picks = static_cast<int>(std::min<Eigen::Index>(settings.subsample, total));
    SimulationSettings sim{0, settings.networks_per_theta, settings.steps};
    std::int64_t dense = 0;
    for (int p = 0; p < picks; ++p) {
        // evenly spaced through the chain
        const auto row = static_cast<Eigen::Index>((static_cast<double>(p) + 0.5) * total / picks);
        const Vector theta = chain.draws.row(std::min(row, total - 1)).transpose();
        Rng rng = root.split(static_cast<std::uint64_t>(p));
        const GraphSample sample = simulate_stats(theta, bound, observed, sim, rng);
        for (auto e : sample.edge_counts) {
            out.edge_counts.push_back(e);
            if (static_cast<double>(e) > settings.dense_density * static_cast<double>(out.dyads)) ++dense;
        }
    }
    out.dense_share = static_cast<double>(dense) / static_cast<double>(out.edge_counts.size());
    out.degenerate = out.dense_share > settings.flag_share;
    return out;
}

}  // namespace ergmcal
