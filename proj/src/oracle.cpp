#include "ergmcal/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>

#include "ergmcal/errors.hpp"

namespace ergmcal {

namespace {

using Key = std::vector<double>;

StatisticTable to_table(const std::map<Key, double>& counts, int n, int d) {
    StatisticTable t;
    t.n = n;
    t.stats.resize(static_cast<Eigen::Index>(counts.size()), d);
    t.multiplicity.resize(static_cast<Eigen::Index>(counts.size()));
    Eigen::Index r = 0;
    for (const auto& [key, count] : counts) {
        for (int k = 0; k < d; ++k) t.stats(r, k) = key[k];
        t.multiplicity[r] = count;
        ++r;
    }
    return t;
}

}  // namespace

StatisticTable enumerate_statistics(const ModelSpec& model, const Graph& nodes, EnumerationOrder order) {
    const int n = nodes.num_nodes();
    if (n > kMaxEnumerationNodes) {
        throw ConfigError("exact enumeration is limited to n <= " + std::to_string(kMaxEnumerationNodes) +
                          " nodes (got " + std::to_string(n) + ")");
    }
    Graph g = nodes.empty_like();
    const BoundModel bound(model, g);
    const int d = bound.dim();
    const auto dyads = dyad_list(n);
    const int D = static_cast<int>(dyads.size());
    const std::uint64_t total = std::uint64_t{1} << D;
    std::map<Key, double> counts;

    if (order == EnumerationOrder::GrayCode) {
        Vector s = bound.sufficient(g);
        Vector delta(d);
        counts[Key(s.data(), s.data() + d)] += 1.0;
        for (std::uint64_t t = 1; t < total; ++t) {
            const Dyad dy = dyads[static_cast<std::size_t>(std::countr_zero(t))];
            bound.change(g, dy, std::span<double>(delta.data(), static_cast<std::size_t>(d)));
            s += g.has_edge(dy) ? Vector(-delta) : delta;
            g.toggle(dy);
            counts[Key(s.data(), s.data() + d)] += 1.0;
        }
    } else {
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            Graph h = nodes.empty_like();
            for (int b = 0; b < D; ++b) {
                if ((mask >> b) & 1U) h.set_edge(dyads[static_cast<std::size_t>(D - 1 - b)], true);
            }
            const Vector s = bound.sufficient(h);
            counts[Key(s.data(), s.data() + d)] += 1.0;
        }
    }
    return to_table(counts, n, d);
}

EnumerationResult enumerate(const Vector& theta, const StatisticTable& table) {
    if (theta.size() != table.stats.cols()) throw ConfigError("parameter and statistic dimensions differ");
    if (!theta.allFinite()) throw DomainError("parameter is not finite");
    const Vector eta = table.stats * theta + table.multiplicity.array().log().matrix();
    const double top = eta.maxCoeff();
    const Vector w = (eta.array() - top).exp();
    const double sum = w.sum();

    EnumerationResult out;
    out.n = table.n;
    out.log_z = top + std::log(sum);
    const Vector p = w / sum;
    out.mean_stats = table.stats.transpose() * p;
    const Matrix centred = table.stats.rowwise() - out.mean_stats.transpose();
    out.cov_stats = centred.transpose() * p.asDiagonal() * centred;
    out.cov_stats = 0.5 * (out.cov_stats + out.cov_stats.transpose()).eval();
    return out;
}

EnumerationResult enumerate(const Vector& theta, const ModelSpec& model, int n) {
    if (n < 2) throw ConfigError("enumeration needs at least two nodes");
    return enumerate(theta, enumerate_statistics(model, Graph(n)));
}

double exact_log_likelihood(const Vector& theta, const Vector& observed_stats, const StatisticTable& table) {
    return theta.dot(observed_stats) - enumerate(theta, table).log_z;
}

Eigen::Index ParameterGrid::size() const {
    Eigen::Index total = 1;
    for (int p : points) total *= p;
    return total;
}

Vector ParameterGrid::at(Eigen::Index index) const {
    Vector theta(dim());
    for (int k = dim() - 1; k >= 0; --k) {
        const int i = static_cast<int>(index % points[k]);
        index /= points[k];
        theta[k] = lo[k] + i * step(k);
    }
    return theta;
}

PosteriorGrid exact_posterior_grid(const Graph& observed, const ModelSpec& model, const GaussianPrior* prior,
                                   const ParameterGrid& grid) {
    const int d = model.dim();
    if (grid.dim() != d || grid.hi.size() != d || static_cast<int>(grid.points.size()) != d) {
        throw ConfigError("grid dimension does not match the model");
    }
    for (int k = 0; k < d; ++k) {
        if (grid.points[k] < 2 || !(grid.hi[k] > grid.lo[k]) || !std::isfinite(grid.lo[k]) ||
            !std::isfinite(grid.hi[k])) {
            throw ConfigError("grid axes need finite bounds lo < hi and at least two points");
        }
    }
    if (prior && prior->dim() != d) throw ConfigError("prior dimension does not match the model");

    const StatisticTable table = enumerate_statistics(model, observed);
    const Vector s_obs = sufficient_statistics(observed, model);
    PosteriorGrid out;
    out.grid = grid;
    const Eigen::Index size = grid.size();
    out.log_density.resize(size);
    for (Eigen::Index idx = 0; idx < size; ++idx) {
        const Vector theta = grid.at(idx);
        double lp = exact_log_likelihood(theta, s_obs, table);
        if (prior) lp += prior->log_density(theta);
        out.log_density[idx] = lp;
    }
    Eigen::Index best = 0;
    const double top = out.log_density.maxCoeff(&best);
    out.mass = (out.log_density.array() - top).exp();
    out.mass /= out.mass.sum();
    out.argmax = grid.at(best);

    out.mean = Vector::Zero(d);
    for (Eigen::Index idx = 0; idx < size; ++idx) out.mean += out.mass[idx] * grid.at(idx);
    out.covariance = Matrix::Zero(d, d);
    for (Eigen::Index idx = 0; idx < size; ++idx) {
        const Vector c = grid.at(idx) - out.mean;
        out.covariance += out.mass[idx] * c * c.transpose();
    }
    return out;
}

namespace {

int axis_bin(double v, double lo, double hi, int bins) {
    const int b = static_cast<int>(std::floor((v - lo) / (hi - lo) * bins));
    return std::clamp(b, 0, bins - 1);
}

}  // namespace

std::vector<double> grid_marginal(const PosteriorGrid& post, int k, int bins) {
    if (k < 0 || k >= post.grid.dim() || bins < 1) throw ConfigError("bad marginal axis or bin count");
    // cell centres sit on the grid points, so the binned axis spans half a step beyond them
    const double half = 0.5 * post.grid.step(k);
    const double lo = post.grid.lo[k] - half;
    const double hi = post.grid.hi[k] + half;
    std::vector<double> out(static_cast<std::size_t>(bins), 0.0);
    for (Eigen::Index idx = 0; idx < post.mass.size(); ++idx) {
        out[static_cast<std::size_t>(axis_bin(post.grid.at(idx)[k], lo, hi, bins))] += post.mass[idx];
    }
    return out;
}

double marginal_tv(const Vector& draws, const PosteriorGrid& post, int k, int bins) {
    if (draws.size() == 0) throw ConfigError("no draws for the marginal comparison");
    const auto exact = grid_marginal(post, k, bins);
    const double half = 0.5 * post.grid.step(k);
    const double lo = post.grid.lo[k] - half;
    const double hi = post.grid.hi[k] + half;
    std::vector<double> emp(static_cast<std::size_t>(bins), 0.0);
    for (Eigen::Index r = 0; r < draws.size(); ++r) emp[static_cast<std::size_t>(axis_bin(draws[r], lo, hi, bins))] += 1.0;
    double total = 0.0;
    for (int b = 0; b < bins; ++b) total += std::abs(emp[b] / static_cast<double>(draws.size()) - exact[b]);
    return 0.5 * total;
}

Vector exact_posterior_mode(const Vector& start, const Vector& observed_stats, const StatisticTable& table,
                            const GaussianPrior* prior) {
    Vector theta = start;
    auto objective = [&](const Vector& th) {
        double v = exact_log_likelihood(th, observed_stats, table);
        if (prior) v += prior->log_density(th);
        return v;
    };
    double value = objective(theta);
    for (int it = 0; it < 200; ++it) {
        const EnumerationResult e = enumerate(theta, table);
        Vector grad = observed_stats - e.mean_stats;
        Matrix hess = -e.cov_stats;
        if (prior) {
            grad += prior->gradient(theta);
            hess += prior->hessian();
        }
        const Vector step = (-hess).ldlt().solve(grad);
        double t = 1.0;
        Vector next = theta + step;
        double next_value = objective(next);
        while (!(next_value >= value) && t > 1e-10) {
            t *= 0.5;
            next = theta + t * step;
            next_value = objective(next);
        }
        if (!(next_value >= value)) break;
        theta = next;
        value = next_value;
        if ((t * step).lpNorm<Eigen::Infinity>() < 1e-12) break;
        if (!theta.allFinite() || theta.lpNorm<Eigen::Infinity>() > 1e6) {
            throw SeparationError("exact posterior mode does not exist (iterate diverged)");
        }
    }
    return theta;
}

}  // namespace ergmcal
