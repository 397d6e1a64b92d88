#include "ergmcal/calibration.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "ergmcal/diagnostics.hpp"
#include "ergmcal/errors.hpp"

namespace ergmcal {

namespace {

Matrix upper_cholesky(const Matrix& spd, const char* what) {
    Eigen::LLT<Matrix> llt(spd);
    if (llt.info() != Eigen::Success) {
        throw NotDefiniteError(std::string(what) + " is not negative definite; Cholesky factorisation failed");
    }
    return llt.matrixU();
}

void require_symmetric(const Matrix& m, const char* what) {
    if (m.rows() != m.cols()) throw NotDefiniteError(std::string(what) + " is not square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw NotDefiniteError(std::string(what) + " is not symmetric");
    }
}

}  // namespace

Vector noisy_grad_log_post(const Vector& theta, const Vector& observed_stats, const GraphSample& sample,
                           const GaussianPrior& prior) {
    if (sample.size() < 1) throw ConfigError("graph sample is empty");
    if (observed_stats.size() != sample.stats.cols() || theta.size() != observed_stats.size() ||
        prior.dim() != theta.size()) {
        throw ConfigError("dimension mismatch between parameter, observed statistics and graph sample");
    }
    const Vector mean = sample.stats.colwise().mean().transpose();
    return observed_stats - mean + prior.gradient(theta);
}

RobbinsMonroResult robbins_monro_map(const Vector& theta0, const RobbinsMonroConfig& cfg, const Graph& observed,
                                     const ModelSpec& model, const GaussianPrior& prior, std::uint64_t seed) {
    if (!(cfg.alpha > 0.0)) throw ConfigError("Robbins-Monro alpha must be positive");
    if (cfg.max_iters < 1) throw ConfigError("Robbins-Monro needs at least one iteration");
    if (!theta0.allFinite()) throw DomainError("Robbins-Monro start is not finite");
    const BoundModel bound(model, observed);
    if (theta0.size() != bound.dim()) throw ConfigError("Robbins-Monro start has the wrong dimension");
    const Vector s_obs = bound.sufficient(observed);
    const double dyads = static_cast<double>(observed.num_dyads());
    const double empty_edges = cfg.empty_fraction * std::max<double>(1.0, static_cast<double>(observed.num_edges()));
    const Rng root(seed);

    RobbinsMonroResult out;
    std::vector<Vector> path{theta0};
    Vector theta = theta0;
    int small_steps = 0;
    for (int i = 1; i <= cfg.max_iters; ++i) {
        Rng rng = root.split(static_cast<std::uint64_t>(i));
        const GraphSample sample = simulate_stats(theta, bound, observed, cfg.sim, rng);

        double mean_edges = 0.0;
        for (auto e : sample.edge_counts) mean_edges += static_cast<double>(e);
        mean_edges /= static_cast<double>(sample.edge_counts.size());
        if (i == 1 && mean_edges / dyads > cfg.dense_warning) out.dense_start = true;
        if (mean_edges / dyads >= cfg.saturated_density || mean_edges < empty_edges) ++out.saturated_iterations;

        const Vector step = (cfg.alpha / i) * noisy_grad_log_post(theta, s_obs, sample, prior);
        theta += step;
        path.push_back(theta);
        out.iterations = i;
        if (!theta.allFinite()) throw DomainError("Robbins-Monro iterate became non-finite");

        if (i >= 10 && out.saturated_iterations > cfg.max_saturated_share * i) {
            throw DegeneracyError("simulated graphs were empty or complete in " + std::to_string(out.saturated_iterations) +
                                  " of " + std::to_string(i) +
                                  " Robbins-Monro iterations; the start lies in a degenerate region, try another "
                                  "starting point (e.g. the zero vector)");
        }
        small_steps = step.lpNorm<Eigen::Infinity>() < cfg.tol ? small_steps + 1 : 0;
        if (small_steps >= cfg.persistence) {
            out.converged = true;
            break;
        }
    }
    out.theta = theta;
    out.trajectory.resize(static_cast<Eigen::Index>(path.size()), theta.size());
    for (std::size_t r = 0; r < path.size(); ++r) out.trajectory.row(static_cast<Eigen::Index>(r)) = path[r].transpose();
    return out;
}

Matrix estimate_true_hessian(const Vector& theta_star, const GraphSample& sample, const GaussianPrior& prior) {
    const auto n = sample.size();
    const auto d = sample.stats.cols();
    if (theta_star.size() != d || prior.dim() != d) throw ConfigError("dimension mismatch in Hessian estimate");
    if (n < d + 1) {
        throw ConfigError("Hessian estimate needs at least d + 1 = " + std::to_string(d + 1) + " simulated graphs");
    }
    const Eigen::RowVectorXd mean = sample.stats.colwise().mean();
    const Matrix centred = sample.stats.rowwise() - mean;
    const Matrix cov = (centred.transpose() * centred) / static_cast<double>(n - 1);
    Matrix h = -cov + prior.hessian();
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::LLT<Matrix> llt(-h);
    if (llt.info() != Eigen::Success) {
        throw NotDefiniteError("estimated true-posterior Hessian is not negative definite; increase the number of "
                               "simulated graphs");
    }
    return h;
}

HessianEstimate sample_true_hessian(const Vector& theta_star, const BoundModel& model, const Graph& start,
                                    const HessianSampling& settings, const GaussianPrior& prior, Rng& rng) {
    if (settings.min_ess_share < 0.0 || settings.min_ess_share > 1.0) {
        throw ConfigError("Hessian ESS share must lie in [0, 1]");
    }
    SimulationSettings sim = settings.sim;
    const double target = settings.min_ess_share * sim.draws;
    for (;;) {
        const GraphSample sample = simulate_stats(theta_star, model, start, sim, rng);
        double min_ess = static_cast<double>(sample.size());
        for (Eigen::Index k = 0; k < sample.stats.cols(); ++k) {
            try {
                min_ess = std::min(min_ess, ess(sample.stats.col(k)));
            } catch (const DomainError&) {
                // constant statistic: nothing left to decorrelate
            }
        }
        const bool met = min_ess >= target;
        if (met || sim.thin > settings.max_thin / 2) {
            return {estimate_true_hessian(theta_star, sample, prior), sample.stats.colwise().mean().transpose(), sim.thin,
                    min_ess, met};
        }
        sim.thin *= 2;
    }
}

RefinedMode refine_mode(const Vector& theta_star, const Vector& observed_stats, const BoundModel& model,
                        const Graph& start, const HessianSampling& sampling, const ModeRefinement& settings,
                        const GaussianPrior& prior, Rng& rng) {
    if (settings.newton_steps < 0 || !(settings.max_step > 0.0)) {
        throw ConfigError("Newton refinement needs newton_steps >= 0 and max_step > 0");
    }
    if (observed_stats.size() != theta_star.size()) throw ConfigError("dimension mismatch in Newton refinement");
    RefinedMode out;
    out.theta = theta_star;
    out.hessian = sample_true_hessian(out.theta, model, start, sampling, prior, rng);
    for (int k = 0; k < settings.newton_steps; ++k) {
        const Vector grad = observed_stats - out.hessian.mean_stats + prior.gradient(out.theta);
        const Matrix neg_h = -out.hessian.h;
        const Vector step = neg_h.llt().solve(grad);
        out.last_step = std::sqrt(step.dot(neg_h * step));
        if (!std::isfinite(out.last_step) || out.last_step > settings.max_step) {
            out.step_refused = true;
            break;
        }
        out.theta += step;
        out.hessian = sample_true_hessian(out.theta, model, start, sampling, prior, rng);
        ++out.steps_taken;
    }
    return out;
}

CalibrationMap build_map(const Vector& theta_star, const Matrix& h_star, const Vector& theta_pl, const Matrix& h_pl) {
    const auto d = theta_star.size();
    if (theta_pl.size() != d || h_star.rows() != d || h_pl.rows() != d) {
        throw ConfigError("calibration inputs have inconsistent dimensions");
    }
    require_symmetric(h_star, "true-posterior Hessian H*");
    require_symmetric(h_pl, "pseudo-posterior Hessian H_PL");
    const Matrix n_factor = upper_cholesky(-h_star, "true-posterior Hessian H*");
    const Matrix m_factor = upper_cholesky(-h_pl, "pseudo-posterior Hessian H_PL");

    CalibrationMap map;
    map.theta_star = theta_star;
    map.theta_pl = theta_pl;
    map.h_star = h_star;
    map.h_pl = h_pl;
    map.w = m_factor.triangularView<Eigen::Upper>().solve(n_factor);
    map.v = map.w.triangularView<Eigen::Upper>().solve(Matrix::Identity(d, d));
    map.lambda = theta_pl - map.w * theta_star;
    map.log_abs_det_w = map.w.diagonal().array().abs().log().sum();

    const double residual = (map.w.transpose() * h_pl * map.w - h_star).norm() / h_star.norm();
    if (!(residual < 1e-10)) {
        throw NotDefiniteError("curvature matching residual " + std::to_string(residual) +
                               " exceeds 1e-10; Hessians are too ill-conditioned");
    }
    return map;
}

McmcChain correct_sample(const McmcChain& chain, const CalibrationMap& map) {
    if (chain.dim() != map.dim()) throw ConfigError("chain and calibration map dimensions differ");
    McmcChain out = chain;
    const Eigen::RowVectorXd shift = (map.theta_star - map.v * map.theta_pl).transpose();
    out.draws = (chain.draws * map.v.transpose()).rowwise() + shift;
    out.log_target = chain.log_target.array() + map.log_abs_det_w;
    return out;
}

double calibrated_log_density(const Vector& theta, const PseudoPosteriorSurface& surface, const CalibrationMap& map) {
    return map.log_abs_det_w + surface.log_density(map.forward(theta));
}

namespace {

void write_block(std::ostream& os, const char* key, const Matrix& m) {
    os << key << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? " " : "") << m(r, c);
        os << '\n';
    }
}

Matrix read_block(std::istream& is, const char* key, Eigen::Index rows, Eigen::Index cols) {
    std::string line;
    while (std::getline(is, line) && (line.empty() || line[0] == '#')) {
    }
    if (line != key) throw DataError(std::string("calibration map: expected '") + key + "', found '" + line + "'");
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (!std::getline(is, line)) throw DataError(std::string("calibration map: truncated block ") + key);
        std::istringstream row(line);
        for (Eigen::Index c = 0; c < cols; ++c) {
            if (!(row >> m(r, c))) throw DataError(std::string("calibration map: bad number in block ") + key);
        }
    }
    return m;
}

}  // namespace

void write_calibration_map(std::ostream& os, const CalibrationMap& map) {
    const auto old = os.precision(std::numeric_limits<double>::max_digits10);
    const auto d = map.dim();
    os << "# affine calibration map g(theta) = W theta + lambda\n";
    os << "dim " << d << '\n';
    write_block(os, "theta_star", map.theta_star.transpose());
    write_block(os, "theta_pl", map.theta_pl.transpose());
    write_block(os, "h_star", map.h_star);
    write_block(os, "h_pl", map.h_pl);
    write_block(os, "w", map.w);
    write_block(os, "v", map.v);
    write_block(os, "lambda", map.lambda.transpose());
    os << "log_abs_det_w\n" << map.log_abs_det_w << '\n';
    os.precision(old);
}

CalibrationMap read_calibration_map(std::istream& is) {
    std::string line;
    while (std::getline(is, line) && (line.empty() || line[0] == '#')) {
    }
    int d = 0;
    if (std::sscanf(line.c_str(), "dim %d", &d) != 1 || d < 1) throw DataError("calibration map: missing dim line");
    CalibrationMap map;
    map.theta_star = read_block(is, "theta_star", 1, d).row(0).transpose();
    map.theta_pl = read_block(is, "theta_pl", 1, d).row(0).transpose();
    map.h_star = read_block(is, "h_star", d, d);
    map.h_pl = read_block(is, "h_pl", d, d);
    map.w = read_block(is, "w", d, d);
    map.v = read_block(is, "v", d, d);
    map.lambda = read_block(is, "lambda", 1, d).row(0).transpose();
    map.log_abs_det_w = read_block(is, "log_abs_det_w", 1, 1)(0, 0);
    return map;
}

}  // namespace ergmcal
