#ifndef ERGMCAL_CALIBRATION_HPP_
#define ERGMCAL_CALIBRATION_HPP_

#include <cstdint>
#include <iosfwd>

#include "ergmcal/samplers.hpp"

namespace ergmcal {

/// s(y) - mean_i s(y'_i) + grad log p(theta): a Monte Carlo estimate of the
/// gradient of the true log-posterior when the y'_i are drawn at theta.
Vector noisy_grad_log_post(const Vector& theta, const Vector& observed_stats, const GraphSample& sample,
                           const GaussianPrior& prior);

struct RobbinsMonroConfig {
    double alpha = 0.001;      ///< step sizes alpha / i
    double tol = 1e-3;         ///< on |theta_{i+1} - theta_i|_inf
    int persistence = 5;       ///< consecutive small steps required to stop
    int max_iters = 5000;
    SimulationSettings sim;    ///< graphs per gradient estimate
    /// Iteration counts as saturated when the simulated graphs average at
    /// least this density, or fewer than `empty_fraction` of the observed edges.
    double saturated_density = 0.99;
    double empty_fraction = 0.01;
    /// Abort when more than this share of iterations is saturated.
    double max_saturated_share = 0.5;
    /// Warn when the first iteration's simulated graphs exceed this density.
    double dense_warning = 0.9;
};

struct RobbinsMonroResult {
    Vector theta;
    int iterations = 0;
    bool converged = false;
    /// First simulation was denser than RobbinsMonroConfig::dense_warning.
    bool dense_start = false;
    int saturated_iterations = 0;
    Matrix trajectory;  ///< (iterations + 1) x d, starting with theta0
};

/// Robbins-Monro ascent theta_{i+1} = theta_i + (alpha / i) * noisy gradient,
/// with a fresh TNT simulation from the observed graph at every iterate.
/// Hitting max_iters returns with converged == false; persistent saturation
/// throws DegeneracyError.
RobbinsMonroResult robbins_monro_map(const Vector& theta0, const RobbinsMonroConfig& cfg, const Graph& observed,
                                     const ModelSpec& model, const GaussianPrior& prior, std::uint64_t seed);

/// H* = -Cov(s(y')) + hess log p, with the N - 1 covariance denominator.
/// Throws NotDefiniteError when the estimate is not negative definite.
Matrix estimate_true_hessian(const Vector& theta_star, const GraphSample& sample, const GaussianPrior& prior);

/// Simulation budget for H*. Successive draws of a TNT chain on a large sparse
/// graph are strongly correlated, which biases the covariance towards zero, so
/// the thinning is doubled until every statistic reaches an ESS of
/// min_ess_share * draws or the thinning would exceed max_thin.
struct HessianSampling {
    SimulationSettings sim;
    double min_ess_share = 0.5;
    int max_thin = 1 << 16;
};

struct HessianEstimate {
    Matrix h;
    Vector mean_stats;     ///< sample mean of s(y') at theta_star
    int thin = 0;          ///< thinning of the accepted sample
    double min_ess = 0.0;  ///< smallest per-statistic ESS of that sample
    bool ess_target_met = false;
};

/// Simulates at theta_star from `start` (fresh chain per attempt) and applies
/// estimate_true_hessian to the first sample that meets the ESS target.
HessianEstimate sample_true_hessian(const Vector& theta_star, const BoundModel& model, const Graph& start,
                                    const HessianSampling& settings, const GaussianPrior& prior, Rng& rng);

/// Newton polish of the Robbins-Monro output. With alpha / i gains the
/// iterates contract along a direction of curvature lambda only like
/// i^(-alpha * lambda), so for alpha = 0.001 they stall well short of the mode
/// along weakly curved directions. Each step reuses the H* sample:
/// theta += (-H*)^-1 (s(y) - mean s(y') + grad log p). A step longer than
/// max_step in the -H* metric (posterior sd units) is refused.
struct ModeRefinement {
    int newton_steps = 1;
    double max_step = 3.0;
};

struct RefinedMode {
    Vector theta;
    HessianEstimate hessian;  ///< estimated at the returned theta
    int steps_taken = 0;
    bool step_refused = false;
    double last_step = 0.0;  ///< length of the last proposed step in the -H* metric
};

RefinedMode refine_mode(const Vector& theta_star, const Vector& observed_stats, const BoundModel& model,
                        const Graph& start, const HessianSampling& sampling, const ModeRefinement& settings,
                        const GaussianPrior& prior, Rng& rng);

/// Affine map g(theta) = W theta + lambda that carries the true posterior's
/// mode and mode curvature onto the pseudo-posterior's.
///
/// With upper Cholesky factors -H* = N'N and -H_PL = M'M, W = M^-1 N gives
/// W' H_PL W = H*, and lambda = theta_PL - W theta* puts g(theta*) at
/// theta_PL. Pseudo-posterior draws are corrected through
/// g^-1(theta) = V (theta - theta_PL) + theta*, V = W^-1.
struct CalibrationMap {
    Vector theta_star;
    Vector theta_pl;
    Matrix h_star;
    Matrix h_pl;
    Matrix w;
    Matrix v;
    Vector lambda;
    double log_abs_det_w = 0.0;

    int dim() const noexcept { return static_cast<int>(theta_star.size()); }
    Vector forward(const Vector& theta) const { return w * theta + lambda; }
    Vector inverse(const Vector& theta) const { return v * (theta - theta_pl) + theta_star; }
};

CalibrationMap build_map(const Vector& theta_star, const Matrix& h_star, const Vector& theta_pl, const Matrix& h_pl);

/// Applies g^-1 to every draw. The log target becomes the calibrated log density.
McmcChain correct_sample(const McmcChain& chain, const CalibrationMap& map);

/// log |det W| + log pi_PL(W theta + lambda).
double calibrated_log_density(const Vector& theta, const PseudoPosteriorSurface& surface, const CalibrationMap& map);

/// Full-precision text form: one `key` line followed by matrix rows.
void write_calibration_map(std::ostream& os, const CalibrationMap& map);
CalibrationMap read_calibration_map(std::istream& is);

}  // namespace ergmcal

#endif  // ERGMCAL_CALIBRATION_HPP_
