#ifndef ERGMCAL_PSEUDOLIKELIHOOD_HPP_
#define ERGMCAL_PSEUDOLIKELIHOOD_HPP_

#include <optional>

#include "ergmcal/statistics.hpp"

namespace ergmcal {

/// Multivariate normal prior N(mean, covariance).
class GaussianPrior {
  public:
    GaussianPrior(Vector mean, Matrix covariance);

    /// N(0_d, variance * I_d).
    static GaussianPrior isotropic(int d, double variance = 30.0);

    int dim() const noexcept { return static_cast<int>(mean_.size()); }
    const Vector& mean() const noexcept { return mean_; }
    const Matrix& covariance() const noexcept { return covariance_; }
    /// B0 = covariance^-1.
    const Matrix& precision() const noexcept { return precision_; }

    /// Full log-density including the normalising constant.
    double log_density(const Vector& theta) const;
    Vector gradient(const Vector& theta) const;
    /// -covariance^-1, independent of theta.
    Matrix hessian() const { return -precision_; }

  private:
    Vector mean_;
    Matrix covariance_;
    Matrix precision_;
    double log_norm_ = 0.0;
};

double log_prior(const Vector& theta, const GaussianPrior& prior);
Vector grad_log_prior(const Vector& theta, const GaussianPrior& prior);
Matrix hess_log_prior(const GaussianPrior& prior);

/// log(1 + e^x) without overflow.
double log1p_exp(double x) noexcept;
double sigmoid(double x) noexcept;

/// Log pseudolikelihood sum_k [y_k eta_k - log(1 + e^eta_k)], eta_k = theta' delta_k.
double log_pl(const Vector& theta, const ChangeStatMatrix& csm);
Vector grad_log_pl(const Vector& theta, const ChangeStatMatrix& csm);
Matrix hess_log_pl(const Vector& theta, const ChangeStatMatrix& csm);

/// The pseudolikelihood with identical change-statistic rows merged.
///
/// Evaluation cost scales with the number of distinct rows rather than the
/// number of dyads; for low-dimensional structural models on sparse graphs
/// this collapses hundreds of thousands of dyads into a few dozen patterns.
class PseudoLikelihood {
  public:
    explicit PseudoLikelihood(const ChangeStatMatrix& csm);

    int dim() const noexcept { return static_cast<int>(patterns_.cols()); }
    Eigen::Index num_patterns() const noexcept { return patterns_.rows(); }
    std::int64_t num_dyads() const noexcept { return num_dyads_; }
    bool has_both_responses() const noexcept { return has_zero_ && has_one_; }

    double log_value(const Vector& theta) const;
    Vector gradient(const Vector& theta) const;
    Matrix hessian(const Vector& theta) const;

  private:
    RowMatrix patterns_;
    Vector total_;  // dyads sharing the pattern
    Vector ones_;   // of which observed as edges
    std::int64_t num_dyads_ = 0;
    bool has_zero_ = false;
    bool has_one_ = false;
};

/// log pi_PL(theta | y) = log p_PL(y | theta) + log p(theta), unnormalised.
class PseudoPosteriorSurface {
  public:
    PseudoPosteriorSurface(const ChangeStatMatrix& csm, GaussianPrior prior);

    int dim() const noexcept { return pl_.dim(); }
    const PseudoLikelihood& pseudolikelihood() const noexcept { return pl_; }
    const GaussianPrior& prior() const noexcept { return prior_; }

    double log_density(const Vector& theta) const;
    Vector gradient(const Vector& theta) const;
    Matrix hessian(const Vector& theta) const;

  private:
    PseudoLikelihood pl_;
    GaussianPrior prior_;
};

struct MpleOptions {
    int max_iters = 500;
    double grad_tol = 1e-6;
    double step_tol = 1e-8;
    double divergence_bound = 50.0;
    std::optional<Vector> start;
};

struct ModeEstimate {
    Vector theta;
    /// Hessian of the maximised objective at theta (includes the prior term
    /// when a prior was supplied).
    Matrix hessian;
    bool converged = false;
    int iterations = 0;
};

/// BFGS maximiser of log_pl (no prior: the MPLE) or of log_pl + log_prior
/// (the pseudo-posterior mode). Throws NonConvergenceError when the iteration
/// cap is hit and SeparationError when the iterate diverges.
ModeEstimate mple(const PseudoLikelihood& pl, const GaussianPrior* prior = nullptr, const MpleOptions& opts = {});
ModeEstimate mple(const ChangeStatMatrix& csm, const GaussianPrior* prior = nullptr, const MpleOptions& opts = {});

}  // namespace ergmcal

#endif  // ERGMCAL_PSEUDOLIKELIHOOD_HPP_
