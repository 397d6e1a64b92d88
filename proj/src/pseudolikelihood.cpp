#include "ergmcal/pseudolikelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ergmcal/errors.hpp"

namespace ergmcal {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
// sigma(36)(1 - sigma(36)) ~ 2e-16; beyond that the weight underflows in products
constexpr double kVarianceClamp = 36.0;

void require_finite(const Vector& theta) {
    if (!theta.allFinite()) throw DomainError("parameter vector has non-finite entries");
}

void require_dim(const Vector& theta, int d) {
    if (theta.size() != d) {
        throw DomainError("parameter has dimension " + std::to_string(theta.size()) + ", model has " +
                          std::to_string(d));
    }
}

double variance_weight(double eta) {
    const double p = sigmoid(std::clamp(eta, -kVarianceClamp, kVarianceClamp));
    return p * (1.0 - p);
}

}  // namespace

GaussianPrior::GaussianPrior(Vector mean, Matrix covariance)
    : mean_(std::move(mean)), covariance_(std::move(covariance)) {
    const auto d = mean_.size();
    if (d < 1 || covariance_.rows() != d || covariance_.cols() != d) {
        throw ConfigError("prior mean and covariance dimensions disagree");
    }
    if (!covariance_.isApprox(covariance_.transpose(), 1e-12)) throw NotDefiniteError("prior covariance is not symmetric");
    Eigen::LLT<Matrix> llt(covariance_);
    if (llt.info() != Eigen::Success) throw NotDefiniteError("prior covariance is not positive definite");
    precision_ = llt.solve(Matrix::Identity(d, d));
    precision_ = 0.5 * (precision_ + precision_.transpose()).eval();
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    log_norm_ = -0.5 * (static_cast<double>(d) * kLog2Pi + log_det);
}

GaussianPrior GaussianPrior::isotropic(int d, double variance) {
    if (!(variance > 0.0)) throw ConfigError("prior variance must be positive");
    return GaussianPrior(Vector::Zero(d), variance * Matrix::Identity(d, d));
}

double GaussianPrior::log_density(const Vector& theta) const {
    require_dim(theta, dim());
    const Vector r = theta - mean_;
    return log_norm_ - 0.5 * r.dot(precision_ * r);
}

Vector GaussianPrior::gradient(const Vector& theta) const {
    require_dim(theta, dim());
    return -(precision_ * (theta - mean_));
}

double log_prior(const Vector& theta, const GaussianPrior& prior) { return prior.log_density(theta); }
Vector grad_log_prior(const Vector& theta, const GaussianPrior& prior) { return prior.gradient(theta); }
Matrix hess_log_prior(const GaussianPrior& prior) { return prior.hessian(); }

double log1p_exp(double x) noexcept { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log_pl(const Vector& theta, const ChangeStatMatrix& csm) {
    require_dim(theta, csm.dim());
    require_finite(theta);
    double total = 0.0;
    for (Eigen::Index k = 0; k < csm.rows.rows(); ++k) {
        const double eta = csm.rows.row(k).dot(theta);
        total += csm.response[k] * eta - log1p_exp(eta);
    }
    return total;
}

Vector grad_log_pl(const Vector& theta, const ChangeStatMatrix& csm) {
    require_dim(theta, csm.dim());
    require_finite(theta);
    Vector g = Vector::Zero(csm.dim());
    for (Eigen::Index k = 0; k < csm.rows.rows(); ++k) {
        const double eta = csm.rows.row(k).dot(theta);
        g += (csm.response[k] - sigmoid(eta)) * csm.rows.row(k).transpose();
    }
    return g;
}

Matrix hess_log_pl(const Vector& theta, const ChangeStatMatrix& csm) {
    require_dim(theta, csm.dim());
    require_finite(theta);
    Matrix h = Matrix::Zero(csm.dim(), csm.dim());
    for (Eigen::Index k = 0; k < csm.rows.rows(); ++k) {
        const auto row = csm.rows.row(k);
        const double w = variance_weight(row.dot(theta));
        h.noalias() -= w * row.transpose() * row;
    }
    return h;
}

PseudoLikelihood::PseudoLikelihood(const ChangeStatMatrix& csm) : num_dyads_(csm.num_dyads()) {
    const Eigen::Index rows = csm.rows.rows();
    const int d = csm.dim();
    std::vector<Eigen::Index> order(rows);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto less = [&](Eigen::Index a, Eigen::Index b) {
        const double* ra = csm.rows.row(a).data();
        const double* rb = csm.rows.row(b).data();
        return std::lexicographical_compare(ra, ra + d, rb, rb + d);
    };
    std::stable_sort(order.begin(), order.end(), less);

    std::vector<Eigen::Index> starts;
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (r == 0 || less(order[r - 1], order[r])) starts.push_back(r);
    }
    const auto k = static_cast<Eigen::Index>(starts.size());
    patterns_.resize(k, d);
    total_ = Vector::Zero(k);
    ones_ = Vector::Zero(k);
    for (Eigen::Index p = 0; p < k; ++p) {
        const Eigen::Index end = p + 1 < k ? starts[p + 1] : rows;
        patterns_.row(p) = csm.rows.row(order[starts[p]]);
        for (Eigen::Index r = starts[p]; r < end; ++r) {
            total_[p] += 1.0;
            ones_[p] += csm.response[order[r]];
        }
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (csm.response[r] > 0.5) has_one_ = true;
        else has_zero_ = true;
    }
}

double PseudoLikelihood::log_value(const Vector& theta) const {
    require_dim(theta, dim());
    require_finite(theta);
    double total = 0.0;
    for (Eigen::Index p = 0; p < patterns_.rows(); ++p) {
        const double eta = patterns_.row(p).dot(theta);
        total += ones_[p] * eta - total_[p] * log1p_exp(eta);
    }
    return total;
}

Vector PseudoLikelihood::gradient(const Vector& theta) const {
    require_dim(theta, dim());
    require_finite(theta);
    Vector g = Vector::Zero(dim());
    for (Eigen::Index p = 0; p < patterns_.rows(); ++p) {
        const double eta = patterns_.row(p).dot(theta);
        g += (ones_[p] - total_[p] * sigmoid(eta)) * patterns_.row(p).transpose();
    }
    return g;
}

Matrix PseudoLikelihood::hessian(const Vector& theta) const {
    require_dim(theta, dim());
    require_finite(theta);
    Matrix h = Matrix::Zero(dim(), dim());
    for (Eigen::Index p = 0; p < patterns_.rows(); ++p) {
        const auto row = patterns_.row(p);
        h.noalias() -= total_[p] * variance_weight(row.dot(theta)) * row.transpose() * row;
    }
    return h;
}

PseudoPosteriorSurface::PseudoPosteriorSurface(const ChangeStatMatrix& csm, GaussianPrior prior)
    : pl_(csm), prior_(std::move(prior)) {
    if (prior_.dim() != pl_.dim()) {
        throw ConfigError("prior dimension " + std::to_string(prior_.dim()) + " does not match model dimension " +
                          std::to_string(pl_.dim()));
    }
}

double PseudoPosteriorSurface::log_density(const Vector& theta) const {
    return pl_.log_value(theta) + prior_.log_density(theta);
}

Vector PseudoPosteriorSurface::gradient(const Vector& theta) const {
    return pl_.gradient(theta) + prior_.gradient(theta);
}

Matrix PseudoPosteriorSurface::hessian(const Vector& theta) const { return pl_.hessian(theta) + prior_.hessian(); }

ModeEstimate mple(const PseudoLikelihood& pl, const GaussianPrior* prior, const MpleOptions& opts) {
    const int d = pl.dim();
    if (prior && prior->dim() != d) throw ConfigError("prior dimension does not match model dimension");
    if (!prior && !pl.has_both_responses()) {
        throw SeparationError("observed graph is empty or complete; the MPLE does not exist");
    }

    // Minimise the negative objective.
    auto objective = [&](const Vector& x) {
        double v = pl.log_value(x);
        if (prior) v += prior->log_density(x);
        return -v;
    };
    auto gradient = [&](const Vector& x) {
        Vector g = pl.gradient(x);
        if (prior) g += prior->gradient(x);
        return Vector(-g);
    };
    auto hessian = [&](const Vector& x) {
        Matrix h = pl.hessian(x);
        if (prior) h += prior->hessian();
        return h;
    };
    auto initial_inverse = [&](const Vector& x) -> Matrix {
        Eigen::LLT<Matrix> llt(-hessian(x));
        if (llt.info() == Eigen::Success) return llt.solve(Matrix::Identity(d, d));
        return Matrix::Identity(d, d);
    };

    Vector x = opts.start ? *opts.start : Vector::Zero(d);
    if (x.size() != d) throw ConfigError("MPLE start has the wrong dimension");
    double fx = objective(x);
    Vector g = gradient(x);
    Matrix hinv = initial_inverse(x);
    bool reset_used = false;

    ModeEstimate out;
    for (int it = 0; it < opts.max_iters; ++it) {
        out.iterations = it;
        if (g.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
            out.converged = true;
            break;
        }
        Vector p = -hinv * g;
        double slope = g.dot(p);
        if (!(slope < 0.0)) {
            hinv = Matrix::Identity(d, d);
            p = -g;
            slope = g.dot(p);
        }
        double t = 1.0;
        Vector x_new = x + t * p;
        double f_new = objective(x_new);
        for (int halvings = 0; !(f_new <= fx + 1e-4 * t * slope) && halvings < 60; ++halvings) {
            t *= 0.5;
            x_new = x + t * p;
            f_new = objective(x_new);
        }
        const Vector s = x_new - x;
        const Vector g_new = gradient(x_new);
        if (s.lpNorm<Eigen::Infinity>() < opts.step_tol || !(f_new <= fx)) {
            if (g_new.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
                x = x_new;
                g = g_new;
                out.converged = true;
                break;
            }
            if (reset_used) break;
            // stalled on a stale curvature model; restart from the exact Hessian
            reset_used = true;
            hinv = initial_inverse(x);
            continue;
        }
        const Vector y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Matrix id = Matrix::Identity(d, d);
            hinv = (id - rho * s * y.transpose()) * hinv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        if (x.lpNorm<Eigen::Infinity>() > opts.divergence_bound) {
            throw SeparationError("pseudolikelihood maximiser diverged (|theta|_inf > " +
                                  std::to_string(opts.divergence_bound) +
                                  "); the MPLE may not exist for this graph and model");
        }
    }
    if (!out.converged) {
        throw NonConvergenceError("BFGS stopped after " + std::to_string(out.iterations + 1) +
                                  " iterations with gradient norm " + std::to_string(g.lpNorm<Eigen::Infinity>()));
    }
    out.theta = x;
    out.hessian = hessian(x);
    if (!prior) {
        // Under separation the gradient can vanish before |theta| grows large:
        // the fit becomes perfect or the curvature collapses along some direction.
        const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(-out.hessian).eigenvalues();
        if (-pl.log_value(x) < 1e-3) {
            throw SeparationError("the pseudolikelihood fits every dyad perfectly (separated data); the MPLE does "
                                  "not exist for this graph and model");
        }
        if (!(ev.minCoeff() > 1e-9 * std::max(1.0, ev.maxCoeff()))) {
            throw SeparationError("the pseudolikelihood is flat along some direction (collinear statistics or "
                                  "quasi-separated data); the MPLE is not unique or does not exist");
        }
    }
    if (prior) {
        Eigen::LLT<Matrix> llt(-out.hessian);
        if (llt.info() != Eigen::Success) throw NotDefiniteError("pseudo-posterior Hessian at the mode is not negative definite");
    }
    return out;
}

ModeEstimate mple(const ChangeStatMatrix& csm, const GaussianPrior* prior, const MpleOptions& opts) {
    return mple(PseudoLikelihood(csm), prior, opts);
}

}  // namespace ergmcal
