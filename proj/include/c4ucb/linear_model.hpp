#pragma once

// Ridge estimate of the click-weight parameter and its confidence ellipsoid.
//
// The Gram matrix V = lambda*I + sum gamma_k^2 x x^T is maintained together
// with its inverse (Sherman-Morrison per observation, full Cholesky
// re-inversion every `reinvert_every` observations) and ln det V (matrix
// determinant lemma, re-synced on re-inversion).

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace c4ucb {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Upper/lower confidence bound on one item's expected weight.
template <typename Scalar>
struct ArmBoundsT {
  Scalar mean = 0;
  Scalar radius = 0;
  Scalar upper = 0;
  Scalar lower = 0;
};

/// Confidence bounds for a batch of items (one per context column).
template <typename Scalar>
struct BatchBoundsT {
  VectorX<Scalar> mean;
  VectorX<Scalar> radius;
  VectorX<Scalar> upper;
  VectorX<Scalar> lower;
};

/// One observed position of a cascade: context, position discount, realized weight.
template <typename Scalar>
struct ObservationT {
  VectorX<Scalar> context;
  Scalar discount = 1;
  Scalar weight = 0;
};

/// Summary of one update() call. `downdate` holds columns c_i such that
/// V_after^{-1} = V_before^{-1} - sum_i c_i c_i^T, valid unless `reinverted`.
template <typename Scalar>
struct UpdateReportT {
  MatrixX<Scalar> downdate;
  bool reinverted = false;
  Scalar log_det_before = 0;
  Scalar log_det_after = 0;
};

template <typename Scalar>
struct EllipsoidParamsT {
  Scalar lambda = Scalar(0.1);
  Scalar noise_r = Scalar(0.5);
  Scalar delta = Scalar(0.1);
  int reinvert_every = 1000;
};

template <typename Scalar = double>
class EllipsoidState {
 public:
  using Vector = VectorX<Scalar>;
  using Matrix = MatrixX<Scalar>;
  using Params = EllipsoidParamsT<Scalar>;
  using Observation = ObservationT<Scalar>;
  using Report = UpdateReportT<Scalar>;

  EllipsoidState(Eigen::Index dim, const Params& params) : params_(params) {
    if (dim < 1) throw std::invalid_argument("ellipsoid dimension must be positive");
    if (!(params.lambda > 0) || !std::isfinite(params.lambda))
      throw std::invalid_argument("ridge parameter lambda must be positive");
    if (!(params.noise_r > 0)) throw std::invalid_argument("noise constant R must be positive");
    if (!(params.delta > 0 && params.delta < 1))
      throw std::invalid_argument("confidence level delta must lie in (0,1)");
    if (params.reinvert_every < 1) throw std::invalid_argument("reinvert_every must be >= 1");
    gram_ = params.lambda * Matrix::Identity(dim, dim);
    gram_inv_ = Matrix::Identity(dim, dim) / params.lambda;
    response_ = Vector::Zero(dim);
    theta_hat_ = Vector::Zero(dim);
    log_det_ = Scalar(dim) * std::log(params.lambda);
    beta_ = 1;  // beta_0 = 1 at initialization
  }

  Eigen::Index dim() const { return gram_.rows(); }
  const Matrix& gram() const { return gram_; }
  const Matrix& gram_inv() const { return gram_inv_; }
  const Vector& response() const { return response_; }
  const Vector& theta_hat() const { return theta_hat_; }
  Scalar beta() const { return beta_; }
  Scalar log_det() const { return log_det_; }
  Scalar lambda() const { return params_.lambda; }
  Scalar noise_r() const { return params_.noise_r; }
  Scalar delta() const { return params_.delta; }
  const Params& params() const { return params_; }
  /// Number of rank-one observations absorbed so far.
  std::int64_t num_observations() const { return num_observations_; }
  /// Incremented by every non-empty update(); used to key caches.
  std::uint64_t version() const { return version_; }

  /// beta_t(delta) = R sqrt(ln(det V / (lambda^d delta^2))) + sqrt(lambda)
  Scalar beta_from_log_det(Scalar log_det) const {
    const Scalar arg = log_det - Scalar(dim()) * std::log(params_.lambda) -
                       2 * std::log(params_.delta);
    return params_.noise_r * std::sqrt(std::max(arg, Scalar(0))) + std::sqrt(params_.lambda);
  }

  Report update(std::span<const Observation> observed) {
    Report report;
    report.log_det_before = log_det_;
    report.log_det_after = log_det_;
    if (observed.empty()) return report;
    for (const auto& o : observed) validate(o);

    report.downdate.resize(dim(), static_cast<Eigen::Index>(observed.size()));
    Eigen::Index col = 0;
    for (const auto& o : observed) {
      const Vector u = o.discount * o.context;
      const Vector w = gram_inv_ * u;
      const Scalar denom = 1 + u.dot(w);
      gram_.noalias() += u * u.transpose();
      gram_inv_.noalias() -= (w * w.transpose()) / denom;
      log_det_ += std::log(denom);
      // X row gamma*x^T, Y row gamma*w  ->  b += gamma^2 * w * x
      response_.noalias() += (o.discount * o.discount * o.weight) * o.context;
      report.downdate.col(col++) = w / std::sqrt(denom);
      ++num_observations_;
      if (num_observations_ % params_.reinvert_every == 0) {
        reinvert();
        report.reinverted = true;
      }
    }
    gram_ = Scalar(0.5) * (gram_ + gram_.transpose()).eval();
    theta_hat_.noalias() = gram_inv_ * response_;
    beta_ = beta_from_log_det(log_det_);
    ++version_;
    report.log_det_after = log_det_;
    return report;
  }

  /// x^T V^{-1} x
  template <typename Derived>
  Scalar inv_norm_sq(const Eigen::MatrixBase<Derived>& x) const {
    check_context(x);
    return std::max(Scalar(0), x.dot(gram_inv_ * x));
  }

  template <typename Derived>
  ArmBoundsT<Scalar> bounds_for(const Eigen::MatrixBase<Derived>& x) const {
    check_context(x);
    ArmBoundsT<Scalar> b;
    b.mean = theta_hat_.dot(x);
    b.radius = beta_ * std::sqrt(std::max(Scalar(0), x.dot(gram_inv_ * x)));
    b.upper = std::clamp(b.mean + b.radius, Scalar(0), Scalar(1));
    b.lower = std::clamp(b.mean - b.radius, Scalar(0), Scalar(1));
    return b;
  }

  /// Bounds for every column of `contexts` (d x n) in one pass.
  template <typename Derived>
  BatchBoundsT<Scalar> bounds_for_all(const Eigen::MatrixBase<Derived>& contexts) const {
    if (contexts.rows() != dim()) throw std::invalid_argument("context dimension mismatch");
    if (!contexts.allFinite()) throw std::domain_error("non-finite context");
    BatchBoundsT<Scalar> b;
    b.mean = contexts.transpose() * theta_hat_;
    const Matrix vx = gram_inv_ * contexts;
    b.radius = beta_ * (vx.cwiseProduct(contexts).colwise().sum().transpose().array().max(Scalar(0)))
                           .sqrt()
                           .matrix();
    b.upper = (b.mean + b.radius).array().max(Scalar(0)).min(Scalar(1)).matrix();
    b.lower = (b.mean - b.radius).array().max(Scalar(0)).min(Scalar(1)).matrix();
    return b;
  }

  /// True iff ||theta_hat - theta||_V <= beta.
  template <typename Derived>
  bool confidence_contains(const Eigen::MatrixBase<Derived>& theta) const {
    if (theta.size() != dim()) throw std::invalid_argument("parameter dimension mismatch");
    const Vector diff = theta_hat_ - theta;
    return std::sqrt(std::max(Scalar(0), diff.dot(gram_ * diff))) <= beta_;
  }

  /// max |V V^{-1} - I|
  Scalar inverse_error() const {
    return (gram_ * gram_inv_ - Matrix::Identity(dim(), dim())).cwiseAbs().maxCoeff();
  }

 private:
  template <typename Derived>
  void check_context(const Eigen::MatrixBase<Derived>& x) const {
    if (x.size() != dim()) throw std::invalid_argument("context dimension mismatch");
    if (!x.allFinite()) throw std::domain_error("non-finite context");
  }

  void validate(const Observation& o) const {
    if (o.context.size() != dim()) throw std::invalid_argument("context dimension mismatch");
    if (!o.context.allFinite() || !std::isfinite(o.discount) || !std::isfinite(o.weight))
      throw std::domain_error("non-finite observation");
    if (o.discount < 0 || o.discount > 1) throw std::domain_error("discount outside [0,1]");
    if (o.weight < 0 || o.weight > 1) throw std::domain_error("weight outside [0,1]");
  }

  void reinvert() {
    gram_ = Scalar(0.5) * (gram_ + gram_.transpose()).eval();
    Eigen::LLT<Matrix> llt(gram_);
    if (llt.info() != Eigen::Success) throw std::runtime_error("Gram matrix lost positive definiteness");
    gram_inv_ = llt.solve(Matrix::Identity(dim(), dim()));
    gram_inv_ = Scalar(0.5) * (gram_inv_ + gram_inv_.transpose()).eval();
    const Matrix l = llt.matrixL();
    // keep ln det monotone across the re-sync: drift is O(1e-12)
    log_det_ = std::max(log_det_, 2 * l.diagonal().array().log().sum());
  }

  Params params_;
  Matrix gram_;
  Matrix gram_inv_;
  Vector response_;
  Vector theta_hat_;
  Scalar beta_ = 1;
  Scalar log_det_ = 0;
  std::int64_t num_observations_ = 0;
  std::uint64_t version_ = 0;
};

using Ellipsoid = EllipsoidState<double>;
using ArmBounds = ArmBoundsT<double>;
using BatchBounds = BatchBoundsT<double>;
using Observation = ObservationT<double>;
using UpdateReport = UpdateReportT<double>;
using EllipsoidParams = EllipsoidParamsT<double>;

}  // namespace c4ucb
