// net/losses.h
//
// Training losses.  Per-task losses are means over every matrix entry
// (batch x output bins); multi-task objectives combine a primary MSE with a
// binary cross-entropy on soft speech-presence targets, either with fixed
// weights or with learned homoscedastic task uncertainties:
//
//   L = exp(-s1) L1 + exp(-s2) L2 + (s1 + s2)/2,   s_i = log sigma_i^2,
//
// whose stationary point for a constant task loss c sits at sigma^2 = 2c.
// All reductions accumulate in double regardless of the matrix scalar type.

#ifndef DEMIST_NET_LOSSES_H_
#define DEMIST_NET_LOSSES_H_

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace demist {

template <typename Scalar>
double loss_mse(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& pred,
                const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw std::invalid_argument("loss_mse: shape mismatch");
  if (pred.size() == 0) throw std::invalid_argument("loss_mse: empty batch");
  return (pred.template cast<double>() - target.template cast<double>())
      .array()
      .square()
      .mean();
}

// Binary cross-entropy with soft targets; predictions clamped to
// [1e-7, 1 - 1e-7] so the logs stay finite.
template <typename Scalar>
double loss_bce(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& pred,
                const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols())
    throw std::invalid_argument("loss_bce: shape mismatch");
  if (pred.size() == 0) throw std::invalid_argument("loss_bce: empty batch");
  const auto p =
      pred.template cast<double>().array().max(1e-7).min(1.0 - 1e-7);
  const auto t = target.template cast<double>().array();
  return -(t * p.log() + (1.0 - t) * (1.0 - p).log()).mean();
}

inline double loss_multitask_fixed(double l1, double l2, double lambda1, double lambda2) {
  if (lambda1 < 0 || lambda2 < 0)
    throw std::invalid_argument("loss_multitask_fixed: negative weight");
  return lambda1 * l1 + lambda2 * l2;
}

inline double loss_multitask_adaptive(double l1, double l2, double s1, double s2) {
  return std::exp(-s1) * l1 + std::exp(-s2) * l2 + 0.5 * (s1 + s2);
}

}  // namespace demist

#endif  // DEMIST_NET_LOSSES_H_
