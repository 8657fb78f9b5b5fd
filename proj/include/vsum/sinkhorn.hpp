#pragma once

#include "vsum/types.hpp"

#include <Eigen/Dense>

namespace vsum {

/// Entropic optimal-transport settings for the representativeness loss.
///
/// `epsilon` is relative: the regularization actually used is
/// epsilon * median over i < j of |X_i - X_j|^2, which depends only on the
/// features, so it is a constant with respect to the scores.
struct SinkhornConfig {
  double epsilon = 0.05;
  int max_iters = 200;
  double tolerance = 1e-6;  // L1 violation of the source marginal
  bool debiased = true;
};

/// Log-domain Sinkhorn solution of
///   min_P <P, C> + eps KL(P | a b^T)  s.t.  P 1 = a, P^T 1 = b,
/// reported through its dual value <a, f> + <b, g>.
struct EntropicOtResult {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  double marginal_error = 0.0;
  Eigen::VectorXd f, g;  // dual potentials at the returned iterate

  // Gradients of `value` through the unrolled iterations; filled when
  // requested.
  Eigen::MatrixXd grad_cost;
  Eigen::VectorXd grad_log_a;
  Eigen::VectorXd grad_log_b;
};

EntropicOtResult entropic_ot(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cost, double eps,
                             int max_iters, double tolerance, bool with_gradient);

/// Transport plan exp((f_i + g_j - C_ij) / eps) a_i b_j for a solved problem.
Eigen::MatrixXd transport_plan(const EntropicOtResult& ot, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                               const Eigen::MatrixXd& cost, double eps);

/// Median over i < j of |X_i - X_j|^2, or 1 when that is not positive.
double sinkhorn_cost_scale(const FeatureMatrix& x);

struct SinkhornResult {
  double value = 0.0;
  Eigen::VectorXd grad;  // d value / d p
  bool converged = true;
  int iterations = 0;
};

/// Squared-Euclidean OT between the frames X_i (weights 1/N) and the scaled
/// frames p_j X_j (weights p_j / sum p). With `debiased`, the two self terms
/// are subtracted (Sinkhorn divergence). Throws std::invalid_argument when
/// sum p is below 1e-8. Non-convergence is reported, not thrown.
SinkhornResult sinkhorn_rep(const FeatureMatrix& x, const Eigen::VectorXd& p, const SinkhornConfig& cfg);

}  // namespace vsum
