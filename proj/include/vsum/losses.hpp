#pragma once

#include "vsum/sinkhorn.hpp"
#include "vsum/types.hpp"

#include <Eigen/Dense>

namespace vsum {

inline constexpr double kStdFloor = 1e-8;
inline constexpr double kDenominatorFloor = 1e-8;

/// Coefficients of the stage-2 objective plus the stage-1 diversity weight.
struct LossWeights {
  double w_ptrim = 1.0;
  double w_rep = 0.0;
  double w_pctrim = 0.0;
  double nu = 0.0;
};

struct LossResult {
  double value = 0.0;
  Eigen::VectorXd grad;
};

struct PairLossResult {
  double value = 0.0;
  Eigen::VectorXd grad_a;
  Eigen::VectorXd grad_b;
};

/// 1 / max(population std(p), 1e-8).
LossResult loss_sd(const Eigen::VectorXd& p);

/// 1 - Pearson(a, b) with both standard deviations floored at 1e-8.
PairLossResult loss_corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// loss_corr(a, b) + nu * (loss_sd(a) + loss_sd(b)).
PairLossResult loss_pre(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double nu);

/// (N - 1) / max(sum_{t>=2} p_t delta_t, 1e-8). `delta[k]` pairs with p[k + 1].
LossResult loss_ptrim(const Eigen::VectorXd& p, const Eigen::VectorXd& delta);

/// Same form as loss_ptrim with the contextual series.
LossResult loss_pctrim(const Eigen::VectorXd& p, const Eigen::VectorXd& gamma);

struct UnsupLossResult {
  double value = 0.0;
  Eigen::VectorXd grad;
  double ptrim = 0.0;
  double rep = 0.0;
  double pctrim = 0.0;
  double sd = 0.0;
  bool rep_converged = true;
};

/// w_ptrim L_PTRIM + w_rep L_REP + w_pctrim L_PCTRIM + L_SD. Terms with zero
/// weight are not evaluated (their component fields stay 0).
UnsupLossResult loss_unsup(const Eigen::VectorXd& p, const Eigen::VectorXd& delta, const Eigen::VectorXd& gamma,
                           const FeatureMatrix& features, const LossWeights& weights, const SinkhornConfig& cfg);

}  // namespace vsum
