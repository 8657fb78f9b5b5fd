#include "vsum/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vsum {

namespace {

void require_length(const Eigen::VectorXd& p, const char* what) {
  if (p.size() < 2) throw std::invalid_argument(std::string(what) + ": need at least 2 scores");
}

LossResult trim_loss(const Eigen::VectorXd& p, const Eigen::VectorXd& series, const char* what) {
  require_length(p, what);
  const Eigen::Index n = p.size();
  if (series.size() != n - 1) {
    throw std::invalid_argument(std::string(what) + ": series length must be N - 1 (" + std::to_string(n - 1) + "), got " +
                                std::to_string(series.size()));
  }
  const double scale = static_cast<double>(n - 1);
  const double s = p.tail(n - 1).dot(series);
  LossResult r;
  r.grad = Eigen::VectorXd::Zero(n);
  if (s <= kDenominatorFloor) {
    r.value = scale / kDenominatorFloor;
    return r;
  }
  r.value = scale / s;
  r.grad.tail(n - 1) = (-scale / (s * s)) * series;
  return r;
}

}  // namespace

LossResult loss_sd(const Eigen::VectorXd& p) {
  require_length(p, "loss_sd");
  const double n = static_cast<double>(p.size());
  const Eigen::VectorXd c = p.array() - p.mean();
  const double sd = std::sqrt(c.squaredNorm() / n);
  LossResult r;
  if (sd <= kStdFloor) {
    r.value = 1.0 / kStdFloor;
    r.grad = Eigen::VectorXd::Zero(p.size());
    return r;
  }
  r.value = 1.0 / sd;
  // d sd / d p_i = c_i / (n sd)
  r.grad = (-1.0 / (sd * sd * sd * n)) * c;
  return r;
}

PairLossResult loss_corr(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require_length(a, "loss_corr");
  if (a.size() != b.size()) throw std::invalid_argument("loss_corr: score vectors differ in length");
  const double n = static_cast<double>(a.size());
  const Eigen::VectorXd ca = a.array() - a.mean();
  const Eigen::VectorXd cb = b.array() - b.mean();
  const double cov = ca.dot(cb) / n;
  const double sa_raw = std::sqrt(ca.squaredNorm() / n);
  const double sb_raw = std::sqrt(cb.squaredNorm() / n);
  const bool fa = sa_raw <= kStdFloor;
  const bool fb = sb_raw <= kStdFloor;
  const double sa = fa ? kStdFloor : sa_raw;
  const double sb = fb ? kStdFloor : sb_raw;
  const double rho = cov / (sa * sb);

  PairLossResult r;
  r.value = 1.0 - rho;
  // rho = cov / (sa sb); d cov / d a_i = cb_i / n; d sa / d a_i = ca_i / (n sa).
  r.grad_a = -(cb / (n * sa * sb));
  r.grad_b = -(ca / (n * sa * sb));
  if (!fa) r.grad_a += (rho / (n * sa * sa)) * ca;
  if (!fb) r.grad_b += (rho / (n * sb * sb)) * cb;
  return r;
}

PairLossResult loss_pre(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double nu) {
  auto r = loss_corr(a, b);
  if (nu != 0.0) {
    const auto sa = loss_sd(a);
    const auto sb = loss_sd(b);
    r.value += nu * (sa.value + sb.value);
    r.grad_a += nu * sa.grad;
    r.grad_b += nu * sb.grad;
  }
  return r;
}

LossResult loss_ptrim(const Eigen::VectorXd& p, const Eigen::VectorXd& delta) { return trim_loss(p, delta, "loss_ptrim"); }

LossResult loss_pctrim(const Eigen::VectorXd& p, const Eigen::VectorXd& gamma) {
  return trim_loss(p, gamma, "loss_pctrim");
}

UnsupLossResult loss_unsup(const Eigen::VectorXd& p, const Eigen::VectorXd& delta, const Eigen::VectorXd& gamma,
                           const FeatureMatrix& features, const LossWeights& w, const SinkhornConfig& cfg) {
  if (w.w_ptrim < 0.0 || w.w_rep < 0.0 || w.w_pctrim < 0.0) throw std::invalid_argument("loss_unsup: negative weight");
  const auto sd = loss_sd(p);
  UnsupLossResult r;
  r.sd = sd.value;
  r.value = sd.value;
  r.grad = sd.grad;
  if (w.w_ptrim != 0.0) {
    const auto t = loss_ptrim(p, delta);
    r.ptrim = t.value;
    r.value += w.w_ptrim * t.value;
    r.grad += w.w_ptrim * t.grad;
  }
  if (w.w_pctrim != 0.0) {
    const auto t = loss_pctrim(p, gamma);
    r.pctrim = t.value;
    r.value += w.w_pctrim * t.value;
    r.grad += w.w_pctrim * t.grad;
  }
  if (w.w_rep != 0.0) {
    const auto t = sinkhorn_rep(features, p, cfg);
    r.rep = t.value;
    r.rep_converged = t.converged;
    r.value += w.w_rep * t.value;
    r.grad += w.w_rep * t.grad;
  }
  return r;
}

}  // namespace vsum
