#include "vsum/sinkhorn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace vsum {

namespace {

constexpr double kMassFloor = 1e-8;

// out_i = -eps * log sum_j exp(logw_j + (pot_j - C_ij) / eps), over rows of C
// (or columns when `by_column`).
void soft_min(const Eigen::MatrixXd& cost, const Eigen::VectorXd& logw, const Eigen::VectorXd& pot, double eps,
              bool by_column, Eigen::VectorXd& out) {
  const Eigen::Index n = by_column ? cost.cols() : cost.rows();
  const Eigen::Index m = by_column ? cost.rows() : cost.cols();
  out.resize(n);
  std::vector<double> z(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < n; ++i) {
    double hi = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; ++j) {
      const double c = by_column ? cost(j, i) : cost(i, j);
      z[j] = logw(j) + (pot(j) - c) / eps;
      hi = std::max(hi, z[j]);
    }
    double s = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) s += std::exp(z[j] - hi);
    out(i) = -eps * (hi + std::log(s));
  }
}

}  // namespace

EntropicOtResult entropic_ot(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const Eigen::MatrixXd& cost, double eps,
                             int max_iters, double tolerance, bool with_gradient) {
  const Eigen::Index n = a.size();
  const Eigen::Index m = b.size();
  if (cost.rows() != n || cost.cols() != m) throw std::invalid_argument("entropic_ot: cost shape does not match marginals");
  if (!(eps > 0.0)) throw std::invalid_argument("entropic_ot: epsilon must be positive");
  if (max_iters < 1) throw std::invalid_argument("entropic_ot: max_iters must be at least 1");
  if ((a.array() <= 0.0).any() || (b.array() <= 0.0).any()) {
    throw std::invalid_argument("entropic_ot: marginals must be strictly positive");
  }
  const Eigen::VectorXd log_a = a.array().log().matrix();
  const Eigen::VectorXd log_b = b.array().log().matrix();

  // Iterate k: f^k = T_f(g^{k-1}), g^k = T_g(f^k), with g^0 = 0. The column
  // marginal is exact after each g update; convergence is judged on the row
  // marginal, which the next f update yields for free.
  std::vector<Eigen::VectorXd> fs;
  std::vector<Eigen::VectorXd> gs;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd f;
  Eigen::VectorXd f_next;
  soft_min(cost, log_b, g, eps, false, f);
  if (with_gradient) gs.push_back(g);

  EntropicOtResult r;
  for (int k = 1; k <= max_iters; ++k) {
    soft_min(cost, log_a, f, eps, true, g);
    if (with_gradient) {
      fs.push_back(f);
      gs.push_back(g);
    }
    r.iterations = k;
    soft_min(cost, log_b, g, eps, false, f_next);
    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) err += a(i) * std::abs(std::expm1((f(i) - f_next(i)) / eps));
    r.marginal_error = err;
    if (err <= tolerance) {
      r.converged = true;
      break;
    }
    if (k < max_iters) f = f_next;
  }
  r.f = f;
  r.g = g;
  r.value = a.dot(f) + b.dot(g);
  if (!std::isfinite(r.value)) throw std::runtime_error("entropic_ot: non-finite transport value");
  if (!with_gradient) return r;

  r.grad_cost = Eigen::MatrixXd::Zero(n, m);
  r.grad_log_a = a.cwiseProduct(f);
  r.grad_log_b = b.cwiseProduct(g);
  Eigen::VectorXd fb = a;
  Eigen::VectorXd gb = b;
  Eigen::VectorXd next_gb(m);
  for (int k = r.iterations; k >= 1; --k) {
    const auto& fk = fs[static_cast<std::size_t>(k - 1)];
    const auto& gk = gs[static_cast<std::size_t>(k)];
    const auto& gprev = gs[static_cast<std::size_t>(k - 1)];
    if (k < r.iterations) fb.setZero();
    // g_j = -eps log sum_i a_i exp((f_i - C_ij)/eps); P_ij sums to 1 over i.
    for (Eigen::Index j = 0; j < m; ++j) {
      if (gb(j) == 0.0) continue;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double w = gb(j) * std::exp(log_a(i) + (fk(i) + gk(j) - cost(i, j)) / eps);
        fb(i) -= w;
        r.grad_cost(i, j) += w;
        r.grad_log_a(i) -= eps * w;
      }
    }
    // f_i = -eps log sum_j b_j exp((g_j - C_ij)/eps); P_ij sums to 1 over j.
    next_gb.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (fb(i) == 0.0) continue;
      for (Eigen::Index j = 0; j < m; ++j) {
        const double w = fb(i) * std::exp(log_b(j) + (fk(i) + gprev(j) - cost(i, j)) / eps);
        next_gb(j) -= w;
        r.grad_cost(i, j) += w;
        r.grad_log_b(j) -= eps * w;
      }
    }
    gb = next_gb;
  }
  return r;
}

Eigen::MatrixXd transport_plan(const EntropicOtResult& ot, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                               const Eigen::MatrixXd& cost, double eps) {
  Eigen::MatrixXd plan(cost.rows(), cost.cols());
  for (Eigen::Index i = 0; i < cost.rows(); ++i)
    for (Eigen::Index j = 0; j < cost.cols(); ++j)
      plan(i, j) = a(i) * b(j) * std::exp((ot.f(i) + ot.g(j) - cost(i, j)) / eps);
  return plan;
}

double sinkhorn_cost_scale(const FeatureMatrix& x) {
  const Eigen::Index n = x.rows();
  std::vector<double> d;
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) d.push_back((x.row(i) - x.row(j)).squaredNorm());
  if (d.empty()) return 1.0;
  const auto mid = d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2);
  std::nth_element(d.begin(), mid, d.end());
  double med = *mid;
  if (d.size() % 2 == 0) med = 0.5 * (med + *std::max_element(d.begin(), mid));
  return med > 0.0 ? med : 1.0;
}

SinkhornResult sinkhorn_rep(const FeatureMatrix& x, const Eigen::VectorXd& p, const SinkhornConfig& cfg) {
  const Eigen::Index n = x.rows();
  if (n < 1) throw std::invalid_argument("sinkhorn_rep: empty sequence");
  if (p.size() != n) throw std::invalid_argument("sinkhorn_rep: score length does not match features");
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("sinkhorn_rep: epsilon must be positive");
  if (cfg.max_iters < 1) throw std::invalid_argument("sinkhorn_rep: max_iters must be at least 1");
  const double mass = p.sum();
  if (!(mass >= kMassFloor)) throw std::invalid_argument("sinkhorn_rep: scores sum to less than 1e-8");
  if ((p.array() <= 0.0).any()) throw std::invalid_argument("sinkhorn_rep: scores must be positive");

  const double eps = cfg.epsilon * sinkhorn_cost_scale(x);
  const Eigen::MatrixXd gram = x * x.transpose();
  const Eigen::VectorXd sq = gram.diagonal();
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

  // |s_i X_i - t_j X_j|^2 expanded through the Gram matrix.
  auto pair_cost = [&](const Eigen::VectorXd& s, const Eigen::VectorXd& t) {
    Eigen::MatrixXd c(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) c(i, j) = s(i) * s(i) * sq(i) - 2.0 * s(i) * t(j) * gram(i, j) + t(j) * t(j) * sq(j);
    return c;
  };

  const Eigen::VectorXd a = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const Eigen::VectorXd b = p / mass;

  SinkhornResult out;
  Eigen::VectorXd pbar = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd lbar = Eigen::VectorXd::Zero(n);  // d value / d log b

  const auto xy = entropic_ot(a, b, pair_cost(ones, p), eps, cfg.max_iters, cfg.tolerance, true);
  out.value = xy.value;
  out.converged = xy.converged;
  out.iterations = xy.iterations;
  lbar += xy.grad_log_b;
  // d C_ij / d p_j = 2 p_j |X_j|^2 - 2 G_ij
  for (Eigen::Index j = 0; j < n; ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += xy.grad_cost(i, j) * (2.0 * p(j) * sq(j) - 2.0 * gram(i, j));
    pbar(j) += s;
  }

  if (cfg.debiased) {
    const auto xx = entropic_ot(a, a, pair_cost(ones, ones), eps, cfg.max_iters, cfg.tolerance, false);
    const auto yy = entropic_ot(b, b, pair_cost(p, p), eps, cfg.max_iters, cfg.tolerance, true);
    out.value -= 0.5 * (xx.value + yy.value);
    out.converged = out.converged && xx.converged && yy.converged;
    out.iterations = std::max({out.iterations, xx.iterations, yy.iterations});
    lbar -= 0.5 * (yy.grad_log_a + yy.grad_log_b);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double w = -0.5 * yy.grad_cost(i, j);
        if (w == 0.0) continue;
        pbar(i) += w * (2.0 * p(i) * sq(i) - 2.0 * p(j) * gram(i, j));
        pbar(j) += w * (2.0 * p(j) * sq(j) - 2.0 * p(i) * gram(i, j));
      }
    }
  }

  // log b_j = log p_j - log sum p
  const double lsum = lbar.sum();
  for (Eigen::Index k = 0; k < n; ++k) pbar(k) += lbar(k) / p(k) - lsum / mass;
  out.grad = pbar;
  return out;
}

}  // namespace vsum
