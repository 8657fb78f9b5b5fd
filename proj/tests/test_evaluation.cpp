#include "oracles.hpp"

#include "vsum/errors.hpp"
#include "vsum/evaluation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace vsum;

namespace {

std::vector<double> random_with_ties(Rng& rng, std::size_t n, std::uint64_t levels) {
  std::vector<double> v(n);
  for (auto& x : v) x = static_cast<double>(uniform_index(rng, levels)) / static_cast<double>(levels);
  return v;
}

BinaryMatrix row_matrix(std::initializer_list<std::vector<std::uint8_t>> rows) {
  const auto& first = *rows.begin();
  BinaryMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(first.size()));
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) m(r, static_cast<Eigen::Index>(c)) = row[c];
    ++r;
  }
  return m;
}

}  // namespace

TEST(KendallTau, IdentityAndReverse) {
  const std::vector<double> x{0.3, 0.1, 0.9, 0.5, 0.7};
  std::vector<double> rev(x.size());
  std::transform(x.begin(), x.end(), rev.begin(), [](double v) { return -v; });
  EXPECT_DOUBLE_EQ(kendall_tau(x, x).value, 1.0);
  EXPECT_DOUBLE_EQ(kendall_tau(x, rev).value, -1.0);
}

TEST(KendallTau, ConstantSideIsDegenerate) {
  const std::vector<double> x{0.3, 0.1, 0.9}, c{0.5, 0.5, 0.5};
  const auto r = kendall_tau(x, c);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.value, 0.0);
}

TEST(KendallTau, MatchesPairCountingWithTies) {
  Rng rng(1);
  for (int k = 0; k < 300; ++k) {
    const auto n = 2 + uniform_index(rng, 99);
    const auto levels = 2 + uniform_index(rng, 2 * n);
    const auto x = random_with_ties(rng, n, levels);
    const auto y = random_with_ties(rng, n, levels);
    EXPECT_NEAR(kendall_tau(x, y).value, oracle::pair_tau(x, y), 1e-14);
  }
}

TEST(KendallTau, LengthErrors) {
  EXPECT_THROW(kendall_tau(std::vector<double>{1, 2}, std::vector<double>{1}), std::invalid_argument);
  EXPECT_THROW(kendall_tau(std::vector<double>{1}, std::vector<double>{1}), std::invalid_argument);
}

TEST(SpearmanRho, IdentityAndMonotoneTransform) {
  const std::vector<double> x{0.3, 0.1, 0.9, 0.5, 0.7};
  std::vector<double> y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [](double v) { return std::exp(5 * v) - 3; });
  EXPECT_NEAR(spearman_rho(x, x).value, 1.0, 1e-15);
  EXPECT_NEAR(spearman_rho(x, y).value, 1.0, 1e-15);
}

TEST(SpearmanRho, MatchesRankThenPearson) {
  Rng rng(2);
  for (int k = 0; k < 200; ++k) {
    const auto n = 2 + uniform_index(rng, 60);
    const auto x = random_with_ties(rng, n, 2 + uniform_index(rng, n));
    const auto y = random_with_ties(rng, n, 2 + uniform_index(rng, n));
    EXPECT_NEAR(spearman_rho(x, y).value, oracle::rank_pearson(x, y), 1e-12);
  }
}

TEST(SpearmanRho, MidRanks) {
  EXPECT_EQ(mid_ranks(std::vector<double>{0.5, 0.1, 0.5, 0.9}), (std::vector<double>{2.5, 1.0, 2.5, 4.0}));
}

TEST(Correlation, InvariantUnderIncreasingTransforms) {
  Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    const auto n = 2 + uniform_index(rng, 40);
    const auto x = random_with_ties(rng, n, 7);
    const auto y = random_with_ties(rng, n, 9);
    std::vector<double> fx(n);
    std::transform(x.begin(), x.end(), fx.begin(), [](double v) { return std::atan(3 * v) + v * v * v; });
    EXPECT_NEAR(kendall_tau(fx, y).value, kendall_tau(x, y).value, 1e-14);
    EXPECT_NEAR(spearman_rho(fx, y).value, spearman_rho(x, y).value, 1e-12);
  }
}

TEST(Protocol, SingleAnnotatorMatchingRanking) {
  const std::vector<double> p{0.1, 0.5, 0.3, 0.9};
  VideoAnnotations ann;
  ann.gt_score = {0, 0, 0, 0};
  Eigen::MatrixXd us(1, 4);
  us << 1, 3, 2, 5;
  ann.user_scores = us;
  const auto r = correlation_protocol(p, ann, CorrelationTarget::annotators);
  EXPECT_DOUBLE_EQ(r.tau, 1.0);
  EXPECT_DOUBLE_EQ(r.rho, 1.0);
  EXPECT_EQ(r.n_targets, 1);
}

TEST(Protocol, AnnotatorsAreAveraged) {
  Rng rng(4);
  const auto p = random_with_ties(rng, 12, 100);
  const auto a = random_with_ties(rng, 12, 5);
  const auto b = random_with_ties(rng, 12, 5);
  VideoAnnotations ann;
  ann.gt_score.assign(12, 0.5);
  Eigen::MatrixXd us(2, 12);
  for (int t = 0; t < 12; ++t) {
    us(0, t) = a[static_cast<std::size_t>(t)];
    us(1, t) = b[static_cast<std::size_t>(t)];
  }
  ann.user_scores = us;
  const auto r = correlation_protocol(p, ann, CorrelationTarget::annotators);
  EXPECT_NEAR(r.tau, 0.5 * (kendall_tau(p, a).value + kendall_tau(p, b).value), 1e-15);
  EXPECT_NEAR(r.rho, 0.5 * (spearman_rho(p, a).value + spearman_rho(p, b).value), 1e-15);
  EXPECT_EQ(r.n_targets, 2);
}

TEST(Protocol, GtScoreTargetIgnoresAnnotators) {
  const std::vector<double> p{0.1, 0.5, 0.3};
  VideoAnnotations ann;
  ann.gt_score = {0.3, 0.2, 0.1};
  Eigen::MatrixXd us(1, 3);
  us << 1, 2, 3;
  ann.user_scores = us;
  EXPECT_NEAR(correlation_protocol(p, ann, CorrelationTarget::gt_score).tau, kendall_tau(p, ann.gt_score).value, 1e-15);
  ann.user_scores.reset();
  EXPECT_NEAR(correlation_protocol(p, ann, CorrelationTarget::annotators).tau, kendall_tau(p, ann.gt_score).value, 1e-15);
}

TEST(Protocol, NoGroundTruthIsAnError) {
  VideoAnnotations ann;
  EXPECT_THROW(correlation_protocol(std::vector<double>{0.1, 0.2}, ann, CorrelationTarget::gt_score), ValidationError);
}

TEST(F1, IdenticalIsHundred) {
  const std::vector<std::uint8_t> pred{0, 1, 1, 0, 1};
  EXPECT_DOUBLE_EQ(f1_keyshot(pred, row_matrix({{0, 1, 1, 0, 1}}), F1Mode::mean), 100.0);
}

TEST(F1, DisjointIsZero) {
  const std::vector<std::uint8_t> pred{1, 1, 0, 0};
  EXPECT_EQ(f1_keyshot(pred, row_matrix({{0, 0, 1, 1}}), F1Mode::max), 0.0);
}

TEST(F1, EmptyPredictionIsZero) {
  const std::vector<std::uint8_t> pred{0, 0, 0, 0};
  EXPECT_EQ(f1_keyshot(pred, row_matrix({{0, 0, 1, 1}}), F1Mode::mean), 0.0);
}

TEST(F1, MeanAndMaxAggregation) {
  // User 1: P = 2/5, R = 2/5 -> 40. User 2: P = 3/5, R = 3/5 -> 60.
  const std::vector<std::uint8_t> pred{1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  const auto users = row_matrix({{1, 1, 0, 0, 0, 1, 1, 1, 0, 0}, {1, 1, 1, 0, 0, 1, 1, 0, 0, 0}});
  EXPECT_NEAR(f1_keyshot(pred, users, F1Mode::mean), 50.0, 1e-12);
  EXPECT_NEAR(f1_keyshot(pred, users, F1Mode::max), 60.0, 1e-12);
}

TEST(F1, RangeAndExactMatch) {
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    const int frames = 5 + static_cast<int>(uniform_index(rng, 30));
    std::vector<std::uint8_t> pred(static_cast<std::size_t>(frames));
    for (auto& v : pred) v = static_cast<std::uint8_t>(uniform_index(rng, 2));
    BinaryMatrix users(3, frames);
    for (Eigen::Index i = 0; i < users.size(); ++i) users.data()[i] = static_cast<std::uint8_t>(uniform_index(rng, 2));
    const double f = f1_keyshot(pred, users, F1Mode::max);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 100.0);
    const bool any_one = std::any_of(pred.begin(), pred.end(), [](auto v) { return v != 0; });
    for (Eigen::Index c = 0; c < frames; ++c) users(1, c) = pred[static_cast<std::size_t>(c)];
    if (any_one) {
      EXPECT_DOUBLE_EQ(f1_keyshot(pred, users, F1Mode::max), 100.0);
    }
  }
}

TEST(F1, ShapeMismatchThrows) {
  const std::vector<std::uint8_t> pred{1, 0};
  EXPECT_THROW(f1_keyshot(pred, row_matrix({{1, 0, 0}}), F1Mode::mean), std::invalid_argument);
}

TEST(EvalEnums, ParseAndPrint) {
  EXPECT_EQ(parse_correlation_target("gt_score"), CorrelationTarget::gt_score);
  EXPECT_EQ(to_string(F1Mode::max), "max");
  EXPECT_THROW(parse_f1_mode("median"), ConfigError);
}
