#include <gtest/gtest.h>

#include <functional>
#include <vector>

#include "qgrm/errors.hpp"
#include "qgrm/pair_partition.hpp"

using namespace qgrm;

namespace {

// Independent count of matchings by crossing number: match point 1 with each
// later point, recurse on the rest, and count crossings pairwise at the end.
std::vector<std::uint64_t> crossing_counts(int m) {
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(m * (m - 1) / 2 + 1), 0);
  std::vector<int> partner(static_cast<std::size_t>(2 * m + 1), 0);
  std::function<void()> rec = [&] {
    int first = 0;
    for (int i = 1; i <= 2 * m && !first; ++i)
      if (!partner[static_cast<std::size_t>(i)]) first = i;
    if (!first) {
      int crossings = 0;
      for (int a = 1; a <= 2 * m; ++a)
        for (int u = a + 1; u <= 2 * m; ++u) {
          const int b = partner[static_cast<std::size_t>(a)], v = partner[static_cast<std::size_t>(u)];
          if (a < b && u < v && u < b && b < v) ++crossings;
        }
      ++counts[static_cast<std::size_t>(crossings)];
      return;
    }
    for (int j = first + 1; j <= 2 * m; ++j) {
      if (partner[static_cast<std::size_t>(j)]) continue;
      partner[static_cast<std::size_t>(first)] = j;
      partner[static_cast<std::size_t>(j)] = first;
      rec();
      partner[static_cast<std::size_t>(first)] = partner[static_cast<std::size_t>(j)] = 0;
    }
  };
  rec();
  return counts;
}

}  // namespace

TEST(PairPartitions, CountIsDoubleFactorial) {
  for (int m = 1; m <= 6; ++m) {
    EXPECT_EQ(enumerate_pair_partitions(m).size(), double_factorial_odd(m));
  }
  EXPECT_EQ(double_factorial_odd(5), 945u);
}

TEST(PairPartitions, CanonicalAndDistinct) {
  const auto all = enumerate_pair_partitions(4);
  for (std::size_t i = 0; i < all.size(); ++i) {
    int prev = 0;
    for (const Line& l : all[i].lines()) {
      EXPECT_LT(l.first, l.second);
      EXPECT_GT(l.first, prev);
      prev = l.first;
    }
    for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(all[i] == all[j]);
  }
}

TEST(PairPartitions, FromPairsNormalizes) {
  const auto p = PairPartition::from_pairs({{4, 2}, {3, 1}});
  EXPECT_EQ(p.line(0), (Line{1, 3}));
  EXPECT_EQ(p.line(1), (Line{2, 4}));
  EXPECT_EQ(crossing_number(p), 1);
  EXPECT_THROW(PairPartition::from_pairs({{1, 2}, {2, 3}}), ParameterError);
  EXPECT_THROW(PairPartition::from_pairs({{1, 3}}), ParameterError);
}

TEST(PairPartitions, GuardThrows) { EXPECT_THROW(enumerate_pair_partitions(11), ResourceError); }

TEST(CrossingPolynomial, MatchesIndependentCount) {
  for (int m = 1; m <= 6; ++m) EXPECT_EQ(crossing_polynomial(m), crossing_counts(m)) << m;
}

TEST(CrossingPolynomial, FrozenCoefficients) {
  EXPECT_EQ(crossing_polynomial(3), (std::vector<std::uint64_t>{5, 6, 3, 1}));
  EXPECT_EQ(crossing_polynomial(4), (std::vector<std::uint64_t>{14, 28, 28, 20, 10, 4, 1}));
}

TEST(QGaussianMoment, SmallOrders) {
  const GammaSpec ones = GammaSpec::all_ones({"m"});
  auto moment = [&](double q, int n) {
    return q_gaussian_moment({q, std::vector<std::size_t>(static_cast<std::size_t>(n), 0), ones});
  };
  for (double q : {0.0, 0.25, 0.5, 1.0}) {
    EXPECT_EQ(moment(q, 1), 0.0);
    EXPECT_EQ(moment(q, 3), 0.0);
    EXPECT_EQ(moment(q, 2), 1.0);
    EXPECT_EQ(moment(q, 4), 2.0 + q);
    EXPECT_EQ(moment(q, 6), 5.0 + 6.0 * q + 3.0 * q * q + q * q * q);
  }
  EXPECT_THROW(moment(1.5, 2), ParameterError);
}

TEST(QGaussianMoment, TwoIndependentLabels) {
  const GammaSpec g = GammaSpec::identity({"a", "b"});
  EXPECT_DOUBLE_EQ(q_gaussian_moment({0.3, {0, 1, 0, 1}, g}), 0.3);
  EXPECT_DOUBLE_EQ(q_gaussian_moment({0.3, {0, 0, 1, 1}, g}), 1.0);
  EXPECT_DOUBLE_EQ(q_gaussian_moment({0.3, {0, 1, 1, 0}, g}), 1.0);
}

TEST(WickSum, MatchesGaussianMoments) {
  Eigen::MatrixXd c(4, 4);
  c.setConstant(2.0);
  EXPECT_DOUBLE_EQ(wick_sum(c), 3 * 4.0);  // E X^4 = 3 sigma^4 with sigma^2 = 2
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(4, 4);
  EXPECT_DOUBLE_EQ(wick_sum(id), 0.0);
  EXPECT_THROW(wick_sum(Eigen::MatrixXd::Identity(3, 3)), ParameterError);
}
