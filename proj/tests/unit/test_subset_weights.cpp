#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qgrm/errors.hpp"
#include "qgrm/subset_weights.hpp"

using namespace qgrm;

TEST(Subset, BasicOperations) {
  Subset a = Subset::from_members(70, {1, 3, 65, 70});
  EXPECT_EQ(a.size(), 4);
  EXPECT_TRUE(a.contains(65));
  EXPECT_FALSE(a.contains(2));
  const Subset b = Subset::from_members(70, {3, 70, 5});
  EXPECT_EQ(a.intersection_size(b), 2);
  EXPECT_EQ((a | b).size(), 5);
  EXPECT_EQ(a.minus(b).members(), (std::vector<int>{1, 65}));
  EXPECT_EQ(Subset::from_hex(70, a.to_hex()), a);
  EXPECT_EQ(Subset::from_mask(4, 0b1010).members(), (std::vector<int>{2, 4}));
  EXPECT_EQ(Subset::from_hex(8, "0x0a").mask(), 0x0au);
  EXPECT_THROW(a.insert(71), ParameterError);
  EXPECT_THROW(a | Subset(3), ParameterError);
}

TEST(Coupling, QAndCAreInverse) {
  for (int d : {2, 3, 5})
    for (double c : {0.1, 0.5, 1.0, 2.0}) EXPECT_NEAR(c_from_q(q_from_c(c, d), d), c, 1e-12);
  EXPECT_DOUBLE_EQ(q_from_c(0.0, 2), 1.0);
  EXPECT_NEAR(q_from_c(1.0, 2), std::exp(-0.75), 1e-15);
}

TEST(WeightScheme, BernoulliWeightsSumToOne) {
  const auto s = WeightScheme::bernoulli(10, 1.0, 2);
  double total = 0.0;
  for (std::uint64_t m = 0; m < 1024; ++m) total += sigma_squared(s, Subset::from_mask(10, m));
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(s.inclusion_probability(), 1.0 / std::sqrt(10.0), 1e-15);
  EXPECT_THROW(WeightScheme::bernoulli(1, 2.0, 2), ParameterError);
}

TEST(WeightScheme, FixedSizeIsUniformOnOneLayer) {
  const auto s = WeightScheme::fixed_size(9, 1.0, 2);
  EXPECT_EQ(s.fixed_size_k(), 3);
  EXPECT_NEAR(sigma_squared(s, Subset::from_members(9, {1, 2, 3})), 1.0 / 84.0, 1e-15);
  EXPECT_EQ(sigma_squared(s, Subset::from_members(9, {1, 2})), 0.0);
}

TEST(WeightScheme, CustomTable) {
  std::istringstream in("0x1,0.25\n3,0.75\n");
  const auto s = WeightScheme::read_custom(in, 2, 2);
  EXPECT_DOUBLE_EQ(sigma_squared(s, Subset::from_mask(2, 3)), 0.75);
  EXPECT_DOUBLE_EQ(sigma_squared(s, Subset::from_mask(2, 2)), 0.0);
  std::istringstream bad("1,0.5\n");
  EXPECT_THROW(WeightScheme::read_custom(bad, 2, 2), ParameterError);
  std::istringstream negative("1,1.5\n2,-0.5\n");
  EXPECT_THROW(WeightScheme::read_custom(negative, 2, 2), ParameterError);
}

TEST(SampleSubset, BernoulliSizeMean) {
  const auto s = WeightScheme::bernoulli(100, 1.0, 2);
  RngStream rng(1, 1);
  double total = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) total += sample_subset(s, rng).size();
  const double p = 0.1;
  EXPECT_NEAR(total / n, 100 * p, 4 * std::sqrt(100 * p * (1 - p) / n));
}

TEST(SampleSubset, CustomFrequencies) {
  const auto s = WeightScheme::custom(2, 2, {{Subset::from_mask(2, 1), 0.2}, {Subset::from_mask(2, 3), 0.8}});
  RngStream rng(2, 2);
  int hits = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) hits += sample_subset(s, rng).mask() == 3;
  EXPECT_NEAR(static_cast<double>(hits) / n, 0.8, 4 * std::sqrt(0.16 / n));
}

TEST(Poisson, FoldedMassesSumToOne) {
  for (double lambda : {0.5, 1.0, 4.0}) {
    const auto p = folded_poisson(lambda);
    double total = 0.0;
    for (double x : p) total += x;
    EXPECT_NEAR(total, 1.0, 1e-14);
    EXPECT_NEAR(p[0], std::exp(-lambda), 1e-15);
  }
  EXPECT_DOUBLE_EQ(total_variation({0.5, 0.5}, {1.0, 0.0}), 0.5);
}

TEST(Coincidence, PairOverlapNearPoisson) {
  const auto s = WeightScheme::bernoulli(400, 1.0, 2);
  const auto stats = assumption_diagnostics(s, 3, 20000, 4, 2);
  EXPECT_EQ(stats.marginals.size(), 3u);
  EXPECT_DOUBLE_EQ(stats.poisson_mean, 1.0);
  EXPECT_LT(stats.max_total_variation, 0.05);
  double joint_total = 0.0;
  for (const auto& [k, v] : stats.joint) joint_total += v;
  EXPECT_NEAR(joint_total, 1.0, 1e-12);
}

TEST(Coincidence, ThreadIndependent) {
  const auto s = WeightScheme::bernoulli(50, 1.0, 2);
  const auto a = assumption_diagnostics(s, 3, 3000, 9, 1);
  const auto b = assumption_diagnostics(s, 3, 3000, 9, 3);
  EXPECT_EQ(a.joint, b.joint);
  EXPECT_EQ(a.triple_overlap_frequency, b.triple_overlap_frequency);
  EXPECT_EQ(a.pair_correlation, b.pair_correlation);
}

TEST(Z4Sum, ClosedFormMatchesMonteCarlo) {
  for (int n : {1, 2, 3}) {
    const auto s = WeightScheme::bernoulli(12, 1.0, 3);
    const auto exact = z4_sum(s, n);
    EXPECT_TRUE(exact.exact);
    const auto mc = z4_sum_monte_carlo(s, n, 40000, 5, 2);
    EXPECT_NEAR(mc.value, exact.value, 4 * mc.standard_error + 1e-12) << n;
  }
  // n = 1: every coordinate of A_1 is exclusive.
  const auto s = WeightScheme::bernoulli(16, 1.0, 2);
  EXPECT_NEAR(z4_sum(s, 1).value, std::pow(1 - 0.25 * (1 - 0.25), 16), 1e-14);
}
