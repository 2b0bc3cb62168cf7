#include <gtest/gtest.h>

#include "qgrm/errors.hpp"
#include "qgrm/tensor_kernels.hpp"

using namespace qgrm;

namespace {

ContractionProblem problem(int d, int N, std::vector<std::pair<int, int>> pairs, std::vector<std::vector<int>> sets) {
  std::vector<Subset> line_sets;
  for (const auto& s : sets) line_sets.push_back(Subset::from_members(N, s));
  return ContractionProblem::from_line_sets(d, N, PairPartition::from_pairs(pairs), line_sets);
}

}  // namespace

TEST(Contraction, SingleLineIsOne) {
  for (int N = 1; N <= 3; ++N)
    for (std::uint64_t m = 0; m < (1u << N); ++m) {
      const auto p = ContractionProblem::from_line_sets(2, N, PairPartition::from_pairs({{1, 2}}),
                                                        {Subset::from_mask(N, m)});
      EXPECT_EQ(theta_product(p).exponent, 0);
      EXPECT_EQ(brute_force_contraction(p).value(), 1.0);
    }
}

TEST(Contraction, CrossingPairSharingCoordinates) {
  const auto shared = problem(3, 3, {{1, 3}, {2, 4}}, {{1, 2}, {2, 3}});
  EXPECT_EQ(theta_product(shared), (PowerOfD{3, -2}));
  EXPECT_TRUE(brute_force_contraction(shared).equals(PowerOfD{3, -2}));
  EXPECT_DOUBLE_EQ(brute_force_contraction(shared).value(), 1.0 / 9.0);
  const auto disjoint = problem(3, 3, {{1, 3}, {2, 4}}, {{1}, {2, 3}});
  EXPECT_EQ(theta_product(disjoint).exponent, 0);
  const auto nested = problem(3, 3, {{1, 4}, {2, 3}}, {{1, 2}, {2, 3}});
  EXPECT_EQ(theta_product(nested).exponent, 0);
}

TEST(Contraction, AgreesWithBruteForceForThreeLines) {
  const auto partitions = enumerate_pair_partitions(3);
  for (const auto& pi : partitions)
    for (std::uint64_t code = 0; code < 64; ++code) {
      std::vector<Subset> sets;
      for (int v = 0; v < 3; ++v) sets.push_back(Subset::from_mask(2, (code >> (2 * v)) & 3));
      const auto p = ContractionProblem::from_line_sets(3, 2, pi, sets);
      const PowerOfD theta = theta_product(p);
      EXPECT_LE(theta.exponent, 0);
      EXPECT_TRUE(brute_force_contraction(p).equals(theta));
      if (!has_triple_intersection(p)) EXPECT_EQ(crossing_product(p), theta);
    }
}

TEST(Contraction, TripleIntersectionDetected) {
  EXPECT_TRUE(has_triple_intersection(problem(2, 2, {{1, 2}, {3, 4}, {5, 6}}, {{1}, {1, 2}, {1}})));
  EXPECT_FALSE(has_triple_intersection(problem(2, 2, {{1, 2}, {3, 4}, {5, 6}}, {{1}, {1, 2}, {2}})));
}

TEST(Contraction, GuardAndValidation) {
  const auto big = problem(2, 8, {{1, 3}, {2, 4}}, {{1}, {2}});
  EXPECT_THROW(brute_force_contraction(big, 1000), ResourceError);
  EXPECT_THROW(ContractionProblem::from_line_sets(2, 2, PairPartition::from_pairs({{1, 2}}), {}), ParameterError);
  EXPECT_THROW(theta_r(big, 9), ParameterError);
}

TEST(TwoCycles, EmptySetsGiveOne) {
  const auto p = problem(2, 3, {{1, 3}, {2, 4}}, {{}, {}});
  EXPECT_EQ(upsilon_product(p).exponent, 0);
}

TEST(TwoCycles, StraddlingAndExclusive) {
  const auto p = problem(2, 3, {{1, 3}, {2, 4}}, {{1, 2}, {2}});
  EXPECT_TRUE(line_straddles_cycles(p, 0));
  EXPECT_TRUE(line_straddles_cycles(p, 1));
  EXPECT_EQ(exclusive_size(p, 0), 1);
  EXPECT_EQ(exclusive_size(p, 1), 0);
  EXPECT_EQ(upsilon_r(p, 1).exponent, -2);
  EXPECT_EQ(upsilon_r(p, 3).exponent, 0);
  EXPECT_LE(upsilon_product(p).exponent, -2 * exclusive_size(p, 0));
  const auto within = problem(2, 3, {{1, 2}, {3, 4}}, {{1}, {1}});
  EXPECT_FALSE(line_straddles_cycles(within, 0));
}
