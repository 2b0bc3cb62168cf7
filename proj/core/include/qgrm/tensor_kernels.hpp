#pragma once

#include <cstdint>
#include <vector>

#include "qgrm/pair_partition.hpp"
#include "qgrm/subset_weights.hpp"

namespace qgrm {

// The exact value base^exponent.
struct PowerOfD {
  int base = 2;
  int exponent = 0;

  double value() const;
  friend bool operator==(const PowerOfD&, const PowerOfD&) = default;
};

// Index sets A_1..A_{2m} attached to the points of a pair partition. Only the
// set at the smaller end of each line enters the contraction; covariance
// pairing forces both ends to carry the same set anyway.
struct ContractionProblem {
  int d = 2;
  int N = 1;
  std::vector<Subset> sets;
  PairPartition partition;

  // Puts line_sets[v] on both ends of line v.
  static ContractionProblem from_line_sets(int d, int N, const PairPartition& partition,
                                           const std::vector<Subset>& line_sets);

  const Subset& line_set(int v) const;
  // Throws ParameterError on inconsistent sizes.
  void validate() const;
};

// Per-coordinate factor of the normalized contraction, evaluated as
// d^(components - 1 - n) on the graph of index identifications (cyclic
// successor, 2m + 1 == 1).
PowerOfD theta_r(const ContractionProblem& problem, int r);
// Product of theta_r over r = 1..N.
PowerOfD theta_product(const ContractionProblem& problem);

// Product over crossing line pairs of d^(-2 |A_i cap A_j|).
PowerOfD crossing_product(const ContractionProblem& problem);
// True when three distinct lines carry sets with a common element.
bool has_triple_intersection(const ContractionProblem& problem);

// Literal contraction (1/d^N) sum_{i^1..i^2m} prod_v T^{A_{c_v}}, kept as an
// integer count of surviving index tuples times d^scale_exponent.
struct ExactContraction {
  std::uint64_t count = 0;
  int base = 2;
  int scale_exponent = 0;

  double value() const;
  bool equals(const PowerOfD& p) const;
};

inline constexpr std::uint64_t kBruteForceGuard = 10'000'000;

// Throws ResourceError if d^(2mN) exceeds the guard.
ExactContraction brute_force_contraction(const ContractionProblem& problem,
                                         std::uint64_t guard = kBruteForceGuard);

// Variance-term factor on two cycles: successor k+1 except m -> 1 and
// 2m -> m+1. Normalized by d^-2 so that a coordinate in no set gives 1.
PowerOfD upsilon_r(const ContractionProblem& problem, int r);
PowerOfD upsilon_product(const ContractionProblem& problem);

// Whether line v joins a point of {1..m} with a point of {m+1..2m}.
bool line_straddles_cycles(const ContractionProblem& problem, int v);
// |A_{c_v} minus the union of the other line sets|.
int exclusive_size(const ContractionProblem& problem, int v);

}  // namespace qgrm
