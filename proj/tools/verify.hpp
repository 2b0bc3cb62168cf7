#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qgrm/tensor_kernels.hpp"

namespace qgrm::cli {

struct Check {
  std::string suite;
  std::string name;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

bool all_pass(const std::vector<Check>& checks);

// Random contraction instances: brute force against the coordinate graph
// product, the unit-interval bound, and the crossing formula when no three
// line sets meet. Line counts go up to max_lines, lowered to what the brute
// force guard admits.
std::vector<Check> verify_contraction(int d, int N, std::size_t trials, std::uint64_t seed, int max_lines = 3,
                                 std::uint64_t guard = kBruteForceGuard);

// The same checks over every partition and every tuple of line sets for
// N = 1..max_N and m = 1..max_lines.
std::vector<Check> verify_contraction_exhaustive(int d, int max_N, int max_lines, std::uint64_t guard = kBruteForceGuard);

// Entry covariances E[S_ij S_kl] of a Bernoulli model with one label against
// the per-coordinate product formula, for every quadruple where it is nonzero.
std::vector<Check> verify_covariance(int d, int N, double c, std::size_t samples, std::uint64_t seed,
                                     unsigned threads = 1, double z_limit = 4.0);

// Empirical variance of tr S^2 against slack x the coincidence bound, and the
// bound decreasing along N = 25, 100, 400.
std::vector<Check> verify_variance(int d, int N, double c, std::size_t samples, std::uint64_t seed,
                                   unsigned threads = 1, double slack = 1.2);

// Two-cycle factors: each in (0, 1], the exclusive-coordinate bound for lines
// joining the cycles, and 1/d^2 for a coordinate owned by one such line.
std::vector<Check> verify_upsilon(int d, int N, std::size_t trials, std::uint64_t seed, int max_lines = 3);

}  // namespace qgrm::cli
