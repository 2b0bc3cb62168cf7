#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qgrm/gamma.hpp"

namespace qgrm {

// One line {first, second} of a pair partition; elements are 1-based, first < second.
struct Line {
  int first = 0;
  int second = 0;
  friend bool operator==(const Line&, const Line&) = default;
};

// A perfect matching of {1, ..., 2m}, held in canonical form: lines sorted by
// their smaller element.
class PairPartition {
 public:
  PairPartition() = default;

  // Accepts pairs in any order and orientation; throws ParameterError unless
  // the pairs cover {1, ..., 2m} exactly once.
  static PairPartition from_pairs(const std::vector<std::pair<int, int>>& pairs);

  int lines_count() const { return static_cast<int>(lines_.size()); }
  int points_count() const { return 2 * lines_count(); }
  std::span<const Line> lines() const { return lines_; }
  const Line& line(int v) const { return lines_[static_cast<std::size_t>(v)]; }

  friend bool operator==(const PairPartition&, const PairPartition&) = default;

 private:
  explicit PairPartition(std::vector<Line> lines) : lines_(std::move(lines)) {}
  friend std::vector<PairPartition> enumerate_pair_partitions(int m, int guard);

  std::vector<Line> lines_;
};

inline constexpr int kDefaultEnumerationGuard = 10;

// All (2m-1)!! pair partitions of {1..2m} in lexicographic canonical order.
// Throws ResourceError when m exceeds the guard.
std::vector<PairPartition> enumerate_pair_partitions(int m, int guard = kDefaultEnumerationGuard);

// Number of unordered pairs of lines {a,b}, {u,v} with a < u < b < v.
int crossing_number(const PairPartition& partition);

// (2m-1)!!, exact.
std::uint64_t double_factorial_odd(int m);

// Coefficients c_k = #{pi : i(pi) = k}, k = 0 .. m(m-1)/2, so that
// sum_pi q^{i(pi)} = sum_k c_k q^k.
std::vector<std::uint64_t> crossing_polynomial(int m, int guard = kDefaultEnumerationGuard);

struct MomentSpec {
  double q = 0.0;
  // Indices into gamma.labels(); word length n >= 1.
  std::vector<std::size_t> word;
  GammaSpec gamma;
};

// sum_pi q^{i(pi)} prod_v Gamma_{mu_{c_v} mu_{d_v}}; zero for odd words.
// q must lie in [0, 1].
double q_gaussian_moment(const MomentSpec& spec, int guard = kDefaultEnumerationGuard);

// Gaussian moment E[X_1 ... X_{2m}] = sum over pair partitions of products of
// covariance entries. Throws ParameterError for odd dimension.
double wick_sum(const Eigen::MatrixXd& covariance, int guard = kDefaultEnumerationGuard);

}  // namespace qgrm
