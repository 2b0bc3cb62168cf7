#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qgrm/rng.hpp"

namespace qgrm {

// A subset of {1, ..., n} stored as a little-endian multiword bitmask; bit r-1
// represents element r.
class Subset {
 public:
  Subset() = default;
  explicit Subset(int n);

  static Subset from_members(int n, const std::vector<int>& members);
  static Subset from_mask(int n, std::uint64_t mask);
  // Hex digits, most significant first, optional 0x prefix.
  static Subset from_hex(int n, const std::string& hex);
  static Subset full(int n);

  int ambient() const { return n_; }
  bool contains(int element) const;
  void insert(int element);
  int size() const;
  bool empty() const { return size() == 0; }
  std::vector<int> members() const;
  // Only for ambient <= 64.
  std::uint64_t mask() const;
  std::string to_hex() const;

  int intersection_size(const Subset& other) const;
  Subset operator&(const Subset& other) const;
  Subset operator|(const Subset& other) const;
  Subset minus(const Subset& other) const;

  friend bool operator==(const Subset&, const Subset&) = default;
  // Numeric order of the bitmask.
  friend bool operator<(const Subset& a, const Subset& b);

 private:
  void check_compatible(const Subset& other) const;

  int n_ = 0;
  std::vector<std::uint64_t> words_;
};

enum class SchemeKind { kBernoulli, kFixedSize, kCustom };

// Normalized weights sigma_A on subsets of {1..N}; sigma_A^2 defines the
// probability measure rho on subsets. Immutable after construction.
class WeightScheme {
 public:
  static constexpr double kCustomTolerance = 1e-12;
  static constexpr double kFileTolerance = 1e-9;

  // sigma_A^2 = p^|A| (1-p)^(N-|A|), p = c / sqrt(N); requires p < 1.
  static WeightScheme bernoulli(int N, double c, int d);
  // Uniform over subsets of size floor(c sqrt(N)); requires floor(c sqrt(N)) <= N.
  static WeightScheme fixed_size(int N, double c, int d);
  // Table of sigma_A^2 values; must sum to one within `tolerance`.
  static WeightScheme custom(int N, int d, std::vector<std::pair<Subset, double>> table,
                             double tolerance = kCustomTolerance);
  // Text lines `bitmask_hex,weight` where weight = sigma_A^2; weights must sum to 1 within 1e-9.
  static WeightScheme read_custom(std::istream& in, int N, int d);
  static WeightScheme load_custom(const std::string& path, int N, int d);

  SchemeKind kind() const { return kind_; }
  int N() const { return N_; }
  int d() const { return d_; }
  // The c parameter for Bernoulli / FixedSize schemes.
  std::optional<double> c() const;
  // Bernoulli inclusion probability c / sqrt(N).
  double inclusion_probability() const { return p_; }
  // FixedSize subset size floor(c sqrt(N)).
  int fixed_size_k() const { return k_; }
  const std::vector<std::pair<Subset, double>>& table() const { return table_; }
  const std::vector<double>& table_cdf() const { return cdf_; }

 private:
  WeightScheme() = default;

  SchemeKind kind_ = SchemeKind::kBernoulli;
  int N_ = 0;
  int d_ = 2;
  double c_ = 0.0;
  double p_ = 0.0;
  int k_ = 0;
  std::vector<std::pair<Subset, double>> table_;  // sorted by subset
  std::vector<double> cdf_;
};

double binomial_coefficient(int n, int k);

double sigma_squared(const WeightScheme& scheme, const Subset& subset);

// Draws A with P(A) = sigma_A^2.
Subset sample_subset(const WeightScheme& scheme, RngStream& stream);

// q = exp(-(1 - 1/d^2) c^2) and its inverse.
double q_from_c(double c, int d);
double c_from_q(double q, int d);

// Poisson(lambda) masses on bins 0..K with K = ceil(lambda + 4 sqrt(lambda));
// the last bin holds the whole tail P(X >= K).
std::vector<double> folded_poisson(double lambda);
double total_variation(const std::vector<double>& a, const std::vector<double>& b);

struct PairMarginal {
  int i = 0;  // 1-based positions within the k-tuple
  int j = 0;
  std::vector<double> frequencies;  // folded like the Poisson reference
  double total_variation = 0.0;
};

struct CoincidenceStats {
  int k = 0;
  std::size_t trials = 0;
  // Joint empirical law of (|A_i cap A_j|)_{i<j}, lexicographic pair order.
  std::map<std::vector<int>, double> joint;
  // Frequency of a nonempty intersection A_i cap A_j cap A_l for some i<j<l.
  double triple_overlap_frequency = 0.0;
  // Reference Poisson mean: c^2 for Bernoulli / FixedSize, empirical mean overlap otherwise.
  double poisson_mean = 0.0;
  std::vector<PairMarginal> marginals;
  double max_total_variation = 0.0;
  // Correlation of |A_1 cap A_2| and |A_1 cap A_3| (k >= 3, else 0).
  double pair_correlation = 0.0;
};

// Samples k independent subsets per trial; trial t uses the stream (seed, t).
CoincidenceStats assumption_diagnostics(const WeightScheme& scheme, int k, std::size_t trials,
                                        std::uint64_t seed, unsigned threads = 1);

struct Z4Estimate {
  double value = 0.0;
  double standard_error = 0.0;
  bool exact = false;
};

// sum over n-tuples of sigma^2 ... sigma^2 d^{-2 |A_1 \ (A_2 u ... u A_n)|}:
// closed form for Bernoulli, Monte Carlo (with standard error) otherwise.
Z4Estimate z4_sum(const WeightScheme& scheme, int n, std::size_t samples = 20000, std::uint64_t seed = 1,
                  unsigned threads = 1);
// The Monte Carlo route for any scheme (used to cross-check the closed form).
Z4Estimate z4_sum_monte_carlo(const WeightScheme& scheme, int n, std::size_t samples, std::uint64_t seed,
                              unsigned threads = 1);

}  // namespace qgrm
