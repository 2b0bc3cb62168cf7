#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qgrm/matrix_model.hpp"
#include "qgrm/rng.hpp"
#include "qgrm/spectral_stats.hpp"

namespace qgrm {

struct PauliFactor {
  std::uint8_t index = 0;  // 0 = identity, 1..3 = sigma_1..sigma_3
  std::int8_t sign = 1;
  friend bool operator==(const PauliFactor&, const PauliFactor&) = default;
};

// Symbolic +-sigma_{i_1} (x) ... (x) +-sigma_{i_N}.
struct PauliWord {
  std::vector<PauliFactor> factors;

  int length() const { return static_cast<int>(factors.size()); }
  int sign() const;
  friend bool operator==(const PauliWord&, const PauliWord&) = default;
};

inline constexpr int kPauliDenseCap = 10;

// Each factor independently: +-sigma_0 with probability (1-3r)/2 each,
// +-sigma_k (k = 1, 2, 3) with probability r/2 each.
PauliWord sample_pauli_word(int N, double r, RngStream& stream);

// Positions where the two factors anticommute (distinct non-identity indices).
int anticommuting_positions(const PauliWord& a, const PauliWord& b);
// +1 if the words commute, -1 if they anticommute.
int commutation_sign(const PauliWord& a, const PauliWord& b);

// Dense 2^N matrix; factor t acts on binary digit t-1 of the row index.
ComplexMatrix to_dense(const PauliWord& word, int cap = kPauliDenseCap);

// r such that (1 - 12 r^2)^N is approximately q, valid for large N.
double pauli_r(double q_target, int N);

struct AnticommutationStats {
  std::size_t trials = 0;
  double position_frequency = 0.0;  // per-position anticommutation frequency
  double position_standard_error = 0.0;
  double expected_position = 0.0;   // 6 r^2
  double anticommute_frequency = 0.0;  // whole words
  double expected_anticommute = 0.0;   // (1 - (1 - 12 r^2)^N) / 2
  // Correlation of the events "K_1, K_2 anticommute" and "K_1, K_3 anticommute".
  double pair_event_correlation = 0.0;
};

AnticommutationStats anticommutation_stats(int N, double r, std::size_t trials, std::uint64_t seed,
                                           unsigned threads = 1);

struct PauliDemoConfig {
  int N = 10;
  double q_target = 0.5;
  int terms = 200;
  std::size_t samples = 20;
  std::size_t bins = 0;  // 0 skips the eigenvalue histogram
  int max_order = 6;     // at most 6
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct PauliDemoResult {
  double r = 0.0;
  double q_approx = 0.0;  // (1 - 12 r^2)^N
  std::vector<PooledMoment> moments;
  std::vector<double> target_moments;  // nu_q moments of orders 0..max_order
  std::optional<SpectrumHistogram> histogram;
};

// Spectrum and moments of (K_1 + ... + K_n)/sqrt(n) over independent samples.
PauliDemoResult clt_sum_spectrum(const PauliDemoConfig& config);

}  // namespace qgrm
