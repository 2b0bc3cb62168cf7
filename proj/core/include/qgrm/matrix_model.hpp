#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "qgrm/gamma.hpp"
#include "qgrm/rng.hpp"
#include "qgrm/subset_weights.hpp"

namespace qgrm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
// Dense Hermitian matrix; Hermitian symmetry is a property of how it was built.
using HermitianMatrix = ComplexMatrix;

// Largest |M_ij - conj(M_ji)|.
double hermitian_defect(const ComplexMatrix& m);

// Index bijection for the grouping of tensor factors: I = i_1 + d i_2 + ... +
// d^(N-1) i_N, with the digits at positions in A packed (ascending) into the
// small index i_A and the remaining digits into the rest index.
class EmbeddingMap {
 public:
  EmbeddingMap(const Subset& subset, int d);

  int d() const { return d_; }
  int N() const { return N_; }
  std::size_t dim() const { return dim_; }
  std::size_t small_dim() const { return inside_offset_.size(); }
  std::size_t rest_dim() const { return outside_offset_.size(); }

  std::vector<int> digits(std::size_t index) const;
  std::size_t index(const std::vector<int>& digits) const;

  std::size_t small_index(std::size_t index) const { return small_of_[index]; }
  std::size_t rest_index(std::size_t index) const { return rest_of_[index]; }
  // Full index of (small index, rest index).
  std::size_t compose(std::size_t small, std::size_t rest) const { return inside_offset_[small] + outside_offset_[rest]; }
  const std::vector<std::size_t>& small_offsets() const { return inside_offset_; }
  const std::vector<std::size_t>& rest_offsets() const { return outside_offset_; }

 private:
  int d_;
  int N_;
  std::size_t dim_;
  std::vector<int> positions_;  // 0-based coordinates in A
  std::vector<std::size_t> inside_offset_;
  std::vector<std::size_t> outside_offset_;
  std::vector<std::uint32_t> small_of_;
  std::vector<std::uint32_t> rest_of_;
};

// d^N with a ResourceError when it exceeds `cap`.
std::size_t checked_dimension(int d, int N, std::size_t cap);

struct ModelConfig {
  static constexpr int kDefaultSubsetCap = 14;
  static constexpr std::size_t kDefaultDimCap = 8192;

  WeightScheme scheme;
  GammaSpec gamma;
  std::uint64_t seed = 0;
  int subset_cap = kDefaultSubsetCap;
  std::size_t dim_cap = kDefaultDimCap;
  unsigned threads = 1;

  int d() const { return scheme.d(); }
  int N() const { return scheme.N(); }
  std::size_t dim() const { return checked_dimension(d(), N(), dim_cap); }
};

// Diagonal N(0, 1/dim); off-diagonal real and imaginary parts N(0, 1/(2 dim)).
// Row i of the upper triangle is drawn from lane i of `key`.
HermitianMatrix sample_standard_hermitian(std::size_t dim, const StreamKey& key, unsigned threads = 1);
HermitianMatrix sample_standard_hermitian(std::size_t dim, RngStream& stream);

// Family {R^mu} with Cov(R^mu_ij, R^nu_ij) = Gamma_{mu nu} times the standard
// Hermitian covariance: R^mu = sum_k L_{mu k} H_k with L L^T = Gamma and H_k
// independent standard Hermitian matrices drawn from key.child(k).
std::vector<HermitianMatrix> sample_gamma_family(std::size_t dim, const GammaSpec& gamma, const StreamKey& key,
                                                 unsigned threads = 1);

// result[I][J] = small[i_A][j_A] prod_{r not in A} [i_r = j_r].
HermitianMatrix embed(const Subset& subset, const ComplexMatrix& small, int d);
// target += weight * embed(subset, small), upper triangle (J >= I) only,
// restricted to target rows [row_begin, row_end).
void embed_accumulate_upper(const EmbeddingMap& map, const ComplexMatrix& small, double weight, ComplexMatrix& target,
                            std::size_t row_begin, std::size_t row_end);
// Fills the strict lower triangle from the upper one and zeroes diagonal imaginary parts.
void mirror_upper(Eigen::Ref<ComplexMatrix> m);

// Random stream family of subset A in sample `sample_index`.
StreamKey subset_stream(std::uint64_t seed, std::uint64_t sample_index, const Subset& subset);

// S^mu = sum_A sigma_A R^{A,mu} over all 2^N subsets, one matrix per gamma label.
// Throws ResourceError above the subset or dimension cap.
std::vector<HermitianMatrix> assemble_S(const ModelConfig& config, std::uint64_t sample_index);

struct TruncationPlan {
  std::vector<Subset> retained;  // ascending bitmask order
  std::vector<double> weights;   // sigma_A^2 of retained subsets
  double retained_mass = 0.0;
  double dropped_mass = 0.0;
};

// Keeps subsets in decreasing sigma_A^2 order (whole |A| groups for Bernoulli
// weights) until the retained mass reaches 1 - mass_tolerance.
TruncationPlan plan_truncation(const WeightScheme& scheme, double mass_tolerance);

struct TruncatedAssembly {
  std::vector<HermitianMatrix> matrices;
  std::size_t retained_subsets = 0;
  double dropped_mass = 0.0;
};

// Same streams as assemble_S, so a plan that keeps every subset reproduces it bit for bit.
TruncatedAssembly assemble_S_truncated(const ModelConfig& config, std::uint64_t sample_index,
                                       double mass_tolerance);
TruncatedAssembly assemble_from_plan(const ModelConfig& config, std::uint64_t sample_index,
                                     const TruncationPlan& plan);

// One row per matrix row, entries written as `re+imi`.
void write_matrix_csv(std::ostream& out, const ComplexMatrix& m);

}  // namespace qgrm
