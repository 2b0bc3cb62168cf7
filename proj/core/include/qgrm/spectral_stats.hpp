#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qgrm/matrix_model.hpp"

namespace qgrm {

struct MomentEstimate {
  std::vector<std::string> word;
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
  // Mean imaginary part of the normalized trace (diagnostic).
  double mean_imag = 0.0;
};

// Normalized trace (1/dim) tr(M_{w_1} ... M_{w_n}) with exact dense products.
Complex trace_word(const std::vector<HermitianMatrix>& family, const std::vector<std::size_t>& word,
                   unsigned threads = 1);

// Monte Carlo estimate over samples 0..samples-1 of exact assemblies.
// `word` indexes config.gamma labels.
MomentEstimate trace_moment_mc(const ModelConfig& config, const std::vector<std::size_t>& word, std::size_t samples);

// Ascending eigenvalues; throws ParameterError if m is not Hermitian within tolerance.
std::vector<double> eigenvalues(const HermitianMatrix& m);

struct SpectrumHistogram {
  double lower = 0.0;
  double upper = 0.0;
  std::vector<double> edges;  // bins + 1 strictly increasing
  std::vector<std::uint64_t> counts;
  // Eigenvalues beyond the padded interval; counts + underflow + overflow == total.
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;
  std::uint64_t total = 0;
  std::size_t samples = 0;
  std::size_t dim = 0;
  // Eigenvalues outside [-2/sqrt(1-q), 2/sqrt(1-q)], as a count and a fraction.
  std::uint64_t outside_count = 0;
  double outside_support = 0.0;
  double support_edge = 0.0;
};

struct PooledMoment {
  int order = 0;
  double mean = 0.0;
  double standard_error = 0.0;
};

struct SpectrumResult {
  SpectrumHistogram histogram;
  std::vector<PooledMoment> moments;  // orders 1..max_order
};

// Uniform bins over [-edge - 0.5, edge + 0.5] with edge = 2/sqrt(1-q_reference).
SpectrumHistogram make_histogram(double q_reference, std::size_t bins);
void add_to_histogram(SpectrumHistogram& h, const std::vector<double>& values);

// Pooled histogram and moments of the eigenvalues of S for label `label`.
SpectrumResult empirical_spectrum(const ModelConfig& config, std::size_t samples, std::size_t bins, int max_order,
                                  double q_reference, std::size_t label = 0);

// Pools already computed spectra (one vector per sample).
SpectrumResult pool_spectra(const std::vector<std::vector<double>>& spectra, std::size_t bins, int max_order,
                            double q_reference);

inline constexpr double kDefaultProductEpsilon = 1e-14;

// Number of factors kept in the infinite product: first n with q^n < epsilon.
int nu_q_truncation(double q, double epsilon = kDefaultProductEpsilon);
// Density of the q-Gaussian law at x; zero outside the support.
double nu_q_density(double q, double x, double epsilon = kDefaultProductEpsilon);

struct DensityCurve {
  double q = 0.0;
  int n_max = 0;
  std::vector<double> x;
  std::vector<double> density;
};

// `points` equally spaced abscissae spanning the support, endpoints included.
DensityCurve nu_q_curve(double q, std::size_t points, double epsilon = kDefaultProductEpsilon);

// Moments of orders 0..max_order; odd orders are exactly zero.
std::vector<double> nu_q_moments(double q, int max_order, double epsilon = kDefaultProductEpsilon);

struct VarianceBound {
  double value = 0.0;
  double standard_error = 0.0;
  bool exact = false;
};

// (2m)!! max|Gamma| times the m-fold coincidence sum of the scheme.
VarianceBound variance_bound(const WeightScheme& scheme, double gamma_max_abs, int m, std::size_t samples = 20000,
                             std::uint64_t seed = 1, unsigned threads = 1);

enum class TrendStatus { kFirst, kDecrease, kOverlap, kIncrease };
const char* to_string(TrendStatus s);

struct SweepRow {
  int N = 0;
  MomentEstimate estimate;
  double exact_target = 0.0;
  double gap = 0.0;
  VarianceBound bound;
  bool selected = false;
  TrendStatus trend = TrendStatus::kFirst;
};

struct SweepOptions {
  int d = 2;
  double q = 0.5;
  std::vector<int> N_values;
  std::vector<std::size_t> word;
  // Identity over a single label when absent.
  std::optional<GammaSpec> gamma;
  SchemeKind scheme = SchemeKind::kBernoulli;
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  int subset_cap = ModelConfig::kDefaultSubsetCap;
  std::size_t dim_cap = ModelConfig::kDefaultDimCap;
  unsigned threads = 1;
};

// Gap between the Monte Carlo moment and the limiting q-Gaussian moment along N.
// Rows are marked `selected` by a greedy heuristic keeping each variance bound
// at most half the previously kept one, so the kept bounds are summable.
std::vector<SweepRow> convergence_sweep(const SweepOptions& options);

// Whether no row reports a gap increase beyond the sampling noise.
bool sweep_trend_ok(const std::vector<SweepRow>& rows);

}  // namespace qgrm
