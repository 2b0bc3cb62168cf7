#include "qgrm/spectral_stats.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "qgrm/errors.hpp"
#include "qgrm/pair_partition.hpp"
#include "qgrm/parallel.hpp"

namespace qgrm {

namespace {

// Row-block height for dense products; depends on the dimension only so the
// floating-point result is the same for every thread count.
constexpr Eigen::Index kProductBlock = 256;
constexpr std::size_t kSampleParallelDim = 256;

std::vector<std::pair<Eigen::Index, Eigen::Index>> row_blocks(Eigen::Index dim) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
  for (Eigen::Index r = 0; r < dim; r += kProductBlock) blocks.emplace_back(r, std::min(dim, r + kProductBlock));
  return blocks;
}

ComplexMatrix multiply(const ComplexMatrix& a, const ComplexMatrix& b, unsigned threads) {
  const Eigen::Index dim = a.rows();
  ComplexMatrix out(dim, b.cols());
  const auto blocks = row_blocks(dim);
  parallel_for(blocks.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto [r0, r1] = blocks[k];
      out.middleRows(r0, r1 - r0).noalias() = a.middleRows(r0, r1 - r0) * b;
    }
  });
  return out;
}

// Product known to be Hermitian: only blocks on or right of the diagonal are formed.
ComplexMatrix multiply_hermitian(const ComplexMatrix& a, const ComplexMatrix& b, unsigned threads) {
  const Eigen::Index dim = a.rows();
  ComplexMatrix out(dim, dim);
  const auto blocks = row_blocks(dim);
  parallel_for(blocks.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto [r0, r1] = blocks[k];
      out.block(r0, r0, r1 - r0, dim - r0).noalias() = a.middleRows(r0, r1 - r0) * b.rightCols(dim - r0);
    }
  });
  mirror_upper(out);
  return out;
}

// a * a^H in real arithmetic: (X + iY)(X - iY)^T = XX^T + YY^T + i(YX^T - XY^T).
ComplexMatrix gram(const ComplexMatrix& a, unsigned threads) {
  using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Index dim = a.rows();
  const RealMatrix x = a.real();
  const RealMatrix y = a.imag();
  RealMatrix sym(dim, dim), cross(dim, dim);
  const auto blocks = row_blocks(dim);
  parallel_for(blocks.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const auto [r0, r1] = blocks[k];
      auto upper = sym.block(r0, r0, r1 - r0, dim - r0);
      upper.noalias() = x.middleRows(r0, r1 - r0) * x.bottomRows(dim - r0).transpose();
      upper.noalias() += y.middleRows(r0, r1 - r0) * y.bottomRows(dim - r0).transpose();
      cross.middleRows(r0, r1 - r0).noalias() = y.middleRows(r0, r1 - r0) * x.transpose();
    }
  });
  ComplexMatrix out(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index j = i; j < dim; ++j) out(i, j) = Complex(sym(i, j), cross(i, j) - cross(j, i));
  mirror_upper(out);
  return out;
}

bool palindrome(const std::vector<std::size_t>& w) { return std::equal(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(w.size() / 2), w.rbegin()); }

class WordProducts {
 public:
  WordProducts(const std::vector<HermitianMatrix>& family, unsigned threads) : family_(family), threads_(threads) {}

  const ComplexMatrix& product(const std::vector<std::size_t>& w) {
    if (w.size() == 1) return family_[w[0]];
    if (auto it = memo_.find(w); it != memo_.end()) return it->second;
    const auto half = static_cast<std::ptrdiff_t>(w.size() / 2);
    const std::vector<std::size_t> left(w.begin(), w.begin() + half);
    const std::vector<std::size_t> right(w.begin() + half, w.end());
    const ComplexMatrix& a = product(left);
    const ComplexMatrix& b = product(right);
    // An even palindrome splits into a product and its adjoint.
    ComplexMatrix p = !palindrome(w)        ? multiply(a, b, threads_)
                      : w.size() % 2 == 0 ? gram(a, threads_)
                                          : multiply_hermitian(a, b, threads_);
    return memo_.emplace(w, std::move(p)).first->second;
  }

 private:
  const std::vector<HermitianMatrix>& family_;
  unsigned threads_;
  std::map<std::vector<std::size_t>, ComplexMatrix> memo_;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double standard_error_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

// Runs body(sample, config_for_sample) over all samples; small matrices are
// processed several samples at a time, large ones one at a time with threaded kernels.
template <class Body>
void for_each_sample(const ModelConfig& config, std::size_t samples, Body&& body) {
  const std::size_t dim = config.dim();
  if (dim <= kSampleParallelDim && config.threads > 1) {
    ModelConfig serial = config;
    serial.threads = 1;
    parallel_for(samples, config.threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t s = b; s < e; ++s) body(s, serial);
    });
  } else {
    for (std::size_t s = 0; s < samples; ++s) body(s, config);
  }
}

}  // namespace

Complex trace_word(const std::vector<HermitianMatrix>& family, const std::vector<std::size_t>& word, unsigned threads) {
  if (word.empty()) throw ParameterError("word must be nonempty");
  for (auto w : word)
    if (w >= family.size()) throw ParameterError("word refers to an unknown label");
  const double dim = static_cast<double>(family[word[0]].rows());
  if (word.size() == 1) return family[word[0]].trace() / dim;

  WordProducts products(family, threads);
  const auto half = static_cast<std::ptrdiff_t>(word.size() / 2);
  const std::vector<std::size_t> left(word.begin(), word.begin() + half);
  const std::vector<std::size_t> right(word.begin() + half, word.end());
  const ComplexMatrix& a = products.product(left);
  const ComplexMatrix& b = products.product(right);
  // tr(AB) = sum_ij A_ij B_ji, and B_ji = conj(B_ij) when B is Hermitian.
  Complex sum = palindrome(right) ? (a.array() * b.array().conjugate()).sum() : a.cwiseProduct(b.transpose()).sum();
  return sum / dim;
}

MomentEstimate trace_moment_mc(const ModelConfig& config, const std::vector<std::size_t>& word, std::size_t samples) {
  if (word.empty()) throw ParameterError("word must be nonempty");
  if (samples < 2) throw ParameterError("need at least two samples");
  for (auto w : word)
    if (w >= config.gamma.size()) throw ParameterError("word refers to an unknown label");

  std::vector<double> re(samples), im(samples);
  for_each_sample(config, samples, [&](std::size_t s, const ModelConfig& cfg) {
    const auto family = assemble_S(cfg, s);
    const Complex t = trace_word(family, word, cfg.threads);
    re[s] = t.real();
    im[s] = t.imag();
  });

  MomentEstimate est;
  for (auto w : word) est.word.push_back(config.gamma.labels()[w]);
  est.samples = samples;
  est.mean = mean_of(re);
  est.standard_error = standard_error_of(re, est.mean);
  est.mean_imag = mean_of(im);
  return est;
}

std::vector<double> eigenvalues(const HermitianMatrix& m) {
  if (m.rows() != m.cols()) throw ParameterError("eigenvalues need a square matrix");
  if (m.rows() == 0) return {};
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (hermitian_defect(m) > 1e-9 * scale) throw ParameterError("matrix is not Hermitian within tolerance");
  const Eigen::MatrixXcd col = m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(col, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw ParameterError("eigenvalue iteration did not converge");
  std::vector<double> out(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  std::sort(out.begin(), out.end());
  return out;
}

SpectrumHistogram make_histogram(double q_reference, std::size_t bins) {
  if (!(q_reference >= 0.0 && q_reference < 1.0)) throw DomainError("spectrum reference q must lie in [0, 1)");
  if (bins < 1) throw ParameterError("need at least one bin");
  SpectrumHistogram h;
  h.support_edge = 2.0 / std::sqrt(1.0 - q_reference);
  h.lower = -h.support_edge - 0.5;
  h.upper = h.support_edge + 0.5;
  h.edges.resize(bins + 1);
  const double width = (h.upper - h.lower) / static_cast<double>(bins);
  for (std::size_t i = 0; i < bins; ++i) h.edges[i] = h.lower + width * static_cast<double>(i);
  h.edges[bins] = h.upper;
  h.counts.assign(bins, 0);
  return h;
}

void add_to_histogram(SpectrumHistogram& h, const std::vector<double>& values) {
  const std::size_t bins = h.counts.size();
  const double width = (h.upper - h.lower) / static_cast<double>(bins);
  for (double x : values) {
    ++h.total;
    if (std::fabs(x) > h.support_edge) ++h.outside_count;
    if (x < h.lower) {
      ++h.underflow;
    } else if (x > h.upper) {
      ++h.overflow;
    } else {
      auto bin = static_cast<std::size_t>((x - h.lower) / width);
      h.counts[std::min(bin, bins - 1)] += 1;
    }
  }
  h.outside_support = h.total ? static_cast<double>(h.outside_count) / static_cast<double>(h.total) : 0.0;
}

SpectrumResult pool_spectra(const std::vector<std::vector<double>>& spectra, std::size_t bins, int max_order,
                            double q_reference) {
  if (max_order < 0) throw ParameterError("moment order must be nonnegative");
  SpectrumResult result;
  result.histogram = make_histogram(q_reference, bins);
  result.histogram.samples = spectra.size();
  result.histogram.dim = spectra.empty() ? 0 : spectra.front().size();
  for (const auto& s : spectra) add_to_histogram(result.histogram, s);

  for (int k = 1; k <= max_order; ++k) {
    std::vector<double> per_sample;
    per_sample.reserve(spectra.size());
    for (const auto& s : spectra) {
      double sum = 0.0;
      for (double x : s) sum += std::pow(x, k);
      per_sample.push_back(s.empty() ? 0.0 : sum / static_cast<double>(s.size()));
    }
    PooledMoment pm;
    pm.order = k;
    if (!per_sample.empty()) {
      pm.mean = mean_of(per_sample);
      pm.standard_error = standard_error_of(per_sample, pm.mean);
    }
    result.moments.push_back(pm);
  }
  return result;
}

SpectrumResult empirical_spectrum(const ModelConfig& config, std::size_t samples, std::size_t bins, int max_order,
                                  double q_reference, std::size_t label) {
  if (samples < 1) throw ParameterError("need at least one sample");
  if (label >= config.gamma.size()) throw ParameterError("unknown label");
  make_histogram(q_reference, bins);
  std::vector<std::vector<double>> spectra(samples);
  for_each_sample(config, samples, [&](std::size_t s, const ModelConfig& cfg) {
    const auto family = assemble_S(cfg, s);
    spectra[s] = eigenvalues(family[label]);
  });
  return pool_spectra(spectra, bins, max_order, q_reference);
}

int nu_q_truncation(double q, double epsilon) {
  if (!(q >= 0.0 && q < 1.0)) throw DomainError("the q-Gaussian density needs 0 <= q < 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ParameterError("product epsilon must lie in (0, 1)");
  int n = 1;
  double qn = q;
  while (!(qn < epsilon)) {
    ++n;
    qn *= q;
    if (n > 1'000'000) throw DomainError("q too close to 1: infinite product needs more than 10^6 factors");
  }
  return n;
}

namespace {

// prod_{n < n_max} (1 - q^n) |1 - q^n e^{2i theta}|^2
double product_factor(double q, int n_max, double theta) {
  const double c2 = std::cos(2.0 * theta);
  double value = 1.0;
  double qn = q;
  for (int n = 1; n < n_max; ++n) {
    value *= (1.0 - qn) * (1.0 - 2.0 * qn * c2 + qn * qn);
    qn *= q;
  }
  return value;
}

}  // namespace

double nu_q_density(double q, double x, double epsilon) {
  const int n_max = nu_q_truncation(q, epsilon);
  const double root = std::sqrt(1.0 - q);
  const double edge = 2.0 / root;
  if (std::fabs(x) > edge) return 0.0;
  const double theta = std::acos(std::clamp(x / edge, -1.0, 1.0));
  return root / std::numbers::pi * std::sin(theta) * product_factor(q, n_max, theta);
}

DensityCurve nu_q_curve(double q, std::size_t points, double epsilon) {
  if (points < 2) throw ParameterError("density curve needs at least two points");
  DensityCurve curve;
  curve.q = q;
  curve.n_max = nu_q_truncation(q, epsilon);
  const double edge = 2.0 / std::sqrt(1.0 - q);
  const double step = 2.0 * edge / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = i + 1 == points ? edge : -edge + step * static_cast<double>(i);
    curve.x.push_back(x);
    curve.density.push_back(nu_q_density(q, x, epsilon));
  }
  return curve;
}

std::vector<double> nu_q_moments(double q, int max_order, double epsilon) {
  if (max_order < 0) throw ParameterError("moment order must be nonnegative");
  const int n_max = nu_q_truncation(q, epsilon);
  const double edge = 2.0 / std::sqrt(1.0 - q);
  const auto orders = static_cast<std::size_t>(max_order + 1);

  // int f(x) nu(dx) = (2/pi) int_0^pi f(edge cos t) sin^2 t P(t) dt, composite Simpson.
  auto simpson = [&](std::size_t panels) {
    std::vector<double> acc(orders, 0.0);
    const double h = std::numbers::pi / static_cast<double>(panels);
    for (std::size_t i = 0; i <= panels; ++i) {
      const double t = h * static_cast<double>(i);
      const double w = (i == 0 || i == panels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const double s = std::sin(t);
      const double base = w * s * s * product_factor(q, n_max, t);
      const double x = edge * std::cos(t);
      double xk = 1.0;
      for (std::size_t k = 0; k < orders; ++k, xk *= x)
        if (k % 2 == 0) acc[k] += base * xk;
    }
    for (auto& v : acc) v *= h / 3.0 * 2.0 / std::numbers::pi;
    return acc;
  };

  std::size_t panels = 64;
  std::vector<double> previous = simpson(panels);
  for (;;) {
    panels *= 2;
    if (panels > (std::size_t{1} << 24)) throw DomainError("moment quadrature did not converge");
    std::vector<double> current = simpson(panels);
    double diff = 0.0;
    for (std::size_t k = 0; k < orders; ++k) diff = std::max(diff, std::fabs(current[k] - previous[k]));
    previous = std::move(current);
    if (diff < 1e-8) break;
  }
  return previous;
}

VarianceBound variance_bound(const WeightScheme& scheme, double gamma_max_abs, int m, std::size_t samples,
                             std::uint64_t seed, unsigned threads) {
  if (m < 1) throw ParameterError("variance bound needs m >= 1");
  double constant = gamma_max_abs;
  for (int k = 1; k <= m; ++k) constant *= 2.0 * k;  // (2m)!! = 2^m m!
  const Z4Estimate z = z4_sum(scheme, m, samples, seed, threads);
  return {constant * z.value, constant * z.standard_error, z.exact};
}

const char* to_string(TrendStatus s) {
  switch (s) {
    case TrendStatus::kFirst: return "first";
    case TrendStatus::kDecrease: return "decrease";
    case TrendStatus::kOverlap: return "overlap";
    case TrendStatus::kIncrease: return "increase";
  }
  return "?";
}

std::vector<SweepRow> convergence_sweep(const SweepOptions& options) {
  if (!(options.q > 0.0 && options.q < 1.0)) throw DomainError("sweep needs 0 < q < 1");
  if (options.N_values.empty()) throw ParameterError("sweep needs at least one N");
  if (options.word.empty()) throw ParameterError("word must be nonempty");
  const GammaSpec gamma = options.gamma ? *options.gamma : GammaSpec::identity({"m"});
  const double c = c_from_q(options.q, options.d);
  const double target = q_gaussian_moment(MomentSpec{options.q, options.word, gamma});

  std::vector<SweepRow> rows;
  double kept_bound = INFINITY;
  for (int N : options.N_values) {
    const WeightScheme scheme = options.scheme == SchemeKind::kFixedSize ? WeightScheme::fixed_size(N, c, options.d)
                                                                          : WeightScheme::bernoulli(N, c, options.d);
    ModelConfig config{scheme, gamma, options.seed, options.subset_cap, options.dim_cap, options.threads};
    SweepRow row;
    row.N = N;
    row.estimate = trace_moment_mc(config, options.word, options.samples);
    row.exact_target = target;
    row.gap = std::fabs(row.estimate.mean - target);
    row.bound = variance_bound(scheme, gamma.max_abs(), static_cast<int>(options.word.size()), 20000,
                               options.seed, options.threads);
    if (row.bound.value <= 0.5 * kept_bound) {
      row.selected = true;
      kept_bound = row.bound.value;
    }
    if (!rows.empty()) {
      const SweepRow& prev = rows.back();
      const double se_prev = prev.estimate.standard_error;
      const double se = row.estimate.standard_error;
      if (row.gap < prev.gap)
        row.trend = TrendStatus::kDecrease;
      else if (row.gap - se <= prev.gap + se_prev)
        row.trend = TrendStatus::kOverlap;
      else
        row.trend = TrendStatus::kIncrease;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

bool sweep_trend_ok(const std::vector<SweepRow>& rows) {
  return std::none_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.trend == TrendStatus::kIncrease; });
}

}  // namespace qgrm
