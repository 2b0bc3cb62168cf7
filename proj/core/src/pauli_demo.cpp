#include "qgrm/pauli_demo.hpp"

#include <cmath>

#include "qgrm/errors.hpp"
#include "qgrm/parallel.hpp"

namespace qgrm {

namespace {

void check_r(double r) {
  if (!(r >= 0.0 && r <= 1.0 / 3.0)) throw ParameterError("r must lie in [0, 1/3]");
}

// Adds scale * word to m; row I has its single entry in column I xor flips.
void add_word(ComplexMatrix& m, const PauliWord& word, double scale) {
  std::size_t flips = 0;
  for (int t = 0; t < word.length(); ++t) {
    const auto idx = word.factors[static_cast<std::size_t>(t)].index;
    if (idx == 1 || idx == 2) flips |= std::size_t{1} << t;
  }
  const double base = scale * word.sign();
  const auto dim = static_cast<std::size_t>(m.rows());
  for (std::size_t I = 0; I < dim; ++I) {
    Complex v(base, 0.0);
    for (int t = 0; t < word.length(); ++t) {
      const bool bit = (I >> t) & 1u;
      switch (word.factors[static_cast<std::size_t>(t)].index) {
        case 2: v *= bit ? Complex(0.0, 1.0) : Complex(0.0, -1.0); break;
        case 3: if (bit) v = -v; break;
        default: break;
      }
    }
    m(static_cast<Eigen::Index>(I), static_cast<Eigen::Index>(I ^ flips)) += v;
  }
}

// (1/dim) sum_ij A_ij conj(B_ij) = tr(A B) / dim for Hermitian B.
double paired_trace(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.array() * b.array().conjugate()).sum().real() / static_cast<double>(a.rows());
}

}  // namespace

int PauliWord::sign() const {
  int s = 1;
  for (const auto& f : factors) s *= f.sign;
  return s;
}

PauliWord sample_pauli_word(int N, double r, RngStream& stream) {
  if (N < 1) throw ParameterError("Pauli word length must be >= 1");
  check_r(r);
  const double p_identity = (1.0 - 3.0 * r) / 2.0;
  PauliWord word;
  word.factors.reserve(static_cast<std::size_t>(N));
  for (int t = 0; t < N; ++t) {
    // Outcomes in table order: +s0, -s0, +s1, -s1, +s2, -s2, +s3, -s3.
    double u = stream.uniform();
    int outcome = 7;
    for (int k = 0; k < 7; ++k) {
      const double p = k < 2 ? p_identity : r / 2.0;
      if (u < p) {
        outcome = k;
        break;
      }
      u -= p;
    }
    word.factors.push_back({static_cast<std::uint8_t>(outcome / 2), static_cast<std::int8_t>(outcome % 2 ? -1 : 1)});
  }
  return word;
}

int anticommuting_positions(const PauliWord& a, const PauliWord& b) {
  if (a.length() != b.length()) throw ParameterError("Pauli words have different lengths");
  int count = 0;
  for (std::size_t t = 0; t < a.factors.size(); ++t) {
    const auto x = a.factors[t].index;
    const auto y = b.factors[t].index;
    if (x != 0 && y != 0 && x != y) ++count;
  }
  return count;
}

int commutation_sign(const PauliWord& a, const PauliWord& b) { return anticommuting_positions(a, b) % 2 ? -1 : 1; }

ComplexMatrix to_dense(const PauliWord& word, int cap) {
  if (word.length() < 1) throw ParameterError("empty Pauli word");
  if (word.length() > cap)
    throw ResourceError("dense Pauli words are capped at N=" + std::to_string(cap));
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << word.length());
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  add_word(m, word, 1.0);
  return m;
}

double pauli_r(double q_target, int N) {
  if (!(q_target > 0.0 && q_target < 1.0)) throw DomainError("q_target must lie in (0, 1)");
  if (N < 1) throw ParameterError("N must be >= 1");
  const double r = std::sqrt(-std::log(q_target) / (12.0 * N));
  check_r(r);
  return r;
}

AnticommutationStats anticommutation_stats(int N, double r, std::size_t trials, std::uint64_t seed, unsigned threads) {
  check_r(r);
  if (trials < 2) throw ParameterError("need at least two trials");
  struct Record {
    int positions = 0;
    bool e12 = false;
    bool e13 = false;
  };
  std::vector<Record> records(trials);
  parallel_for(trials, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      RngStream stream(seed, derive_stream_id({0x9a011ull, t}));
      const PauliWord k1 = sample_pauli_word(N, r, stream);
      const PauliWord k2 = sample_pauli_word(N, r, stream);
      const PauliWord k3 = sample_pauli_word(N, r, stream);
      records[t].positions = anticommuting_positions(k1, k2);
      records[t].e12 = records[t].positions % 2 == 1;
      records[t].e13 = commutation_sign(k1, k3) < 0;
    }
  });

  AnticommutationStats s;
  s.trials = trials;
  const double n = static_cast<double>(trials);
  double sum = 0, sumsq = 0, a = 0, b = 0, ab = 0;
  for (const auto& rec : records) {
    const double f = static_cast<double>(rec.positions) / N;
    sum += f;
    sumsq += f * f;
    a += rec.e12;
    b += rec.e13;
    ab += rec.e12 && rec.e13;
  }
  s.position_frequency = sum / n;
  s.position_standard_error =
      std::sqrt(std::max(0.0, (sumsq - n * s.position_frequency * s.position_frequency) / (n - 1.0)) / n);
  s.expected_position = 6.0 * r * r;
  s.anticommute_frequency = a / n;
  s.expected_anticommute = (1.0 - std::pow(1.0 - 12.0 * r * r, N)) / 2.0;
  const double pa = a / n, pb = b / n;
  const double cov = ab / n - pa * pb;
  const double va = pa * (1 - pa), vb = pb * (1 - pb);
  s.pair_event_correlation = (va > 0 && vb > 0) ? cov / std::sqrt(va * vb) : 0.0;
  return s;
}

PauliDemoResult clt_sum_spectrum(const PauliDemoConfig& config) {
  if (config.N < 1 || config.N > kPauliDenseCap)
    throw ResourceError("the Pauli demo realizes dense 2^N matrices and needs 1 <= N <= " +
                        std::to_string(kPauliDenseCap));
  if (config.terms < 1) throw ParameterError("need at least one term");
  if (config.samples < 2) throw ParameterError("need at least two samples");
  if (config.max_order < 1 || config.max_order > 6) throw ParameterError("moment order must lie in 1..6");

  PauliDemoResult result;
  result.r = pauli_r(config.q_target, config.N);
  result.q_approx = std::pow(1.0 - 12.0 * result.r * result.r, config.N);
  result.target_moments = nu_q_moments(config.q_target, config.max_order);

  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << config.N);
  const double scale = 1.0 / std::sqrt(static_cast<double>(config.terms));
  const auto orders = static_cast<std::size_t>(config.max_order);
  std::vector<std::vector<double>> moments(config.samples, std::vector<double>(orders));
  std::vector<std::vector<double>> spectra(config.bins ? config.samples : 0);

  parallel_for(config.samples, config.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      RngStream stream(config.seed, derive_stream_id({0xc17ull, s}));
      ComplexMatrix x = ComplexMatrix::Zero(dim, dim);
      for (int k = 0; k < config.terms; ++k) add_word(x, sample_pauli_word(config.N, result.r, stream), scale);
      const ComplexMatrix x2 = x * x;
      const ComplexMatrix x3 = orders >= 5 ? ComplexMatrix(x2 * x) : ComplexMatrix();
      auto& mom = moments[s];
      const double d = static_cast<double>(dim);
      mom[0] = x.trace().real() / d;
      if (orders >= 2) mom[1] = x2.trace().real() / d;
      if (orders >= 3) mom[2] = paired_trace(x2, x);
      if (orders >= 4) mom[3] = paired_trace(x2, x2);
      if (orders >= 5) mom[4] = paired_trace(x3, x2);
      if (orders >= 6) mom[5] = paired_trace(x3, x3);
      if (config.bins) spectra[s] = eigenvalues(x);
    }
  });

  for (std::size_t k = 0; k < orders; ++k) {
    double sum = 0, sumsq = 0;
    for (const auto& m : moments) {
      sum += m[k];
      sumsq += m[k] * m[k];
    }
    const double n = static_cast<double>(config.samples);
    const double mean = sum / n;
    const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
    result.moments.push_back({static_cast<int>(k + 1), mean, std::sqrt(var / n)});
  }
  if (config.bins) {
    SpectrumHistogram h = make_histogram(config.q_target, config.bins);
    h.samples = config.samples;
    h.dim = static_cast<std::size_t>(dim);
    for (const auto& s : spectra) add_to_histogram(h, s);
    result.histogram = std::move(h);
  }
  return result;
}

}  // namespace qgrm
