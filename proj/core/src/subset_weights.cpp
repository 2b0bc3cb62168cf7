#include "qgrm/subset_weights.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qgrm/errors.hpp"
#include "qgrm/parallel.hpp"

namespace qgrm {

// ---------------------------------------------------------------------------
// Subset

Subset::Subset(int n) : n_(n), words_(static_cast<std::size_t>((std::max(n, 0) + 63) / 64), 0) {
  if (n < 0) throw ParameterError("subset ambient size must be nonnegative");
}

Subset Subset::from_members(int n, const std::vector<int>& members) {
  Subset s(n);
  for (int r : members) s.insert(r);
  return s;
}

Subset Subset::from_mask(int n, std::uint64_t mask) {
  if (n > 64) throw ParameterError("from_mask needs ambient size <= 64");
  if (n < 64 && (mask >> n) != 0) throw ParameterError("mask has bits outside {1..N}");
  Subset s(n);
  if (!s.words_.empty()) s.words_[0] = mask;
  return s;
}

Subset Subset::from_hex(int n, const std::string& hex) {
  std::string digits = hex;
  if (digits.size() >= 2 && digits[0] == '0' && (digits[1] == 'x' || digits[1] == 'X')) digits = digits.substr(2);
  if (digits.empty()) throw ParameterError("empty subset bitmask");
  Subset s(n);
  int bit = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it, bit += 4) {
    const char ch = static_cast<char>(std::tolower(static_cast<unsigned char>(*it)));
    int v;
    if (ch >= '0' && ch <= '9') v = ch - '0';
    else if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
    else throw ParameterError("invalid hex digit in subset bitmask '" + hex + "'");
    for (int b = 0; b < 4; ++b) {
      if (((v >> b) & 1) == 0) continue;
      const int element = bit + b + 1;
      if (element > n) throw ParameterError("bitmask '" + hex + "' has elements beyond N=" + std::to_string(n));
      s.insert(element);
    }
  }
  return s;
}

Subset Subset::full(int n) {
  Subset s(n);
  for (int r = 1; r <= n; ++r) s.insert(r);
  return s;
}

bool Subset::contains(int element) const {
  if (element < 1 || element > n_) return false;
  const auto idx = static_cast<std::size_t>(element - 1);
  return (words_[idx / 64] >> (idx % 64)) & 1u;
}

void Subset::insert(int element) {
  if (element < 1 || element > n_)
    throw ParameterError("element " + std::to_string(element) + " outside {1.." + std::to_string(n_) + "}");
  const auto idx = static_cast<std::size_t>(element - 1);
  words_[idx / 64] |= std::uint64_t{1} << (idx % 64);
}

int Subset::size() const {
  int total = 0;
  for (auto w : words_) total += std::popcount(w);
  return total;
}

std::vector<int> Subset::members() const {
  std::vector<int> out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    std::uint64_t bits = words_[w];
    while (bits) {
      const int b = std::countr_zero(bits);
      out.push_back(static_cast<int>(w * 64) + b + 1);
      bits &= bits - 1;
    }
  }
  return out;
}

std::uint64_t Subset::mask() const {
  if (n_ > 64) throw ParameterError("mask() needs ambient size <= 64");
  return words_.empty() ? 0 : words_[0];
}

std::string Subset::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  const int nibbles = std::max(1, (n_ + 3) / 4);
  for (int i = nibbles - 1; i >= 0; --i) {
    const int bit = 4 * i;
    const std::uint64_t w = words_.empty() ? 0 : words_[static_cast<std::size_t>(bit / 64)];
    out.push_back(kDigits[(w >> (bit % 64)) & 0xF]);
  }
  return out;
}

void Subset::check_compatible(const Subset& other) const {
  if (n_ != other.n_) throw ParameterError("subsets have different ambient sizes");
}

int Subset::intersection_size(const Subset& other) const {
  check_compatible(other);
  int total = 0;
  for (std::size_t w = 0; w < words_.size(); ++w) total += std::popcount(words_[w] & other.words_[w]);
  return total;
}

Subset Subset::operator&(const Subset& other) const {
  check_compatible(other);
  Subset out(*this);
  for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] &= other.words_[w];
  return out;
}

Subset Subset::operator|(const Subset& other) const {
  check_compatible(other);
  Subset out(*this);
  for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] |= other.words_[w];
  return out;
}

Subset Subset::minus(const Subset& other) const {
  check_compatible(other);
  Subset out(*this);
  for (std::size_t w = 0; w < words_.size(); ++w) out.words_[w] &= ~other.words_[w];
  return out;
}

bool operator<(const Subset& a, const Subset& b) {
  if (a.n_ != b.n_) return a.n_ < b.n_;
  for (std::size_t w = a.words_.size(); w-- > 0;)
    if (a.words_[w] != b.words_[w]) return a.words_[w] < b.words_[w];
  return false;
}

// ---------------------------------------------------------------------------
// WeightScheme

namespace {

void check_common(int N, int d) {
  if (N < 1) throw ParameterError("N must be >= 1");
  if (d < 2) throw ParameterError("local dimension d must be >= 2");
}

}  // namespace

WeightScheme WeightScheme::bernoulli(int N, double c, int d) {
  check_common(N, d);
  if (!(c > 0.0)) throw ParameterError("Bernoulli weights need c > 0");
  const double p = c / std::sqrt(static_cast<double>(N));
  if (!(p < 1.0))
    throw ParameterError("Bernoulli weights need c/sqrt(N) < 1 (got " + std::to_string(p) + ")");
  WeightScheme s;
  s.kind_ = SchemeKind::kBernoulli;
  s.N_ = N;
  s.d_ = d;
  s.c_ = c;
  s.p_ = p;
  return s;
}

WeightScheme WeightScheme::fixed_size(int N, double c, int d) {
  check_common(N, d);
  if (!(c > 0.0)) throw ParameterError("fixed-size weights need c > 0");
  const double k = std::floor(c * std::sqrt(static_cast<double>(N)));
  if (k > N)
    throw ParameterError("fixed-size weights need floor(c sqrt(N)) <= N; N=" + std::to_string(N) +
                         " is too small for c=" + std::to_string(c));
  WeightScheme s;
  s.kind_ = SchemeKind::kFixedSize;
  s.N_ = N;
  s.d_ = d;
  s.c_ = c;
  s.k_ = static_cast<int>(k);
  return s;
}

WeightScheme WeightScheme::custom(int N, int d, std::vector<std::pair<Subset, double>> table, double tolerance) {
  check_common(N, d);
  if (table.empty()) throw ParameterError("custom weight table is empty");
  std::sort(table.begin(), table.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  double total = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& [subset, w] = table[i];
    if (subset.ambient() != N) throw ParameterError("custom table subset has the wrong ambient size");
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("custom weights must be nonnegative");
    if (i > 0 && table[i - 1].first == subset)
      throw ParameterError("custom table lists subset " + subset.to_hex() + " twice");
    total += w;
  }
  if (std::fabs(total - 1.0) > tolerance)
    throw ParameterError("custom weights sum to " + std::to_string(total) + ", expected 1");
  WeightScheme s;
  s.kind_ = SchemeKind::kCustom;
  s.N_ = N;
  s.d_ = d;
  s.table_ = std::move(table);
  s.cdf_.reserve(s.table_.size());
  double run = 0.0;
  for (const auto& entry : s.table_) s.cdf_.push_back(run += entry.second);
  return s;
}

WeightScheme WeightScheme::read_custom(std::istream& in, int N, int d) {
  std::vector<std::pair<Subset, double>> table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParameterError("custom scheme line " + std::to_string(lineno) + ": expected `bitmask_hex,weight`");
    std::string hex = line.substr(0, comma);
    std::string weight = line.substr(comma + 1);
    auto trim = [](std::string& s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      s = b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    trim(hex);
    trim(weight);
    double w;
    try {
      std::size_t used = 0;
      w = std::stod(weight, &used);
      if (used != weight.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ParameterError("custom scheme line " + std::to_string(lineno) + ": bad weight '" + weight + "'");
    }
    table.emplace_back(Subset::from_hex(N, hex), w);
  }
  return custom(N, d, std::move(table), kFileTolerance);
}

WeightScheme WeightScheme::load_custom(const std::string& path, int N, int d) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open weight scheme file '" + path + "'");
  return read_custom(in, N, d);
}

std::optional<double> WeightScheme::c() const {
  if (kind_ == SchemeKind::kCustom) return std::nullopt;
  return c_;
}

double binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double value = 1.0;
  for (int i = 1; i <= k; ++i) value = value * (n - k + i) / i;
  return std::round(value);
}

double sigma_squared(const WeightScheme& scheme, const Subset& subset) {
  if (subset.ambient() != scheme.N()) throw ParameterError("subset ambient size differs from scheme N");
  const int size = subset.size();
  switch (scheme.kind()) {
    case SchemeKind::kBernoulli: {
      const double p = scheme.inclusion_probability();
      return std::pow(p, size) * std::pow(1.0 - p, scheme.N() - size);
    }
    case SchemeKind::kFixedSize:
      return size == scheme.fixed_size_k() ? 1.0 / binomial_coefficient(scheme.N(), size) : 0.0;
    case SchemeKind::kCustom: {
      const auto& table = scheme.table();
      const auto it = std::lower_bound(table.begin(), table.end(), subset,
                                       [](const auto& entry, const Subset& s) { return entry.first < s; });
      return (it != table.end() && it->first == subset) ? it->second : 0.0;
    }
  }
  return 0.0;
}

Subset sample_subset(const WeightScheme& scheme, RngStream& stream) {
  const int N = scheme.N();
  Subset out(N);
  switch (scheme.kind()) {
    case SchemeKind::kBernoulli: {
      // Same law as N independent coin flips: jump between successes with
      // geometric gaps, so the cost is O(|A|) rather than O(N).
      const double log_fail = std::log1p(-scheme.inclusion_probability());
      long long position = 0;
      for (;;) {
        const double gap = std::floor(std::log(stream.uniform()) / log_fail);
        if (gap >= static_cast<double>(N)) break;
        position += static_cast<long long>(gap) + 1;
        if (position > N) break;
        out.insert(static_cast<int>(position));
      }
      return out;
    }
    case SchemeKind::kFixedSize: {
      std::vector<int> pool(static_cast<std::size_t>(N));
      std::iota(pool.begin(), pool.end(), 1);
      for (int i = 0; i < scheme.fixed_size_k(); ++i) {
        const auto remaining = static_cast<std::uint64_t>(N - i);
        const auto j = static_cast<std::size_t>(i) +
                       static_cast<std::size_t>(std::min<double>(std::floor(stream.uniform() * remaining),
                                                                 static_cast<double>(remaining - 1)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
        out.insert(pool[static_cast<std::size_t>(i)]);
      }
      return out;
    }
    case SchemeKind::kCustom: {
      const auto& cdf = scheme.table_cdf();
      const double u = stream.uniform() * cdf.back();
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      if (it == cdf.end()) --it;
      auto idx = static_cast<std::size_t>(it - cdf.begin());
      while (scheme.table()[idx].second == 0.0 && idx + 1 < cdf.size()) ++idx;
      return scheme.table()[idx].first;
    }
  }
  return out;
}

double q_from_c(double c, int d) {
  if (!(c >= 0.0)) throw DomainError("q_from_c needs c >= 0");
  if (d < 2) throw ParameterError("local dimension d must be >= 2");
  const double dd = static_cast<double>(d);
  return std::exp(-(1.0 - 1.0 / (dd * dd)) * c * c);
}

double c_from_q(double q, int d) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("c_from_q needs 0 < q < 1, got " + std::to_string(q));
  if (d < 2) throw ParameterError("local dimension d must be >= 2");
  const double dd = static_cast<double>(d);
  return std::sqrt(-std::log(q) / (1.0 - 1.0 / (dd * dd)));
}

std::vector<double> folded_poisson(double lambda) {
  if (!(lambda >= 0.0)) throw ParameterError("Poisson mean must be nonnegative");
  const auto K = static_cast<std::size_t>(std::ceil(lambda + 4.0 * std::sqrt(lambda)));
  std::vector<double> mass(K + 1, 0.0);
  double term = std::exp(-lambda);
  double below = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    mass[k] = term;
    below += term;
    term *= lambda / static_cast<double>(k + 1);
  }
  mass[K] = std::max(0.0, 1.0 - below);
  return mass;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = std::max(a.size(), b.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i < a.size() ? a[i] : 0.0;
    const double y = i < b.size() ? b[i] : 0.0;
    sum += std::fabs(x - y);
  }
  return 0.5 * sum;
}

CoincidenceStats assumption_diagnostics(const WeightScheme& scheme, int k, std::size_t trials, std::uint64_t seed,
                                        unsigned threads) {
  if (k < 2) throw ParameterError("diagnostics need k >= 2");
  if (trials < 1) throw ParameterError("diagnostics need at least one trial");
  const std::size_t pairs = static_cast<std::size_t>(k * (k - 1) / 2);

  // One record per trial: pairwise overlaps followed by the triple flag.
  std::vector<int> records(trials * (pairs + 1));
  parallel_for(trials, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<Subset> sets;
    for (std::size_t t = begin; t < end; ++t) {
      RngStream stream(seed, derive_stream_id({0x5b5e7d1a9ull, t}));
      sets.clear();
      for (int i = 0; i < k; ++i) sets.push_back(sample_subset(scheme, stream));
      int* rec = &records[t * (pairs + 1)];
      std::size_t p = 0;
      for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) rec[p++] = sets[static_cast<std::size_t>(i)].intersection_size(sets[static_cast<std::size_t>(j)]);
      int triple = 0;
      for (int i = 0; i < k && !triple; ++i)
        for (int j = i + 1; j < k && !triple; ++j) {
          const Subset ij = sets[static_cast<std::size_t>(i)] & sets[static_cast<std::size_t>(j)];
          if (ij.empty()) continue;
          for (int l = j + 1; l < k; ++l)
            if (ij.intersection_size(sets[static_cast<std::size_t>(l)]) > 0) {
              triple = 1;
              break;
            }
        }
      rec[pairs] = triple;
    }
  });

  CoincidenceStats stats;
  stats.k = k;
  stats.trials = trials;
  const double inv = 1.0 / static_cast<double>(trials);
  double overlap_sum = 0.0;
  std::size_t triples = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    const int* rec = &records[t * (pairs + 1)];
    std::vector<int> key(rec, rec + pairs);
    stats.joint[key] += inv;
    for (std::size_t p = 0; p < pairs; ++p) overlap_sum += rec[p];
    triples += static_cast<std::size_t>(rec[pairs]);
  }
  stats.triple_overlap_frequency = static_cast<double>(triples) * inv;
  stats.poisson_mean = scheme.c() ? (*scheme.c()) * (*scheme.c()) : overlap_sum * inv / static_cast<double>(pairs);

  const std::vector<double> reference = folded_poisson(stats.poisson_mean);
  const std::size_t last = reference.size() - 1;
  std::size_t p = 0;
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j, ++p) {
      PairMarginal marginal{i + 1, j + 1, std::vector<double>(reference.size(), 0.0), 0.0};
      for (std::size_t t = 0; t < trials; ++t) {
        const auto v = static_cast<std::size_t>(records[t * (pairs + 1) + p]);
        marginal.frequencies[std::min(v, last)] += inv;
      }
      marginal.total_variation = total_variation(marginal.frequencies, reference);
      stats.max_total_variation = std::max(stats.max_total_variation, marginal.total_variation);
      stats.marginals.push_back(std::move(marginal));
    }
  }

  if (k >= 3) {
    // Pair index 0 is (1,2), pair index 1 is (1,3).
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const double x = records[t * (pairs + 1)];
      const double y = records[t * (pairs + 1) + 1];
      sx += x;
      sy += y;
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
    }
    const double n = static_cast<double>(trials);
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    stats.pair_correlation = (vx > 0 && vy > 0) ? cov / std::sqrt(vx * vy) : 0.0;
  }
  return stats;
}

Z4Estimate z4_sum_monte_carlo(const WeightScheme& scheme, int n, std::size_t samples, std::uint64_t seed,
                              unsigned threads) {
  if (n < 1) throw ParameterError("z4_sum needs n >= 1");
  if (samples < 2) throw ParameterError("z4_sum Monte Carlo needs at least two samples");
  const double d2 = static_cast<double>(scheme.d()) * scheme.d();
  std::vector<double> values(samples);
  parallel_for(samples, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      RngStream stream(seed, derive_stream_id({0x24a6e3c1ull, s}));
      const Subset first = sample_subset(scheme, stream);
      Subset others(scheme.N());
      for (int i = 1; i < n; ++i) others = others | sample_subset(scheme, stream);
      values[s] = std::pow(d2, -first.minus(others).size());
    }
  });
  double sum = 0.0, sumsq = 0.0;
  for (double v : values) {
    sum += v;
    sumsq += v * v;
  }
  const double count = static_cast<double>(samples);
  const double mean = sum / count;
  const double var = std::max(0.0, (sumsq - count * mean * mean) / (count - 1.0));
  return {mean, std::sqrt(var / count), false};
}

Z4Estimate z4_sum(const WeightScheme& scheme, int n, std::size_t samples, std::uint64_t seed, unsigned threads) {
  if (n < 1) throw ParameterError("z4_sum needs n >= 1");
  if (scheme.kind() == SchemeKind::kBernoulli) {
    // Coordinates are independent: each contributes the factor
    // 1 - P(r in A_1, r not in A_2..A_n) (1 - d^-2).
    const double p = scheme.inclusion_probability();
    const double d2 = static_cast<double>(scheme.d()) * scheme.d();
    const double per_coordinate = 1.0 - p * std::pow(1.0 - p, n - 1) * (1.0 - 1.0 / d2);
    return {std::pow(per_coordinate, scheme.N()), 0.0, true};
  }
  return z4_sum_monte_carlo(scheme, n, samples, seed, threads);
}

}  // namespace qgrm
