#include "qgrm/rng.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>

#if defined(__AVX512F__)
#include <immintrin.h>
#endif

namespace qgrm {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Philox4x32-10 on 16 consecutive block counters; words[w][j] is word w of block j.
void philox_blocks(const PhiloxCounter& counter, const PhiloxKey& key, std::uint32_t (&words)[4][16]) {
#if defined(__AVX512F__)
  const __m512i m0 = _mm512_set1_epi64(kPhiloxM0);
  const __m512i m1 = _mm512_set1_epi64(kPhiloxM1);
  const __m512i low = _mm512_set1_epi64(0xFFFFFFFFll);
  for (int half = 0; half < 2; ++half) {
    __m512i x0 = _mm512_add_epi64(_mm512_set1_epi64(counter[0]), _mm512_setr_epi64(0, 1, 2, 3, 4, 5, 6, 7));
    x0 = _mm512_and_si512(_mm512_add_epi64(x0, _mm512_set1_epi64(8 * half)), low);
    __m512i x1 = _mm512_set1_epi64(counter[1]);
    __m512i x2 = _mm512_set1_epi64(counter[2]);
    __m512i x3 = _mm512_set1_epi64(counter[3]);
    std::uint32_t k0 = key[0], k1 = key[1];
    for (int round = 0; round < 10; ++round) {
      const __m512i p0 = _mm512_mul_epu32(x0, m0);
      const __m512i p1 = _mm512_mul_epu32(x2, m1);
      const __m512i n0 = _mm512_xor_si512(_mm512_xor_si512(_mm512_srli_epi64(p1, 32), x1), _mm512_set1_epi64(k0));
      const __m512i n2 = _mm512_xor_si512(_mm512_xor_si512(_mm512_srli_epi64(p0, 32), x3), _mm512_set1_epi64(k1));
      x1 = _mm512_and_si512(p1, low);
      x3 = _mm512_and_si512(p0, low);
      x0 = n0;
      x2 = n2;
      k0 += kPhiloxW0;
      k1 += kPhiloxW1;
    }
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(&words[0][8 * half]), _mm512_cvtepi64_epi32(x0));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(&words[1][8 * half]), _mm512_cvtepi64_epi32(x1));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(&words[2][8 * half]), _mm512_cvtepi64_epi32(x2));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(&words[3][8 * half]), _mm512_cvtepi64_epi32(x3));
  }
#else
  for (std::size_t j = 0; j < 16; ++j) {
    PhiloxCounter c = counter;
    c[0] += static_cast<std::uint32_t>(j);
    const PhiloxCounter out = philox4x32_10(c, key);
    for (int w = 0; w < 4; ++w) words[w][j] = out[static_cast<std::size_t>(w)];
  }
#endif
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, c[0], hi0, lo0);
    mulhilo(kPhiloxM1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kPhiloxW0;
    k[1] += kPhiloxW1;
  }
  return c;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6A09E667F3BCC909ull;
  for (std::uint64_t p : parts) h = mix64(h ^ mix64(p));
  return h;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
             45921.953931549871457) * r + 13731.693765509461125) * r + 1971.5909503065514427) * r +
          133.14166789178437745) * r + 3.387132872796366608);
    const double den =
        (((((((5226.495278852545925 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
             21213.794301586595867) * r + 5394.1960214247511077) * r + 687.1870074920579083) * r +
          42.313330701600911252) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
             1.27045825245236838258) * r + 3.64784832476320460504) * r + 5.7694972214606914055) * r +
          4.6303378461565452959) * r + 1.42343711074968357734);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
             0.14810397642748007459) * r + 0.68976733498510000455) * r + 1.6763848301838038494) * r +
          2.05319162663775882187) * r + 1.0);
    value = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
             0.026532189526576123093) * r + 0.29656057182850489123) * r + 1.7848265399172913358) * r +
          5.4637849111641143699) * r + 6.6579046435011037772);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
             7.868691311456132591e-4) * r + 0.0148753612908506148525) * r + 0.13692988092273580531) * r +
          0.59983220655588793769) * r + 1.0);
    value = num / den;
  }
  return q < 0.0 ? -value : value;
}

void normal_quantile_batch(const double* __restrict p, double* __restrict out) {
  constexpr int n = RngStream::kNormalBatch;
  using Batch = Eigen::Array<double, n, 1>;
  alignas(64) double tail_p[n];
  for (int i = 0; i < n; ++i) tail_p[i] = std::min(p[i], 1.0 - p[i]);
  alignas(64) double r[n];
  Eigen::Map<Batch> r_map(r);
  r_map = (-Eigen::Map<const Batch>(tail_p).log()).sqrt();

  // Central region and the r <= 5 tail region, sharing one division.
  for (int i = 0; i < n; ++i) {
    const double q = p[i] - 0.5;
    const double rc = 0.180625 - q * q;
    const double cn =
        q * (((((((2509.0809287301226727 * rc + 33430.575583588128105) * rc + 67265.770927008700853) * rc +
                 45921.953931549871457) * rc + 13731.693765509461125) * rc + 1971.5909503065514427) * rc +
              133.14166789178437745) * rc + 3.387132872796366608);
    const double cd =
        (((((((5226.495278852545925 * rc + 28729.085735721942674) * rc + 39307.89580009271061) * rc +
             21213.794301586595867) * rc + 5394.1960214247511077) * rc + 687.1870074920579083) * rc +
          42.313330701600911252) * rc + 1.0);
    const double t = r[i] - 1.6;
    const double tn =
        (((((((7.7454501427834140764e-4 * t + 0.0227238449892691845833) * t + 0.24178072517745061177) * t +
             1.27045825245236838258) * t + 3.64784832476320460504) * t + 5.7694972214606914055) * t +
          4.6303378461565452959) * t + 1.42343711074968357734);
    const double td =
        (((((((1.05075007164441684324e-9 * t + 5.475938084995344946e-4) * t + 0.0151986665636164571966) * t +
             0.14810397642748007459) * t + 0.68976733498510000455) * t + 1.6763848301838038494) * t +
          2.05319162663775882187) * t + 1.0);
    const bool central = std::fabs(q) <= 0.425;
    const double num = central ? cn : (q < 0.0 ? -tn : tn);
    const double den = central ? cd : td;
    out[i] = num / den;
  }
  // Beyond r = 5 (p below ~1.4e-11) the far-tail branch of the scalar routine applies.
  double r_max = 0.0;
  for (int i = 0; i < n; ++i) r_max = std::max(r_max, r[i]);
  if (r_max > 5.0)
    for (int i = 0; i < n; ++i)
      if (r[i] > 5.0) out[i] = normal_quantile(p[i]);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t lane)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, lane, static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32)} {}

void RngStream::refill() {
  buffer_ = philox4x32_10(counter_, key_);
  ++counter_[0];
  used_ = 0;
}

std::uint64_t RngStream::next_u64() {
  if (used_ > 2) refill();
  const std::uint64_t hi = buffer_[used_];
  const std::uint64_t lo = buffer_[used_ + 1];
  used_ += 2;
  return (hi << 32) | lo;
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (normals_used_ == kNormalBatch) {
    normal_batch(normals_.data());
    normals_used_ = 0;
  }
  return normals_[static_cast<std::size_t>(normals_used_++)];
}

void RngStream::fill_normal(double* out, std::size_t n) {
  std::size_t done = 0;
  while (done < n && normals_used_ < kNormalBatch) out[done++] = normals_[static_cast<std::size_t>(normals_used_++)];
  for (; n - done >= kNormalBatch; done += kNormalBatch) normal_batch(out + done);
  while (done < n) out[done++] = normal();
}

void RngStream::normal_batch(double* out) {
  constexpr std::size_t kBlocks = kNormalBatch / 2;
  alignas(64) std::uint32_t words[4][kBlocks];
  philox_blocks(counter_, key_, words);
  counter_[0] += static_cast<std::uint32_t>(kBlocks);
  alignas(64) double u[kNormalBatch];
  for (std::size_t j = 0; j < kBlocks; ++j) {
    const std::uint64_t a = (static_cast<std::uint64_t>(words[0][j]) << 32) | words[1][j];
    const std::uint64_t b = (static_cast<std::uint64_t>(words[2][j]) << 32) | words[3][j];
    u[2 * j] = (static_cast<double>(a >> 11) + 0.5) * 0x1.0p-53;
    u[2 * j + 1] = (static_cast<double>(b >> 11) + 0.5) * 0x1.0p-53;
  }
  normal_quantile_batch(u, out);
}

}  // namespace qgrm
