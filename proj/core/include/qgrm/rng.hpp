#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>

namespace qgrm {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

// splitmix64 finalizer; used to fold structured identifiers into stream ids.
std::uint64_t mix64(std::uint64_t x);

// Order-sensitive hash of a tuple of identifiers (sample index, subset mask, ...).
std::uint64_t derive_stream_id(std::initializer_list<std::uint64_t> parts);

// Standard normal quantile, Wichura's AS241 (PPND16), ~1e-16 relative accuracy.
double normal_quantile(double p);
// The same rational approximations evaluated branch-free on 32 values at once.
void normal_quantile_batch(const double* p, double* out);

// A reproducible stream of uniforms / normals addressed by (seed, stream id, lane).
//
// The counter layout is [block, lane, stream_lo, stream_hi] and the key is the
// master seed, so every (seed, stream, lane) triple owns a disjoint sequence
// and no two consumers share generator state.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint32_t lane = 0);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  // Standard normal by inverse CDF; no rejection state. Normals are produced
  // 32 at a time from 16 consecutive counter blocks and buffered.
  double normal();
  // Same values as n successive normal() calls.
  void fill_normal(double* out, std::size_t n);

  static constexpr int kNormalBatch = 32;

 private:
  void refill();
  void normal_batch(double* out);

  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter buffer_{};
  int used_ = 4;
  std::array<double, kNormalBatch> normals_{};
  int normals_used_ = kNormalBatch;
};

// Identifies one family of streams (one random matrix, one trial, ...).
struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  StreamKey child(std::uint64_t tag) const { return {seed, derive_stream_id({stream, tag})}; }
  RngStream lane(std::uint32_t lane_index) const { return RngStream(seed, stream, lane_index); }
};

}  // namespace qgrm
