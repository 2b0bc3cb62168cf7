#include "qgrm/matrix_model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <string>

#include "qgrm/errors.hpp"
#include "qgrm/parallel.hpp"

namespace qgrm {

namespace {

// Entries of small matrices generated per assembly batch.
constexpr std::size_t kBatchEntries = std::size_t{1} << 25;
// Target tiles are at most this many rows (and columns).
constexpr std::size_t kTileDim = 64;
// Below this many rows, tiles are filled by direct scatter.
constexpr std::size_t kScatterDim = 8;
constexpr std::size_t kPlanLimit = std::size_t{1} << 26;

std::size_t power(int base, int exponent) {
  std::size_t v = 1;
  for (int i = 0; i < exponent; ++i) v *= static_cast<std::size_t>(base);
  return v;
}

bool is_identity(const Eigen::MatrixXd& m) {
  return m.rows() == m.cols() && m == Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

using MatrixView = Eigen::Map<ComplexMatrix>;

void fill_standard_row(MatrixView m, std::size_t i, RngStream& stream) {
  const std::size_t dim = static_cast<std::size_t>(m.rows());
  const double diag_scale = std::sqrt(1.0 / static_cast<double>(dim));
  const double off_scale = std::sqrt(0.5 / static_cast<double>(dim));
  thread_local std::vector<double> draws;
  draws.resize(1 + 2 * (dim - 1 - i));
  stream.fill_normal(draws.data(), draws.size());
  Complex* row = m.data() + i * dim;
  row[i] = Complex(diag_scale * draws[0], 0.0);
  for (std::size_t j = i + 1, k = 1; j < dim; ++j, k += 2) row[j] = Complex(off_scale * draws[k], off_scale * draws[k + 1]);
}

void fill_standard_hermitian(MatrixView m, const StreamKey& key, unsigned threads) {
  const auto dim = static_cast<std::size_t>(m.rows());
  const unsigned workers = dim >= 64 ? threads : 1;
  parallel_for(dim, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      RngStream stream = key.lane(static_cast<std::uint32_t>(i));
      fill_standard_row(m, i, stream);
    }
  });
  mirror_upper(m);
}

// Writes the family for one subset into caller-owned dim x dim blocks, one per label.
void gamma_family_into(std::size_t dim, const Eigen::MatrixXd& mixing, const StreamKey& key, unsigned threads,
                       const std::vector<Complex*>& out) {
  const auto labels = static_cast<std::size_t>(mixing.rows());
  const auto rank = static_cast<std::size_t>(mixing.cols());
  const auto n = static_cast<Eigen::Index>(dim);
  if (is_identity(mixing)) {
    for (std::size_t k = 0; k < rank; ++k) fill_standard_hermitian(MatrixView(out[k], n, n), key.child(k), threads);
    return;
  }
  std::vector<HermitianMatrix> base(rank, HermitianMatrix(n, n));
  for (std::size_t k = 0; k < rank; ++k) fill_standard_hermitian(MatrixView(base[k].data(), n, n), key.child(k), threads);
  for (std::size_t mu = 0; mu < labels; ++mu) {
    MatrixView r(out[mu], n, n);
    r.setZero();
    for (std::size_t k = 0; k < rank; ++k) {
      const double w = mixing(static_cast<Eigen::Index>(mu), static_cast<Eigen::Index>(k));
      if (w != 0.0) r += w * base[k];
    }
  }
}

std::vector<HermitianMatrix> gamma_family(std::size_t dim, const Eigen::MatrixXd& mixing, const StreamKey& key,
                                          unsigned threads) {
  const auto n = static_cast<Eigen::Index>(dim);
  std::vector<HermitianMatrix> family(static_cast<std::size_t>(mixing.rows()), HermitianMatrix(n, n));
  std::vector<Complex*> out;
  for (auto& m : family) out.push_back(m.data());
  gamma_family_into(dim, mixing, key, threads, out);
  return family;
}

// All subsets of size k of {1..N} as bitmasks (N <= 64).
void append_combinations(int N, int k, std::vector<std::uint64_t>& out) {
  if (k == 0) {
    out.push_back(0);
    return;
  }
  if (k > N) return;
  const std::uint64_t limit = N == 64 ? 0 : (std::uint64_t{1} << N);
  std::uint64_t mask = (k == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << k) - 1);
  for (;;) {
    out.push_back(mask);
    if (out.size() > kPlanLimit) throw ResourceError("truncation plan would list more than 2^26 subsets");
    // Gosper's hack: next mask with the same popcount.
    const std::uint64_t low = mask & (~mask + 1);
    const std::uint64_t ripple = mask + low;
    if (ripple == 0) return;
    mask = ripple | (((mask ^ ripple) >> 2) / low);
    if (limit != 0 && mask >= limit) return;
  }
}

struct BatchItem {
  Subset subset;
  double weight = 0.0;
  std::size_t small_dim = 0;
  std::vector<Complex*> family;
};

// The target is cut into tiles of the low `low` coordinates (rows and columns
// of one tile differ only there); a subset A splits into its low part, which
// embeds inside a tile, and its high part, which selects the tile-sized block
// of the small matrix.
class TiledEmbedding {
 public:
  struct Workspace {
    std::vector<Complex> sums;  // one block per low mask
    std::vector<char> used;
    std::vector<Complex> scratch;
    std::vector<Complex> tile;
  };

  TiledEmbedding(int d, int N) : d_(d) {
    low_ = 0;
    while (low_ < N && power(d, low_ + 1) <= kTileDim) ++low_;
    high_ = N - low_;
    tile_ = power(d, low_);
    tiles_ = power(d, high_);
    std::size_t offset = 0;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << low_); ++m) {
      const std::size_t dim = power(d, std::popcount(m));
      low_dims_.push_back(dim);
      sum_offsets_.push_back(offset);
      offset += dim * dim;
    }
    sums_size_ = offset;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << high_); ++m)
      high_maps_.emplace_back(Subset::from_mask(high_, m), d);
    for (int k = 0; k <= low_ && power(d, k) <= kScatterDim; ++k) {
      base_maps_.emplace_back();
      for (std::uint64_t m = 0; m < (std::uint64_t{1} << k); ++m) base_maps_.back().emplace_back(Subset::from_mask(k, m), d);
    }
  }

  std::size_t tile() const { return tile_; }
  std::size_t tiles() const { return tiles_; }

  Workspace workspace() const {
    return {std::vector<Complex>(sums_size_), std::vector<char>(low_dims_.size()), std::vector<Complex>(tile_ * tile_),
            std::vector<Complex>(tile_ * tile_)};
  }

  // Sums the batch's contributions to tile (X, Y) of label mu into ws.tile; false when nothing reaches it.
  bool build_tile(const std::vector<BatchItem>& batch, std::size_t mu, std::size_t X, std::size_t Y,
                  Workspace& ws) const {
    std::fill(ws.used.begin(), ws.used.end(), 0);
    bool any = false;
    const std::uint64_t low_bits = (std::uint64_t{1} << low_) - 1;
    for (const BatchItem& item : batch) {
      const std::uint64_t mask = item.subset.mask();
      const EmbeddingMap& hmap = high_maps_[mask >> low_];
      if (hmap.rest_index(X) != hmap.rest_index(Y)) continue;
      const std::uint64_t lm = mask & low_bits;
      const std::size_t Dl = low_dims_[lm], D = item.small_dim;
      const Complex* src = item.family[mu] + hmap.small_index(X) * Dl * D + hmap.small_index(Y) * Dl;
      Complex* sum = ws.sums.data() + sum_offsets_[lm];
      const double w = item.weight;
      if (!ws.used[lm]) {
        for (std::size_t i = 0; i < Dl; ++i)
          for (std::size_t j = 0; j < Dl; ++j) sum[i * Dl + j] = w * src[i * D + j];
        ws.used[lm] = 1;
      } else {
        for (std::size_t i = 0; i < Dl; ++i)
          for (std::size_t j = 0; j < Dl; ++j) sum[i * Dl + j] += w * src[i * D + j];
      }
      any = true;
    }
    if (!any) return false;
    std::vector<Source> sources(low_dims_.size());
    for (std::size_t lm = 0; lm < sources.size(); ++lm)
      if (ws.used[lm]) sources[lm] = {ws.sums.data() + sum_offsets_[lm], low_dims_[lm]};
    std::fill(ws.tile.begin(), ws.tile.end(), Complex(0.0, 0.0));
    expand(low_, sources.data(), ws.tile.data(), tile_, ws.scratch.data());
    return true;
  }

 private:
  struct Source {
    const Complex* data = nullptr;
    std::size_t stride = 0;
  };

  // out (d^k square, row stride ld) += sum over masks A of {1..k} of src[A] (x) identity on the rest.
  void expand(int k, const Source* src, Complex* out, std::size_t ld, Complex* scratch) const {
    const std::size_t count = std::size_t{1} << k;
    if (std::none_of(src, src + count, [](const Source& s) { return s.data != nullptr; })) return;
    if (static_cast<std::size_t>(k) < base_maps_.size()) {
      scatter(k, src, out, ld);
      return;
    }
    const std::size_t half = count / 2;
    const std::size_t n = power(d_, k - 1);
    const auto d = static_cast<std::size_t>(d_);
    // Masks without coordinate k act identically on every diagonal block.
    if (std::any_of(src, src + half, [](const Source& s) { return s.data != nullptr; })) {
      std::fill(scratch, scratch + n * n, Complex(0.0, 0.0));
      expand(k - 1, src, scratch, n, scratch + n * n);
      for (std::size_t b = 0; b < d; ++b)
        for (std::size_t i = 0; i < n; ++i) {
          Complex* row = out + (b * n + i) * ld + b * n;
          const Complex* from = scratch + i * n;
          for (std::size_t j = 0; j < n; ++j) row[j] += from[j];
        }
    }
    // Masks with coordinate k: coordinate k is the slowest digit of their small index.
    std::array<Source, kTileDim / 2> sub{};
    for (std::size_t b = 0; b < d; ++b)
      for (std::size_t b2 = 0; b2 < d; ++b2) {
        for (std::size_t m = 0; m < half; ++m) {
          const Source& s = src[half + m];
          const std::size_t block = low_dims_[m];
          sub[m] = s.data ? Source{s.data + b * block * s.stride + b2 * block, s.stride} : Source{};
        }
        expand(k - 1, sub.data(), out + b * n * ld + b2 * n, ld, scratch);
      }
  }

  // Direct form of expand for small k.
  void scatter(int k, const Source* src, Complex* out, std::size_t ld) const {
    const auto& maps = base_maps_[static_cast<std::size_t>(k)];
    for (std::size_t m = 0; m < maps.size(); ++m) {
      if (!src[m].data) continue;
      const auto& in_off = maps[m].small_offsets();
      const std::size_t dim = in_off.size();
      for (std::size_t rest : maps[m].rest_offsets())
        for (std::size_t a = 0; a < dim; ++a) {
          Complex* row = out + (in_off[a] + rest) * ld + rest;
          const Complex* from = src[m].data + a * src[m].stride;
          for (std::size_t a2 = 0; a2 < dim; ++a2) row[in_off[a2]] += from[a2];
        }
    }
  }

  int d_;
  int low_ = 0;
  int high_ = 0;
  std::size_t tile_ = 1;
  std::size_t tiles_ = 1;
  std::size_t sums_size_ = 0;
  std::vector<std::vector<EmbeddingMap>> base_maps_;  // [k][mask] for tiles of at most kScatterDim rows
  std::vector<std::size_t> low_dims_;
  std::vector<std::size_t> sum_offsets_;
  std::vector<EmbeddingMap> high_maps_;
};

}  // namespace

double hermitian_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return INFINITY;
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

EmbeddingMap::EmbeddingMap(const Subset& subset, int d) : d_(d), N_(subset.ambient()) {
  if (d < 2) throw ParameterError("d must be >= 2");
  dim_ = power(d, N_);
  std::vector<int> outside;
  for (int r = 0; r < N_; ++r) (subset.contains(r + 1) ? positions_ : outside).push_back(r);

  auto offsets = [&](const std::vector<int>& coords) {
    std::vector<std::size_t> stride(static_cast<std::size_t>(N_));
    for (int r = 0; r < N_; ++r) stride[static_cast<std::size_t>(r)] = power(d, r);
    std::vector<std::size_t> out(power(d, static_cast<int>(coords.size())));
    for (std::size_t a = 0; a < out.size(); ++a) {
      std::size_t rest = a, offset = 0;
      for (int r : coords) {
        offset += (rest % static_cast<std::size_t>(d)) * stride[static_cast<std::size_t>(r)];
        rest /= static_cast<std::size_t>(d);
      }
      out[a] = offset;
    }
    return out;
  };
  inside_offset_ = offsets(positions_);
  outside_offset_ = offsets(outside);

  small_of_.assign(dim_, 0);
  rest_of_.assign(dim_, 0);
  for (std::size_t a = 0; a < inside_offset_.size(); ++a)
    for (std::size_t b = 0; b < outside_offset_.size(); ++b) {
      const std::size_t I = inside_offset_[a] + outside_offset_[b];
      small_of_[I] = static_cast<std::uint32_t>(a);
      rest_of_[I] = static_cast<std::uint32_t>(b);
    }
}

std::vector<int> EmbeddingMap::digits(std::size_t index) const {
  if (index >= dim_) throw ParameterError("index outside 0..d^N-1");
  std::vector<int> out(static_cast<std::size_t>(N_));
  for (auto& x : out) {
    x = static_cast<int>(index % static_cast<std::size_t>(d_));
    index /= static_cast<std::size_t>(d_);
  }
  return out;
}

std::size_t EmbeddingMap::index(const std::vector<int>& digits) const {
  if (static_cast<int>(digits.size()) != N_) throw ParameterError("digit sequence must have length N");
  std::size_t I = 0;
  for (std::size_t r = digits.size(); r-- > 0;) {
    if (digits[r] < 0 || digits[r] >= d_) throw ParameterError("digit outside 0..d-1");
    I = I * static_cast<std::size_t>(d_) + static_cast<std::size_t>(digits[r]);
  }
  return I;
}

std::size_t checked_dimension(int d, int N, std::size_t cap) {
  if (d < 2 || N < 1) throw ParameterError("need d >= 2 and N >= 1");
  std::size_t dim = 1;
  for (int i = 0; i < N; ++i) {
    dim *= static_cast<std::size_t>(d);
    if (dim > cap)
      throw ResourceError("matrix dimension d^N = " + std::to_string(d) + "^" + std::to_string(N) +
                          " exceeds the dimension cap " + std::to_string(cap));
  }
  return dim;
}

HermitianMatrix sample_standard_hermitian(std::size_t dim, const StreamKey& key, unsigned threads) {
  if (dim < 1) throw ParameterError("matrix dimension must be >= 1");
  HermitianMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  fill_standard_hermitian(MatrixView(m.data(), m.rows(), m.cols()), key, threads);
  return m;
}

HermitianMatrix sample_standard_hermitian(std::size_t dim, RngStream& stream) {
  if (dim < 1) throw ParameterError("matrix dimension must be >= 1");
  HermitianMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < dim; ++i) fill_standard_row(MatrixView(m.data(), m.rows(), m.cols()), i, stream);
  mirror_upper(m);
  return m;
}

std::vector<HermitianMatrix> sample_gamma_family(std::size_t dim, const GammaSpec& gamma, const StreamKey& key,
                                                 unsigned threads) {
  return gamma_family(dim, gamma.mixing_factor(), key, threads);
}

HermitianMatrix embed(const Subset& subset, const ComplexMatrix& small, int d) {
  const EmbeddingMap map(subset, d);
  if (static_cast<std::size_t>(small.rows()) != map.small_dim() || small.cols() != small.rows())
    throw ParameterError("embedded matrix must be d^|A| x d^|A|");
  const auto dim = static_cast<Eigen::Index>(map.dim());
  HermitianMatrix out = HermitianMatrix::Zero(dim, dim);
  const auto& in_off = map.small_offsets();
  const auto& out_off = map.rest_offsets();
  for (std::size_t b = 0; b < out_off.size(); ++b)
    for (std::size_t a = 0; a < in_off.size(); ++a) {
      const auto I = static_cast<Eigen::Index>(in_off[a] + out_off[b]);
      for (std::size_t a2 = 0; a2 < in_off.size(); ++a2)
        out(I, static_cast<Eigen::Index>(in_off[a2] + out_off[b])) =
            small(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a2));
    }
  return out;
}

void embed_accumulate_upper(const EmbeddingMap& map, const ComplexMatrix& small, double weight, ComplexMatrix& target,
                            std::size_t row_begin, std::size_t row_end) {
  const auto& in_off = map.small_offsets();
  const auto& out_off = map.rest_offsets();
  const std::size_t D = in_off.size();
  for (std::size_t I = row_begin; I < row_end; ++I) {
    const std::size_t a = map.small_index(I);
    const std::size_t rest = out_off[map.rest_index(I)];
    Complex* row = target.data() + I * static_cast<std::size_t>(target.cols());
    const Complex* src = small.data() + a * D;
    // Offsets grow with the small index, so J >= I exactly when a2 >= a.
    for (std::size_t a2 = a; a2 < D; ++a2) row[in_off[a2] + rest] += weight * src[a2];
  }
}

void mirror_upper(Eigen::Ref<ComplexMatrix> m) {
  constexpr Eigen::Index kBlock = 32;
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = Complex(m(i, i).real(), 0.0);
  for (Eigen::Index bi = 0; bi < n; bi += kBlock)
    for (Eigen::Index bj = bi; bj < n; bj += kBlock) {
      const Eigen::Index ie = std::min(n, bi + kBlock), je = std::min(n, bj + kBlock);
      for (Eigen::Index j = bj; j < je; ++j)
        for (Eigen::Index i = bi; i < std::min(ie, j); ++i) m(j, i) = std::conj(m(i, j));
    }
}

StreamKey subset_stream(std::uint64_t seed, std::uint64_t sample_index, const Subset& subset) {
  return {seed, derive_stream_id({sample_index, subset.mask()})};
}

TruncatedAssembly assemble_from_plan(const ModelConfig& config, std::uint64_t sample_index,
                                     const TruncationPlan& plan) {
  const std::size_t dim = config.dim();
  const int d = config.d();
  const Eigen::MatrixXd mixing = config.gamma.mixing_factor();
  const std::size_t labels = config.gamma.size();
  const unsigned threads = std::max(1u, config.threads);

  TruncatedAssembly out;
  out.retained_subsets = plan.retained.size();
  out.dropped_mass = plan.dropped_mass;
  out.matrices.assign(labels, HermitianMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)));

  const TiledEmbedding tiling(d, config.N());
  // Batch boundaries: each batch holds at least one subset and otherwise stays under the entry budget.
  std::vector<std::size_t> bounds{0};
  std::size_t arena_size = 0;
  for (std::size_t end = 0, entries = 0; end < plan.retained.size();) {
    const std::size_t small = power(d, plan.retained[end].size());
    if (end > bounds.back() && entries >= kBatchEntries) {
      bounds.push_back(end);
      entries = 0;
    }
    entries += small * small * labels;
    arena_size = std::max(arena_size, entries);
    ++end;
  }
  bounds.push_back(plan.retained.size());
  std::vector<Complex> arena(arena_size);

  for (std::size_t bi = 0; bi + 1 < bounds.size(); ++bi) {
    const std::size_t next = bounds[bi], end = bounds[bi + 1];
    std::vector<BatchItem> batch;
    batch.reserve(end - next);
    Complex* cursor = arena.data();
    for (std::size_t i = next; i < end; ++i) {
      BatchItem item{plan.retained[i], std::sqrt(plan.weights[i]), power(d, plan.retained[i].size()), {}};
      for (std::size_t mu = 0; mu < labels; ++mu, cursor += item.small_dim * item.small_dim) item.family.push_back(cursor);
      batch.push_back(std::move(item));
    }

    const unsigned inner = batch.size() == 1 ? threads : 1;
    parallel_for(batch.size(), batch.size() == 1 ? 1 : threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const BatchItem& item = batch[i];
        gamma_family_into(item.small_dim, mixing, subset_stream(config.seed, sample_index, item.subset), inner,
                          item.family);
      }
    });

    // Each tile is summed in a fixed order, whatever the split.
    parallel_for(tiling.tiles(), threads, [&](std::size_t xb, std::size_t xe) {
      auto ws = tiling.workspace();
      const auto T = static_cast<Eigen::Index>(tiling.tile());
      for (std::size_t X = xb; X < xe; ++X)
        for (std::size_t Y = X; Y < tiling.tiles(); ++Y)
          for (std::size_t mu = 0; mu < labels; ++mu) {
            if (!tiling.build_tile(batch, mu, X, Y, ws)) continue;
            out.matrices[mu].block(static_cast<Eigen::Index>(X) * T, static_cast<Eigen::Index>(Y) * T, T, T) +=
                Eigen::Map<const ComplexMatrix>(ws.tile.data(), T, T);
          }
    });
  }
  for (auto& m : out.matrices) mirror_upper(m);
  return out;
}

std::vector<HermitianMatrix> assemble_S(const ModelConfig& config, std::uint64_t sample_index) {
  const int N = config.N();
  config.dim();
  if (N > config.subset_cap)
    throw ResourceError("N=" + std::to_string(N) + " exceeds the exact-assembly subset cap " +
                        std::to_string(config.subset_cap) + "; use truncated assembly");
  TruncationPlan plan;
  const std::uint64_t count = std::uint64_t{1} << N;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    Subset s = Subset::from_mask(N, mask);
    const double w = sigma_squared(config.scheme, s);
    if (w > 0.0) {
      plan.retained.push_back(std::move(s));
      plan.weights.push_back(w);
      plan.retained_mass += w;
    }
  }
  plan.dropped_mass = 1.0 - plan.retained_mass;
  return assemble_from_plan(config, sample_index, plan).matrices;
}

TruncationPlan plan_truncation(const WeightScheme& scheme, double mass_tolerance) {
  if (!(mass_tolerance >= 0.0 && mass_tolerance < 1.0)) throw ParameterError("mass tolerance must lie in [0, 1)");
  const int N = scheme.N();
  if (N > 64) throw ResourceError("truncated assembly supports N <= 64");
  const double target = 1.0 - mass_tolerance;

  std::vector<std::pair<std::uint64_t, double>> kept;
  if (scheme.kind() == SchemeKind::kBernoulli) {
    const double p = scheme.inclusion_probability();
    std::vector<int> sizes(static_cast<std::size_t>(N + 1));
    for (int k = 0; k <= N; ++k) sizes[static_cast<std::size_t>(k)] = k;
    auto weight = [&](int k) { return std::pow(p, k) * std::pow(1.0 - p, N - k); };
    std::stable_sort(sizes.begin(), sizes.end(), [&](int a, int b) { return weight(a) > weight(b); });
    double mass = 0.0;
    std::vector<std::uint64_t> masks;
    for (int k : sizes) {
      if (mass >= target) break;
      mass += binomial_coefficient(N, k) * weight(k);
      masks.clear();
      append_combinations(N, k, masks);
      const double w = weight(k);
      for (auto m : masks) kept.emplace_back(m, w);
      if (kept.size() > kPlanLimit) throw ResourceError("truncation plan would list more than 2^26 subsets");
    }
  } else {
    std::vector<std::pair<std::uint64_t, double>> candidates;
    if (scheme.kind() == SchemeKind::kFixedSize) {
      std::vector<std::uint64_t> masks;
      append_combinations(N, scheme.fixed_size_k(), masks);
      const double w = sigma_squared(scheme, Subset::from_mask(N, masks.front()));
      for (auto m : masks) candidates.emplace_back(m, w);
    } else {
      for (const auto& [subset, w] : scheme.table())
        if (w > 0.0) candidates.emplace_back(subset.mask(), w);
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    double mass = 0.0;
    for (const auto& c : candidates) {
      if (mass >= target) break;
      mass += c.second;
      kept.push_back(c);
    }
  }

  std::sort(kept.begin(), kept.end());
  TruncationPlan plan;
  plan.retained.reserve(kept.size());
  plan.weights.reserve(kept.size());
  for (const auto& [mask, w] : kept) {
    plan.retained.push_back(Subset::from_mask(N, mask));
    plan.weights.push_back(w);
    plan.retained_mass += w;
  }
  plan.dropped_mass = 1.0 - plan.retained_mass;
  return plan;
}

TruncatedAssembly assemble_S_truncated(const ModelConfig& config, std::uint64_t sample_index,
                                       double mass_tolerance) {
  config.dim();
  return assemble_from_plan(config, sample_index, plan_truncation(config.scheme, mass_tolerance));
}

void write_matrix_csv(std::ostream& out, const ComplexMatrix& m) {
  char buf[96];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g%+.17gi", m(i, j).real(), m(i, j).imag());
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace qgrm
