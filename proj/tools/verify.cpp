#include "verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qgrm/errors.hpp"
#include "qgrm/matrix_model.hpp"
#include "qgrm/parallel.hpp"
#include "qgrm/spectral_stats.hpp"

namespace qgrm::cli {

namespace {

struct ContractionTally {
  std::size_t instances = 0;
  std::size_t brute_forced = 0;
  std::size_t brute_mismatch = 0;
  std::size_t out_of_range = 0;
  std::size_t formula_cases = 0;
  std::size_t formula_mismatch = 0;
};

// Whether d^(2mN) stays within the guard.
bool brute_force_fits(int d, int N, int m, std::uint64_t guard) {
  std::uint64_t size = 1;
  for (int i = 0; i < 2 * m * N; ++i) {
    if (size > guard / static_cast<std::uint64_t>(d)) return false;
    size *= static_cast<std::uint64_t>(d);
  }
  return size <= guard;
}

void tally(const ContractionProblem& problem, std::uint64_t guard, ContractionTally& t) {
  ++t.instances;
  const PowerOfD theta = theta_product(problem);
  if (theta.exponent > 0) ++t.out_of_range;
  if (brute_force_fits(problem.d, problem.N, problem.partition.lines_count(), guard)) {
    ++t.brute_forced;
    if (!brute_force_contraction(problem, guard).equals(theta)) ++t.brute_mismatch;
  }
  if (!has_triple_intersection(problem)) {
    ++t.formula_cases;
    if (!(crossing_product(problem) == theta)) ++t.formula_mismatch;
  }
}

std::vector<Check> contraction_checks(const ContractionTally& t) {
  const std::string n = std::to_string(t.instances) + " instances";
  return {
      {"lemma5", "brute force equals coordinate product", static_cast<double>(t.brute_mismatch), 0.0, 0.0,
       t.brute_mismatch == 0, std::to_string(t.brute_forced) + " of " + n + " brute forced"},
      {"lemma5", "contraction within [0,1]", static_cast<double>(t.out_of_range), 0.0, 0.0, t.out_of_range == 0, n},
      {"lemma5", "crossing formula without triple overlaps", static_cast<double>(t.formula_mismatch), 0.0, 0.0,
       t.formula_mismatch == 0, std::to_string(t.formula_cases) + " of " + n + " without triple overlaps"},
  };
}

Subset random_subset(int N, RngStream& rng) {
  Subset s(N);
  for (int r = 1; r <= N; ++r)
    if (rng.next_u64() >> 63) s.insert(r);
  return s;
}

PairPartition random_partition(int m, RngStream& rng) {
  const auto all = enumerate_pair_partitions(m);
  return all[rng.next_u64() % all.size()];
}

int digit(std::size_t index, int r, int d) {
  for (int i = 1; i < r; ++i) index /= static_cast<std::size_t>(d);
  return static_cast<int>(index % static_cast<std::size_t>(d));
}

}  // namespace

bool all_pass(const std::vector<Check>& checks) {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::vector<Check> verify_contraction(int d, int N, std::size_t trials, std::uint64_t seed, int max_lines,
                                 std::uint64_t guard) {
  if (d < 2 || N < 1 || max_lines < 1) throw ParameterError("lemma5 needs d >= 2, N >= 1 and at least one line");
  int lines = max_lines;
  while (lines > 1 && !brute_force_fits(d, N, lines, guard)) --lines;
  ContractionTally t;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    RngStream rng(seed, derive_stream_id({0x1e3a5, trial}));
    const int m = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(lines));
    const PairPartition partition = random_partition(m, rng);
    std::vector<Subset> sets;
    for (int v = 0; v < m; ++v) sets.push_back(random_subset(N, rng));
    tally(ContractionProblem::from_line_sets(d, N, partition, sets), guard, t);
  }
  return contraction_checks(t);
}

std::vector<Check> verify_contraction_exhaustive(int d, int max_N, int max_lines, std::uint64_t guard) {
  ContractionTally t;
  for (int N = 1; N <= max_N; ++N)
    for (int m = 1; m <= max_lines; ++m) {
      const std::uint64_t per_line = std::uint64_t{1} << N;
      std::uint64_t tuples = 1;
      for (int v = 0; v < m; ++v) tuples *= per_line;
      for (const PairPartition& partition : enumerate_pair_partitions(m))
        for (std::uint64_t code = 0; code < tuples; ++code) {
          std::vector<Subset> sets;
          std::uint64_t rest = code;
          for (int v = 0; v < m; ++v, rest /= per_line) sets.push_back(Subset::from_mask(N, rest % per_line));
          tally(ContractionProblem::from_line_sets(d, N, partition, sets), guard, t);
        }
    }
  return contraction_checks(t);
}

std::vector<Check> verify_covariance(int d, int N, double c, std::size_t samples, std::uint64_t seed,
                                     unsigned threads, double z_limit) {
  if (samples < 2) throw ParameterError("covariance check needs at least two samples");
  ModelConfig config{WeightScheme::bernoulli(N, c, d), GammaSpec::identity({"m"}), seed};
  const std::size_t dim = config.dim();
  if (dim > 64) throw ResourceError("covariance check is limited to d^N <= 64");
  const double p = config.scheme.inclusion_probability();

  std::vector<ComplexMatrix> draws(samples);
  config.threads = 1;
  parallel_for(samples, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) draws[s] = assemble_S(config, s)[0];
  });

  std::size_t tested = 0, failures = 0;
  double max_z_real = 0.0, max_z_imag = 0.0;
  const auto n = static_cast<double>(samples);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      for (std::size_t k = 0; k < dim; ++k)
        for (std::size_t l = 0; l < dim; ++l) {
          double formula = 1.0;
          for (int r = 1; r <= N; ++r) {
            const int ir = digit(i, r, d), jr = digit(j, r, d), kr = digit(k, r, d), lr = digit(l, r, d);
            formula *= p * (ir == lr && jr == kr) / d + (1.0 - p) * (ir == jr && kr == lr);
          }
          if (formula == 0.0) continue;
          ++tested;
          double sum_re = 0.0, sum_im = 0.0;
          for (const auto& m : draws) {
            const Complex x = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                              m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
            sum_re += x.real();
            sum_im += x.imag();
          }
          const double mean_re = sum_re / n, mean_im = sum_im / n;
          double ss_re = 0.0, ss_im = 0.0;
          for (const auto& m : draws) {
            const Complex x = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) *
                              m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
            ss_re += (x.real() - mean_re) * (x.real() - mean_re);
            ss_im += (x.imag() - mean_im) * (x.imag() - mean_im);
          }
          const double se_re = std::sqrt(ss_re / (n - 1.0) / n), se_im = std::sqrt(ss_im / (n - 1.0) / n);
          auto z = [](double deviation, double se) {
            if (se > 0.0) return std::fabs(deviation) / se;
            return deviation == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
          };
          const double z_re = z(mean_re - formula, se_re), z_im = z(mean_im, se_im);
          max_z_real = std::max(max_z_real, z_re);
          max_z_imag = std::max(max_z_imag, z_im);
          failures += (z_re > z_limit) + (z_im > z_limit);
        }
  const std::string detail = std::to_string(tested) + " quadruples, " + std::to_string(samples) + " samples";
  return {
      {"covariance", "largest standard score, real part", max_z_real, 0.0, z_limit, max_z_real <= z_limit, detail},
      {"covariance", "largest standard score, imaginary part", max_z_imag, 0.0, z_limit, max_z_imag <= z_limit,
       detail},
      {"covariance", "entries beyond the limit", static_cast<double>(failures), 0.0, 0.0, failures == 0, detail},
  };
}

std::vector<Check> verify_variance(int d, int N, double c, std::size_t samples, std::uint64_t seed,
                                   unsigned threads, double slack) {
  if (samples < 2) throw ParameterError("variance check needs at least two samples");
  ModelConfig config{WeightScheme::bernoulli(N, c, d), GammaSpec::identity({"m"}), seed};
  config.dim();
  std::vector<double> values(samples);
  config.threads = 1;
  parallel_for(samples, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) values[s] = trace_word(assemble_S(config, s), {0, 0}).real();
  });
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(samples);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double variance = ss / static_cast<double>(samples - 1);
  const double bound = variance_bound(config.scheme, 1.0, 2).value;

  std::vector<Check> checks{{"variance", "variance of tr S^2 within slack x bound", variance, bound, slack,
                             variance <= slack * bound,
                             "N=" + std::to_string(N) + ", " + std::to_string(samples) + " samples"}};
  double previous = std::numeric_limits<double>::infinity();
  bool decreasing = true;
  std::string listing;
  for (int n : {25, 100, 400}) {
    const double b = variance_bound(WeightScheme::bernoulli(n, c, d), 1.0, 2).value;
    decreasing = decreasing && b < previous;
    previous = b;
    listing += (listing.empty() ? "" : " ") + std::string("N=") + std::to_string(n) + ":" + std::to_string(b);
  }
  checks.push_back({"variance", "bound decreasing along N=25,100,400", previous, 0.0, 0.0, decreasing, listing});
  return checks;
}

std::vector<Check> verify_upsilon(int d, int N, std::size_t trials, std::uint64_t seed, int max_lines) {
  if (d < 2 || N < 1 || max_lines < 1) throw ParameterError("upsilon needs d >= 2, N >= 1 and at least one line");
  std::size_t range_violations = 0, bound_cases = 0, bound_violations = 0, exclusive_cases = 0,
              exclusive_violations = 0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    RngStream rng(seed, derive_stream_id({0x0b51, trial}));
    const int m = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(max_lines));
    const PairPartition partition = random_partition(m, rng);
    std::vector<Subset> sets;
    for (int v = 0; v < m; ++v) sets.push_back(random_subset(N, rng));
    const auto problem = ContractionProblem::from_line_sets(d, N, partition, sets);
    const PowerOfD total = upsilon_product(problem);
    for (int r = 1; r <= N; ++r) {
      const PowerOfD factor = upsilon_r(problem, r);
      if (factor.exponent > 0) ++range_violations;
      int owner = -1, owners = 0;
      for (int v = 0; v < m; ++v)
        if (sets[static_cast<std::size_t>(v)].contains(r)) owner = v, ++owners;
      if (owners == 1 && line_straddles_cycles(problem, owner)) {
        ++exclusive_cases;
        if (factor.exponent != -2) ++exclusive_violations;
      }
    }
    for (int v = 0; v < m; ++v)
      if (line_straddles_cycles(problem, v)) {
        ++bound_cases;
        if (total.exponent > -2 * exclusive_size(problem, v)) ++bound_violations;
      }
  }
  const std::string n = std::to_string(trials) + " instances";
  return {
      {"upsilon", "two-cycle factor within (0,1]", static_cast<double>(range_violations), 0.0, 0.0,
       range_violations == 0, n},
      {"upsilon", "exclusive-coordinate bound for joining lines", static_cast<double>(bound_violations), 0.0, 0.0,
       bound_violations == 0, std::to_string(bound_cases) + " joining lines in " + n},
      {"upsilon", "coordinate owned by one joining line gives 1/d^2", static_cast<double>(exclusive_violations), 0.0,
       0.0, exclusive_violations == 0, std::to_string(exclusive_cases) + " coordinates in " + n},
  };
}

}  // namespace qgrm::cli
