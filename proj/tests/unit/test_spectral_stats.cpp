#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "qgrm/errors.hpp"
#include "qgrm/pair_partition.hpp"
#include "qgrm/spectral_stats.hpp"

using namespace qgrm;

TEST(Eigenvalues, DiagonalAndIdentity) {
  ComplexMatrix m = ComplexMatrix::Zero(5, 5);
  for (int i = 0; i < 5; ++i) m(i, i) = 5 - i;
  EXPECT_EQ(eigenvalues(m), (std::vector<double>{1, 2, 3, 4, 5}));
  for (double x : eigenvalues(ComplexMatrix::Identity(4, 4))) EXPECT_DOUBLE_EQ(x, 1.0);
  ComplexMatrix bad = ComplexMatrix::Zero(2, 2);
  bad(0, 1) = 1.0;
  EXPECT_THROW(eigenvalues(bad), ParameterError);
}

TEST(Eigenvalues, PowerSumsMatchTraces) {
  const auto h = sample_standard_hermitian(50, StreamKey{2, 3});
  const auto ev = eigenvalues(h);
  EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end()));
  ComplexMatrix p = ComplexMatrix::Identity(50, 50);
  for (int k = 1; k <= 4; ++k) {
    p = p * h;
    double s = 0.0;
    for (double x : ev) s += std::pow(x, k);
    EXPECT_NEAR(s / 50, p.trace().real() / 50, 1e-10) << k;
  }
}

TEST(TraceWord, MatchesDirectProducts) {
  const auto f = sample_gamma_family(16, GammaSpec::identity({"a", "b"}), StreamKey{1, 1});
  const std::vector<std::vector<std::size_t>> words{{0}, {0, 0}, {0, 1, 0}, {0, 1, 1, 0}, {0, 1, 0, 1}, {1, 1, 1}};
  for (const auto& w : words) {
    ComplexMatrix p = ComplexMatrix::Identity(16, 16);
    for (auto mu : w) p = p * f[mu];
    const Complex expected = p.trace() / 16.0;
    const Complex got = trace_word(f, w, 2);
    EXPECT_NEAR(got.real(), expected.real(), 1e-13);
    EXPECT_NEAR(got.imag(), expected.imag(), 1e-13);
  }
}

TEST(TraceMoment, SecondMomentIsOne) {
  ModelConfig cfg{WeightScheme::bernoulli(6, 1.0, 2), GammaSpec::all_ones({"m"}), 3};
  cfg.threads = 2;
  const auto e2 = trace_moment_mc(cfg, {0, 0}, 200);
  EXPECT_NEAR(e2.mean, 1.0, 3 * e2.standard_error);
  const auto e1 = trace_moment_mc(cfg, {0}, 200);
  EXPECT_NEAR(e1.mean, 0.0, 3 * e1.standard_error);
  const auto e3 = trace_moment_mc(cfg, {0, 0, 0}, 200);
  EXPECT_NEAR(e3.mean, 0.0, 3 * e3.standard_error);
  EXPECT_LT(std::fabs(e2.mean_imag), 1e-9);
  EXPECT_THROW(trace_moment_mc(cfg, {0, 0}, 1), ParameterError);
}

TEST(TraceMoment, ThreadIndependent) {
  ModelConfig cfg{WeightScheme::bernoulli(5, 1.0, 2), GammaSpec::identity({"m"}), 3};
  const auto a = trace_moment_mc(cfg, {0, 0, 0, 0}, 20);
  cfg.threads = 3;
  const auto b = trace_moment_mc(cfg, {0, 0, 0, 0}, 20);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(NuQ, SemicircleAtZero) {
  for (double x : {-1.9, -1.0, 0.0, 0.5, 1.7})
    EXPECT_NEAR(nu_q_density(0.0, x), std::sqrt(4 - x * x) / (2 * M_PI), 1e-14);
  EXPECT_EQ(nu_q_density(0.5, 3.0), 0.0);
  EXPECT_THROW(nu_q_density(1.0, 0.0), DomainError);
  const auto m = nu_q_moments(0.0, 4);
  EXPECT_NEAR(m[4], 2.0, 1e-8);
}

TEST(NuQ, MomentsMatchPartitionOracle) {
  const GammaSpec ones = GammaSpec::all_ones({"m"});
  for (double q = 0.0; q < 0.95; q += 0.1) {
    const auto m = nu_q_moments(q, 10);
    EXPECT_NEAR(m[0], 1.0, 1e-6);
    for (int n = 1; n <= 10; n += 2) EXPECT_EQ(m[static_cast<std::size_t>(n)], 0.0);
    for (int n = 2; n <= 10; n += 2)
      EXPECT_NEAR(m[static_cast<std::size_t>(n)],
                  q_gaussian_moment({q, std::vector<std::size_t>(static_cast<std::size_t>(n), 0), ones}), 1e-6)
          << q << " " << n;
  }
}

TEST(NuQ, CurveIsPositiveWithIncreasingAbscissae) {
  const auto c = nu_q_curve(0.7, 101);
  EXPECT_EQ(c.x.size(), 101u);
  EXPECT_NEAR(c.x.back(), 2 / std::sqrt(0.3), 1e-12);
  for (std::size_t i = 1; i < c.x.size(); ++i) EXPECT_GT(c.x[i], c.x[i - 1]);
  for (double y : c.density) EXPECT_GE(y, 0.0);
  EXPECT_GT(c.n_max, 0);
}

TEST(Histogram, CountsEveryEigenvalue) {
  auto h = make_histogram(0.5, 10);
  add_to_histogram(h, {-100.0, 0.0, 0.1, 2.5, 100.0});
  std::uint64_t binned = std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0});
  EXPECT_EQ(binned + h.underflow + h.overflow, h.total);
  EXPECT_EQ(h.total, 5u);
  EXPECT_EQ(h.underflow, 1u);
  EXPECT_EQ(h.overflow, 1u);
  for (std::size_t i = 1; i < h.edges.size(); ++i) EXPECT_GT(h.edges[i], h.edges[i - 1]);
}

TEST(Spectrum, EmptySetSchemeGivesScalarMatrix) {
  const auto scheme = WeightScheme::custom(3, 2, {{Subset(3), 1.0}});
  ModelConfig cfg{scheme, GammaSpec::identity({"m"}), 2};
  const auto S = assemble_S(cfg, 0);
  const auto ev = eigenvalues(S[0]);
  for (double x : ev) EXPECT_NEAR(x, ev.front(), 1e-14);
  const auto r = empirical_spectrum(cfg, 4, 20, 4, 0.0);
  EXPECT_EQ(r.histogram.total, 32u);
  EXPECT_EQ(r.moments.size(), 4u);
}

TEST(VarianceBound, FirstOrderClosedForm) {
  const auto s = WeightScheme::bernoulli(30, 1.0, 3);
  const double p = 1 / std::sqrt(30.0);
  EXPECT_NEAR(variance_bound(s, 2.0, 1).value, 2 * 2.0 * std::pow(1 - p * (1 - 1.0 / 9), 30), 1e-12);
  double prev = INFINITY;
  for (int N : {25, 100, 400}) {
    const double b = variance_bound(WeightScheme::bernoulli(N, 1.0, 2), 1.0, 2).value;
    EXPECT_LT(b, prev);
    prev = b;
  }
}

TEST(Sweep, SecondMomentGapIsNoise) {
  SweepOptions o;
  o.q = 0.5;
  o.N_values = {2, 4};
  o.word = {0, 0};
  o.samples = 50;
  o.seed = 9;
  const auto rows = convergence_sweep(o);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) {
    EXPECT_DOUBLE_EQ(r.exact_target, 1.0);
    EXPECT_NEAR(r.estimate.mean, 1.0, 3 * r.estimate.standard_error + 1e-12);
  }
  EXPECT_TRUE(rows.front().selected);
  EXPECT_EQ(rows.front().trend, TrendStatus::kFirst);
}

TEST(Sweep, TwoLabelTarget) {
  SweepOptions o;
  o.q = 0.4;
  o.N_values = {3};
  o.word = {0, 1, 0, 1};
  o.gamma = GammaSpec::identity({"a", "b"});
  o.samples = 4;
  EXPECT_NEAR(convergence_sweep(o).front().exact_target, 0.4, 1e-15);
}
