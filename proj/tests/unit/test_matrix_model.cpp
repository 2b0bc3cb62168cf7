#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qgrm/errors.hpp"
#include "qgrm/matrix_model.hpp"

using namespace qgrm;

namespace {

// Dense reference: S^mu = sum_A sigma_A embed(A, R^{A,mu}) with each family
// drawn on its own stream.
std::vector<HermitianMatrix> dense_reference(const ModelConfig& cfg, std::uint64_t sample) {
  const auto dim = static_cast<Eigen::Index>(cfg.dim());
  std::vector<HermitianMatrix> out(cfg.gamma.size(), HermitianMatrix::Zero(dim, dim));
  for (std::uint64_t m = 0; m < (std::uint64_t{1} << cfg.N()); ++m) {
    const Subset A = Subset::from_mask(cfg.N(), m);
    const double w = sigma_squared(cfg.scheme, A);
    if (w <= 0.0) continue;
    const auto family =
        sample_gamma_family(EmbeddingMap(A, cfg.d()).small_dim(), cfg.gamma, subset_stream(cfg.seed, sample, A));
    for (std::size_t mu = 0; mu < out.size(); ++mu) out[mu] += std::sqrt(w) * embed(A, family[mu], cfg.d());
  }
  return out;
}

GammaSpec correlated_pair() {
  Eigen::MatrixXd g(2, 2);
  g << 1.0, 0.3, 0.3, 1.0;
  return GammaSpec::from_matrix({"a", "b"}, g);
}

}  // namespace

TEST(EmbeddingMap, ComposeInvertsSplit) {
  const EmbeddingMap map(Subset::from_members(4, {2, 4}), 3);
  EXPECT_EQ(map.dim(), 81u);
  EXPECT_EQ(map.small_dim(), 9u);
  EXPECT_EQ(map.rest_dim(), 9u);
  for (std::size_t I = 0; I < map.dim(); ++I) {
    EXPECT_EQ(map.compose(map.small_index(I), map.rest_index(I)), I);
    EXPECT_EQ(map.index(map.digits(I)), I);
  }
  // Digits at positions 2 and 4 pack ascending into the small index.
  EXPECT_EQ(map.small_index(map.index({0, 1, 0, 2})), 1u + 3u * 2u);
}

TEST(Embed, FirstCoordinateIsBlockDiagonal) {
  ComplexMatrix small(2, 2);
  small << 1.0, Complex(2.0, 1.0), Complex(2.0, -1.0), 3.0;
  const auto big = embed(Subset::from_members(2, {1}), small, 2);
  ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
  expected.block(0, 0, 2, 2) = small;
  expected.block(2, 2, 2, 2) = small;
  EXPECT_EQ(big, expected);
  EXPECT_EQ(embed(Subset(2), ComplexMatrix::Constant(1, 1, 5.0), 2), ComplexMatrix(ComplexMatrix::Identity(4, 4) * 5.0));
}

TEST(StandardHermitian, HermitianWithUnitTraceSquare) {
  const std::size_t dim = 64;
  double total = 0.0;
  const int samples = 200;
  for (int s = 0; s < samples; ++s) {
    const auto h = sample_standard_hermitian(dim, StreamKey{3, static_cast<std::uint64_t>(s)});
    EXPECT_EQ(hermitian_defect(h), 0.0);
    for (std::size_t i = 0; i < dim; ++i) EXPECT_EQ(h(i, i).imag(), 0.0);
    total += (h * h).trace().real() / static_cast<double>(dim);
  }
  // E tr H^2 / dim = 1 with variance ~ 1/dim^2 per sample.
  EXPECT_NEAR(total / samples, 1.0, 4.0 * std::sqrt(2.0 / (dim * dim * samples)) + 1e-3);
}

TEST(StandardHermitian, ThreadIndependent) {
  const StreamKey key{5, 6};
  EXPECT_EQ(sample_standard_hermitian(100, key, 1), sample_standard_hermitian(100, key, 4));
}

TEST(GammaFamily, CrossCovarianceFollowsGamma) {
  const GammaSpec g = GammaSpec::brownian_min({1.0, 2.0});
  const int samples = 20000;
  double s00 = 0, s01 = 0, s11 = 0;
  for (int s = 0; s < samples; ++s) {
    const auto f = sample_gamma_family(2, g, StreamKey{1, static_cast<std::uint64_t>(s)});
    const double a = f[0](0, 0).real(), b = f[1](0, 0).real();
    s00 += a * a, s01 += a * b, s11 += b * b;
  }
  // Diagonal entries have variance Gamma / dim.
  EXPECT_NEAR(s00 / samples, 0.5, 4 * 0.5 * std::sqrt(2.0 / samples));
  EXPECT_NEAR(s01 / samples, 0.5, 4 * std::sqrt(2.0 / samples));
  EXPECT_NEAR(s11 / samples, 1.0, 4 * std::sqrt(2.0 / samples));
}

TEST(AssembleS, MatchesDenseReference) {
  for (int d : {2, 3})
    for (int N : {1, 3, 5}) {
      ModelConfig cfg{WeightScheme::bernoulli(N, 0.8, d), correlated_pair(), 11};
      cfg.threads = 3;
      const auto S = assemble_S(cfg, 2);
      const auto ref = dense_reference(cfg, 2);
      ASSERT_EQ(S.size(), 2u);
      for (std::size_t mu = 0; mu < 2; ++mu) {
        EXPECT_LT((S[mu] - ref[mu]).cwiseAbs().maxCoeff(), 1e-12) << d << " " << N;
        EXPECT_EQ(hermitian_defect(S[mu]), 0.0);
      }
    }
}

TEST(AssembleS, CustomSchemeMatchesDenseReference) {
  const auto scheme = WeightScheme::custom(
      4, 2, {{Subset::from_mask(4, 0), 0.1}, {Subset::from_mask(4, 0b1010), 0.6}, {Subset::from_mask(4, 0b1111), 0.3}});
  ModelConfig cfg{scheme, GammaSpec::identity({"m"}), 4};
  const auto S = assemble_S(cfg, 0);
  EXPECT_LT((S[0] - dense_reference(cfg, 0)[0]).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(AssembleS, ThreadIndependentAndDeterministic) {
  ModelConfig cfg{WeightScheme::bernoulli(7, 1.0, 2), correlated_pair(), 21};
  const auto one = assemble_S(cfg, 5);
  cfg.threads = 4;
  const auto four = assemble_S(cfg, 5);
  EXPECT_EQ(one[0], four[0]);
  EXPECT_EQ(one[1], four[1]);
  EXPECT_NE(one[0], assemble_S(cfg, 6)[0]);
}

TEST(AssembleS, Caps) {
  ModelConfig cfg{WeightScheme::bernoulli(9, 1.0, 2), GammaSpec::identity({"m"}), 1};
  cfg.dim_cap = 256;
  EXPECT_THROW(assemble_S(cfg, 0), ResourceError);
  cfg.dim_cap = 1024;
  cfg.subset_cap = 8;
  EXPECT_THROW(assemble_S(cfg, 0), ResourceError);
}

TEST(Truncation, FullPlanReproducesExactAssembly) {
  ModelConfig cfg{WeightScheme::bernoulli(6, 1.0, 2), GammaSpec::identity({"m"}), 8};
  const auto exact = assemble_S(cfg, 3);
  const auto full = assemble_S_truncated(cfg, 3, 0.0);
  EXPECT_EQ(full.retained_subsets, 64u);
  EXPECT_EQ(full.matrices[0], exact[0]);
}

TEST(Truncation, PlanKeepsRequestedMass) {
  const auto scheme = WeightScheme::bernoulli(12, 1.0, 2);
  for (double tol : {1e-2, 1e-4, 1e-8}) {
    const auto plan = plan_truncation(scheme, tol);
    EXPECT_GE(plan.retained_mass, 1.0 - tol - 1e-12);
    EXPECT_NEAR(plan.retained_mass + plan.dropped_mass, 1.0, 1e-12);
    EXPECT_EQ(plan.retained.size(), plan.weights.size());
  }
  EXPECT_LT(plan_truncation(scheme, 1e-2).retained.size(), 4096u);
}

TEST(MatrixCsv, WritesRows) {
  ComplexMatrix m(1, 2);
  m << Complex(1.0, -2.0), Complex(0.5, 0.0);
  std::ostringstream out;
  write_matrix_csv(out, m);
  EXPECT_NE(out.str().find("1-2i"), std::string::npos);
}
