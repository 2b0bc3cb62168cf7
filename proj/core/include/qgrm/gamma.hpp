#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <istream>
#include <string>
#include <vector>

namespace qgrm {

// A real positive-semidefinite covariance Gamma over a finite label set.
class GammaSpec {
 public:
  static constexpr double kPsdTolerance = 1e-9;

  // Validates symmetry and positive semidefiniteness (smallest eigenvalue >= -1e-9).
  static GammaSpec from_matrix(std::vector<std::string> labels, Eigen::MatrixXd matrix);
  // Gamma_{mu nu} = delta_{mu nu}.
  static GammaSpec identity(std::vector<std::string> labels);
  // Gamma == 1 on every pair (all labels perfectly correlated).
  static GammaSpec all_ones(std::vector<std::string> labels);
  // Gamma_{ts} = min(t, s); times strictly increasing and positive.
  static GammaSpec brownian_min(const std::vector<double>& times);
  // Symmetric CSV with a header row of labels.
  static GammaSpec read_csv(std::istream& in);
  static GammaSpec load_csv(const std::string& path);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double operator()(std::size_t mu, std::size_t nu) const { return matrix_(mu, nu); }
  double max_abs() const { return matrix_.cwiseAbs().maxCoeff(); }

  // Index of a label; throws ParameterError if unknown.
  std::size_t index_of(const std::string& label) const;

  // Pivoted Cholesky: returns L (size x rank) with L L^T = Gamma to within the
  // PSD tolerance. Rank-deficient Gamma is allowed.
  Eigen::MatrixXd mixing_factor() const;

 private:
  GammaSpec(std::vector<std::string> labels, Eigen::MatrixXd matrix)
      : labels_(std::move(labels)), matrix_(std::move(matrix)) {}

  std::vector<std::string> labels_;
  Eigen::MatrixXd matrix_;
};

}  // namespace qgrm
