#include "qgrm/gamma.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qgrm/errors.hpp"

namespace qgrm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r\"");
    const auto e = field.find_last_not_of(" \t\r\"");
    fields.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
  }
  return fields;
}

}  // namespace

GammaSpec GammaSpec::from_matrix(std::vector<std::string> labels, Eigen::MatrixXd matrix) {
  const auto k = static_cast<Eigen::Index>(labels.size());
  if (k == 0) throw ParameterError("Gamma needs at least one label");
  if (matrix.rows() != k || matrix.cols() != k)
    throw ParameterError("Gamma matrix size does not match its label count");
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j)
      if (labels[i] == labels[j]) throw ParameterError("duplicate Gamma label '" + labels[i] + "'");
  if (!matrix.allFinite()) throw ParameterError("Gamma has non-finite entries");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ParameterError("Gamma must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kPsdTolerance)
    throw ParameterError("Gamma is not positive semidefinite (smallest eigenvalue " +
                         std::to_string(solver.eigenvalues().minCoeff()) + ")");
  return GammaSpec(std::move(labels), std::move(matrix));
}

GammaSpec GammaSpec::identity(std::vector<std::string> labels) {
  const auto k = static_cast<Eigen::Index>(labels.size());
  return from_matrix(std::move(labels), Eigen::MatrixXd::Identity(k, k));
}

GammaSpec GammaSpec::all_ones(std::vector<std::string> labels) {
  const auto k = static_cast<Eigen::Index>(labels.size());
  return from_matrix(std::move(labels), Eigen::MatrixXd::Ones(k, k));
}

GammaSpec GammaSpec::brownian_min(const std::vector<double>& times) {
  if (times.empty()) throw ParameterError("Brownian Gamma needs at least one time");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw ParameterError("Brownian times must be positive");
    if (i > 0 && !(times[i] > times[i - 1])) throw ParameterError("Brownian times must be strictly increasing");
  }
  const auto k = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd g(k, k);
  std::vector<std::string> labels;
  for (Eigen::Index i = 0; i < k; ++i) {
    std::ostringstream name;
    name << times[static_cast<std::size_t>(i)];
    labels.push_back(name.str());
    for (Eigen::Index j = 0; j < k; ++j)
      g(i, j) = std::min(times[static_cast<std::size_t>(i)], times[static_cast<std::size_t>(j)]);
  }
  return from_matrix(std::move(labels), std::move(g));
}

GammaSpec GammaSpec::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParameterError("Gamma CSV is empty");
  std::vector<std::string> labels = split_csv_line(line);
  const auto k = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd g(k, k);
  Eigen::Index row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv_line(line);
    if (row >= k || static_cast<Eigen::Index>(fields.size()) != k)
      throw ParameterError("Gamma CSV must be a square table matching the header");
    for (Eigen::Index j = 0; j < k; ++j) {
      try {
        std::size_t used = 0;
        g(row, j) = std::stod(fields[static_cast<std::size_t>(j)], &used);
        if (used != fields[static_cast<std::size_t>(j)].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ParameterError("Gamma CSV has a non-numeric entry '" + fields[static_cast<std::size_t>(j)] + "'");
      }
    }
    ++row;
  }
  if (row != k) throw ParameterError("Gamma CSV has " + std::to_string(row) + " rows, expected " + std::to_string(k));
  return from_matrix(std::move(labels), std::move(g));
}

GammaSpec GammaSpec::load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open Gamma file '" + path + "'");
  return read_csv(in);
}

std::size_t GammaSpec::index_of(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ParameterError("unknown Gamma label '" + label + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

Eigen::MatrixXd GammaSpec::mixing_factor() const {
  const Eigen::Index k = matrix_.rows();
  Eigen::MatrixXd work = matrix_;
  Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(k, k);
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) perm[static_cast<std::size_t>(i)] = i;

  Eigen::Index rank = 0;
  for (; rank < k; ++rank) {
    // Largest remaining diagonal entry becomes the pivot.
    Eigen::Index best = rank;
    for (Eigen::Index i = rank + 1; i < k; ++i)
      if (work(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(i)]) >
          work(perm[static_cast<std::size_t>(best)], perm[static_cast<std::size_t>(best)]))
        best = i;
    std::swap(perm[static_cast<std::size_t>(rank)], perm[static_cast<std::size_t>(best)]);
    const Eigen::Index p = perm[static_cast<std::size_t>(rank)];
    const double pivot = work(p, p);
    if (pivot <= kPsdTolerance) break;
    const double root = std::sqrt(pivot);
    for (Eigen::Index i = rank; i < k; ++i) {
      const Eigen::Index r = perm[static_cast<std::size_t>(i)];
      factor(r, rank) = work(r, p) / root;
    }
    for (Eigen::Index i = rank + 1; i < k; ++i) {
      const Eigen::Index r = perm[static_cast<std::size_t>(i)];
      for (Eigen::Index j = rank + 1; j < k; ++j) {
        const Eigen::Index s = perm[static_cast<std::size_t>(j)];
        work(r, s) -= factor(r, rank) * factor(s, rank);
      }
    }
  }
  return factor.leftCols(rank);
}

}  // namespace qgrm
