#include "qgrm/tensor_kernels.hpp"

#include <cmath>
#include <numeric>

#include "qgrm/errors.hpp"

namespace qgrm {

namespace {

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)), components_(n) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int x) {
    while (parent_[static_cast<std::size_t>(x)] != x) {
      auto& p = parent_[static_cast<std::size_t>(x)];
      p = parent_[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    parent_[static_cast<std::size_t>(a)] = b;
    --components_;
  }
  int components() const { return components_; }

 private:
  std::vector<int> parent_;
  int components_;
};

// Components of the identification graph on 0-based points for coordinate r.
template <class Successor>
std::pair<int, int> identification_graph(const ContractionProblem& problem, int r, Successor succ) {
  const int points = problem.partition.points_count();
  UnionFind uf(points);
  int inside = 0;
  for (int v = 0; v < problem.partition.lines_count(); ++v) {
    const Line& line = problem.partition.line(v);
    const int c = line.first - 1;
    const int d = line.second - 1;
    if (problem.line_set(v).contains(r)) {
      ++inside;
      uf.unite(c, succ(d));
      uf.unite(succ(c), d);
    } else {
      uf.unite(c, succ(c));
      uf.unite(d, succ(d));
    }
  }
  return {uf.components(), inside};
}

void check_coordinate(const ContractionProblem& problem, int r) {
  if (r < 1 || r > problem.N) throw ParameterError("coordinate r outside 1..N");
}

}  // namespace

double PowerOfD::value() const { return std::pow(static_cast<double>(base), exponent); }

double ExactContraction::value() const {
  return static_cast<double>(count) * std::pow(static_cast<double>(base), scale_exponent);
}

bool ExactContraction::equals(const PowerOfD& p) const {
  if (p.base != base) return false;
  // count * d^scale == d^e  <=>  count == d^(e - scale)
  const int k = p.exponent - scale_exponent;
  if (k < 0) return false;
  std::uint64_t target = 1;
  for (int i = 0; i < k; ++i) {
    if (target > count) return false;
    target *= static_cast<std::uint64_t>(base);
  }
  return target == count;
}

ContractionProblem ContractionProblem::from_line_sets(int d, int N, const PairPartition& partition,
                                                      const std::vector<Subset>& line_sets) {
  if (static_cast<int>(line_sets.size()) != partition.lines_count())
    throw ParameterError("need one set per line");
  ContractionProblem problem;
  problem.d = d;
  problem.N = N;
  problem.partition = partition;
  problem.sets.assign(static_cast<std::size_t>(partition.points_count()), Subset(N));
  for (int v = 0; v < partition.lines_count(); ++v) {
    const Line& line = partition.line(v);
    problem.sets[static_cast<std::size_t>(line.first - 1)] = line_sets[static_cast<std::size_t>(v)];
    problem.sets[static_cast<std::size_t>(line.second - 1)] = line_sets[static_cast<std::size_t>(v)];
  }
  problem.validate();
  return problem;
}

const Subset& ContractionProblem::line_set(int v) const {
  return sets[static_cast<std::size_t>(partition.line(v).first - 1)];
}

void ContractionProblem::validate() const {
  if (d < 2) throw ParameterError("d must be >= 2");
  if (N < 1) throw ParameterError("N must be >= 1");
  if (partition.lines_count() < 1) throw ParameterError("contraction needs at least one line");
  if (static_cast<int>(sets.size()) != partition.points_count())
    throw ParameterError("need one set per point of the partition");
  for (const auto& s : sets)
    if (s.ambient() != N) throw ParameterError("set ambient size differs from N");
}

PowerOfD theta_r(const ContractionProblem& problem, int r) {
  check_coordinate(problem, r);
  const int points = problem.partition.points_count();
  const auto [components, inside] =
      identification_graph(problem, r, [points](int k) { return (k + 1) % points; });
  return {problem.d, components - 1 - inside};
}

PowerOfD theta_product(const ContractionProblem& problem) {
  problem.validate();
  PowerOfD total{problem.d, 0};
  for (int r = 1; r <= problem.N; ++r) total.exponent += theta_r(problem, r).exponent;
  return total;
}

PowerOfD crossing_product(const ContractionProblem& problem) {
  problem.validate();
  PowerOfD total{problem.d, 0};
  const int m = problem.partition.lines_count();
  for (int i = 0; i < m; ++i) {
    const Line& a = problem.partition.line(i);
    for (int j = i + 1; j < m; ++j) {
      const Line& b = problem.partition.line(j);
      const bool crossing = (a.first < b.first && b.first < a.second && a.second < b.second) ||
                            (b.first < a.first && a.first < b.second && b.second < a.second);
      if (crossing) total.exponent -= 2 * problem.line_set(i).intersection_size(problem.line_set(j));
    }
  }
  return total;
}

bool has_triple_intersection(const ContractionProblem& problem) {
  const int m = problem.partition.lines_count();
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) {
      const Subset ij = problem.line_set(i) & problem.line_set(j);
      if (ij.empty()) continue;
      for (int k = j + 1; k < m; ++k)
        if (ij.intersection_size(problem.line_set(k)) > 0) return true;
    }
  return false;
}

ExactContraction brute_force_contraction(const ContractionProblem& problem, std::uint64_t guard) {
  problem.validate();
  const int points = problem.partition.points_count();
  const int m = problem.partition.lines_count();
  const int N = problem.N;
  const auto d = static_cast<std::uint64_t>(problem.d);

  const int digits = points * N;
  std::uint64_t tuples = 1;
  for (int i = 0; i < digits; ++i) {
    if (tuples > guard / d) throw ResourceError("brute-force contraction exceeds the d^(2mN) guard");
    tuples *= d;
  }

  // digit[k * N + (r-1)] is coordinate r of the multi-index i^{k+1}
  std::vector<std::uint64_t> digit(static_cast<std::size_t>(digits), 0);
  auto at = [&](int k, int r) { return digit[static_cast<std::size_t>(k * N + r)]; };

  std::vector<std::vector<char>> member(static_cast<std::size_t>(m), std::vector<char>(static_cast<std::size_t>(N)));
  int scale = -N;
  for (int v = 0; v < m; ++v) {
    const Subset& s = problem.line_set(v);
    scale -= s.size();
    for (int r = 0; r < N; ++r) member[static_cast<std::size_t>(v)][static_cast<std::size_t>(r)] = s.contains(r + 1);
  }

  std::uint64_t count = 0;
  for (std::uint64_t t = 0; t < tuples; ++t) {
    bool alive = true;
    for (int v = 0; v < m && alive; ++v) {
      // E[R_{i^c i^{c+1}} R_{i^d i^{d+1}}] factorizes over coordinates r:
      // in A: [i^c_r = i^{d+1}_r][i^{c+1}_r = i^d_r] / d, else [i^c_r = i^{c+1}_r][i^d_r = i^{d+1}_r].
      const Line& line = problem.partition.line(v);
      const int c = line.first - 1;
      const int e = line.second - 1;
      const int c1 = (c + 1) % points;
      const int e1 = (e + 1) % points;
      for (int r = 0; r < N; ++r) {
        if (member[static_cast<std::size_t>(v)][static_cast<std::size_t>(r)]) {
          if (at(c, r) != at(e1, r) || at(c1, r) != at(e, r)) {
            alive = false;
            break;
          }
        } else if (at(c, r) != at(c1, r) || at(e, r) != at(e1, r)) {
          alive = false;
          break;
        }
      }
    }
    if (alive) ++count;
    for (auto& x : digit) {
      if (++x < d) break;
      x = 0;
    }
  }
  return {count, problem.d, scale};
}

PowerOfD upsilon_r(const ContractionProblem& problem, int r) {
  check_coordinate(problem, r);
  const int points = problem.partition.points_count();
  const int half = points / 2;
  // 0-based: k -> k+1 except half-1 -> 0 and points-1 -> half
  auto succ = [half, points](int k) {
    if (k == half - 1) return 0;
    if (k == points - 1) return half;
    return k + 1;
  };
  const auto [components, inside] = identification_graph(problem, r, succ);
  return {problem.d, components - 2 - inside};
}

PowerOfD upsilon_product(const ContractionProblem& problem) {
  problem.validate();
  if (problem.partition.points_count() % 2 != 0 || problem.partition.lines_count() < 1)
    throw ParameterError("two-cycle contraction needs an even point count");
  PowerOfD total{problem.d, 0};
  for (int r = 1; r <= problem.N; ++r) total.exponent += upsilon_r(problem, r).exponent;
  return total;
}

bool line_straddles_cycles(const ContractionProblem& problem, int v) {
  const int half = problem.partition.lines_count();
  const Line& line = problem.partition.line(v);
  return (line.first <= half) != (line.second <= half);
}

int exclusive_size(const ContractionProblem& problem, int v) {
  Subset others(problem.N);
  for (int j = 0; j < problem.partition.lines_count(); ++j)
    if (j != v) others = others | problem.line_set(j);
  return problem.line_set(v).minus(others).size();
}

}  // namespace qgrm
