#include "qgrm/pair_partition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qgrm/errors.hpp"

namespace qgrm {

namespace {

void check_guard(int m, int guard) {
  if (m < 1) throw ParameterError("pair partitions need m >= 1, got " + std::to_string(m));
  if (m > guard)
    throw ResourceError("pair-partition enumeration guard exceeded: m=" + std::to_string(m) +
                        " > " + std::to_string(guard));
}

// Depth-first walk over all matchings of {1..2m}: the smallest unmatched point
// is paired with every larger unmatched point in increasing order, which yields
// lexicographic canonical order. Crossings are counted incrementally: a new line
// {a,b} crosses an existing line {a',b'} (a' < a necessarily) iff a < b' < b.
// `accept(a, b)` may veto a branch (returns a multiplicative weight, 0 prunes).
class MatchingWalker {
 public:
  explicit MatchingWalker(int m) : points_(2 * m), used_(static_cast<std::size_t>(2 * m) + 1, false) {
    lines_.reserve(static_cast<std::size_t>(m));
  }

  template <class Weight, class Visit>
  void run(Weight&& weight, Visit&& visit) {
    descend(0, 1.0, weight, visit);
  }

 private:
  template <class Weight, class Visit>
  void descend(int crossings, double product, Weight& weight, Visit& visit) {
    int a = 1;
    while (a <= points_ && used_[static_cast<std::size_t>(a)]) ++a;
    if (a > points_) {
      visit(lines_, crossings, product);
      return;
    }
    used_[static_cast<std::size_t>(a)] = true;
    for (int b = a + 1; b <= points_; ++b) {
      if (used_[static_cast<std::size_t>(b)]) continue;
      const double w = weight(a, b);
      if (w == 0.0) continue;
      int added = 0;
      for (const Line& l : lines_)
        if (a < l.second && l.second < b) ++added;
      used_[static_cast<std::size_t>(b)] = true;
      lines_.push_back({a, b});
      descend(crossings + added, product * w, weight, visit);
      lines_.pop_back();
      used_[static_cast<std::size_t>(b)] = false;
    }
    used_[static_cast<std::size_t>(a)] = false;
  }

  int points_;
  std::vector<bool> used_;
  std::vector<Line> lines_;
};

}  // namespace

PairPartition PairPartition::from_pairs(const std::vector<std::pair<int, int>>& pairs) {
  const int m = static_cast<int>(pairs.size());
  if (m == 0) throw ParameterError("a pair partition needs at least one line");
  std::vector<bool> seen(static_cast<std::size_t>(2 * m) + 1, false);
  std::vector<Line> lines;
  lines.reserve(pairs.size());
  for (auto [x, y] : pairs) {
    if (x > y) std::swap(x, y);
    if (x < 1 || y > 2 * m || x == y)
      throw ParameterError("line {" + std::to_string(x) + "," + std::to_string(y) +
                           "} is not a pair within {1.." + std::to_string(2 * m) + "}");
    if (seen[static_cast<std::size_t>(x)] || seen[static_cast<std::size_t>(y)])
      throw ParameterError("pair partition uses an element twice");
    seen[static_cast<std::size_t>(x)] = seen[static_cast<std::size_t>(y)] = true;
    lines.push_back({x, y});
  }
  std::sort(lines.begin(), lines.end(), [](const Line& l, const Line& r) { return l.first < r.first; });
  return PairPartition(std::move(lines));
}

std::vector<PairPartition> enumerate_pair_partitions(int m, int guard) {
  check_guard(m, guard);
  std::vector<PairPartition> out;
  out.reserve(static_cast<std::size_t>(double_factorial_odd(m)));
  MatchingWalker walker(m);
  walker.run([](int, int) { return 1.0; },
             [&](const std::vector<Line>& lines, int, double) { out.push_back(PairPartition(lines)); });
  return out;
}

int crossing_number(const PairPartition& partition) {
  int count = 0;
  const auto lines = partition.lines();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      const Line& x = lines[i];
      const Line& y = lines[j];
      if ((x.first < y.first && y.first < x.second && x.second < y.second) ||
          (y.first < x.first && x.first < y.second && y.second < x.second))
        ++count;
    }
  }
  return count;
}

std::uint64_t double_factorial_odd(int m) {
  std::uint64_t value = 1;
  for (int k = 1; k <= m; ++k) value *= static_cast<std::uint64_t>(2 * k - 1);
  return value;
}

std::vector<std::uint64_t> crossing_polynomial(int m, int guard) {
  check_guard(m, guard);
  std::vector<std::uint64_t> coeffs(static_cast<std::size_t>(m * (m - 1) / 2) + 1, 0);
  MatchingWalker walker(m);
  walker.run([](int, int) { return 1.0; },
             [&](const std::vector<Line>&, int crossings, double) { ++coeffs[static_cast<std::size_t>(crossings)]; });
  return coeffs;
}

double q_gaussian_moment(const MomentSpec& spec, int guard) {
  const std::size_t n = spec.word.size();
  if (n == 0) throw ParameterError("moment word must have length >= 1");
  if (!(spec.q >= 0.0 && spec.q <= 1.0))
    throw ParameterError("q must lie in [0,1], got " + std::to_string(spec.q));
  for (std::size_t label : spec.word)
    if (label >= spec.gamma.size()) throw ParameterError("word label index outside Gamma");
  if (n % 2 == 1) return 0.0;
  const int m = static_cast<int>(n / 2);
  check_guard(m, guard);

  // Powers of q up to the maximal crossing count, so the sum is an exact
  // polynomial evaluation whenever q is dyadic.
  std::vector<double> q_pow(static_cast<std::size_t>(m * (m - 1) / 2) + 1, 1.0);
  for (std::size_t k = 1; k < q_pow.size(); ++k) q_pow[k] = q_pow[k - 1] * spec.q;

  double total = 0.0;
  MatchingWalker walker(m);
  walker.run(
      [&](int a, int b) {
        return spec.gamma(spec.word[static_cast<std::size_t>(a - 1)], spec.word[static_cast<std::size_t>(b - 1)]);
      },
      [&](const std::vector<Line>&, int crossings, double product) {
        total += q_pow[static_cast<std::size_t>(crossings)] * product;
      });
  return total;
}

double wick_sum(const Eigen::MatrixXd& covariance, int guard) {
  if (covariance.rows() != covariance.cols()) throw ParameterError("covariance must be square");
  if (covariance.rows() % 2 != 0 || covariance.rows() == 0)
    throw ParameterError("wick_sum needs an even, nonzero dimension");
  const int m = static_cast<int>(covariance.rows() / 2);
  check_guard(m, guard);
  double total = 0.0;
  MatchingWalker walker(m);
  walker.run([&](int a, int b) { return covariance(a - 1, b - 1); },
             [&](const std::vector<Line>&, int, double product) { total += product; });
  return total;
}

}  // namespace qgrm
