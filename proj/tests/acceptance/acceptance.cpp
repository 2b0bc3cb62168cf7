// Acceptance suite: one [PASS]/[FAIL] line per criterion, exit 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli.hpp"
#include "qgrm/pair_partition.hpp"
#include "qgrm/pauli_demo.hpp"
#include "qgrm/spectral_stats.hpp"
#include "qgrm/subset_weights.hpp"
#include "verify.hpp"

using namespace qgrm;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Verdict {
  bool pass = false;
  std::string detail;
};

unsigned hardware_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double moment(double q, int n) {
  static const GammaSpec ones = GammaSpec::all_ones({"m"});
  return q_gaussian_moment({q, std::vector<std::size_t>(static_cast<std::size_t>(n), 0), ones});
}

Verdict exact_moments() {
  const auto start = std::chrono::steady_clock::now();
  // Dyadic grid: every polynomial value below is exact in binary floating point.
  const std::vector<double> grid{0.0, 0.0625, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0};
  int mismatches = 0;
  for (double q : grid) {
    mismatches += moment(q, 2) != 1.0;
    mismatches += moment(q, 4) != 2.0 + q;
    mismatches += moment(q, 6) != 5.0 + 6.0 * q + 3.0 * q * q + q * q * q;
  }
  const std::vector<double> catalan{1, 2, 5, 14, 42}, odd_factorial{1, 3, 15, 105, 945};
  for (int m = 1; m <= 5; ++m) {
    mismatches += moment(0.0, 2 * m) != catalan[static_cast<std::size_t>(m - 1)];
    mismatches += moment(1.0, 2 * m) != odd_factorial[static_cast<std::size_t>(m - 1)];
    const auto coeffs = crossing_polynomial(m);
    std::uint64_t total = 0;
    for (auto c : coeffs) total += c;
    mismatches += coeffs[0] != static_cast<std::uint64_t>(catalan[static_cast<std::size_t>(m - 1)]);
    mismatches += total != static_cast<std::uint64_t>(odd_factorial[static_cast<std::size_t>(m - 1)]);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {mismatches == 0 && seconds < 1.0,
          std::to_string(mismatches) + " mismatches over 10 q values and Catalan/double-factorial rows, " +
              fmt("%.3f s", seconds)};
}

Verdict contraction_exhaustive() {
  const auto checks = cli::verify_contraction_exhaustive(2, 3, 2);
  std::string detail;
  for (const auto& c : checks) detail += (detail.empty() ? "" : "; ") + c.name + " " + fmt("%g", c.value) + " (" + c.detail + ")";
  return {cli::all_pass(checks), detail};
}

Verdict density_consistency() {
  double worst = 0.0, worst_mass = 0.0, worst_second = 0.0;
  for (int k = 1; k <= 9; ++k) {
    const double q = 0.1 * k;
    const auto m = nu_q_moments(q, 10);
    worst_mass = std::max(worst_mass, std::fabs(m[0] - 1.0));
    worst_second = std::max(worst_second, std::fabs(m[2] - 1.0));
    for (int n = 1; n <= 10; ++n) worst = std::max(worst, std::fabs(m[static_cast<std::size_t>(n)] - moment(q, n)));
  }
  return {worst <= 1e-6 && worst_mass <= 1e-6 && worst_second <= 1e-6,
          "max moment error " + fmt("%.2e", worst) + ", mass error " + fmt("%.2e", worst_mass) +
              ", second moment error " + fmt("%.2e", worst_second)};
}

Verdict entry_covariance() {
  const auto checks = cli::verify_covariance(2, 3, 1.0, 20000, kSeed, hardware_threads());
  return {cli::all_pass(checks), "max |z| real " + fmt("%.2f", checks[0].value) + ", imaginary " +
                                     fmt("%.2f", checks[1].value) + ", " + checks[0].detail};
}

// Layout rows as space-separated cells: "pq" is the small-matrix entry (p, q), "." is zero.
struct Layout {
  int N;
  std::vector<int> subset;
  std::vector<std::string> rows;
};

std::vector<Layout> displayed_layouts() {
  return {
      {2, {1}, {"00 01 . .", "10 11 . .", ". . 00 01", ". . 10 11"}},
      {2, {2}, {"00 . 01 .", ". 00 . 01", "10 . 11 .", ". 10 . 11"}},
      {3,
       {1},
       {"00 01 . . . . . .", "10 11 . . . . . .", ". . 00 01 . . . .", ". . 10 11 . . . .", ". . . . 00 01 . .",
        ". . . . 10 11 . .", ". . . . . . 00 01", ". . . . . . 10 11"}},
      {3,
       {2},
       {"00 . 01 . . . . .", ". 00 . 01 . . . .", "10 . 11 . . . . .", ". 10 . 11 . . . .", ". . . . 00 . 01 .",
        ". . . . . 00 . 01", ". . . . 10 . 11 .", ". . . . . 10 . 11"}},
      {3,
       {3},
       {"00 . . . 01 . . .", ". 00 . . . 01 . .", ". . 00 . . . 01 .", ". . . 00 . . . 01", "10 . . . 11 . . .",
        ". 10 . . . 11 . .", ". . 10 . . . 11 .", ". . . 10 . . . 11"}},
      {3,
       {1, 2},
       {"00 01 02 03 . . . .", "10 11 12 13 . . . .", "20 21 22 23 . . . .", "30 31 32 33 . . . .",
        ". . . . 00 01 02 03", ". . . . 10 11 12 13", ". . . . 20 21 22 23", ". . . . 30 31 32 33"}},
      {3,
       {1, 3},
       {"00 01 . . 02 03 . .", "10 11 . . 12 13 . .", ". . 00 01 . . 02 03", ". . 10 11 . . 12 13",
        "20 21 . . 22 23 . .", "30 31 . . 32 33 . .", ". . 20 21 . . 22 23", ". . 30 31 . . 32 33"}},
      {3,
       {2, 3},
       {"00 . 01 . 02 . 03 .", ". 00 . 01 . 02 . 03", "10 . 11 . 12 . 13 .", ". 10 . 11 . 12 . 13",
        "20 . 21 . 22 . 23 .", ". 20 . 21 . 22 . 23", "30 . 31 . 32 . 33 .", ". 30 . 31 . 32 . 33"}},
  };
}

Verdict embedding_layouts() {
  int mismatched_cells = 0, layouts = 0;
  for (const auto& layout : displayed_layouts()) {
    ++layouts;
    const Subset A = Subset::from_members(layout.N, layout.subset);
    const auto k = static_cast<Eigen::Index>(std::size_t{1} << layout.subset.size());
    // Distinct markers reveal which small entry lands where.
    ComplexMatrix markers(k, k);
    for (Eigen::Index p = 0; p < k; ++p)
      for (Eigen::Index q = 0; q < k; ++q) markers(p, q) = Complex(static_cast<double>(10 * p + q + 1), 0.0);
    const ComplexMatrix symbolic = embed(A, markers, 2);
    // The model's own draw of R^A: a scheme putting all weight on A gives S = R^A.
    ModelConfig config{WeightScheme::custom(layout.N, 2, {{A, 1.0}}), GammaSpec::identity({"m"}), kSeed};
    const ComplexMatrix drawn = assemble_S(config, 0)[0];
    std::map<std::string, Complex> seen;
    for (std::size_t i = 0; i < layout.rows.size(); ++i) {
      std::istringstream row(layout.rows[i]);
      std::string cell;
      for (Eigen::Index j = 0; row >> cell; ++j) {
        const auto r = static_cast<Eigen::Index>(i);
        const Complex expected =
            cell == "." ? Complex(0.0, 0.0) : Complex(static_cast<double>(10 * (cell[0] - '0') + (cell[1] - '0') + 1), 0.0);
        bool ok = symbolic(r, j) == expected;
        if (cell == ".") {
          ok = ok && drawn(r, j) == Complex(0.0, 0.0);
        } else {
          auto [it, fresh] = seen.emplace(cell, drawn(r, j));
          ok = ok && drawn(r, j) != Complex(0.0, 0.0) && (fresh || it->second == drawn(r, j));
        }
        mismatched_cells += !ok;
      }
    }
  }
  return {mismatched_cells == 0,
          std::to_string(layouts) + " layouts, " + std::to_string(mismatched_cells) + " mismatched cells"};
}

Verdict convergence_trend() {
  SweepOptions o;
  o.d = 2;
  o.q = 0.5;
  o.N_values = {4, 8, 12};
  o.word = {0, 0, 0, 0};
  o.samples = 100;
  o.seed = kSeed;
  o.threads = hardware_threads();
  const auto rows = convergence_sweep(o);
  std::string detail;
  bool decreasing = true, flagged = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    detail += "N=" + std::to_string(r.N) + " mean " + fmt("%.4f", r.estimate.mean) + " se " +
              fmt("%.4f", r.estimate.standard_error) + " gap " + fmt("%.4f", r.gap) + " (" + to_string(r.trend) + "); ";
    if (i > 0 && r.gap >= rows[i - 1].gap) {
      const double band = r.estimate.standard_error + rows[i - 1].estimate.standard_error;
      if (r.gap - rows[i - 1].gap <= band)
        flagged = true;
      else
        decreasing = false;
    }
  }
  const double first = rows.front().gap + 3 * rows.front().estimate.standard_error;
  bool sane = true;
  for (const auto& r : rows) sane = sane && r.gap <= 5 * first;
  const double last_gap = rows.back().gap;
  detail += "gap at N=12 " + fmt("%.4f", last_gap) + " (limit 0.25)";
  if (flagged) detail += "; non-decrease within 1 SE flagged";
  return {decreasing && sane && sweep_trend_ok(rows) && last_gap < 0.25, detail};
}

Verdict variance_bound_check() {
  const auto checks = cli::verify_variance(2, 8, 1.0, 1000, kSeed, hardware_threads());
  return {cli::all_pass(checks), "Var tr S^2 = " + fmt("%.5g", checks[0].value) + " vs 1.2 x bound " +
                                     fmt("%.5g", 1.2 * checks[0].reference) + "; bounds " + checks[1].detail};
}

Verdict poisson_coincidences() {
  const int N = 2500;
  const auto scheme = WeightScheme::bernoulli(N, 1.0, 2);
  const auto stats = assumption_diagnostics(scheme, 3, 100000, kSeed, hardware_threads());
  const double p = scheme.inclusion_probability();
  const double tv = stats.marginals.front().total_variation;
  const double triple_limit = 1.5 * N * p * p * p;
  return {tv < 0.02 && stats.triple_overlap_frequency < triple_limit,
          "TV " + fmt("%.4f", tv) + " (limit 0.02), triple overlap " + fmt("%.4f", stats.triple_overlap_frequency) +
              " (limit " + fmt("%.4f", triple_limit) + ")"};
}

Verdict pauli_demo() {
  const int N = 10;
  const double q = 0.5;
  const double r = pauli_r(q, N);
  const auto a = anticommutation_stats(N, r, 100000, kSeed, hardware_threads());
  const double z = std::fabs(a.position_frequency - a.expected_position) / a.position_standard_error;
  const double q_approx = std::pow(1 - 12 * r * r, N);
  const double rel = std::fabs(q_approx - q) / q;
  PauliDemoConfig c;
  c.N = N;
  c.q_target = q;
  c.terms = 200;
  // 200 samples put the standard error of the fourth moment near 0.05.
  c.samples = 200;
  c.max_order = 4;
  c.seed = kSeed;
  c.threads = hardware_threads();
  const auto demo = clt_sum_spectrum(c);
  const double m4 = demo.moments[3].mean;
  return {z <= 3.0 && rel < 0.05 && std::fabs(m4 - 2.5) < 0.15,
          "position frequency " + fmt("%.5f", a.position_frequency) + " vs " + fmt("%.5f", a.expected_position) +
              " (" + fmt("%.2f", z) + " SE); q approximation off by " + fmt("%.2f%%", 100 * rel) +
              "; fourth moment " + fmt("%.4f", m4) + " (se " + fmt("%.4f", demo.moments[3].standard_error) + ") vs 2.5"};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict reproducibility() {
  const auto dir = std::filesystem::temp_directory_path() / "qgrm_acceptance";
  std::filesystem::create_directories(dir);
  const std::vector<std::vector<std::string>> runs{
      {"moments", "--q", "0.5", "--order", "8"},
      {"density", "--q", "0.5", "--points", "101"},
      {"simulate", "--d", "2", "--N", "8", "--q", "0.5", "--word", "mm", "--samples", "100", "--seed", "7"},
      {"spectrum", "--N", "7", "--c", "1", "--samples", "6", "--bins", "30"},
      {"sweep", "--q", "0.5", "--Ns", "3,5,7", "--samples", "10"},
      {"verify", "--suite", "all", "--trials", "100", "--samples", "500"},
      {"weights", "--N", "400", "--c", "1", "--trials", "5000"},
      {"pauli", "--N", "6", "--terms", "30", "--samples", "6", "--bins", "20", "--trials", "5000"},
  };
  int differing = 0, failed = 0;
  std::string names;
  for (const auto& base : runs) {
    std::string outputs[2];
    for (int t = 0; t < 2; ++t) {
      for (const char* format : {"csv", "json"}) {
        const auto path = dir / (base[0] + "_" + std::to_string(t) + "." + format);
        auto args = base;
        args.insert(args.end(), {"--format", format, "--threads", t == 0 ? "1" : "4", "--out", path.string()});
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        failed += code != 0;
        outputs[t] += slurp(path) + slurp(path.string() + ".header.json");
      }
    }
    const bool same = outputs[0] == outputs[1] && !outputs[0].empty();
    differing += !same;
    names += (names.empty() ? "" : " ") + base[0] + (same ? "" : "(differs)");
  }
  return {differing == 0 && failed == 0, std::to_string(runs.size()) + " subcommands, csv and json, threads 1 vs 4: " +
                                             names + (failed ? "; " + std::to_string(failed) + " runs failed" : "")};
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    std::function<Verdict()> check;
    double limit_seconds;  // 0: no runtime limit
  };
  const std::vector<Criterion> criteria{
      {"exact moment oracle", exact_moments, 1.0},
      {"contraction formula, exhaustive", contraction_exhaustive, 60.0},
      {"density moments vs partitions", density_consistency, 30.0},
      {"entry covariance", entry_covariance, 300.0},
      {"embedding layouts", embedding_layouts, 0.0},
      {"convergence trend", convergence_trend, 1800.0},
      {"variance bound", variance_bound_check, 0.0},
      {"Poisson coincidences", poisson_coincidences, 0.0},
      {"Pauli demo", pauli_demo, 0.0},
      {"reproducibility across threads", reproducibility, 0.0},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criteria[i].limit_seconds > 0 && seconds >= criteria[i].limit_seconds) {
      v.pass = false;
      v.detail += "; over the " + fmt("%.0f s", criteria[i].limit_seconds) + " limit";
    }
    failures += !v.pass;
    std::printf("[%s] %2zu %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].name.c_str(),
                v.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
  return failures == 0 ? 0 : 1;
}
