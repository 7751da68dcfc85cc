#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "spectra/probability.hpp"

using namespace spectra;

namespace {

// Exhaustive enumeration oracle: P(predicate) over all 2^(n*n) matrices at
// tiny n, weighting each matrix by p^(#ones) (1-p)^(#zeros).
template <class F>
double enumerate_prob(int n, double p, F&& predicate) {
  const int cells = n * n;
  double total = 0;
  for (int mask = 0; mask < (1 << cells); ++mask) {
    int ones = __builtin_popcount(unsigned(mask));
    std::vector<std::vector<int>> M(n, std::vector<int>(n));
    for (int b = 0; b < cells; ++b) M[b / n][b % n] = (mask >> b) & 1;
    if (predicate(M)) total += std::pow(p, ones) * std::pow(1 - p, cells - ones);
  }
  return total;
}

bool has_zero_row_or_col(const std::vector<std::vector<int>>& M) {
  const int n = int(M.size());
  for (int i = 0; i < n; ++i) {
    bool zr = true;
    for (int j = 0; j < n; ++j) zr = zr && M[i][j] == 0;
    if (zr) return true;
  }
  for (int j = 0; j < n; ++j) {
    bool zc = true;
    for (int i = 0; i < n; ++i) zc = zc && M[i][j] == 0;
    if (zc) return true;
  }
  return false;
}

int max_zero_count(const std::vector<std::vector<int>>& M) {
  const int n = int(M.size());
  int zr = 0, zc = 0;
  for (int i = 0; i < n; ++i) {
    bool z = true;
    for (int j = 0; j < n; ++j) z = z && M[i][j] == 0;
    zr += z;
  }
  for (int j = 0; j < n; ++j) {
    bool z = true;
    for (int i = 0; i < n; ++i) z = z && M[i][j] == 0;
    zc += z;
  }
  return std::max(zr, zc);
}

}  // namespace

TEST_CASE("support profile basics and exact q values") {
  ModelParams mp{2, 0.5, 1, 0};
  SupportDescriptor ones{std::vector<int>(3, 3)};
  auto A = sample_with_column_supports(3, ones, 0, 0);
  auto prof = support_profile(A, {2, 3});
  CHECK(prof.L_sets[2].empty());
  CHECK(prof.L_sets[3].size() == 3);

  SupportDescriptor zero{std::vector<int>(3, 0)};
  auto B = sample_with_column_supports(3, zero, 0, 0);
  auto prof0 = support_profile(B, {0});
  CHECK(prof0.L_sets[0].size() == 3);

  auto C = sample_bernoulli(mp, 0);
  auto profq = support_profile(C, {0, 1, 2});
  CHECK(profq.q_values[0] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(profq.q_values[1] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(profq.q_values[2] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero row/col probability: closed forms") {
  CHECK(prob_zero_rowcol_asymptotic(2, 0.5) == doctest::Approx(0.68359375).epsilon(1e-12));
  CHECK(prob_zero_rowcol_asymptotic(5, 1.0) == 0.0);

  CHECK(prob_zero_rowcol_exact(2, 0.5) == doctest::Approx(9.0 / 16.0).epsilon(1e-12));
  CHECK(prob_zero_rowcol_exact(5, 1.0) == 0.0);
}

TEST_CASE("exact zero row/col probability matches exhaustive enumeration at n<=3") {
  for (double p : {0.25, 0.5, 0.7}) {
    for (int n : {2, 3}) {
      double oracle = enumerate_prob(n, p, has_zero_row_or_col);
      CHECK(prob_zero_rowcol_exact(n, p) == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
}

TEST_CASE("asymptotic formula agrees with a large-n evaluation") {
  // n = 1000, pn = log n: formula evaluated in log space must match the
  // direct extended-precision expression to ~12 digits. The exact
  // inclusion-exclusion value is also finite and close (within 5%).
  int n = 1000;
  double p = std::log(1000.0) / 1000.0;
  double v = prob_zero_rowcol_asymptotic(n, p);
  long double q0 = std::pow(1.0L - (long double)p, n);
  long double direct = 1.0L - std::pow(1.0L - q0, 2 * n);
  CHECK(v == doctest::Approx(double(direct)).epsilon(1e-12));
  double ex = prob_zero_rowcol_exact(n, p);
  CHECK(std::fabs(ex - v) / ex < 0.05);
}

TEST_CASE("exact zero row/col probability matches Monte Carlo at n=50") {
  int n = 50;
  double p = std::log(50.0) / 50.0;
  double ex = prob_zero_rowcol_exact(n, p);
  ModelParams mp{n, p, 1, 31337};
  const int trials = 200000;
  long long hit = 0;
  for (int t = 0; t < trials; ++t) {
    auto A = sample_bernoulli(mp, std::uint64_t(t));
    if (A.zero_row_count() > 0 || A.zero_col_count() > 0) ++hit;
  }
  double phat = double(hit) / trials;
  double sigma = std::sqrt(ex * (1 - ex) / trials);
  CHECK(std::fabs(phat - ex) <= 3 * sigma);
}

TEST_CASE("joint zero-count tail matches exhaustive enumeration at n=3") {
  for (double p : {0.25, 0.5}) {
    for (int beta : {1, 2, 3}) {
      double oracle = enumerate_prob(3, p, [&](const auto& M) { return max_zero_count(M) >= beta; });
      auto got = prob_omega_rc_complement(3, p, beta);
      CHECK(got.exact);
      CHECK(got.value == doctest::Approx(oracle).epsilon(1e-12));
    }
  }
  CHECK(prob_omega_rc_complement(3, 0.5, 4).value == 0.0);
}

TEST_CASE("omega_rc complement: beta=1 equals the zero row/col probability") {
  CHECK(prob_omega_rc_complement(7, 0.3, 1).value ==
        doctest::Approx(prob_zero_rowcol_exact(7, 0.3)).epsilon(1e-12));
}

TEST_CASE("zero pattern counts") {
  SupportDescriptor zero{std::vector<int>(3, 0)};
  auto B = sample_with_column_supports(3, zero, 0, 0);
  auto z = zero_pattern_counts(B, 2);
  CHECK(z.zero_rows == 3);
  CHECK(z.zero_cols == 3);
  CHECK_FALSE(z.omega_rc_holds);

  SupportDescriptor ones{std::vector<int>(3, 3)};
  auto A = sample_with_column_supports(3, ones, 0, 0);
  CHECK(zero_pattern_counts(A, 1).omega_rc_holds);
}

TEST_CASE("binomial tail: hand example and sandwich property") {
  auto r = binomial_tail(4, 0.25, 2, TailSide::Upper);
  CHECK(r.exact == doctest::Approx(0.26171875).epsilon(1e-12));
  CHECK(r.bound == doctest::Approx(2.0 * std::pow(M_E / 2.0, 2)).epsilon(1e-12));
  CHECK(r.exact <= r.bound);

  // single-term upper tail at k = n
  auto s = binomial_tail(6, 0.4, 6, TailSide::Upper);
  CHECK(s.exact == doctest::Approx(std::pow(0.4, 6)).epsilon(1e-10));
  CHECK(s.exact <= s.bound);

  auto lo = binomial_tail(100, 0.1, 2, TailSide::Lower);
  double direct = std::pow(0.9, 100) + 100 * 0.1 * std::pow(0.9, 99) +
                  4950 * 0.01 * std::pow(0.9, 98);
  CHECK(lo.exact == doctest::Approx(direct).epsilon(1e-10));
  CHECK(lo.exact <= lo.bound);

  CHECK_THROWS(binomial_tail(10, 0.5, 3, TailSide::Upper));   // k < 2pn
  CHECK_THROWS(binomial_tail(10, 0.5, 4, TailSide::Lower));   // k > pn/2
  CHECK_THROWS(binomial_tail(10, 0.7, 9, TailSide::Upper));   // p > 1/2
}

TEST_CASE("binomial tail sandwich over a parameter grid") {
  int checked = 0;
  for (int n : {10, 40, 160, 640}) {
    for (double p : {0.02, 0.1, 0.3, 0.5}) {
      double pn = p * n;
      for (int k = 1; k <= n; ++k) {
        if (k >= 2 * pn) {
          auto r = binomial_tail(n, p, k, TailSide::Upper);
          REQUIRE(r.exact <= r.bound * (1 + 1e-12));
          ++checked;
        }
        if (k <= pn / 2) {
          auto r = binomial_tail(n, p, k, TailSide::Lower);
          REQUIRE(r.exact <= r.bound * (1 + 1e-12));
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("hypergeometric tail: counting example and sandwich") {
  auto r = hypergeometric_tail(6, 2, 2, 1);
  CHECK(r.exact == doctest::Approx(0.6).epsilon(1e-12));

  CHECK(hypergeometric_tail(6, 2, 2, 3).exact == 0.0);
  CHECK(hypergeometric_tail(6, 2, 2, 0).exact == 1.0);

  int checked = 0;
  for (int n : {40, 200}) {
    for (int m : {4, n / 8, n / 2}) {
      for (int k = 1; k <= std::min(m, int(std::sqrt(double(n)) / 2)); ++k) {
        for (int l = 1; l <= k; ++l) {
          auto t = hypergeometric_tail(n, m, k, l, 2.0);
          REQUIRE(t.bound_valid);
          REQUIRE(t.exact <= t.bound * (1 + 1e-12));
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 50);
}

TEST_CASE("Levy concentration estimator") {
  CHECK(levy_concentration({5, 5, 5, 5}, 0.1) == 1.0);
  CHECK(levy_concentration({0, 0, 1, 1}, 0.4) == 0.5);
  CHECK(levy_concentration({0, 0, 1, 1}, 0.5) == 1.0);
  // monotone in lambda; 1 once the window spans the range
  std::vector<double> s{0, 0.2, 0.5, 0.9, 2.0};
  double prev = 0;
  for (double lam : {0.0, 0.1, 0.2, 0.5, 1.0}) {
    double q = levy_concentration(s, lam);
    CHECK(q >= prev);
    prev = q;
  }
  CHECK(levy_concentration(s, 1.0) == 1.0);
}

TEST_CASE("Rogozin bound: formula and degenerate cases") {
  CHECK(rogozin_bound(2.0, {1.0}, {0.0}, 1.0) == doctest::Approx(2.0));
  CHECK_THROWS(rogozin_bound(2.0, {1.0, 1.0}, {1.0, 1.0}, 1.0));
  CHECK_THROWS(rogozin_bound(0.5, {1.0}, {0.0}, 1.0));  // lambda must exceed max lambda_i

  CHECK(rogozin_iprod_bound(1.0, 2.0, 0.25, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("Rogozin bound dominates the empirical concentration of a Bernoulli sum") {
  // sum of 20 Bernoulli(1/2), window half-width 0.6
  const int n = 20, trials = 1000000;
  CounterRng rng(99, 0);
  std::vector<double> sums(trials);
  for (int t = 0; t < trials; ++t) {
    int s = 0;
    for (int i = 0; i < n; ++i) s += rng.bernoulli(0.5);
    sums[t] = s;
  }
  double q_emp = levy_concentration(sums, 0.6);
  // per-summand windows at lambda_i = 0.45 each capture a single atom: q_i = 1/2
  double bound = rogozin_bound(0.6, std::vector<double>(n, 0.45), std::vector<double>(n, 0.5), 1.0);
  CHECK(q_emp <= bound);
}

TEST_CASE("individual-coordinate q value") {
  CHECK(indiv_q_value(1, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(indiv_q_value(3, 1e-9) == doctest::Approx(6e-9).epsilon(1e-6));
  // q >= (2/gamma) exp(-3/gamma) at m0 = ceil(1/(gamma p)), gamma = 4
  double gamma = 4;
  for (double p : {0.005, 0.01, 0.05, 0.1}) {
    int m0 = int(std::ceil(1.0 / (gamma * p)));
    CHECK(indiv_q_value(m0, p) >= (2.0 / gamma) * std::exp(-3.0 / gamma));
  }
}

TEST_CASE("zero-column count distribution") {
  auto pmf = zero_count_distribution(2, 0.5);
  CHECK(pmf[0] == doctest::Approx(9.0 / 16.0).epsilon(1e-12));
  CHECK(pmf[1] == doctest::Approx(6.0 / 16.0).epsilon(1e-12));
  CHECK(pmf[2] == doctest::Approx(1.0 / 16.0).epsilon(1e-12));

  // mean = n (1-p)^n vs Monte Carlo at n = 50
  int n = 50;
  double p = std::log(50.0) / 50.0;
  double mean = n * std::exp(n * std::log1p(-p));
  ModelParams mp{n, p, 1, 777};
  const int trials = 20000;
  long long total = 0;
  for (int t = 0; t < trials; ++t) total += sample_bernoulli(mp, std::uint64_t(t)).zero_col_count();
  double m_hat = double(total) / trials;
  // variance of the zero-column count is at most binomial variance
  double sigma = std::sqrt(mean * 1.0 / trials) + 1e-9;
  CHECK(std::fabs(m_hat - mean) <= 4 * sigma);
}

TEST_CASE("low-support event frequency stays under its predicted ceiling") {
  // frequency of { |L_A(k)| >= log^2(n) (e n p / k)^k e^(-pn) n } for k >= 1
  const int n = 100;
  const double p = std::log(double(n)) / n;
  ModelParams mp{n, p, 1, 4242};
  const int trials = 2000;
  const double pn = p * n;
  int k = 2;
  double ceiling = std::pow(std::log(double(n)), 2) * std::pow(M_E * pn / k, k) * std::exp(-pn) * n;
  int exceed = 0;
  for (int t = 0; t < trials; ++t) {
    auto A = sample_bernoulli(mp, std::uint64_t(t));
    int count = 0;
    for (int j = 0; j < n; ++j) count += int(A.col_support(j).size()) <= k;
    if (count >= ceiling) ++exceed;
  }
  double limit = 2 * std::exp(-std::pow(std::log(double(n)), 2)) +
                 3 * wilson_stderr(double(exceed), double(trials));
  CHECK(double(exceed) / trials <= limit + 1e-12);
}

TEST_CASE("zero-column tail admits its factorial lower bound") {
  // P(#zero cols >= beta) >= 0.9 * (1/(e beta!)) (n (1-p)^n)^beta at n=200
  const int n = 200;
  const double p = std::log(double(n)) / n;
  ModelParams mp{n, p, 1, 888};
  const int trials = 4000;
  int hits1 = 0, hits2 = 0;
  for (int t = 0; t < trials; ++t) {
    auto A = sample_bernoulli(mp, std::uint64_t(t));
    int zc = A.zero_col_count();
    hits1 += zc >= 1;
    hits2 += zc >= 2;
  }
  double nq = n * std::exp(n * std::log1p(-p));
  CHECK(double(hits1) / trials >= 0.9 * (1.0 / M_E) * nq);
  CHECK(double(hits2) / trials >= 0.9 * (1.0 / (2.0 * M_E)) * nq * nq);
}

TEST_CASE("monotone coupling: larger p gives fewer zero rows") {
  // common random numbers: entry (i,j) of the p2 sample is 1 whenever the
  // p1 sample's is (p2 > p1), so zero rows can only vanish
  const int n = 30;
  ModelParams lo{n, 0.05, 1, 1212}, hi{n, 0.15, 1, 1212};
  for (int t = 0; t < 200; ++t) {
    auto A = sample_bernoulli(lo, std::uint64_t(t));
    auto B = sample_bernoulli(hi, std::uint64_t(t));
    // coupling: identical (seed, stream) => identical underlying uniforms
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (A.entry(i, j)) REQUIRE(B.entry(i, j) == 1);
    CHECK(B.zero_row_count() <= A.zero_row_count());
  }
}

TEST_CASE("lambda threshold search") {
  // for comfortably large pn the binomial CDF at floor(lambda pn) dies fast
  auto v = lambda_threshold_search(2000, 0.1, 500);
  REQUIRE(v.has_value());
  int k = int(std::floor(*v * 0.1 * 2000));
  CHECK(binomial_cdf(2000, 0.1, k) * 2000 < 0.5);
  // at tiny pn the count of zero columns alone already exceeds 1/2: no lambda
  auto none = lambda_threshold_search(50, std::log(50.0) / 50.0, 200);
  CHECK_FALSE(none.has_value());
}

TEST_CASE("norm-constant calibration is modest at desk scale") {
  double c = calibrate_norm_constant(60, 0.2, 40, 5);
  CHECK(c >= 1.0);
  CHECK(c <= 4.0);
}

TEST_CASE("supported-range checks") {
  CHECK_THROWS(prob_zero_rowcol_exact(4001, 0.5));
  CHECK_THROWS(prob_omega_rc_complement(10, 0.5, 0));
  // worst-case cancellation inside the supported range stays within the
  // guard digits: extreme corners evaluate without tripping it
  CHECK(prob_zero_rowcol_exact(4000, 2e-4) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(prob_omega_rc_complement(200, 1e-4, 3).value == doctest::Approx(1.0).epsilon(1e-9));
}
