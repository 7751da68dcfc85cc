#include "spectra/probability.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "spectra/spectral.hpp"

namespace spectra {

namespace {

// 240 decimal digits: enough headroom for alternating sums whose largest term
// is a central binomial coefficient at n in the low thousands; a cancellation
// guard below rejects anything beyond that.
using bf = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<240>>;

double logsumexp(const std::vector<double>& logs) {
  double mx = -HUGE_VAL;
  for (double v : logs) mx = std::max(mx, v);
  if (mx == -HUGE_VAL) return -HUGE_VAL;
  double s = 0;
  for (double v : logs) s += std::exp(v - mx);
  return mx + std::log(s);
}

double log_binomial_pmf(int n, double p, int k) {
  if (p == 0.0) return k == 0 ? 0.0 : -HUGE_VAL;
  if (p == 1.0) return k == n ? 0.0 : -HUGE_VAL;
  return log_binomial_coefficient(n, k) + k * std::log(p) + (n - k) * std::log1p(-p);
}

}  // namespace

double log_binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return -HUGE_VAL;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double binomial_cdf(int n, double p, int k) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  std::vector<double> logs;
  logs.reserve(k + 1);
  for (int j = 0; j <= k; ++j) logs.push_back(log_binomial_pmf(n, p, j));
  double v = std::exp(logsumexp(logs));
  return std::min(v, 1.0);
}

SupportProfile support_profile(const MatrixSample& A, const std::vector<int>& ks) {
  const int n = A.n();
  SupportProfile out;
  double p = A.provenance().kind == Provenance::Kind::Bernoulli ? A.provenance().params.p : -1.0;
  for (int k : ks) {
    if (k < 0 || k > n) throw std::invalid_argument("support_profile: k out of [0, n]");
    std::vector<int> cols, rows;
    for (int j = 0; j < n; ++j)
      if ((int)A.col_support(j).size() <= k) cols.push_back(j);
    for (int i = 0; i < n; ++i)
      if (A.row_support_size(i) <= k) rows.push_back(i);
    out.L_sets[k] = std::move(cols);
    out.row_variant[k] = std::move(rows);
    if (p >= 0) out.q_values[k] = binomial_cdf(n, p, k);
  }
  return out;
}

ZeroPatternCounts zero_pattern_counts(const MatrixSample& A, int beta) {
  ZeroPatternCounts out;
  out.zero_rows = A.zero_row_count();
  out.zero_cols = A.zero_col_count();
  out.omega_rc_holds = std::max(out.zero_rows, out.zero_cols) < beta;
  return out;
}

double prob_zero_rowcol_asymptotic(int n, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 1.0) return 0.0;
    if (p == 0.0) return 1.0;
    throw std::invalid_argument("p out of range");
  }
  // 1 - (1 - q0)^(2n) with q0 = (1-p)^n, all in log space.
  double log_q0 = n * std::log1p(-p);
  double log_1mq0 = std::log1p(-std::exp(log_q0));
  return -std::expm1(2.0 * n * log_1mq0);
}

double prob_zero_rowcol_exact(int n, double p) {
  if (n < 1 || n > 4000)
    throw std::invalid_argument("prob_zero_rowcol_exact: n out of supported range [1, 4000]");
  if (p == 1.0) return 0.0;
  if (p == 0.0) return 1.0;
  // P(no zero row and no zero col)
  //   = sum_k (-1)^k C(n,k) (1-p)^{kn} (1 - (1-p)^{n-k})^n
  // (inclusion-exclusion over the set of forced zero rows).
  const bf omp = bf(1) - bf(p);
  bf sum = 0, comb = 1, maxterm = 0;
  const bf omp_n_const = pow(omp, n);
  bf omp_pow = omp_n_const;  // (1-p)^(n-k), walked downward in k
  bf omp_kn = 1;             // (1-p)^(kn)
  for (int k = 0; k <= n; ++k) {
    bf term = comb * omp_kn * pow(bf(1) - omp_pow, n);
    if (k & 1)
      sum -= term;
    else
      sum += term;
    maxterm = std::max(maxterm, abs(term));
    // advance
    comb = comb * (n - k) / (k + 1);
    omp_kn *= omp_n_const;
    omp_pow /= omp;
  }
  bf result = bf(1) - sum;
  // absolute-error guard: summation noise is ~ maxterm * 10^-240 and the
  // result is a probability, so demand at least 25 clean digits
  if (maxterm > 0 && double(log10(maxterm)) > 240 - 25)
    throw precision_error("prob_zero_rowcol_exact: cancellation guard hit");
  double out = double(result);
  return std::min(std::max(out, 0.0), 1.0);
}

namespace {

// Exact P(exactly r zero rows and exactly c zero cols) via two-sided
// inclusion-exclusion over fixed row/column sets:
//   P = sum_{a>=r} sum_{b>=c} (-1)^{a-r+b-c} C(n,a)C(a,r)C(n,b)C(b,c)
//         (1-p)^{an + bn - ab}
bf prob_exact_zero_counts(int n, double p, int r, int c) {
  const bf omp = bf(1) - bf(p);
  std::vector<bf> Cn(n + 1);  // C(n, a)
  Cn[0] = 1;
  for (int a = 1; a <= n; ++a) Cn[a] = Cn[a - 1] * (n - a + 1) / a;
  bf sum = 0, maxterm = 0;
  for (int a = r; a <= n; ++a) {
    // C(a, r)
    bf Car = 1;
    for (int t = 0; t < r; ++t) Car = Car * (a - t) / (t + 1);
    const bf lead = Cn[a] * Car * pow(omp, int(a) * n);
    // inner loop over b: factor (1-p)^{bn - ab} = ((1-p)^{n-a})^b
    const bf Yb = pow(omp, n - a);
    bf ypow = pow(Yb, c);
    for (int b = c; b <= n; ++b) {
      bf Cbc = 1;
      for (int t = 0; t < c; ++t) Cbc = Cbc * (b - t) / (t + 1);
      bf term = lead * Cn[b] * Cbc * ypow;
      if (((a - r) + (b - c)) & 1)
        sum -= term;
      else
        sum += term;
      maxterm = std::max(maxterm, abs(term));
      ypow *= Yb;
    }
  }
  // absolute-error guard (the caller folds this into a probability, so
  // 25 clean digits of absolute accuracy suffice)
  if (maxterm > 0 && double(log10(maxterm)) > 240 - 25)
    throw precision_error("prob_omega_rc_complement: cancellation guard hit");
  return sum;
}

}  // namespace

ProbValue prob_omega_rc_complement(int n, double p, int beta, int mc_trials,
                                   std::uint64_t mc_seed) {
  ProbValue out;
  if (beta < 1) throw std::invalid_argument("beta must be >= 1");
  if (beta > n) {
    out.value = 0.0;
    return out;
  }
  if (beta == 1) {
    out.value = prob_zero_rowcol_exact(n, p);
    return out;
  }
  if (n <= 200) {
    bf keep = 0;  // P(max(zero rows, zero cols) < beta)
    for (int r = 0; r < beta; ++r)
      for (int c = 0; c < beta; ++c) keep += prob_exact_zero_counts(n, p, r, c);
    double v = double(bf(1) - keep);
    out.value = std::min(std::max(v, 0.0), 1.0);
    return out;
  }
  // Monte Carlo fallback, flagged.
  ModelParams mp{n, p, beta, mc_seed};
  long long hit = 0;
  for (int t = 0; t < mc_trials; ++t) {
    auto A = sample_bernoulli(mp, std::uint64_t(t));
    auto zc = zero_pattern_counts(A, beta);
    if (!zc.omega_rc_holds) ++hit;
  }
  out.exact = false;
  out.value = double(hit) / mc_trials;
  out.stderr_ = wilson_stderr(double(hit), double(mc_trials));
  return out;
}

TailPair binomial_tail(int n, double p, int k, TailSide side) {
  if (!(p > 0 && p <= 0.5))
    throw std::invalid_argument("binomial_tail: requires 0 < p <= 1/2");
  if (k < 0 || k > n) throw std::invalid_argument("binomial_tail: k out of range");
  const double pn = p * n;
  TailPair out;
  if (side == TailSide::Upper) {
    if (k < 2.0 * pn)
      throw std::invalid_argument("binomial_tail: upper bound regime needs k >= 2pn");
    std::vector<double> logs;
    for (int j = k; j <= n; ++j) logs.push_back(log_binomial_pmf(n, p, j));
    out.exact = std::exp(logsumexp(logs));
    out.bound = 2.0 * std::exp(k * (std::log(M_E * pn) - std::log(double(k))));
  } else {
    if (k > pn / 2.0)
      throw std::invalid_argument("binomial_tail: lower bound regime needs k <= pn/2");
    std::vector<double> logs;
    for (int j = 0; j <= k; ++j) logs.push_back(log_binomial_pmf(n, p, j));
    out.exact = std::exp(logsumexp(logs));
    out.bound = 2.0 * std::exp(k * std::log(M_E * pn / (k * (1.0 - p))) + n * std::log1p(-p));
  }
  out.informative = out.bound < 1.0;
  return out;
}

TailPair hypergeometric_tail(int n, int m, int k, int l, double c_hg) {
  if (m < 0 || m > n || k < 0 || k > n) throw std::invalid_argument("hypergeometric_tail: bad args");
  TailPair out;
  const int hi = std::min(k, m);
  if (l <= 0) {
    out.exact = 1.0;
  } else if (l > hi) {
    out.exact = 0.0;
  } else {
    std::vector<double> logs;
    const double logCnk = log_binomial_coefficient(n, k);
    for (int j = l; j <= hi; ++j) {
      if (k - j > n - m) continue;
      logs.push_back(log_binomial_coefficient(m, j) + log_binomial_coefficient(n - m, k - j) -
                     logCnk);
    }
    out.exact = logs.empty() ? 0.0 : std::min(std::exp(logsumexp(logs)), 1.0);
  }
  out.bound_valid = (k <= m && m <= n / 2 && l >= 1);
  if (out.bound_valid) {
    out.bound = c_hg * std::exp(l * std::log(3.0 * double(m) * k / (double(l) * n)));
    out.informative = (double(l) >= 3.0 * double(m) * k / double(n));
  } else {
    out.bound = HUGE_VAL;
    out.informative = false;
  }
  return out;
}

double levy_concentration(std::vector<double> samples, double lambda) {
  if (samples.empty()) throw std::invalid_argument("levy_concentration: need samples");
  if (lambda < 0) throw std::invalid_argument("levy_concentration: lambda >= 0 required");
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  const double w = 2.0 * lambda;
  std::size_t best = 0, hi = 0;
  for (std::size_t lo = 0; lo < n; ++lo) {
    if (hi < lo) hi = lo;
    while (hi < n && samples[hi] <= samples[lo] + w) ++hi;
    best = std::max(best, hi - lo);
  }
  return double(best) / double(n);
}

double rogozin_bound(double lambda, const std::vector<double>& lambda_i,
                     const std::vector<double>& q_i, double c_rgz) {
  if (lambda_i.size() != q_i.size()) throw std::invalid_argument("rogozin_bound: size mismatch");
  double s = 0, mx = 0;
  for (std::size_t i = 0; i < lambda_i.size(); ++i) {
    if (q_i[i] < 0 || q_i[i] > 1) throw std::invalid_argument("rogozin_bound: q_i out of [0,1]");
    mx = std::max(mx, lambda_i[i]);
    s += lambda_i[i] * lambda_i[i] * (1.0 - q_i[i]);
  }
  if (!(lambda > mx)) throw std::invalid_argument("rogozin_bound: requires lambda > max lambda_i");
  if (s <= 0) throw std::invalid_argument("rogozin_bound: degenerate (all q_i = 1)");
  return c_rgz * lambda / std::sqrt(s);
}

double rogozin_iprod_bound(double lambda, double x_I_norm, double p, double c_rgz) {
  if (x_I_norm <= 0 || p <= 0) throw std::invalid_argument("rogozin_iprod_bound: bad args");
  return c_rgz * lambda / (std::sqrt(p) * x_I_norm);
}

double indiv_q_value(int m0, double p) {
  if (m0 < 1 || !(p > 0 && p < 1)) throw std::invalid_argument("indiv_q_value: bad args");
  return 2.0 * m0 * p * std::exp((2.0 * m0 - 1.0) * std::log1p(-p));
}

std::vector<double> zero_count_distribution(int n, double p) {
  double log_q0 = n * std::log1p(-p);
  double q0 = std::exp(log_q0);
  std::vector<double> pmf(n + 1);
  for (int k = 0; k <= n; ++k) pmf[k] = std::exp(log_binomial_pmf(n, q0, k));
  return pmf;
}

std::optional<double> lambda_threshold_search(int n, double p, int grid_points) {
  for (int g = 1; g < grid_points; ++g) {
    double lambda = 0.5 * double(g) / grid_points;
    int k = int(std::floor(lambda * p * n));
    if (binomial_cdf(n, p, k) * n < 0.5) return lambda;
  }
  return std::nullopt;
}

double calibrate_norm_constant(int n, double p, int samples, std::uint64_t seed) {
  ModelParams mp{n, p, 1, seed};
  const double spn = std::sqrt(p * n);
  double c = 1.0;
  for (int t = 0; t < samples; ++t) {
    auto A = sample_bernoulli(mp, std::uint64_t(t));
    Matrix M = Matrix::from_sample(A);
    double norm_A = operator_norm(M, 60);
    for (double& v : M.a) v -= p;
    double norm_centered = operator_norm(M, 60);
    c = std::max(c, norm_centered / spn);
    c = std::max(c, (norm_A - p * n) / spn);
  }
  return c;
}

double wilson_stderr(double successes, double trials) {
  if (trials <= 0) return 0.0;
  double phat = successes / trials;
  // z = 1 Wilson half-width.
  double denom = 1.0 + 1.0 / trials;
  return std::sqrt(phat * (1.0 - phat) / trials + 1.0 / (4.0 * trials * trials)) / denom;
}

}  // namespace spectra
