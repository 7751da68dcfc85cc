#pragma once
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectra/model.hpp"

namespace spectra {

struct precision_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SupportProfile {
  std::map<int, std::vector<int>> L_sets;       // k -> { j : |supp(col_j)| <= k }
  std::map<int, std::vector<int>> row_variant;  // same for rows (transpose)
  std::map<int, double> q_values;               // k -> P(|supp(col)| <= k), exact CDF
};

enum class Provenance2 { Calibrated, Assumed };

struct ProbabilityConstants {
  double c_rgz = 1.0;
  double c_hg = 2.0;
  double c_norm = 3.0;
  Provenance2 c_rgz_prov = Provenance2::Assumed;
  Provenance2 c_hg_prov = Provenance2::Assumed;
  Provenance2 c_norm_prov = Provenance2::Assumed;
  std::string calibration_id;  // experiment id when any constant is calibrated
};

struct ZeroPatternCounts {
  int zero_rows = 0;
  int zero_cols = 0;
  bool omega_rc_holds = false;  // max(zero_rows, zero_cols) < beta
};

struct ProbValue {
  double value = 0.0;
  bool exact = true;     // false => Monte Carlo path
  double stderr_ = 0.0;  // Wilson standard error when Monte Carlo
};

struct TailPair {
  double exact = 0.0;
  double bound = 0.0;
  bool bound_valid = true;  // bound's regime hypotheses hold
  bool informative = true;  // bound < 1 style usefulness flag
};

SupportProfile support_profile(const MatrixSample& A, const std::vector<int>& ks);

ZeroPatternCounts zero_pattern_counts(const MatrixSample& A, int beta);

// 1 - (1 - (1-p)^n)^(2n), evaluated in log space.
double prob_zero_rowcol_asymptotic(int n, double p);

// P(some zero row or some zero column), exact alternating inclusion-exclusion
// over forced zero-row sets, evaluated in extended precision. Throws
// precision_error if cancellation exhausts the guard digits.
double prob_zero_rowcol_exact(int n, double p);

// P(max(#zero rows, #zero cols) >= beta). Exact (joint inclusion-exclusion
// over fixed zero row/column sets) for n <= 200 or beta == 1; otherwise a
// flagged Monte Carlo estimate.
ProbValue prob_omega_rc_complement(int n, double p, int beta, int mc_trials = 200000,
                                   std::uint64_t mc_seed = 12345);

enum class TailSide { Upper, Lower };

// Binomial(n, p): exact tail plus the closed-form bound
//   upper (k >= 2pn):  2 (e n p / k)^k
//   lower (k <= pn/2): 2 (e n p / (k (1-p)))^k (1-p)^n
// requires p <= 1/2; throws identifying the violated regime.
TailPair binomial_tail(int n, double p, int k, TailSide side);

// |I ∩ [m]| for a uniform k-subset I of [n]: exact P(>= l) and the bound
// C_hg (3 m k / (l n))^l, valid for k <= m <= n/2.
TailPair hypergeometric_tail(int n, int m, int k, int l, double c_hg = 2.0);

// Empirical Levy concentration: max over window positions u (at sample
// points) of the fraction of samples inside [u, u + 2*lambda].
double levy_concentration(std::vector<double> samples, double lambda);

// C * lambda / sqrt(sum lambda_i^2 (1 - q_i)).
double rogozin_bound(double lambda, const std::vector<double>& lambda_i,
                     const std::vector<double>& q_i, double c_rgz = 1.0);

// Specialization for Bernoulli-weighted sums: C * lambda / (sqrt(p) * ||x_I||).
double rogozin_iprod_bound(double lambda, double x_I_norm, double p, double c_rgz = 1.0);

// 2 m0 p (1-p)^(2 m0 - 1).
double indiv_q_value(int m0, double p);

// Binomial(n, (1-p)^n) pmf of the zero-column count (log-space evaluation).
std::vector<double> zero_count_distribution(int n, double p);

// Exact q_k = P(Binomial(n, p) <= k) in log-space.
double binomial_cdf(int n, double p, int k);

// Smallest lambda on a uniform grid over (0, 1/2) with q_{floor(lambda*p*n)} * n < 1/2.
std::optional<double> lambda_threshold_search(int n, double p, int grid_points = 1000);

// Smallest C making both ||A - EA|| <= C sqrt(pn) and ||A|| <= C sqrt(pn) + pn
// hold across `samples` Bernoulli samples (operator norms by power iteration).
double calibrate_norm_constant(int n, double p, int samples, std::uint64_t seed);

// Wilson-interval standard error (z = 1) for a Bernoulli proportion.
double wilson_stderr(double successes, double trials);

double log_binomial_coefficient(int n, int k);

}  // namespace spectra
