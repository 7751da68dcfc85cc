#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spectra/model.hpp"

namespace spectra {

struct ClassParams {
  double gamma = 4.0;
  double c_t1 = 100.0;
  double c_t2 = 100.0;
  double r = 0.05;
  double delta = 0.015;
  double rho = 0.05;
  double phi = 8.0;
  double phi0 = 0.05;          // in (0, 1/(2 beta))
  int k_threshold = 32;        // > 8 beta

  static ClassParams defaults(int beta);
  void validate(int beta) const;
};

struct ScaleSequence {
  Regime regime = Regime::SmallP;
  int n = 0;
  double p = 0;
  int t0 = 0, t1 = 0, s = 0;
  std::vector<long long> n_j;  // indices 0 .. s+2
  bool tail_inverted = false;  // n_{s+1} >= n_{s+2} (desk-scale artifact)

  long long at(int j) const { return n_j.at(std::size_t(j)); }
};

// Threshold ladder n_0 < n_1 < ... < n_s, plus n_{s+1} = ceil(sqrt(n/p)) and
// n_{s+2} = floor(r*n). Sparse regime: powers of 3 up to M = ceil(exp(pn /
// log^2(pn))), then a geometric ladder with ratio max(pn/log^3(pn), 3) up to
// n_s = ceil(1/(gamma p)). Dense regime: 1, 2, then ratio pn/log^3(pn) when
// that exceeds 1 (otherwise s = 2).
ScaleSequence scale_sequence(int n, double p, int beta, double gamma, double r = 0.05);

class GrowthFunction {
 public:
  GrowthFunction(const ScaleSequence& seq, const ClassParams& cp);

  double eval(double t) const;  // t >= 1
  double bn() const { return bn_; }
  double k3() const { return k3_; }
  const ScaleSequence& seq() const { return seq_; }

 private:
  ScaleSequence seq_;
  double c_t1_;
  double pn_;
  double bn_ = 0;
  double k3_ = 0;
};

struct ClassLabel {
  bool zero = false;
  std::optional<int> t1_j;  // minimal steep band index, 1-based
  bool t2 = false, t3 = false;
  bool in_t() const { return t1_j.has_value() || t2 || t3; }
  // membership after normalization by lambda = x*_{floor(rn)} (when > 0)
  double lambda = 0;
  bool y = false, ac = false, v = false;
  std::optional<int> r1_k, r2_k;
  std::optional<std::pair<int, int>> r2_kt;  // (k, psi-window index)
};

ClassLabel classify_vector(const std::vector<double>& x, const ClassParams& cp,
                           const ScaleSequence& seq, const GrowthFunction& g,
                           double c_rgz = 1.0);

struct WitnessTag {
  enum class Kind { Zero, Steep, Gradual, RVector, NotFound } kind = Kind::NotFound;
  double lambda = 0;
  int detail = 0;  // steep band j or R index k
  std::string note;
  bool found() const { return kind != Kind::NotFound; }
};

// Produces a tag certifying x in {0} U T U lambda*V U lambda*R, or a
// counterexample report (kind NotFound).
WitnessTag partition_witness(const std::vector<double>& x, const ClassParams& cp,
                             const ScaleSequence& seq, const GrowthFunction& g,
                             double c_rgz = 1.0);

// sqrt((c_t1 pn)^(2j) + n/(c_t1 pn)^2): certified ||x|| / x*_{n_{j-1}} bound
// for steep band j, 1 <= j <= s.
double steep_norm_bound(int j, const ScaleSequence& seq, const ClassParams& cp, int n, double p);

// ||x - <x,e>e|| + sqrt(pn) |<x,e>| with e the normalized all-ones vector.
double triple_norm(const std::vector<double>& x, double p, int n);

// psi ladder: psi_1 = 1/sqrt(2), psi_{t+1} = 3 psi_t, capped so the last
// entry equals c_t2^2 * p * n.
std::vector<double> psi_ladder(const ClassParams& cp, int n, double p);

// log-cardinality calculators for the covering nets
double net_log_card_basic(int l, int n, double a, double eps);
double net_log_card_refined(double a, double eps, double pn, long long n_s);
double net_log_card_almost_constant(double r, int n);
double net_log_card_steep_tail(int i, double pn, const ScaleSequence& seq);  // i in {2, 3}

enum class CoverKind { T2Prime, T3Profile };

struct CoverageReport {
  int covered = 0;
  int total = 0;
  double eps = 0;
  double max_distance = 0;
};

// Covering-net point for x: per-rank-block grid rounding with spacing chosen
// so the total l2 error is <= eps(seq, cp). Idempotent: a net point maps to
// itself.
std::vector<double> net_round(CoverKind kind, const std::vector<double>& x,
                              const ScaleSequence& seq, const ClassParams& cp);

// Desk-scale coverage: samples class representatives, finds their covering
// point in the per-block product grid, and verifies the distance is <= eps.
// Throws if the implied grid log-cardinality exceeds max_log_card.
CoverageReport net_cover_check(CoverKind kind, int n, double p, const ClassParams& cp,
                               int sample_count, std::uint64_t seed,
                               double max_log_card = 2000.0);

}  // namespace spectra
