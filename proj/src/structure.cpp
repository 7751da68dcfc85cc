#include "spectra/structure.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "spectra/rng.hpp"

namespace spectra {

namespace {

double pn_of(int n, double p) { return p * double(n); }

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

ClassParams ClassParams::defaults(int beta) {
  ClassParams cp;
  cp.gamma = 4.0;
  cp.c_t1 = 100.0;
  cp.c_t2 = 100.0;
  cp.r = 0.05;
  cp.delta = 0.015;
  cp.rho = 0.05;
  cp.phi = 8.0;
  cp.phi0 = 0.5 * std::min(1.0 / (2.0 * beta), 0.2);
  cp.k_threshold = std::max(8 * beta + 1, 32);
  cp.validate(beta);
  return cp;
}

void ClassParams::validate(int beta) const {
  require(beta >= 1, "ClassParams: beta must be >= 1");
  require(gamma >= 1.0, "ClassParams: gamma must be >= 1");
  require(c_t1 > 1.0, "ClassParams: c_t1 must be > 1");
  require(c_t2 > 1.0, "ClassParams: c_t2 must be > 1");
  require(r > 0.0 && r < 0.1, "ClassParams: r must lie in (0, 1/10)");
  require(delta > 0.0 && delta < r / 3.0, "ClassParams: delta must lie in (0, r/3)");
  require(rho > 0.0 && rho < 0.1, "ClassParams: rho must lie in (0, 1/10)");
  require(phi > 1.0, "ClassParams: phi must be > 1");
  require(phi0 > 0.0 && phi0 < 1.0 / (2.0 * beta), "ClassParams: phi0 must lie in (0, 1/(2 beta))");
  require(k_threshold > 8 * beta, "ClassParams: k_threshold must exceed 8 beta");
}

ScaleSequence scale_sequence(int n, double p, int beta, double gamma, double r) {
  require(n >= 2, "scale_sequence: n must be >= 2");
  require(p > 0.0 && p < 1.0, "scale_sequence: p must lie in (0,1)");
  require(gamma >= 1.0, "scale_sequence: gamma must be >= 1");
  require(r > 0.0 && r < 0.1, "scale_sequence: r must lie in (0, 1/10)");
  const double pn = pn_of(n, p);
  require(pn > 1.0, "scale_sequence: ladder undefined for pn <= 1");
  require(std::floor(r * n) >= 1.0, "scale_sequence: floor(r*n) must be >= 1");
  if (gamma * p >= 1.0)
    throw std::invalid_argument("scale_sequence: gamma*p >= 1 makes n_s = 1 = n_0 (degenerate)");

  ScaleSequence seq;
  seq.n = n;
  seq.p = p;
  seq.regime = ModelParams{n, p, beta, 0}.regime();

  const long long ns = (long long)std::ceil(1.0 / (gamma * p));
  const double lpn = std::log(pn);

  std::vector<long long> lad;  // n_0 .. n_s
  if (seq.regime == Regime::SmallP) {
    const long long M = (long long)std::ceil(std::exp(pn / (lpn * lpn)));
    int t0 = 0;
    long long pw = 1;
    while (pw < M) {
      pw *= 3;
      ++t0;
    }
    if (t0 == 0) t0 = 1;  // M <= 1 cannot occur for pn > 1, defensive
    if (ns <= M)
      throw std::invalid_argument("scale_sequence: geometric ladder collapses (n_s <= M)");
    // ratio floored at 3 (the raw value pn/log^3(pn) is < 1 at moderate pn)
    // and raised further if needed so that s = t0 + t1 keeps the ladder-length
    // estimate s <= 1.1 log(n)/log(pn)
    const int t1cap = std::max(1, int(std::floor(1.1 * std::log(double(n)) / lpn)) - t0);
    const double ratio =
        std::max({pn / (lpn * lpn * lpn), 3.0,
                  std::pow(double(ns) / double(M), 1.0 / t1cap) * (1.0 + 1e-12)});
    int t1 = 1;
    while (double(M) * std::pow(ratio, t1) < double(ns)) ++t1;
    seq.t0 = t0;
    seq.t1 = t1;
    seq.s = t0 + t1;
    lad.resize(std::size_t(seq.s) + 1);
    pw = 1;
    for (int j = 0; j < t0; ++j) {
      lad[std::size_t(j)] = pw;
      pw *= 3;
    }
    lad[std::size_t(t0)] = M;
    for (int j = t0 + 1; j < seq.s; ++j)
      lad[std::size_t(j)] = (long long)std::ceil(double(M) * std::pow(ratio, j - t0));
    lad[std::size_t(seq.s)] = ns;
  } else {
    require(p <= 1.0 / (2.0 * gamma), "scale_sequence: dense regime needs p <= 1/(2 gamma)");
    if (ns <= 2)
      throw std::invalid_argument("scale_sequence: n_s <= n_1 = 2 (degenerate dense ladder)");
    const double ratio = pn / (lpn * lpn * lpn);
    int s = 2;
    if (ratio > 1.0) {
      while (2.0 * std::pow(ratio, s - 1) < double(ns)) {
        ++s;
        if (s > 64)
          throw std::invalid_argument("scale_sequence: dense ratio too close to 1 (ladder blows up)");
      }
    }
    seq.t0 = 0;
    seq.t1 = 0;
    seq.s = s;
    lad.resize(std::size_t(s) + 1);
    lad[0] = 1;
    lad[1] = 2;
    for (int j = 2; j < s; ++j) lad[std::size_t(j)] = (long long)std::ceil(2.0 * std::pow(ratio, j - 1));
    lad[std::size_t(s)] = ns;
  }

  // enforce strict monotonicity on the interior without moving n_s
  for (int j = 1; j < seq.s; ++j) lad[std::size_t(j)] = std::max(lad[std::size_t(j)], lad[std::size_t(j - 1)] + 1);
  for (int j = seq.s - 1; j >= 1; --j) lad[std::size_t(j)] = std::min(lad[std::size_t(j)], lad[std::size_t(j + 1)] - 1);
  for (int j = 1; j <= seq.s; ++j)
    if (lad[std::size_t(j)] <= lad[std::size_t(j - 1)])
      throw std::invalid_argument("scale_sequence: ladder cannot be made strictly increasing");

  const long long ns1 = (long long)std::ceil(std::sqrt(double(n) / p));
  const long long ns2 = (long long)std::floor(r * n);
  if (ns1 <= lad[std::size_t(seq.s)])
    throw std::invalid_argument("scale_sequence: n_{s+1} <= n_s (degenerate)");
  if (ns1 > n) throw std::invalid_argument("scale_sequence: n_{s+1} > n");

  seq.n_j = std::move(lad);
  seq.n_j.push_back(ns1);
  seq.n_j.push_back(ns2);
  seq.tail_inverted = ns2 <= ns1;
  return seq;
}

GrowthFunction::GrowthFunction(const ScaleSequence& seq, const ClassParams& cp)
    : seq_(seq), c_t1_(cp.c_t1), pn_(seq.p * seq.n) {
  // b_n = sqrt(sum_i g(n/i)^2)
  double acc = 0;
  for (int i = 1; i <= seq_.n; ++i) {
    const double v = eval(double(seq_.n) / i);
    acc += v * v;
  }
  bn_ = std::sqrt(acc);
  // K3 = prod_j g(2^j)^{j 2^-j}; log-terms decay like j^2 2^-j
  double logk = 0;
  for (int j = 1; j <= 80; ++j)
    logk += double(j) * std::pow(0.5, j) * std::log(eval(std::pow(2.0, j)));
  k3_ = std::exp(logk);
}

double GrowthFunction::eval(double t) const {
  if (!(t >= 1.0 - 1e-12)) throw std::invalid_argument("GrowthFunction::eval: t must be >= 1");
  if (t < 1.0) t = 1.0;
  const double n = double(seq_.n);
  const int s = seq_.s;
  const double b1 = n / double(seq_.at(s + 1));
  const double b2 = n / double(seq_.at(s));
  if (t < b1) return 2.0 * std::pow(t, 1.5);
  if (t < b2) return 2.0 * t * t * t;
  const double base = std::pow(pn_, 4.0);
  for (int j = 0; j <= s - 2; ++j) {
    const double lo = n / double(seq_.at(s - j));
    const double hi = n / double(seq_.at(s - j - 1));
    if (t < hi) return (t / lo) * std::pow(c_t1_ * pn_, double(j)) * base;
  }
  const double lo = n / double(seq_.at(1));
  return (t / lo) * std::pow(c_t1_ * pn_, double(s - 1)) * base;
}

std::vector<double> psi_ladder(const ClassParams& cp, int n, double p) {
  const double cap = cp.c_t2 * cp.c_t2 * p * double(n);
  std::vector<double> psi{1.0 / std::sqrt(2.0)};
  while (psi.back() * 3.0 < cap) psi.push_back(psi.back() * 3.0);
  if (psi.back() < cap) psi.push_back(cap);
  return psi;
}

ClassLabel classify_vector(const std::vector<double>& x, const ClassParams& cp,
                           const ScaleSequence& seq, const GrowthFunction& g, double c_rgz) {
  const int n = seq.n;
  require((int)x.size() == n, "classify_vector: dimension mismatch with scale sequence");
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("classify_vector: non-finite entry");
  const double p = seq.p;
  const double pn = p * n;
  const int s = seq.s;

  ClassLabel lab;
  auto [sigma, xs] = rearrangement(x);
  (void)sigma;
  if (xs[0] == 0.0) {
    lab.zero = true;
    return lab;
  }

  auto star = [&](int j) -> double {
    const long long idx = seq.at(j) - 1;
    return idx < n ? xs[std::size_t(idx)] : 0.0;
  };

  for (int j = 1; j <= s; ++j) {
    if (star(j - 1) > cp.c_t1 * pn * star(j)) {
      lab.t1_j = j;
      break;
    }
  }
  if (!lab.t1_j) lab.t2 = star(s) > cp.c_t2 * std::sqrt(pn) * star(s + 1);
  if (!lab.t1_j && !lab.t2) lab.t3 = star(s + 1) > cp.c_t2 * std::sqrt(pn) * star(s + 2);

  const long long rn = (long long)std::floor(cp.r * n);
  const double lambda = rn >= 1 && rn <= n ? xs[std::size_t(rn - 1)] : 0.0;
  lab.lambda = lambda;
  if (lambda <= 0.0) return lab;  // sparse support: handled by the steep path

  lab.y = true;
  std::vector<double> ys(xs);
  for (double& v : ys) v /= lambda;

  // almost-constant: some lambda' in {+1,-1} captures all but < rn coords
  for (double lp : {1.0, -1.0}) {
    long long cnt = 0;
    for (double v : x)
      if (std::abs(v / lambda - lp) < cp.rho) ++cnt;
    if (cnt > (long long)n - rn) {
      lab.ac = true;
      break;
    }
  }

  // gradual: pointwise cap by g plus a rho-gap between the top and bottom
  // ceil(delta n) signed coordinate sets
  bool cap_ok = true;
  for (int i = 1; i <= n && cap_ok; ++i)
    cap_ok = ys[std::size_t(i - 1)] <= g.eval(double(n) / i) * (1.0 + 1e-9);
  if (cap_ok) {
    const long long d = (long long)std::ceil(cp.delta * n);
    if (2 * d <= n) {
      std::vector<double> signed_sorted(x);
      for (double& v : signed_sorted) v /= lambda;
      std::sort(signed_sorted.begin(), signed_sorted.end(), std::greater<double>());
      lab.v = signed_sorted[std::size_t(d - 1)] >= signed_sorted[std::size_t(n - d)] + cp.rho;
    }
  }

  if (!lab.in_t()) {
    // R classes: scan k in [n_s, n/log^2(pn)] using suffix l2 mass
    std::vector<double> suf(std::size_t(n) + 1, 0.0);
    for (int i = n; i >= 1; --i)
      suf[std::size_t(i - 1)] = suf[std::size_t(i)] + ys[std::size_t(i - 1)] * ys[std::size_t(i - 1)];
    const double lpn = std::log(pn);
    const long long kmax = std::min<long long>(n, (long long)std::floor(double(n) / (lpn * lpn)));
    const double thr = 2.0 * c_rgz / std::sqrt(p);
    const std::vector<double> psi = psi_ladder(cp, n, p);
    const double r1_lo = std::sqrt(double(n) / 2.0), r1_hi = cp.c_t2 * std::sqrt(p) * n;
    const double r2_lo = 2.0 * std::sqrt(double(n)) / cp.r,
                 r2_hi = cp.c_t2 * cp.c_t2 * p * std::pow(double(n), 1.5);
    for (long long k = seq.at(s); k <= kmax; ++k) {
      const double inf_b = ys[std::size_t(k - 1)];
      if (inf_b <= 0.0) break;
      const double norm_b = std::sqrt(suf[std::size_t(k - 1)]);
      if (norm_b < thr * inf_b) continue;
      if (lab.ac && !lab.r1_k && norm_b >= r1_lo && norm_b <= r1_hi) lab.r1_k = int(k);
      if (!lab.r2_k && norm_b >= r2_lo && norm_b <= r2_hi) {
        lab.r2_k = int(k);
        int t = 1;
        const double scaled = norm_b / std::sqrt(double(n));
        for (std::size_t m = 1; m + 1 < psi.size(); ++m)
          if (psi[m] <= scaled) t = int(m) + 1;
        lab.r2_kt = std::make_pair(int(k), t);
      }
      if (lab.r1_k && lab.r2_k) break;
    }
  }
  return lab;
}

WitnessTag partition_witness(const std::vector<double>& x, const ClassParams& cp,
                             const ScaleSequence& seq, const GrowthFunction& g, double c_rgz) {
  const ClassLabel lab = classify_vector(x, cp, seq, g, c_rgz);
  WitnessTag w;
  if (lab.zero) {
    w.kind = WitnessTag::Kind::Zero;
    return w;
  }
  if (lab.in_t()) {
    w.kind = WitnessTag::Kind::Steep;
    w.detail = lab.t1_j ? *lab.t1_j : (lab.t2 ? -2 : -3);
    w.note = lab.t1_j ? "T1 band" : (lab.t2 ? "T2" : "T3");
    return w;
  }
  if (lab.v) {
    w.kind = WitnessTag::Kind::Gradual;
    w.lambda = lab.lambda;
    return w;
  }
  if (lab.r1_k || lab.r2_k) {
    w.kind = WitnessTag::Kind::RVector;
    w.lambda = lab.lambda;
    w.detail = lab.r1_k ? *lab.r1_k : *lab.r2_k;
    w.note = lab.r1_k ? "R1" : "R2";
    return w;
  }
  w.kind = WitnessTag::Kind::NotFound;
  w.lambda = lab.lambda;
  w.note = "no class matched: y=" + std::to_string(lab.y) + " ac=" + std::to_string(lab.ac);
  return w;
}

double steep_norm_bound(int j, const ScaleSequence& seq, const ClassParams& cp, int n, double p) {
  require(j >= 1 && j <= seq.s, "steep_norm_bound: need 1 <= j <= s");
  const double cpn = cp.c_t1 * p * double(n);
  return std::sqrt(std::pow(cpn, 2.0 * j) + double(n) / (cpn * cpn));
}

double triple_norm(const std::vector<double>& x, double p, int n) {
  require((int)x.size() == n, "triple_norm: dimension mismatch");
  double sum = 0;
  for (double v : x) sum += v;
  const double mean = sum / n;
  double resid2 = 0;
  for (double v : x) resid2 += (v - mean) * (v - mean);
  const double along = sum / std::sqrt(double(n));  // <x, e>
  return std::sqrt(resid2) + std::sqrt(p * n) * std::abs(along);
}

double net_log_card_basic(int l, int n, double a, double eps) {
  require(l >= 1 && l <= n, "net_log_card_basic: need 1 <= l <= n");
  require(a > 0 && eps > 0, "net_log_card_basic: need a, eps > 0");
  if (eps >= a) return 0.0;
  return double(l) * std::log((3.0 * a / eps) * (std::exp(1.0) * n / double(l)));
}

double net_log_card_refined(double a, double eps, double pn, long long n_s) {
  require(a > 0 && eps > 0 && pn > 1 && n_s >= 1, "net_log_card_refined: invalid args");
  return 2.0 * std::log(std::max(a / eps, 1.0) * pn * pn * pn) * double(n_s);
}

double net_log_card_almost_constant(double r, int n) {
  require(r > 0 && r < 1 && n >= 1, "net_log_card_almost_constant: invalid args");
  return 3.0 * r * double(n) * std::log(std::exp(1.0) / r);
}

double net_log_card_steep_tail(int i, double pn, const ScaleSequence& seq) {
  require(i == 2 || i == 3, "net_log_card_steep_tail: i must be 2 or 3");
  require(pn > 1, "net_log_card_steep_tail: need pn > 1");
  return 2.0 * std::log(pn) * double(seq.at(seq.s + i - 1));
}

namespace {

double cover_eps(const ScaleSequence& seq, const ClassParams& cp) {
  return std::sqrt(2.0 * seq.n) / (cp.c_t2 * std::sqrt(seq.p * seq.n));
}

std::vector<long long> cover_blocks(CoverKind kind, const ScaleSequence& seq) {
  const long long head = kind == CoverKind::T2Prime ? seq.at(seq.s) : seq.at(seq.s + 1);
  const long long mid = kind == CoverKind::T2Prime
                            ? seq.at(seq.s + 1)
                            : std::min<long long>(seq.n, 2 * seq.at(seq.s + 1));
  return {head, std::max(mid, head + 1), seq.n};
}

// Rounds each coordinate to a grid whose spacing depends on the coordinate's
// rank block, so each block contributes at most eps/sqrt(3) in l2.
std::vector<double> quantize_blocks(const std::vector<double>& x,
                                    const std::vector<long long>& block_ends, double eps) {
  auto [sigma, xs] = rearrangement(x);
  (void)xs;
  std::vector<double> q(x.size());
  const double per_block = eps / std::sqrt(3.0);
  long long lo = 0;
  for (long long be : block_ends) {
    const long long size = be - lo;
    if (size <= 0) continue;
    const double d = 2.0 * per_block / std::sqrt(double(size));
    for (long long rk = lo; rk < be; ++rk) {
      const int idx = sigma[std::size_t(rk)];
      q[std::size_t(idx)] = d * std::round(x[std::size_t(idx)] / d);
    }
    lo = be;
  }
  return q;
}

double grid_log_card(const std::vector<long long>& block_ends, const std::vector<double>& amps,
                     double eps, int n) {
  double lc = double(n) * std::log(3.0);  // rank-block assignment choices
  const double per_block = eps / std::sqrt(3.0);
  long long lo = 0;
  for (std::size_t b = 0; b < block_ends.size(); ++b) {
    const long long size = block_ends[b] - lo;
    if (size <= 0) continue;
    const double d = 2.0 * per_block / std::sqrt(double(size));
    lc += double(size) * std::log(2.0 * amps[b] / d + 2.0);
    lo = block_ends[b];
  }
  return lc;
}

}  // namespace

std::vector<double> net_round(CoverKind kind, const std::vector<double>& x,
                              const ScaleSequence& seq, const ClassParams& cp) {
  require((int)x.size() == seq.n, "net_round: dimension mismatch");
  return quantize_blocks(x, cover_blocks(kind, seq), cover_eps(seq, cp));
}

CoverageReport net_cover_check(CoverKind kind, int n, double p, const ClassParams& cp,
                               int sample_count, std::uint64_t seed, double max_log_card) {
  require(n >= 2 && n <= 200, "net_cover_check: desk-scale n <= 200 only");
  const ScaleSequence seq = scale_sequence(n, p, 1, cp.gamma, cp.r);
  const GrowthFunction g(seq, cp);
  const double pn = p * n;
  const double eps = cover_eps(seq, cp);
  const double tail_amp = 1.0 / (2.0 * cp.c_t2 * std::sqrt(pn));

  const std::vector<long long> block_ends = cover_blocks(kind, seq);
  const long long head = block_ends[0];
  const std::vector<double> amps{2.0, tail_amp, tail_amp};
  const double lc = grid_log_card(block_ends, amps, eps, n);
  if (lc > max_log_card)
    throw std::runtime_error("net_cover_check: grid log-cardinality exceeds the configured cap");

  CoverageReport rep;
  rep.eps = eps;
  for (int t = 0; t < sample_count; ++t) {
    CounterRng rng(seed, std::uint64_t(t));
    std::vector<double> x(std::size_t(n), 0.0);
    // descending head values in [1, 2], tail values below the class threshold
    std::vector<double> head_vals(static_cast<std::size_t>(head));
    for (double& v : head_vals) v = 1.0 + rng.uniform();
    std::sort(head_vals.begin(), head_vals.end(), std::greater<double>());
    for (long long i = 0; i < head; ++i)
      x[std::size_t(i)] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * head_vals[std::size_t(i)];
    for (long long i = head; i < n; ++i)
      x[std::size_t(i)] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * tail_amp * rng.uniform() *
                          std::pow(0.5, double(i - head) / std::max<long long>(1, n - head));
    // random coordinate placement
    for (int i = n - 1; i > 0; --i) std::swap(x[std::size_t(i)], x[rng.uniform_index(std::uint64_t(i) + 1)]);

    if (kind == CoverKind::T2Prime) {
      const ClassLabel lab = classify_vector(x, cp, seq, g);
      if (!lab.t2) continue;  // out-of-class samples are excluded, not asserted
    }
    ++rep.total;
    const std::vector<double> q = quantize_blocks(x, block_ends, eps);
    double d2 = 0;
    for (int i = 0; i < n; ++i)
      d2 += (x[std::size_t(i)] - q[std::size_t(i)]) * (x[std::size_t(i)] - q[std::size_t(i)]);
    const double dist = std::sqrt(d2);
    rep.max_distance = std::max(rep.max_distance, dist);
    if (dist <= eps * (1.0 + 1e-12)) ++rep.covered;
  }
  return rep;
}

}  // namespace spectra
