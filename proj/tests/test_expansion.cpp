#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "spectra/expansion.hpp"
#include "spectra/model.hpp"
#include "spectra/rng.hpp"

using namespace spectra;

namespace {

MatrixSample make_sample(int n, const std::vector<std::vector<int>>& ones, double p = 0.1) {
  const int wpr = (n + 63) / 64;
  std::vector<std::uint64_t> bits(std::size_t(n) * wpr, 0);
  for (int i = 0; i < n; ++i)
    for (int j : ones[std::size_t(i)])
      bits[std::size_t(i) * wpr + (j >> 6)] |= std::uint64_t(1) << (j & 63);
  Provenance prov;
  prov.params = ModelParams{n, p, 1, 0};
  return MatrixSample(n, std::move(bits), prov);
}

MatrixSample identity_sample(int n, double p = 0.1) {
  std::vector<std::vector<int>> ones(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ones[std::size_t(i)] = {i};
  return make_sample(n, ones, p);
}

}  // namespace

TEST_CASE("block decomposition: zero matrix, identity, and a hand example") {
  MatrixSample Z = make_sample(4, {{}, {}, {}, {}});
  BlockDecomposition bz = block_decomposition(Z, 0);
  CHECK(bz.j_cols.size() == 4);  // every column has empty support
  CHECK(bz.i_rows.empty());
  CHECK(bz.jc_cols.empty());
  CHECK(bz.ic_rows.size() == 4);

  MatrixSample I5 = identity_sample(5);
  BlockDecomposition bi = block_decomposition(I5, 1);
  CHECK(bi.j_cols.size() == 5);
  CHECK(bi.i_rows.size() == 5);

  // rows {0}, {0,1}, {2}: column supports have sizes 2, 1, 1
  MatrixSample A = make_sample(3, {{0}, {0, 1}, {2}});
  BlockDecomposition bd = block_decomposition(A, 1);
  CHECK(bd.j_cols == std::vector<int>{1, 2});
  CHECK(bd.i_rows == std::vector<int>{1, 2});
  CHECK(bd.jc_cols == std::vector<int>{0});
  CHECK(bd.ic_rows == std::vector<int>{0});
  CHECK_THROWS_AS(block_decomposition(A, -1), std::invalid_argument);

  // zero-block check on random samples: A[ic, j] is identically 0
  for (int trial = 0; trial < 20; ++trial) {
    MatrixSample R = sample_bernoulli(ModelParams{30, 0.2, 1, 11}, std::uint64_t(trial));
    for (int thr : {0, 2, 5, 30}) {
      BlockDecomposition b = block_decomposition(R, thr);
      for (int i : b.ic_rows)
        for (int j : b.j_cols) CHECK(R.entry(i, j) == 0);
      CHECK(b.j_cols.size() + b.jc_cols.size() == 30);
      CHECK(b.i_rows.size() + b.ic_rows.size() == 30);
    }
  }
}

TEST_CASE("expansion set: hand example, empty column, identity, validation") {
  MatrixSample A = make_sample(3, {{0}, {0, 1}, {2}});
  CHECK(expansion_set(A, {0}, {0, 1}) == std::vector<int>{0});

  MatrixSample Z = make_sample(3, {{}, {}, {}});
  CHECK(expansion_set(Z, {1}, {1}).empty());

  MatrixSample I4 = identity_sample(4);
  CHECK(expansion_set(I4, {0, 1, 2, 3}, {0, 1, 2, 3}) == std::vector<int>{0, 1, 2, 3});

  CHECK_THROWS_AS(expansion_set(A, {2}, {0, 1}), std::invalid_argument);
}

TEST_CASE("expansion set shrinks when J2 grows") {
  for (int trial = 0; trial < 30; ++trial) {
    MatrixSample A = sample_bernoulli(ModelParams{40, 0.15, 1, 23}, std::uint64_t(trial));
    CounterRng rng(5, std::uint64_t(trial));
    std::vector<int> j1, j2, j2big;
    for (int j = 0; j < 40; ++j) {
      const double u = rng.uniform();
      if (u < 0.1) {
        j1.push_back(j);
        j2.push_back(j);
        j2big.push_back(j);
      } else if (u < 0.3) {
        j2.push_back(j);
        j2big.push_back(j);
      } else if (u < 0.5) {
        j2big.push_back(j);
      }
    }
    if (j1.empty()) continue;
    std::vector<int> small = expansion_set(A, j1, j2);
    std::vector<int> big = expansion_set(A, j1, j2big);
    CHECK(std::includes(small.begin(), small.end(), big.begin(), big.end()));
  }
}

TEST_CASE("event report: zero matrix and identity") {
  ClassParams cp = ClassParams::defaults(1);
  ProbabilityConstants consts;

  MatrixSample Z = make_sample(10, std::vector<std::vector<int>>(10), 0.05);
  EventReport ez = check_events(Z, cp, 1, consts);
  CHECK(ez.omega_row);  // empty rows trivially below the cap
  CHECK_FALSE(ez.omega0);
  CHECK_FALSE(ez.omega_rc);

  MatrixSample I10 = identity_sample(10, 0.1);
  EventReport ei = check_events(I10, cp, 1, consts);
  CHECK(ei.omega_j);  // disjoint singleton supports
  CHECK(ei.omega0);
  CHECK(ei.omega_rc);
}

TEST_CASE("event report: dense-regime samples are typical, rc implies zero-column event") {
  ClassParams cp = ClassParams::defaults(1);
  ProbabilityConstants consts;
  int all_good = 0;
  for (int trial = 0; trial < 20; ++trial) {
    MatrixSample A = sample_bernoulli(ModelParams{200, 0.15, 1, 314}, std::uint64_t(trial));
    OmegaDConfig dcfg;
    dcfg.trials = 16;
    dcfg.seed = std::uint64_t(trial);
    EventReport ev = check_events(A, cp, 1, consts, dcfg);
    if (ev.omega_rc) CHECK(ev.omega0);
    CHECK(ev.j_size <= 1);
    all_good += ev.omega1 && ev.omega_j && ev.omega_w && ev.omega_d && ev.omega_row &&
                ev.omega_norm && ev.omega_rc;
  }
  CHECK(all_good >= 18);
}

TEST_CASE("event report: sparse-regime level-set bound holds with high probability") {
  // P(failure of the column-level event) <= 10 * n^-2 per the tail estimate;
  // 10^4 samples at n=300 should produce at most a handful of failures
  ClassParams cp = ClassParams::defaults(1);
  const int n = 300;
  const double p = std::log(double(n)) / n;
  const double pn = p * n;
  int failures = 0;
  const int batches = 10000;
  for (int trial = 0; trial < batches; ++trial) {
    MatrixSample A = sample_bernoulli(ModelParams{n, p, 1, 2718}, std::uint64_t(trial));
    bool ok = true;
    for (int k = 1; k <= int(std::floor(pn / 2.0)); ++k) {
      int lk = 0;
      for (int j = 0; j < n; ++j) lk += int(A.col_support(j).size()) <= k;
      const double cap = std::log(double(n)) * std::log(double(n)) *
                         std::exp(double(k) * std::log(std::exp(1.0) * pn / k) - pn) * n;
      if (!(double(lk) < cap)) ok = false;
    }
    for (int j = 0; j < n && ok; ++j)
      if (double(A.col_support(j).size()) > cp.phi * pn) ok = false;
    failures += !ok;
  }
  CHECK(double(failures) / batches <= 10.0 / (double(n) * n) + 3.0 * std::sqrt(10.0 / (double(n) * n) / batches));
}

TEST_CASE("steep image count: zero vector, identity, single column") {
  MatrixSample I4 = identity_sample(4);
  CHECK(steep_image_count(I4, {0, 0, 0, 0}, 0.5) == 0);
  CHECK(steep_image_count(I4, {1, 0, 0, 0}, 0.5) == 1);
  CHECK_THROWS_AS(steep_image_count(I4, {1, 0, 0, 0}, -1.0), std::invalid_argument);

  MatrixSample A = sample_bernoulli(ModelParams{50, 0.2, 1, 9}, 0);
  for (int j = 0; j < 50; ++j) {
    if (A.col_support(j).empty()) continue;
    std::vector<double> x(50, 0.0);
    x[std::size_t(j)] = 1.0;
    CHECK(steep_image_count(A, x, 0.5) == int(A.col_support(j).size()));
    CHECK(steep_image_count(A, x, 0.5) >= 1);
  }
}

TEST_CASE("overlap tail experiment: degenerate, exact inclusion, and dominance") {
  TailExperiment deg = expansion_tail_experiment(100, {5, 0, 0}, 2000, 1.0, 3);
  CHECK(deg.empirical == 0.0);

  // k=1: P(X_1 >= 1) = s0/m1 exactly
  TailExperiment inc = expansion_tail_experiment(200, {5, 1}, 100000, 1.0, 4);
  CHECK_FALSE(inc.bound_valid);  // t = 1 is outside the bound's validity range
  const double exact = 5.0 / 200.0;
  CHECK(std::abs(inc.empirical - exact) <= 3.0 * std::sqrt(exact * (1 - exact) / 100000.0));

  // stated parameter point: bound valid, empirical below it
  std::vector<int> sizes{10};
  for (int l = 0; l < 10; ++l) sizes.push_back(3);
  TailExperiment dom = expansion_tail_experiment(200, sizes, 100000, 6.0, 5);
  CHECK(dom.bound_valid);
  CHECK(dom.empirical <= dom.bound);

  // informative point: nontrivial bound, empirical zero
  TailExperiment inf2 = expansion_tail_experiment(2000, sizes, 100000, 2.0, 6);
  CHECK(inf2.bound_valid);
  CHECK(inf2.bound < 1e-10);
  CHECK(inf2.empirical <= inf2.bound);

  CHECK_THROWS_AS(expansion_tail_experiment(0, {1, 1}, 10, 2.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(expansion_tail_experiment(10, {11, 1}, 10, 2.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(expansion_tail_experiment(10, {1}, 10, 2.0, 0), std::invalid_argument);
}

TEST_CASE("expansion lower bound: conditional subset model matches the sampler") {
  // one spot check that the direct subset process agrees with the
  // support-conditioned sampler's law of |I_A(J1,J2)|
  const int n = 60, b = 4, n12 = 5;
  SupportDescriptor desc;
  desc.sizes.assign(std::size_t(n), 0);
  for (int j = 0; j < n12; ++j) desc.sizes[std::size_t(j)] = b;
  std::vector<int> j12(n12);
  for (int j = 0; j < n12; ++j) j12[std::size_t(j)] = j;
  double mean_sampler = 0, mean_direct = 0;
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    MatrixSample A = sample_with_column_supports(n, desc, 77, std::uint64_t(t));
    mean_sampler += double(expansion_set(A, j12, j12).size());

    CounterRng rng(78, std::uint64_t(t));
    std::vector<int> hits(std::size_t(n), 0);
    for (int j = 0; j < n12; ++j) {
      std::set<int> supp;
      while ((int)supp.size() < b) supp.insert(int(rng.uniform_index(n)));
      for (int i : supp) ++hits[std::size_t(i)];
    }
    int cnt = 0;
    for (int i = 0; i < n; ++i) cnt += hits[std::size_t(i)] == 1;
    mean_direct += double(cnt);
  }
  mean_sampler /= trials;
  mean_direct /= trials;
  CHECK(std::abs(mean_sampler - mean_direct) < 0.25);  // ~4 sigma at these sizes
}

TEST_CASE("expansion lower bound: failure probability within the stated bound") {
  // m1=2000, b=5, |J1|=|J2|=6, r=5: the failure event |I| < |J1| r / 4 = 7.5
  // has bound C_hg^3 exp(-log(5/1.8) * 5*6/8) ~ 0.174
  const int m1 = 2000, b = 5, n12 = 6;
  const double r = 5.0;
  const double hyp = 24.0 * n12 * double(b) * double(b) / m1;  // 1.8
  REQUIRE(r >= hyp);
  const double bound =
      std::pow(2.0, n12 / 2.0) * std::exp(-std::log(r / hyp) * r * n12 / 8.0);
  int fail = 0;
  const int trials = 10000;
  std::vector<int> hits(std::size_t(m1), 0);
  std::vector<int> touched;
  for (int t = 0; t < trials; ++t) {
    touched.clear();
    CounterRng rng(91, std::uint64_t(t));
    for (int j = 0; j < n12; ++j) {
      std::set<int> supp;
      while ((int)supp.size() < b) supp.insert(int(rng.uniform_index(m1)));
      for (int i : supp) {
        if (hits[std::size_t(i)] == 0) touched.push_back(i);
        ++hits[std::size_t(i)];
      }
    }
    int cnt = 0;
    for (int i : touched) cnt += hits[std::size_t(i)] == 1;
    fail += double(cnt) < n12 * r / 4.0;
    for (int i : touched) hits[std::size_t(i)] = 0;
  }
  CHECK(double(fail) / trials <= bound);
}

TEST_CASE("steep guarantee audit: no failures in either regime") {
  ClassParams cp = ClassParams::defaults(1);
  ProbabilityConstants consts;

  ModelParams sparse{300, std::log(300.0) / 300.0, 1, 4242};
  SteepAudit as = steep_guarantee_audit(sparse, cp, consts, 100, 17);
  CHECK(as.trials == 100);
  CHECK(as.conditioned >= 1);
  CHECK(as.failures == 0);

  ModelParams dense{200, 0.12, 1, 4243};
  SteepAudit ad = steep_guarantee_audit(dense, cp, consts, 60, 18);
  CHECK(ad.conditioned >= 30);
  CHECK(ad.failures == 0);
}
