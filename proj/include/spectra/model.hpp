#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spectra/rng.hpp"

namespace spectra {

enum class Regime { SmallP, LargeP };

struct ModelParams {
  int n = 2;
  double p = 0.5;
  int beta = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (n < 2) throw std::invalid_argument("ModelParams: n must be >= 2");
    if (!(p > 0.0 && p < 1.0) && p != 0.0 && p != 1.0)
      throw std::invalid_argument("ModelParams: p must lie in [0,1]");
    if (beta < 1 || beta > n) throw std::invalid_argument("ModelParams: beta must lie in [1, n]");
  }

  // Sparse regime: p <= (1 + 1/(2*beta)) * log(n)/n. Pure function of (n,p,beta).
  Regime regime() const;
};

struct SupportDescriptor {
  std::vector<int> sizes;  // b_j, one per column, each in [0, n]

  void validate(int n) const {
    if ((int)sizes.size() != n)
      throw std::invalid_argument("SupportDescriptor: need exactly n sizes");
    for (int b : sizes)
      if (b < 0 || b > n) throw std::invalid_argument("SupportDescriptor: size out of [0, n]");
  }
};

struct Provenance {
  enum class Kind { Bernoulli, ConditionedSupport } kind = Kind::Bernoulli;
  ModelParams params;          // for Bernoulli samples
  SupportDescriptor desc;      // for support-conditioned samples
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// Dense n x n 0/1 matrix; bit-packed rows plus cached per-column supports.
class MatrixSample {
 public:
  MatrixSample(int n, std::vector<std::uint64_t> bits, Provenance prov);

  int n() const { return n_; }
  int words_per_row() const { return wpr_; }

  int entry(int i, int j) const {
    return int((bits_[std::size_t(i) * wpr_ + (j >> 6)] >> (j & 63)) & 1u);
  }

  const std::vector<int>& col_support(int j) const { return col_supports_[j]; }
  const std::vector<std::vector<int>>& col_supports() const { return col_supports_; }
  int row_support_size(int i) const { return row_support_sizes_[i]; }

  int zero_row_count() const;
  int zero_col_count() const;

  const std::vector<std::uint64_t>& bits() const { return bits_; }
  const Provenance& provenance() const { return prov_; }

  // Row-major dense copy (doubles), for numerical linear algebra.
  std::vector<double> dense() const;

  // Content hash of the bit pattern (FNV-1a over packed words).
  std::uint64_t content_hash() const;

  // Rebuild the column-support cache from bits (used by coherence tests).
  std::vector<std::vector<int>> recompute_col_supports() const;

 private:
  int n_;
  int wpr_;
  std::vector<std::uint64_t> bits_;
  std::vector<std::vector<int>> col_supports_;
  std::vector<int> row_support_sizes_;
  Provenance prov_;
};

// i.i.d. Bernoulli(p) entries; entry (i,j) consumes draw index i*n+j of
// stream `stream_id`, so the sample is a pure function of (seed, stream_id).
MatrixSample sample_bernoulli(const ModelParams& params, std::uint64_t stream_id);

// Independent columns; column j's support is a uniform b_j-subset of [n]
// (partial Fisher-Yates on draws [j*n, j*n + b_j)).
MatrixSample sample_with_column_supports(int n, const SupportDescriptor& desc,
                                         std::uint64_t seed, std::uint64_t stream_id);

// Non-increasing rearrangement of |x|: returns (sigma, x_star) with
// x_star[i] = |x[sigma[i]]| non-increasing; ties broken by smallest original
// index first, so sigma is deterministic.
std::pair<std::vector<int>, std::vector<double>> rearrangement(const std::vector<double>& x);

}  // namespace spectra
