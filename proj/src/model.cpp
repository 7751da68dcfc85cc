#include "spectra/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spectra {

double CounterRng::normal() {
  // Box-Muller; consumes exactly two draws.
  double u1 = uniform(), u2 = uniform();
  if (u1 <= 0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

Regime ModelParams::regime() const {
  double threshold = (1.0 + 1.0 / (2.0 * beta)) * std::log(double(n)) / double(n);
  return p <= threshold ? Regime::SmallP : Regime::LargeP;
}

MatrixSample::MatrixSample(int n, std::vector<std::uint64_t> bits, Provenance prov)
    : n_(n), wpr_((n + 63) / 64), bits_(std::move(bits)), prov_(std::move(prov)) {
  if ((int)bits_.size() != n_ * wpr_)
    throw std::invalid_argument("MatrixSample: bit buffer has wrong size");
  col_supports_.assign(n_, {});
  row_support_sizes_.assign(n_, 0);
  for (int i = 0; i < n_; ++i) {
    int cnt = 0;
    for (int w = 0; w < wpr_; ++w) {
      std::uint64_t word = bits_[std::size_t(i) * wpr_ + w];
      while (word) {
        int b = __builtin_ctzll(word);
        word &= word - 1;
        int j = (w << 6) | b;
        col_supports_[j].push_back(i);
        ++cnt;
      }
    }
    row_support_sizes_[i] = cnt;
  }
}

int MatrixSample::zero_row_count() const {
  return int(std::count(row_support_sizes_.begin(), row_support_sizes_.end(), 0));
}

int MatrixSample::zero_col_count() const {
  int c = 0;
  for (const auto& s : col_supports_)
    if (s.empty()) ++c;
  return c;
}

std::vector<double> MatrixSample::dense() const {
  std::vector<double> d(std::size_t(n_) * n_, 0.0);
  for (int j = 0; j < n_; ++j)
    for (int i : col_supports_[j]) d[std::size_t(i) * n_ + j] = 1.0;
  return d;
}

std::uint64_t MatrixSample::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint64_t w : bits_) {
    h ^= w;
    h *= 0x100000001b3ULL;
  }
  // fold in the dimension so matrices of different sizes never collide trivially
  h ^= std::uint64_t(n_);
  h *= 0x100000001b3ULL;
  return h;
}

std::vector<std::vector<int>> MatrixSample::recompute_col_supports() const {
  std::vector<std::vector<int>> s(n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (entry(i, j)) s[j].push_back(i);
  return s;
}

MatrixSample sample_bernoulli(const ModelParams& params, std::uint64_t stream_id) {
  params.validate();
  const int n = params.n;
  const int wpr = (n + 63) / 64;
  std::vector<std::uint64_t> bits(std::size_t(n) * wpr, 0);
  CounterRng rng(params.seed, stream_id);
  const double p = params.p;
  for (int i = 0; i < n; ++i) {
    std::uint64_t base = std::uint64_t(i) * n;
    for (int j = 0; j < n; ++j) {
      double u = double(rng.at(base + j) >> 11) * 0x1.0p-53;
      if (u < p) bits[std::size_t(i) * wpr + (j >> 6)] |= 1ULL << (j & 63);
    }
  }
  Provenance prov;
  prov.kind = Provenance::Kind::Bernoulli;
  prov.params = params;
  prov.seed = params.seed;
  prov.stream_id = stream_id;
  return MatrixSample(n, std::move(bits), std::move(prov));
}

MatrixSample sample_with_column_supports(int n, const SupportDescriptor& desc,
                                         std::uint64_t seed, std::uint64_t stream_id) {
  desc.validate(n);
  const int wpr = (n + 63) / 64;
  std::vector<std::uint64_t> bits(std::size_t(n) * wpr, 0);
  CounterRng rng(seed, stream_id);
  std::vector<int> pool(n);
  for (int j = 0; j < n; ++j) {
    const int b = desc.sizes[j];
    std::iota(pool.begin(), pool.end(), 0);
    // Partial Fisher-Yates: the first b entries form a uniform b-subset.
    rng.skip_to(std::uint64_t(j) * n);
    for (int t = 0; t < b; ++t) {
      std::uint64_t pick = t + rng.uniform_index(std::uint64_t(n - t));
      std::swap(pool[t], pool[pick]);
      int i = pool[t];
      bits[std::size_t(i) * wpr + (j >> 6)] |= 1ULL << (j & 63);
    }
  }
  Provenance prov;
  prov.kind = Provenance::Kind::ConditionedSupport;
  prov.desc = desc;
  prov.seed = seed;
  prov.stream_id = stream_id;
  return MatrixSample(n, std::move(bits), std::move(prov));
}

std::pair<std::vector<int>, std::vector<double>> rearrangement(const std::vector<double>& x) {
  const int n = int(x.size());
  for (double v : x)
    if (!std::isfinite(v)) throw std::invalid_argument("rearrangement: non-finite entry");
  std::vector<int> sigma(n);
  std::iota(sigma.begin(), sigma.end(), 0);
  std::stable_sort(sigma.begin(), sigma.end(),
                   [&](int a, int b) { return std::fabs(x[a]) > std::fabs(x[b]); });
  std::vector<double> xs(n);
  for (int i = 0; i < n; ++i) xs[i] = std::fabs(x[sigma[i]]);
  return {std::move(sigma), std::move(xs)};
}

}  // namespace spectra
