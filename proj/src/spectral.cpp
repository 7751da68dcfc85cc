#include "spectra/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>

namespace spectra {

namespace {

void check_finite(const Matrix& A) {
  for (double v : A.a)
    if (!std::isfinite(v)) throw std::invalid_argument("matrix has non-finite entries");
}

// One-sided Jacobi on columns of an m x n matrix with m >= n.
std::vector<double> jacobi_columns(Matrix A) {
  const int m = A.rows, n = A.cols;
  // Column dot products are recomputed on demand; keep squared norms cached.
  std::vector<double> sq(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double s = 0;
    for (int i = 0; i < m; ++i) s += A.at(i, j) * A.at(i, j);
    sq[j] = s;
  }
  const double eps = 2.2204460492503131e-16;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double app = sq[p], aqq = sq[q];
        if (app == 0.0 && aqq == 0.0) continue;
        double apq = 0;
        for (int i = 0; i < m; ++i) apq += A.at(i, p) * A.at(i, q);
        if (std::fabs(apq) <= eps * std::sqrt(app * aqq)) continue;
        rotated = true;
        // Jacobi rotation zeroing the (p,q) off-diagonal of A^T A.
        double tau = (aqq - app) / (2.0 * apq);
        double t = (tau >= 0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (int i = 0; i < m; ++i) {
          double vp = A.at(i, p), vq = A.at(i, q);
          A.at(i, p) = c * vp - s * vq;
          A.at(i, q) = s * vp + c * vq;
        }
        double npp = 0, nqq = 0;
        for (int i = 0; i < m; ++i) {
          npp += A.at(i, p) * A.at(i, p);
          nqq += A.at(i, q) * A.at(i, q);
        }
        sq[p] = npp;
        sq[q] = nqq;
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sv(n);
  for (int j = 0; j < n; ++j) sv[j] = std::sqrt(sq[j]);
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

}  // namespace

std::vector<double> singular_values(const Matrix& A) {
  check_finite(A);
  if (A.rows == 0 || A.cols == 0) return {};
  if (A.rows >= A.cols) return jacobi_columns(A);
  // Transpose: singular values are shared.
  Matrix T(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T.at(j, i) = A.at(i, j);
  return jacobi_columns(std::move(T));
}

std::vector<double> singular_values(const MatrixSample& A) {
  return singular_values(Matrix::from_sample(A));
}

std::vector<double> singular_values_fast(const Matrix& A) {
  check_finite(A);
  const int m = A.rows, n = A.cols;
  std::vector<double> work = A.a;  // dgesdd destroys its input
  std::vector<double> sv(std::min(m, n));
  int info = LAPACKE_dgesdd(LAPACK_ROW_MAJOR, 'N', m, n, work.data(), n, sv.data(), nullptr, m,
                            nullptr, n);
  if (info != 0) throw std::runtime_error("dgesdd failed; info=" + std::to_string(info));
  return sv;  // LAPACK returns non-increasing order
}

int exact_rank_int(const std::vector<long long>& entries, int rows, int cols) {
  using boost::multiprecision::cpp_int;
  std::vector<cpp_int> M(entries.begin(), entries.end());
  auto at = [&](int i, int j) -> cpp_int& { return M[std::size_t(i) * cols + j]; };
  cpp_int prev = 1;
  int rank = 0;
  int row = 0;
  for (int col = 0; col < cols && row < rows; ++col) {
    int pivot = -1;
    for (int i = row; i < rows; ++i)
      if (at(i, col) != 0) {
        pivot = i;
        break;
      }
    if (pivot < 0) continue;
    if (pivot != row)
      for (int j = col; j < cols; ++j) std::swap(at(pivot, j), at(row, j));
    for (int i = row + 1; i < rows; ++i) {
      for (int j = col + 1; j < cols; ++j)
        at(i, j) = (at(row, col) * at(i, j) - at(i, col) * at(row, j)) / prev;
      at(i, col) = 0;
    }
    prev = at(row, col);
    ++row;
    ++rank;
  }
  return rank;
}

int exact_rank(const MatrixSample& A) {
  const int n = A.n();
  std::vector<long long> e(std::size_t(n) * n, 0);
  for (int j = 0; j < n; ++j)
    for (int i : A.col_support(j)) e[std::size_t(i) * n + j] = 1;
  return exact_rank_int(e, n, n);
}

int rank_mod_prime(const MatrixSample& A, std::uint64_t prime) {
  const int n = A.n();
  std::vector<std::uint64_t> M(std::size_t(n) * n, 0);
  for (int j = 0; j < n; ++j)
    for (int i : A.col_support(j)) M[std::size_t(i) * n + j] = 1;
  auto row_ptr = [&](int i) { return M.data() + std::size_t(i) * n; };
  int rank = 0, row = 0;
  for (int col = 0; col < n && row < n; ++col) {
    int pivot = -1;
    for (int i = row; i < n; ++i)
      if (row_ptr(i)[col] != 0) {
        pivot = i;
        break;
      }
    if (pivot < 0) continue;
    if (pivot != row)
      for (int j = col; j < n; ++j) std::swap(row_ptr(pivot)[j], row_ptr(row)[j]);
    std::uint64_t* pr = row_ptr(row);
    // Modular inverse of the pivot via Fermat (prime modulus).
    auto mulmod = [&](std::uint64_t a, std::uint64_t b) {
      return (unsigned __int128)(a)*b % prime;
    };
    std::uint64_t inv = 1, base = pr[col] % prime, e = prime - 2;
    while (e) {
      if (e & 1) inv = mulmod(inv, base);
      base = mulmod(base, base);
      e >>= 1;
    }
    for (int i = row + 1; i < n; ++i) {
      std::uint64_t* ri = row_ptr(i);
      if (ri[col] == 0) continue;
      std::uint64_t f = mulmod(ri[col], inv);
      std::uint64_t negf = prime - f;
      for (int j = col; j < n; ++j)
        if (pr[j]) ri[j] = (ri[j] + mulmod(negf, pr[j])) % prime;
    }
    ++row;
    ++rank;
  }
  return rank;
}

double s_order_statistic(const std::vector<double>& svals, int beta) {
  const int n = int(svals.size());
  if (beta < 1 || beta > n) throw std::invalid_argument("s_order_statistic: beta out of range");
  return svals[std::size_t(n - beta)];
}

double s_order_statistic(const MatrixSample& A, int beta) {
  return s_order_statistic(singular_values(A), beta);
}

MinMaxCheck submatrix_minmax_check(const MatrixSample& A, int beta, int subset_trials,
                                   std::uint64_t seed) {
  if (beta < 1 || beta > A.n()) throw std::invalid_argument("minmax: beta out of range");
  if (subset_trials < 1) throw std::invalid_argument("minmax: need >= 1 subset trial");
  const int n = A.n();
  const int k = n - beta + 1;
  auto sv = singular_values(A);
  MinMaxCheck out;
  out.lhs = s_order_statistic(sv, beta);
  const double s1 = sv.empty() ? 0.0 : sv.front();
  Matrix full = Matrix::from_sample(A);

  CounterRng rng(seed, 0x5b0);
  std::vector<int> pool(n);
  auto sample_subset = [&](std::vector<int>& out_idx) {
    for (int i = 0; i < n; ++i) pool[i] = i;
    for (int t = 0; t < k; ++t) {
      int pick = t + int(rng.uniform_index(std::uint64_t(n - t)));
      std::swap(pool[t], pool[pick]);
    }
    out_idx.assign(pool.begin(), pool.begin() + k);
    std::sort(out_idx.begin(), out_idx.end());
  };

  out.best_rhs = 0.0;
  std::vector<int> I, J;
  Matrix sub(k, k);
  for (int t = 0; t < subset_trials; ++t) {
    if (beta == 1) {
      // Only one subset exists: the full index set.
      out.best_rhs = std::max(out.best_rhs, sv.back());
      break;
    }
    sample_subset(I);
    sample_subset(J);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) sub.at(i, j) = full.at(I[i], J[j]);
    auto ssv = singular_values(sub);
    out.best_rhs = std::max(out.best_rhs, ssv.back());
  }
  out.holds = out.lhs >= out.best_rhs - 1e-8 * s1;
  return out;
}

double column_distance(const Matrix& A, int i) {
  const int m = A.rows, n = A.cols;
  if (n < 2) throw std::invalid_argument("column_distance: need >= 2 columns");
  // Orthonormalize the other columns by modified Gram-Schmidt with
  // reorthogonalization, dropping numerically dependent columns, then take
  // the residual of column i against the basis.
  std::vector<std::vector<double>> basis;
  double maxnorm = 0;
  for (int j = 0; j < n; ++j) {
    double s = 0;
    for (int r = 0; r < m; ++r) s += A.at(r, j) * A.at(r, j);
    maxnorm = std::max(maxnorm, std::sqrt(s));
  }
  const double tol = 1e-12 * std::max(1.0, maxnorm) * std::sqrt(double(m));
  std::vector<double> v(m);
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    for (int r = 0; r < m; ++r) v[r] = A.at(r, j);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        double d = 0;
        for (int r = 0; r < m; ++r) d += v[r] * b[r];
        for (int r = 0; r < m; ++r) v[r] -= d * b[r];
      }
    }
    double nv = 0;
    for (int r = 0; r < m; ++r) nv += v[r] * v[r];
    nv = std::sqrt(nv);
    if (nv > tol) {
      for (int r = 0; r < m; ++r) v[r] /= nv;
      basis.push_back(v);
    }
  }
  for (int r = 0; r < m; ++r) v[r] = A.at(r, i);
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : basis) {
      double d = 0;
      for (int r = 0; r < m; ++r) d += v[r] * b[r];
      for (int r = 0; r < m; ++r) v[r] -= d * b[r];
    }
  }
  double res = 0;
  for (int r = 0; r < m; ++r) res += v[r] * v[r];
  res = std::sqrt(res);
  return res > tol ? res : 0.0;
}

double column_distance(const MatrixSample& A, int i) {
  return column_distance(Matrix::from_sample(A), i);
}

double operator_norm(const Matrix& A, int iters) {
  const int m = A.rows, n = A.cols;
  std::vector<double> x(n), y(m);
  for (int j = 0; j < n; ++j) x[j] = 1.0 + 1e-3 * ((j * 2654435761u) % 97);
  double norm = 0;
  for (int it = 0; it < iters; ++it) {
    for (int i = 0; i < m; ++i) {
      double s = 0;
      for (int j = 0; j < n; ++j) s += A.at(i, j) * x[j];
      y[i] = s;
    }
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int i = 0; i < m; ++i) s += A.at(i, j) * y[i];
      x[j] = s;
    }
    double nx = 0;
    for (double v : x) nx += v * v;
    nx = std::sqrt(nx);
    if (nx == 0) return 0.0;
    for (double& v : x) v /= nx;
    norm = std::sqrt(nx);
  }
  return norm;
}

int float_rank(const std::vector<double>& svals, double tol) {
  int r = 0;
  for (double s : svals)
    if (s > tol) ++r;
  return r;
}

SpectralReport spectral_report(const MatrixSample& A, double tol_scale) {
  SpectralReport rep;
  rep.singular_values = singular_values(A);
  rep.exact_rank = exact_rank(A);
  rep.corank = A.n() - rep.exact_rank;
  double s1 = rep.singular_values.empty() ? 0.0 : rep.singular_values.front();
  rep.tolerance = tol_scale * s1 * A.n();
  return rep;
}

}  // namespace spectra
