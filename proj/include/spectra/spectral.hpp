#pragma once
#include <cstdint>
#include <vector>

#include "spectra/model.hpp"

namespace spectra {

// Minimal dense row-major matrix of doubles.
struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(std::size_t(r) * c, 0.0) {}
  static Matrix from_sample(const MatrixSample& m) {
    Matrix out(m.n(), m.n());
    out.a = m.dense();
    return out;
  }
  double& at(int i, int j) { return a[std::size_t(i) * cols + j]; }
  double at(int i, int j) const { return a[std::size_t(i) * cols + j]; }
};

struct SpectralReport {
  std::vector<double> singular_values;  // non-increasing
  int exact_rank = 0;
  int corank = 0;
  double tolerance = 0.0;
};

// One-sided Jacobi on the column set: high relative accuracy for the small
// singular values. Returns all min(rows, cols) singular values, non-increasing.
std::vector<double> singular_values(const Matrix& A);
std::vector<double> singular_values(const MatrixSample& A);

// LAPACK dgesdd; absolute-accuracy fast path for bulk Monte Carlo.
std::vector<double> singular_values_fast(const Matrix& A);

// Rank over the rationals by Bareiss fraction-free elimination on
// arbitrary-precision integers. Exact; no tolerance.
int exact_rank(const MatrixSample& A);
int exact_rank_int(const std::vector<long long>& entries, int rows, int cols);

// Rank over GF(prime) by modular Gaussian elimination. Always a lower bound
// on the rational rank; equality fails only if the prime divides a pivotal
// minor. Used as the cheap certified-direction rank monitor in bulk runs.
int rank_mod_prime(const MatrixSample& A, std::uint64_t prime = (1ULL << 31) - 1);

// s_{n-beta+1}(A): the beta-th smallest singular value.
double s_order_statistic(const std::vector<double>& svals, int beta);
double s_order_statistic(const MatrixSample& A, int beta);

struct MinMaxCheck {
  double lhs = 0;       // s_{n-beta+1}(A)
  double best_rhs = 0;  // max over sampled (I, J) of s_min(A_{I,J})
  bool holds = false;   // lhs >= best_rhs - 1e-8 * s1
};

// Variational characterization: s_{n-beta+1}(A) dominates s_min of every
// (n-beta+1) x (n-beta+1) submatrix. Samples `subset_trials` index pairs.
MinMaxCheck submatrix_minmax_check(const MatrixSample& A, int beta, int subset_trials,
                                   std::uint64_t seed);

// Euclidean distance from column i to the span of the other columns.
double column_distance(const Matrix& A, int i);
double column_distance(const MatrixSample& A, int i);

// Largest singular value via power iteration on A^T A (deterministic start).
double operator_norm(const Matrix& A, int iters = 120);

SpectralReport spectral_report(const MatrixSample& A, double tol_scale = 1e-8);

// Floating-point numerical rank: number of singular values above tol.
int float_rank(const std::vector<double>& svals, double tol);

}  // namespace spectra
