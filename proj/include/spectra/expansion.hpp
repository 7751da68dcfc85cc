#pragma once
#include <cstdint>
#include <vector>

#include "spectra/model.hpp"
#include "spectra/probability.hpp"
#include "spectra/structure.hpp"

namespace spectra {

// Partition of A induced by the low-support column set J and the rows I that
// meet it: H = A[I, J], W = A[I, Jc], D = A[Ic, Jc]; A[Ic, J] is zero by
// construction (verified).
struct BlockDecomposition {
  int n = 0;
  int threshold = 0;
  std::vector<int> j_cols, i_rows;    // sorted ascending
  std::vector<int> jc_cols, ic_rows;  // complements, sorted ascending
};

BlockDecomposition block_decomposition(const MatrixSample& A, int threshold);

// Dense copy of the submatrix A[rows, cols] (0/1 entries as doubles).
std::vector<double> extract_block(const MatrixSample& A, const std::vector<int>& rows,
                                  const std::vector<int>& cols);

// Rows with exactly one 1 among columns J2, that 1 lying in J1. Requires
// J1 subset of J2. Optional row restriction (e.g. to the D block's rows).
std::vector<int> expansion_set(const MatrixSample& A, const std::vector<int>& j1,
                               const std::vector<int>& j2);
std::vector<int> expansion_set_rows(const MatrixSample& A, const std::vector<int>& j1,
                                    const std::vector<int>& j2,
                                    const std::vector<int>& rows);

struct OmegaDConfig {
  int trials = 64;            // randomized (J1, J2) audit budget
  bool dense_range = false;   // use the dense-regime (n1, |J2|) windows
  std::uint64_t seed = 0;
};

struct EventReport {
  bool omega1 = false;
  bool omega_j = false;
  bool omega_w = false;
  bool omega_d = false;
  bool omega_row = false;
  bool omega_norm = false;
  bool omega_rc = false;
  bool omega0 = false;
  int j_size = 0;
  int audit_trials = 0;
  int audit_failures = 0;
  double norm_stat = 0;  // max of ||A - pJ||/sqrt(pn) and (||A|| - pn)/sqrt(pn)
};

// Deterministic evaluation of the typicality events on one sample; the
// exponentially-quantified D-block expansion event is audited on random
// (J1, J2) pairs within the stated size windows plus an adversarial pair
// built from the smallest-support columns.
// with_norm=false skips the operator-norm event (the costly part) for bulk
// batches that only need the combinatorial events.
EventReport check_events(const MatrixSample& A, const ClassParams& cp, int beta,
                         const ProbabilityConstants& consts,
                         const OmegaDConfig& dcfg = OmegaDConfig{}, bool with_norm = true);

// |{ i : |(Ax)_i| >= threshold }|
int steep_image_count(const MatrixSample& A, const std::vector<double>& x, double threshold);

struct TailExperiment {
  double empirical = 0;
  double bound = 0;
  bool bound_valid = false;  // t > max(6*S*s/m1, 1) required for the bound
};

// Random-subset overlap process: T_0 of size sizes[0], T_l of size sizes[l]
// (l >= 1), X_l = |T_l meets union of earlier sets|; estimates
// P(sum X_l >= t*k) and compares with C_hg^k exp(-log(t/(6Ss/m1)) t k).
TailExperiment expansion_tail_experiment(int m1, const std::vector<int>& sizes, int trials,
                                         double t, std::uint64_t seed, double c_hg = 2.0);

struct SteepAudit {
  int trials = 0;
  int conditioned = 0;  // samples passing the deterministic events
  int failures = 0;     // conditioned samples where neither guarantee held
};

// For samples passing the deterministic typicality events, constructs steep
// band-j vectors supported on nonzero columns and checks that either
// ||A[I,:]x|| >= theta or the image has > k/8 (sparse) / > beta (dense)
// coordinates of size >= theta, with theta = x*_{n_{j-1}} / 2.
SteepAudit steep_guarantee_audit(const ModelParams& mp, const ClassParams& cp,
                                 const ProbabilityConstants& consts, int samples,
                                 std::uint64_t seed);

}  // namespace spectra
