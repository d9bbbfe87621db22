#pragma once

#include <Eigen/Dense>
#include <array>
#include <utility>
#include <vector>

#include "bmv/errors.hpp"

namespace bmv {

// Real symmetric 3x3 matrix, exactly symmetric after ingestion.
struct SymmetricMatrix3 {
  Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
  double sym_delta = 0.0;  // largest adjustment applied by symmetrization

  double a1() const { return a(0, 0); }
  double a2() const { return a(1, 1); }
  double a3() const { return a(2, 2); }
  double a12() const { return a(0, 1); }
  double a13() const { return a(0, 2); }
  double a23() const { return a(1, 2); }
  Eigen::Vector3d diagonal() const { return a.diagonal(); }
};

// Nonnegative diagonal 3x3 matrix, stored as its diagonal.
struct DiagonalMatrix3 {
  Eigen::Vector3d b = Eigen::Vector3d::Zero();

  double b1() const { return b(0); }
  double b2() const { return b(1); }
  double b3() const { return b(2); }
  Eigen::Matrix3d matrix() const { return b.asDiagonal(); }
};

struct BMVProblem {
  SymmetricMatrix3 A;
  DiagonalMatrix3 B;
};

// Normal form: indices permuted and the diagonal of B shifted so that
// 0 = b1 < b3 < b2 (when not degenerate), optionally with the diagonal of A
// shifted for conditioning. perm[slot] is the original index now sitting in
// that slot; applying (perm, b_shift, a_shift) backwards recovers the input.
struct CanonicalForm {
  BMVProblem problem;
  std::array<int, 3> perm = {0, 1, 2};
  double b_shift = 0.0;
  double a_shift = 0.0;
  double mass_scale = 1.0;  // exp(a_shift)
  bool degenerate = false;
  double tie_tol = 0.0;

  double b2() const { return problem.B.b2(); }
  double b3() const { return problem.B.b3(); }
};

// Atoms plus a sampled density. When quad_w is nonempty it holds quadrature
// weights matching xs, so integrals against the density are plain dot
// products; otherwise xs is a uniform midpoint grid per interval.
struct SignedMeasure {
  std::vector<std::pair<double, double>> atoms;  // (location, weight)
  std::vector<double> xs;
  std::vector<double> psis;
  std::vector<double> tail_bounds;
  std::vector<int> interval_tag;  // 0 = below the middle breakpoint, 1 = above
  std::vector<double> quad_w;
  double support_lo = 0.0;
  double support_hi = 0.0;
  std::vector<double> breakpoints;
};

BMVProblem ingest(const Eigen::Matrix3d& raw_A, const Eigen::Vector3d& raw_B,
                  double sym_tol = 1e-12);

// tie_tol < 0 selects the default 1e-9 * (1 + max b). normalize_a subtracts
// max a_ii from the diagonal to keep atom weights exp(a_ii) from overflowing.
CanonicalForm canonicalize(const BMVProblem& p, double tie_tol = -1.0,
                           bool normalize_a = false);

// Conjugate A by the permutation that puts original index perm[slot] in slot.
Eigen::Matrix3d permute_conjugate(const Eigen::Matrix3d& a, const std::array<int, 3>& perm);

}  // namespace bmv
