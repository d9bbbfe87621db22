#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

#include "bmv/core.hpp"
#include "bmv/density.hpp"

namespace bmv {

// tr exp(A - zB) through the symmetric eigendecomposition.
double trace_exp(const BMVProblem& p, double z);

// Laplace transform of a sampled measure: atom sum plus piecewise quadrature
// of e^{-zx} psi(x) respecting the interior breakpoint. Uses stored
// quadrature weights when present, otherwise a composite rule on the uniform
// midpoint grid (>= 64 samples per interval required).
double laplace_of_measure(const SignedMeasure& m, double z);

struct BernsteinRow {
  double z = 0;
  double phi = 0;
  double dphi_trace = 0;       // -tr(exp(A-zB) B)
  double dphi_fd = 0;          // central differences, Richardson-extrapolated
  double d2phi_closed = 0;     // eigenbasis closed form of the commutator integral
  double d2phi_quad = 0;       // fixed-order quadrature of the same integral
  double d2phi_fd = 0;
  bool signs_ok = false;       // phi >= 0, -phi' >= 0, phi'' >= 0
};

struct BernsteinReport {
  std::vector<BernsteinRow> rows;
  double max_dphi_mismatch = 0;   // relative, trace formula vs finite differences
  double max_d2phi_mismatch = 0;  // relative, closed form vs quadrature
  bool all_signs_ok = false;
};

BernsteinReport bernstein_checks(const BMVProblem& p, const std::vector<double>& z_grid);

struct Certificate {
  enum class Verdict { proven_positive, unknown };
  enum class Reason {
    commuting,
    dim_le2,
    two_eigenvalues,
    degenerate_tie,
    nonneg_product,
    theorem_th,
  };
  Verdict verdict = Verdict::unknown;
  std::vector<Reason> reasons;
  // Slack of the two sufficient positivity conditions after canonicalization:
  // per-interval coupling dominance and the diagonal functional (two
  // algebraically equal writings of the latter are recorded).
  double cond1_lower = 0;  // |a12|/sqrt(b2-b1) - |a13|/sqrt(b3-b1)
  double cond1_upper = 0;  // |a12|/sqrt(b2-b1) - |a23|/sqrt(b2-b3)
  double cond2 = 0;        // a11(b2-b3) + a22(b3-b1) + a33(b1-b2)
  double cond2_b1zero = 0; // a1(b2-b3) + a2 b3 - a3 b2 in the shifted frame
};

const char* to_string(Certificate::Reason r);
const char* to_string(Certificate::Verdict v);

Certificate certificate(const BMVProblem& p);

struct CounterexamplePoint {
  double x = 0;
  double ratio = 0;  // 12 psi_1(x) / eps^4 from the truncated loop sum
  double poly = 0;   // 3(1-x) - 6(1-x)^2 + 2(1-x)^3
};

struct CounterexampleReport {
  double eps = 0;
  int n_max = 0;
  std::vector<CounterexamplePoint> points;
  double max_abs_dev = 0;       // max |ratio - poly| over the grid
  bool negative_near_zero = false;  // ratio < 0 wherever x <= 0.05
};

// The first-conjecture counterexample: the e1-component measure of
// A = [[0, eps^2/2, eps], [eps^2/2, 0, -eps], [eps, -eps, 0]], B = diag(0,1,0)
// acquires a negative density near x = 0.
CounterexampleReport counterexample(double eps, const std::vector<double>& x_grid, int n_max = 8);

struct InvarianceReport {
  double max_rel_a_shift = 0;      // diagonal shift of A scales the trace by e^shift
  double max_rel_b_shift = 0;      // shift of B scales by e^{-z shift}
  double max_rel_permutation = 0;  // conjugation by any of the 6 permutations
  double max_rel_roundtrip = 0;    // canonicalization record reproduces the trace
  bool ok(double tol = 1e-12) const {
    return max_rel_a_shift <= tol && max_rel_b_shift <= tol && max_rel_permutation <= tol &&
           max_rel_roundtrip <= tol;
  }
};

InvarianceReport invariance_checks(const BMVProblem& p,
                                   const std::vector<double>& z_grid = {0.0, 0.5, 1.0, 2.0, 5.0});

// Seeded generator of test problems: A entries uniform in [-2,2], B already
// canonical with both gaps at least 0.2.
BMVProblem random_problem(std::mt19937_64& rng);

// Rejection-sampled problems satisfying both sufficient positivity conditions.
BMVProblem random_positive_problem(std::mt19937_64& rng);

}  // namespace bmv
