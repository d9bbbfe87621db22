#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "bmv/core.hpp"
#include "bmv/paths.hpp"

namespace bmv {

// Lower-interval data of a canonical problem (b1 = 0, 0 < b3 <= b2). The
// upper interval is handled by evaluating the lower-interval formulas on the
// 1 <-> 2 swapped problem with b2 -> b2, b3 -> b2 - b3 at b2 - x.
struct CanonicalView {
  double b2 = 0, b3 = 0;
  double a1 = 0, a2 = 0, a3 = 0;
  double a12 = 0, a13 = 0, a23 = 0;

  Eigen::Vector3d diag() const { return {a1, a2, a3}; }
};

CanonicalView lower_view(const CanonicalForm& cf);
CanonicalView upper_view(const CanonicalForm& cf);

enum class Interval { lower, upper };

// Per-x quantities entering the series representations. On the upper
// interval x2, x3 hold the swapped-frame coordinates (y1, y3).
struct GeometryParams {
  Interval interval = Interval::lower;
  double x = 0;  // evaluation point inside the view frame
  double x2 = 0, x3 = 0;
  double lam = 0, mu = 0;
  double A12 = 0, A13 = 0;
  double v = 0, xi = 0;
  double w1 = 0, w2 = 0, omega = 0;
};

GeometryParams geometry_in_view(double x, const CanonicalView& view);

// Locates x relative to the breakpoints {0, b3, b2} and produces the frame
// the density formulas run in. Breakpoint when x is within breakpoint_tol
// (default 1e-9 * b2) of a breakpoint; DegenerateB when the form is
// degenerate.
struct FramePoint {
  CanonicalView view;
  double x = 0;
  Interval interval = Interval::lower;
};
FramePoint locate(double x, const CanonicalForm& cf, double breakpoint_tol = -1.0);

GeometryParams geometry(double x, const CanonicalForm& cf, double breakpoint_tol = -1.0);

// Density on the 2-simplex with respect to the half-area measure:
// beta(k) xi1^(k1-1) xi2^(k2-1) xi3^(k3-1) exp(a . xi), all k_i >= 1.
double simplex_f(double xi1, double xi2, double xi3, const PathCharacteristic& k,
                 const Eigen::Vector3d& a_diag);

// Per-path density at x in the lower interval of the view; depends on the
// path only through (characteristic, start). Zero when k1 = 0; closed Beta
// forms when k2 = 0 or k3 = 0; quadrature otherwise.
double phi(const PathCharacteristic& k, int start, double x, const CanonicalView& view);
double phi(const PathCharacteristic& k, int start, double x, const CanonicalForm& cf);

enum class ChiRoute { quadrature, series };

// Start-averaged per-characteristic density. The series route is the
// closed double sum; the quadrature route integrates the simplex density
// along the section line.
double chi(const PathCharacteristic& k, double x, const CanonicalView& view,
           ChiRoute route = ChiRoute::quadrature);
double chi(const PathCharacteristic& k, double x, const CanonicalForm& cf,
           ChiRoute route = ChiRoute::quadrature);

struct TruncationPolicy {
  int n_max = 20;
  double tol = 1e-10;
  std::optional<double> max_tail;  // raise TailBoundExceeded when the bound exceeds this
};

struct PsiResult {
  double value = 0;
  double tail_bound = 0;
};

// Rigorous bound on the discarded n > n_max remainder of the loop sum.
double psi_tail_bound(int n_max, double x, const CanonicalView& view);

using PsiTermObserver = std::function<void(const PathCharacteristic&, double)>;

// The three routes to the absolutely continuous density. All truncate the
// loop sum at total length n_max; route values agree to roundoff at matched
// truncation.
PsiResult psi_bruteforce_view(double x, const CanonicalView& view, const TruncationPolicy& tp,
                              const PsiTermObserver& observer = {});
PsiResult psi_le12_view(double x, const CanonicalView& view, const TruncationPolicy& tp);
PsiResult psi_le13_view(double x, const CanonicalView& view, const TruncationPolicy& tp);

PsiResult psi_bruteforce(double x, const CanonicalForm& cf, const TruncationPolicy& tp);
PsiResult psi_le12(double x, const CanonicalForm& cf, const TruncationPolicy& tp);
PsiResult psi_le13(double x, const CanonicalForm& cf, const TruncationPolicy& tp);

enum class PsiMethod { bruteforce, le12, le13 };

PsiResult psi(double x, const CanonicalForm& cf, const TruncationPolicy& tp, PsiMethod method);

struct GridSpec {
  enum class Kind { uniform_midpoint, gauss } kind = Kind::uniform_midpoint;
  int points_per_interval = 200;
};

// Atoms at the original b_i with weights exp(a_ii), density sampled per
// interval and mapped back through the canonicalization record. DegenerateB
// when two b's tie within tolerance. A le13 request falls back to le12 when
// the resummed route is unavailable (a12 = a13 = 0 direction).
SignedMeasure build_measure(const BMVProblem& p, const GridSpec& grid, const TruncationPolicy& tp,
                            PsiMethod method);

}  // namespace bmv
