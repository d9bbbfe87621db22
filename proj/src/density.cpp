#include "bmv/density.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "bmv/hyperfun.hpp"
#include "bmv/numerics.hpp"

namespace bmv {

namespace {

double inner_tol(const TruncationPolicy& tp) {
  return std::max(1e-15, std::min(1e-12, tp.tol * 1e-2));
}

void check_view(const CanonicalView& view) {
  if (!(view.b3 > 0.0) || !(view.b2 >= view.b3))
    raise(errc::bad_input, "view requires 0 < b3 <= b2");
}

void check_lower_x(double x, const CanonicalView& view) {
  if (!(x > 0.0) || !(x < view.b3))
    raise(errc::bad_input, "x must lie strictly inside the lower interval (0, b3)");
}

}  // namespace

CanonicalView lower_view(const CanonicalForm& cf) {
  const SymmetricMatrix3& A = cf.problem.A;
  CanonicalView v;
  v.b2 = cf.b2();
  v.b3 = cf.b3();
  v.a1 = A.a1();
  v.a2 = A.a2();
  v.a3 = A.a3();
  v.a12 = A.a12();
  v.a13 = A.a13();
  v.a23 = A.a23();
  return v;
}

CanonicalView upper_view(const CanonicalForm& cf) {
  // Swap indices 1 and 2 and reflect the potential: b2 -> b2, b3 -> b2 - b3.
  CanonicalView v = lower_view(cf);
  std::swap(v.a1, v.a2);
  std::swap(v.a13, v.a23);
  v.b3 = v.b2 - v.b3;
  return v;
}

GeometryParams geometry_in_view(double x, const CanonicalView& view) {
  check_view(view);
  check_lower_x(x, view);
  GeometryParams g;
  g.x = x;
  g.x2 = x / view.b2;
  g.x3 = x / view.b3;
  g.lam = view.a1 * (g.x2 - g.x3) - view.a2 * g.x2 + view.a3 * g.x3;
  g.mu = view.a1 * (1.0 - g.x2) + view.a2 * g.x2;
  g.A12 = view.a12 * std::sqrt(g.x2);
  g.A13 = view.a13 * std::sqrt(g.x3);
  double n2 = g.A12 * g.A12 + g.A13 * g.A13;
  if (n2 > 0.0) {
    g.v = 2.0 * g.A12 * g.A13 / n2;
    g.omega = (g.A12 * g.A12 - g.A13 * g.A13) / n2;
  }
  g.xi = view.a23 * std::sqrt(g.x2 * g.x3);
  g.w1 = 0.5 * (1.0 - g.x3) * n2;
  g.w2 = (g.x3 - g.x2) / (2.0 * (1.0 - g.x3));
  return g;
}

FramePoint locate(double x, const CanonicalForm& cf, double breakpoint_tol) {
  if (cf.degenerate)
    raise(errc::degenerate_b, "DegenerateB: tied eigenvalues of B; density engine requires 0 = b1 < b3 < b2");
  const double b2 = cf.b2(), b3 = cf.b3();
  if (breakpoint_tol < 0.0) breakpoint_tol = 1e-9 * b2;
  for (double bp : {0.0, b3, b2}) {
    if (std::abs(x - bp) <= breakpoint_tol) {
      std::ostringstream os;
      os << "Breakpoint: x = " << x << " is within " << breakpoint_tol << " of " << bp;
      raise(errc::breakpoint, os.str());
    }
  }
  if (x < 0.0 || x > b2) raise(errc::bad_input, "x outside the support [0, b2]");
  FramePoint fp;
  if (x < b3) {
    fp.view = lower_view(cf);
    fp.x = x;
    fp.interval = Interval::lower;
  } else {
    fp.view = upper_view(cf);
    fp.x = b2 - x;
    fp.interval = Interval::upper;
  }
  return fp;
}

GeometryParams geometry(double x, const CanonicalForm& cf, double breakpoint_tol) {
  FramePoint fp = locate(x, cf, breakpoint_tol);
  GeometryParams g = geometry_in_view(fp.x, fp.view);
  g.interval = fp.interval;
  return g;
}

double simplex_f(double xi1, double xi2, double xi3, const PathCharacteristic& k,
                 const Eigen::Vector3d& a_diag) {
  if (k.k1 < 1 || k.k2 < 1 || k.k3 < 1)
    raise(errc::bad_input, "simplex_f requires all visit counts >= 1");
  if (xi1 < 0 || xi2 < 0 || xi3 < 0 || std::abs(xi1 + xi2 + xi3 - 1.0) > 1e-12)
    raise(errc::bad_input, "simplex_f requires barycentric coordinates");
  double beta = factorial(k.n() - 1) /
                (factorial(k.k1 - 1) * factorial(k.k2 - 1) * factorial(k.k3 - 1));
  auto p = [](double t, int e) { return e == 0 ? 1.0 : ipow(t, e); };
  return beta * p(xi1, k.k1 - 1) * p(xi2, k.k2 - 1) * p(xi3, k.k3 - 1) *
         std::exp(a_diag(0) * xi1 + a_diag(1) * xi2 + a_diag(2) * xi3);
}

namespace {

int quad_order_for(int n) { return n > 40 ? 128 : 64; }

// Section-line integral of W(t) * f(xi(t)) with xi(t) the parametrized chord
// and W the per-start weight (or 1 for the start average).
double line_integral(const PathCharacteristic& k, int start, double x2, double x3, double lam,
                     double mu) {
  const Quadrature& q = gauss_legendre_01(quad_order_for(k.n()));
  auto p = [](double t, int e) { return e == 0 ? 1.0 : ipow(t, e); };
  KahanSum<double> acc;
  for (std::size_t i = 0; i < q.x.size(); ++i) {
    double t = q.x[i];
    double xi1 = (1.0 - x2) + t * (x2 - x3);
    double xi2 = x2 * (1.0 - t);
    double xi3 = x3 * t;
    double w = 1.0;
    if (start == 1) w = xi1 / k.k1;
    else if (start == 2) w = xi2 / k.k2;
    else if (start == 3) w = xi3 / k.k3;
    acc.add(q.w[i] * w * p(xi1, k.k1 - 1) * p(xi2, k.k2 - 1) * p(xi3, k.k3 - 1) *
            std::exp(mu + lam * t));
  }
  double beta = factorial(k.n() - 1) /
                (factorial(k.k1 - 1) * factorial(k.k2 - 1) * factorial(k.k3 - 1));
  return beta * acc.value();
}

}  // namespace

double phi(const PathCharacteristic& k, int start, double x, const CanonicalView& view) {
  check_view(view);
  check_lower_x(x, view);
  if (start < 1 || start > 3) raise(errc::bad_input, "start must be in {1,2,3}");
  const int n = k.n();
  if (n < 2 || k.k1 < 0 || k.k2 < 0 || k.k3 < 0)
    raise(errc::bad_input, "characteristic must have n >= 2 and nonnegative counts");
  int ks = start == 1 ? k.k1 : (start == 2 ? k.k2 : k.k3);
  if (ks < 1) raise(errc::bad_input, "start state must be visited");

  if (k.k1 == 0) return 0.0;
  if (k.k2 == 0 && k.k3 == 0) return 0.0;  // no favorable path stays at one state
  const double x2 = x / view.b2, x3 = x / view.b3;

  if (k.k2 == 0) {
    // Degenerate edge on conv{e1, e3}; n is even for any actual path here.
    double c = factorial(k.k1 + k.k3 - 1) /
               (factorial(n - 1) * factorial(k.k1 - 1) * factorial(k.k3 - 1));
    double e = std::exp(view.a1 * (1.0 - x3) + view.a3 * x3);
    if (start == 1) return c * e * ipow(1.0 - x3, k.k1) * ipow(x3, k.k3 - 1) / (k.k1 * view.b3);
    return c * e * ipow(1.0 - x3, k.k1 - 1) * ipow(x3, k.k3) / (k.k3 * view.b3);
  }
  if (k.k3 == 0) {
    double c = factorial(k.k1 + k.k2 - 1) /
               (factorial(n - 1) * factorial(k.k1 - 1) * factorial(k.k2 - 1));
    double e = std::exp(view.a1 * (1.0 - x2) + view.a2 * x2);
    if (start == 1) return c * e * ipow(1.0 - x2, k.k1) * ipow(x2, k.k2 - 1) / (k.k1 * view.b2);
    return c * e * ipow(1.0 - x2, k.k1 - 1) * ipow(x2, k.k2) / (k.k2 * view.b2);
  }

  double lam = view.a1 * (x2 - x3) - view.a2 * x2 + view.a3 * x3;
  double mu = view.a1 * (1.0 - x2) + view.a2 * x2;
  // sqrt(x2 x3 / (b2 b3)) = x2 x3 / x
  return line_integral(k, start, x2, x3, lam, mu) * (x2 * x3 / x) / factorial(n - 1);
}

double phi(const PathCharacteristic& k, int start, double x, const CanonicalForm& cf) {
  FramePoint fp = locate(x, cf);
  if (fp.interval == Interval::upper)
    raise(errc::bad_input, "phi(cf) is defined on the lower interval; swap the frame first");
  return phi(k, start, fp.x, fp.view);
}

namespace {

double chi_series(const PathCharacteristic& k, double x, const CanonicalView& view, double tol) {
  const int n = k.n();
  const double x2 = x / view.b2, x3 = x / view.b3;
  const double lam = view.a1 * (x2 - x3) - view.a2 * x2 + view.a3 * x3;
  const double mu = view.a1 * (1.0 - x2) + view.a2 * x2;

  // Two equivalent expansions from the endpoints of the section line; pick
  // the one whose outer exponential series has nonnegative terms.
  const bool from_upper = lam <= 0.0;
  const double base = from_upper ? 1.0 - x3 : 1.0 - x2;
  const double ratio = from_upper ? (x3 - x2) / (1.0 - x3) : (x2 - x3) / (1.0 - x2);
  const double expo = from_upper ? mu + lam : mu;
  const double rho = from_upper ? -lam : lam;  // expansion variable, >= 0
  const int kc = from_upper ? k.k2 : k.k3;     // rising-factorial base

  KahanSum<double> acc;
  const int l_min = 6 + static_cast<int>(std::ceil(2.0 * std::abs(lam)));
  for (int r = 0; r <= k.k1 - 1; ++r) {
    double cr = binomial(k.k1 - 1, r) * ipow(ratio, r);
    if (cr == 0.0) continue;
    KahanSum<double> sl;
    double c = rising(static_cast<double>(kc), r) / factorial(k.k2 + k.k3 + r - 1);
    int small = 0;
    for (int L = 0; L <= 500; ++L) {
      sl.add(c);
      if (L >= l_min) {
        if (std::abs(c) <= tol * (1.0 + std::abs(sl.value()))) {
          if (++small >= 3) break;
        } else {
          small = 0;
        }
      }
      if (L == 500) raise(errc::truncation_failure, "chi series L-sum did not converge");
      c *= rho * (kc + r + L) / ((L + 1.0) * (k.k2 + k.k3 + r + L));
    }
    acc.add(cr * sl.value());
  }
  return ipow(base, k.k1 - 1) * ipow(x2, k.k2) * ipow(x3, k.k3) * std::exp(expo) * acc.value() /
         (n * x * factorial(k.k1 - 1));
}

}  // namespace

double chi(const PathCharacteristic& k, double x, const CanonicalView& view, ChiRoute route) {
  check_view(view);
  check_lower_x(x, view);
  const int n = k.n();
  if (n < 2 || k.k1 < 0 || k.k2 < 0 || k.k3 < 0)
    raise(errc::bad_input, "characteristic must have n >= 2 and nonnegative counts");
  if (k.k1 == 0) return 0.0;
  if (k.k2 == 0 && k.k3 == 0) return 0.0;
  const double x2 = x / view.b2, x3 = x / view.b3;

  if (route == ChiRoute::series) return chi_series(k, x, view, 1e-14);

  if (k.k2 == 0) {
    double c = factorial(k.k1 + k.k3 - 1) / (factorial(k.k1 - 1) * factorial(k.k3 - 1));
    return c * ipow(x3, k.k3 - 1) * ipow(1.0 - x3, k.k1 - 1) *
           std::exp(view.a1 * (1.0 - x3) + view.a3 * x3) / (factorial(n) * view.b3);
  }
  if (k.k3 == 0) {
    double c = factorial(k.k1 + k.k2 - 1) / (factorial(k.k1 - 1) * factorial(k.k2 - 1));
    return c * ipow(x2, k.k2 - 1) * ipow(1.0 - x2, k.k1 - 1) *
           std::exp(view.a1 * (1.0 - x2) + view.a2 * x2) / (factorial(n) * view.b2);
  }
  double lam = view.a1 * (x2 - x3) - view.a2 * x2 + view.a3 * x3;
  double mu = view.a1 * (1.0 - x2) + view.a2 * x2;
  return line_integral(k, 0, x2, x3, lam, mu) * (x2 * x3 / x) / factorial(n);
}

double chi(const PathCharacteristic& k, double x, const CanonicalForm& cf, ChiRoute route) {
  FramePoint fp = locate(x, cf);
  if (fp.interval == Interval::upper)
    raise(errc::bad_input, "chi(cf) is defined on the lower interval; swap the frame first");
  return chi(k, fp.x, fp.view, route);
}

double psi_tail_bound(int n_max, double x, const CanonicalView& view) {
  const double amax = std::max({std::abs(view.a12), std::abs(view.a13), std::abs(view.a23)});
  if (amax == 0.0) return 0.0;
  const double abar = std::exp(std::max({view.a1, view.a2, view.a3}));
  const double q = x / (view.b2 * view.b3);
  KahanSum<double> acc;
  for (int n = n_max + 1; n <= 400; ++n) {
    if (n > 170) break;  // terms vanish to double precision long before this
    // interior characteristics: |C_n| <= 3 2^(n-1), chi <= q (n-1)(n-2) e/n!
    double interior = 1.5 * ipow(2.0, n) * q * (n - 1.0) * (n - 2.0) / factorial(n);
    // edge characteristics (one zero count): <= 4 paths, chi <= (n-1) e / (n! b3)
    double edge = 4.0 * (n - 1.0) / (factorial(n) * view.b3);
    double term = ipow(amax, n) * abar * (interior + edge);
    acc.add(term);
    if (term < 1e-30 * (1.0 + acc.value()) && n > n_max + 5) break;
  }
  return acc.value();
}

namespace {

void enforce_tail(const TruncationPolicy& tp, const PsiResult& r) {
  if (tp.max_tail && r.tail_bound > *tp.max_tail) {
    std::ostringstream os;
    os << "TailBoundExceeded: reported tail " << r.tail_bound << " exceeds " << *tp.max_tail;
    raise(errc::tail_bound_exceeded, os.str());
  }
}

}  // namespace

PsiResult psi_bruteforce_view(double x, const CanonicalView& view, const TruncationPolicy& tp,
                              const PsiTermObserver& observer) {
  check_view(view);
  check_lower_x(x, view);
  if (tp.n_max < 2) raise(errc::bad_input, "n_max must be >= 2");
  KahanSum<double> acc;
  for (int n = 2; n <= tp.n_max; ++n) {
    for (int k1 = 1; k1 <= n; ++k1) {  // k1 = 0 loops put no mass below b3
      for (int k2 = 0; k2 <= n - k1; ++k2) {
        PathCharacteristic k{k1, k2, n - k1 - k2};
        int l12 = k.k1 + k.k2 - k.k3;
        int l13 = k.k1 + k.k3 - k.k2;
        int l23 = k.k2 + k.k3 - k.k1;
        if (l12 < 0 || l13 < 0 || l23 < 0) continue;
        PathCount pc = count_paths(k1, l13, l23);
        if (pc.p == 0) continue;
        double ord = ipow(view.a12, l12) * ipow(view.a13, l13) * ipow(view.a23, l23);
        if (ord == 0.0) continue;
        double term = static_cast<double>(pc.p) * ord * chi(k, x, view, ChiRoute::quadrature);
        acc.add(term);
        if (observer) observer(k, term);
      }
    }
  }
  PsiResult r{acc.value(), psi_tail_bound(tp.n_max, x, view)};
  enforce_tail(tp, r);
  return r;
}

PsiResult psi_le12_view(double x, const CanonicalView& view, const TruncationPolicy& tp) {
  check_view(view);
  check_lower_x(x, view);
  if (tp.n_max < 2) raise(errc::bad_input, "n_max must be >= 2");
  const double tol = inner_tol(tp);
  const double x2 = x / view.b2, x3 = x / view.b3;
  const double lam = view.a1 * (x2 - x3) - view.a2 * x2 + view.a3 * x3;
  const double mu = view.a1 * (1.0 - x2) + view.a2 * x2;
  const double u12 = view.a12 * std::sqrt(x2);
  const double u13 = view.a13 * std::sqrt(x3);
  const double u23 = view.a23 * std::sqrt(x2 * x3);
  const double w2p = (x3 - x2) / (1.0 - x3);
  const int l_min = 6 + static_cast<int>(std::ceil(2.0 * std::abs(lam)));

  KahanSum<double> acc;
  for (int k = 1; 2 * k <= tp.n_max; ++k) {
    for (int m = 0; 2 * k + m <= tp.n_max; ++m) {
      for (int l = m & 1; l <= 2 * k; l += 2) {
        PathCount pc = count_paths(k, l, m);
        if (pc.p1 == 0) continue;
        double mono = ipow(u12, 2 * k - l) * ipow(u13, l) * ipow(u23, m);
        if (mono == 0.0) continue;
        const int q2 = (2 * k + m - l) / 2;
        KahanSum<double> inner;
        for (int r = 0; r <= k - 1; ++r) {
          double cr = binomial(k - 1, r) * ipow(w2p, r);
          if (cr == 0.0) continue;
          KahanSum<double> sl;
          double c = rising(static_cast<double>(q2), r) / factorial(k + m + r - 1);
          int small = 0;
          for (int L = 0;; ++L) {
            sl.add(c);
            if (L >= l_min) {
              if (std::abs(c) <= tol * (1.0 + std::abs(sl.value()))) {
                if (++small >= 3) break;
              } else {
                small = 0;
              }
            }
            if (L >= 500) raise(errc::truncation_failure, "psi_le12 L-sum did not converge");
            c *= -lam * (q2 + r + L) / ((L + 1.0) * (k + m + r + L));
          }
          inner.add(cr * sl.value());
        }
        acc.add(static_cast<double>(pc.p1) * mono * ipow(1.0 - x3, k - 1) * inner.value() /
                factorial(k));
      }
    }
  }
  PsiResult r{std::exp(lam + mu) * acc.value() / x, psi_tail_bound(tp.n_max, x, view)};
  enforce_tail(tp, r);
  return r;
}

namespace {

// Memoized tilde-A evaluations for one (v, xi); keyed by (k, r, m_cap).
class KernelCache {
 public:
  KernelCache(double v, double xi, double tol) : v_(v), xi_(xi), tol_(tol) {}

  double tilde_a(int k, int r, int m_cap) {
    std::uint64_t key = (static_cast<std::uint64_t>(k) << 40) |
                        (static_cast<std::uint64_t>(r) << 20) |
                        static_cast<std::uint64_t>(m_cap + 1);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    SeriesPolicy pol;
    pol.tol = tol_;
    pol.m_cap = m_cap;
    double val = a_kernel_series(k, r, v_, xi_, pol, true);
    memo_.emplace(key, val);
    return val;
  }

  // S~(k, R, rho) through the A-kernel combination.
  double tilde_s(int k, int R, int rho, int m_cap) {
    if (rho > k) return 0.0;
    double pref = falling(static_cast<double>(k), rho);
    KahanSum<double> acc;
    double oddfac = 1.0;
    for (int a = 0; 2 * a <= R - rho; ++a) {
      acc.add(binomial(R - rho, 2 * a) * oddfac * tilde_a(k - rho, a + rho, m_cap));
      oddfac *= 2.0 * a + 1.0;
    }
    return pref * acc.value();
  }

 private:
  double v_, xi_, tol_;
  std::unordered_map<std::uint64_t, double> memo_;
};

}  // namespace

PsiResult psi_le13_view(double x, const CanonicalView& view, const TruncationPolicy& tp) {
  check_view(view);
  check_lower_x(x, view);
  if (tp.n_max < 2) raise(errc::bad_input, "n_max must be >= 2");
  GeometryParams g = geometry_in_view(x, view);
  PsiResult r{0.0, psi_tail_bound(tp.n_max, x, view)};
  if (g.A12 == 0.0 && g.A13 == 0.0) {
    if (view.a23 != 0.0)
      raise(errc::degenerate_direction,
            "DegenerateDirection: a12 = a13 = 0 leaves the resummed route undefined");
    enforce_tail(tp, r);
    return r;  // no loop through state 1 carries weight
  }
  const double tol = inner_tol(tp);
  KernelCache cache(g.v, g.xi, tol);
  const int l_min = 6 + static_cast<int>(std::ceil(3.0 * std::abs(g.lam)));

  KahanSum<double> acc;
  for (int k = 1; 2 * k <= tp.n_max; ++k) {
    const int m_cap = tp.n_max - 2 * k;
    const double wk = ipow(g.w1, k) / (factorial(k) * factorial(k - 1));
    if (wk == 0.0) continue;
    for (int rr = 0; rr <= k - 1; ++rr) {
      double cr = binomial(k - 1, rr) * ipow(g.w2, rr);
      if (cr == 0.0) continue;
      KahanSum<double> sl;
      double lpow = 1.0;  // (-lam)^L / L!
      int small = 0;
      for (int L = 0;; ++L) {
        const int R = rr + L;
        KahanSum<double> srho;
        double opow = 1.0;
        for (int rho = 0; rho <= std::min(R, k); ++rho) {
          srho.add(binomial(R, rho) * opow * cache.tilde_s(k, R, rho, m_cap));
          opow *= g.omega;
        }
        double term = lpow * srho.value();
        sl.add(term);
        if (L >= l_min) {
          if (std::abs(term) <= tol * (1.0 + std::abs(sl.value()))) {
            if (++small >= 3) break;
          } else {
            small = 0;
          }
        }
        if (L >= 500) raise(errc::truncation_failure, "psi_le13 L-sum did not converge");
        lpow *= -0.5 * g.lam / (L + 1.0);
      }
      acc.add(wk * cr * sl.value());
    }
  }
  r.value = 2.0 * std::exp(g.lam + g.mu) * acc.value() / (x * (1.0 - g.x3));
  enforce_tail(tp, r);
  return r;
}

PsiResult psi_bruteforce(double x, const CanonicalForm& cf, const TruncationPolicy& tp) {
  FramePoint fp = locate(x, cf);
  return psi_bruteforce_view(fp.x, fp.view, tp);
}

PsiResult psi_le12(double x, const CanonicalForm& cf, const TruncationPolicy& tp) {
  FramePoint fp = locate(x, cf);
  return psi_le12_view(fp.x, fp.view, tp);
}

PsiResult psi_le13(double x, const CanonicalForm& cf, const TruncationPolicy& tp) {
  FramePoint fp = locate(x, cf);
  return psi_le13_view(fp.x, fp.view, tp);
}

PsiResult psi(double x, const CanonicalForm& cf, const TruncationPolicy& tp, PsiMethod method) {
  switch (method) {
    case PsiMethod::bruteforce: return psi_bruteforce(x, cf, tp);
    case PsiMethod::le12: return psi_le12(x, cf, tp);
    case PsiMethod::le13: return psi_le13(x, cf, tp);
  }
  raise(errc::bad_input, "unknown density method");
}

SignedMeasure build_measure(const BMVProblem& p, const GridSpec& grid, const TruncationPolicy& tp,
                            PsiMethod method) {
  CanonicalForm cf = canonicalize(p);
  if (cf.degenerate)
    raise(errc::degenerate_b,
          "DegenerateB: B has tied eigenvalues; consult the positivity certificate instead");
  if (grid.points_per_interval < 1) raise(errc::bad_input, "grid needs at least one point");

  SignedMeasure m;
  for (int i = 0; i < 3; ++i)
    m.atoms.emplace_back(p.B.b(i), std::exp(p.A.a(i, i)));
  std::sort(m.atoms.begin(), m.atoms.end());
  m.support_lo = p.B.b.minCoeff();
  m.support_hi = p.B.b.maxCoeff();
  m.breakpoints = {m.atoms[0].first, m.atoms[1].first, m.atoms[2].first};

  const double b3 = cf.b3(), b2 = cf.b2();
  const std::array<std::pair<double, double>, 2> intervals = {
      std::make_pair(0.0, b3), std::make_pair(b3, b2)};
  for (int tag = 0; tag < 2; ++tag) {
    const auto [lo, hi] = intervals[static_cast<std::size_t>(tag)];
    const double len = hi - lo;
    std::vector<double> xs, ws;
    if (grid.kind == GridSpec::Kind::gauss) {
      const Quadrature& q = gauss_legendre_01(grid.points_per_interval);
      for (std::size_t i = 0; i < q.x.size(); ++i) {
        xs.push_back(lo + len * q.x[i]);
        ws.push_back(len * q.w[i]);
      }
    } else {
      const double h = len / grid.points_per_interval;
      for (int i = 0; i < grid.points_per_interval; ++i) xs.push_back(lo + (i + 0.5) * h);
    }
    // One independent task per grid point; results land in grid order.
    std::vector<PsiResult> results(xs.size());
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto eval = [&](std::size_t i) {
      if (method == PsiMethod::le13) {
        try {
          results[i] = psi_le13(xs[i], cf, tp);
        } catch (const Error& e) {
          if (e.code() != errc::degenerate_direction) throw;
          results[i] = psi_le12(xs[i], cf, tp);
        }
      } else {
        results[i] = psi(xs[i], cf, tp, method);
      }
    };
    unsigned workers = std::min<unsigned>(std::thread::hardware_concurrency(),
                                          static_cast<unsigned>(xs.size()));
    if (workers <= 1) {
      for (std::size_t i = 0; i < xs.size(); ++i) eval(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
          for (std::size_t i = next.fetch_add(1); i < xs.size(); i = next.fetch_add(1)) {
            try {
              eval(i);
            } catch (...) {
              std::lock_guard<std::mutex> lock(failure_mutex);
              if (!failure) failure = std::current_exception();
            }
          }
        });
      for (auto& th : pool) th.join();
      if (failure) std::rethrow_exception(failure);
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      m.xs.push_back(xs[i] + cf.b_shift);
      m.psis.push_back(cf.mass_scale * results[i].value);
      m.tail_bounds.push_back(cf.mass_scale * results[i].tail_bound);
      m.interval_tag.push_back(tag);
      if (!ws.empty()) m.quad_w.push_back(ws[i]);
    }
  }
  return m;
}

}  // namespace bmv
