#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bmv/errors.hpp"
#include "bmv/numerics.hpp"

namespace bmv {

// Truncation control for the xi-power series of the A/T/S kernels.
// m_cap >= 0 sums exactly the terms with xi-exponent <= m_cap (no tail logic),
// which is what the matched-truncation density routes need; m_cap < 0 sums to
// convergence with a sound geometric tail bound.
struct SeriesPolicy {
  double tol = 1e-12;
  int m_cap = -1;
  int m_max = 400;
};

enum class KernelMethod { series, integral };

// Terminating Gauss series F(a,b;c;z) with a a nonpositive integer.
// PoleInC when (c)_t vanishes before the series terminates.
template <class Real>
Real hyp2f1_terminating(int a, Real b, Real c, Real z) {
  if (a > 0) raise(errc::bad_input, "hyp2f1_terminating requires a <= 0");
  const int nterms = -a;
  KahanSum<Real> acc;
  Real term = 1;
  acc.add(term);
  for (int t = 0; t < nterms; ++t) {
    Real ct = c + Real(t);
    if (ct == Real(0)) {
      std::ostringstream os;
      os << "PoleInC: (c)_n vanishes at n = " << t + 1 << " before the series terminates";
      raise(errc::pole_in_c, os.str());
    }
    term *= Real(a + t) * (b + Real(t)) / (ct * Real(t + 1)) * z;
    acc.add(term);
  }
  return acc.value();
}

template <class Real>
struct IdentitySides {
  Real lhs = 0, rhs = 0;
};

// Both sides of the Pfaff transformation
//   F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; z/(z-1)),  a a nonpositive integer.
template <class Real>
IdentitySides<Real> pfaff_check(int a, Real b, Real c, Real z) {
  if (z >= Real(1)) raise(errc::bad_input, "pfaff_check requires z < 1");
  IdentitySides<Real> out;
  out.lhs = hyp2f1_terminating(a, b, c, z);
  out.rhs = std::pow(Real(1) - z, Real(-a)) * hyp2f1_terminating(a, c - b, c, z / (z - Real(1)));
  return out;
}

namespace detail {

// Per-term numerator/denominator product evaluated interleaved so that
// neither the rising factorials nor the Pochhammer denominator overflow:
//   prod = [prod_{i<num_len} (m - j + 2 + 2i)] / (m+1)_{den_len}.
template <class Real>
Real kernel_ratio(int m, int j, int num_len, int den_len) {
  Real p = 1;
  for (int i = 0; i < den_len; ++i) {
    if (i < num_len) p *= Real(m - j + 2 + 2 * i);
    p /= Real(m + 1 + i);
  }
  for (int i = den_len; i < num_len; ++i) p *= Real(m - j + 2 + 2 * i);
  return p;
}

// Shared series driver for the A and T kernels. The weight hook supplies the
// extra j-dependent factor of T (falling factorial), identity for A.
template <class Real, class JWeight>
Real kernel_series(int k, int num_len, int den_len, Real v, Real xi, const SeriesPolicy& pol,
                   bool tilde, JWeight&& jw, Real weight_bound) {
  KahanSum<Real> acc;
  const Real axi = std::abs(xi);
  const Real vb = ipow(Real(1) + std::abs(v), k) * weight_bound;
  Real xi_pow = 1;  // xi^m / m!
  const int m_stop = pol.m_cap >= 0 ? pol.m_cap : pol.m_max;
  // Ratio argument below which the term-by-term bound is geometric with rate 1/2.
  const int m_geo = std::max(2 * std::max(num_len, den_len) + 2,
                             static_cast<int>(4 * static_cast<double>(axi)) + 4);
  for (int m = 0; m <= m_stop; ++m) {
    Real inner = 0;
    Real vj = tilde ? ipow(v, m & 1) : Real(1);
    for (int j = tilde ? (m & 1) : 0; j <= k; j += tilde ? 2 : 1) {
      Real w = jw(j);
      if (w != Real(0))
        inner += binomial(k, j) * w * vj * kernel_ratio<Real>(m, j, num_len, den_len);
      vj *= tilde ? v * v : v;
    }
    Real term = inner * xi_pow;
    acc.add(term);
    if (pol.m_cap < 0 && m >= m_geo) {
      // Envelope: |term_m| <= (1+|v|)^k * wbound * |xi|^m/m! * ratio(j=0),
      // and consecutive envelopes decay at least geometrically past m_geo.
      Real env = vb * std::abs(xi_pow) * kernel_ratio<Real>(m, 0, num_len, den_len);
      if (env <= Real(pol.tol) * (Real(1) + std::abs(acc.value())) * Real(0.5)) return acc.value();
    }
    xi_pow *= xi / Real(m + 1);
  }
  if (pol.m_cap >= 0) return acc.value();
  raise(errc::truncation_failure, "kernel series did not converge within m_max terms");
}

}  // namespace detail

// A_r(k; v, xi): double series with parity restriction j = m (mod 2) in the
// tilde variant, which equals (A_r(k;v,xi) + A_r(k;-v,-xi))/2.
template <class Real>
Real a_kernel_series(int k, int r, Real v, Real xi, const SeriesPolicy& pol = {},
                     bool tilde = false) {
  if (k < 0 || r < 0) raise(errc::bad_input, "a_kernel requires k, r >= 0");
  if (k == 0 && r == 0) {
    Real e = std::exp(xi);
    return tilde ? (e + Real(1) / e) / Real(2) : e;
  }
  return detail::kernel_series<Real>(k, k + r - 1, k + 2 * r - 1, v, xi, pol, tilde,
                                     [](int) { return Real(1); }, Real(1));
}

// Integral representation of A_r(k; v, xi) (and its tilde symmetrization).
// The integrand is assembled from its terminating inner sum, so it stays a
// polynomial in s times e^{s xi} and the fixed-order rule is exact up to the
// exponential factor.
template <class Real>
Real a_kernel_integral(int k, int r, Real v, Real xi, int quad_order = 64, bool tilde = false) {
  if (k < 0 || r < 0) raise(errc::bad_input, "a_kernel requires k, r >= 0");
  auto integrand = [&](Real s) -> Real {
    KahanSum<Real> sum;
    if (r >= 1) {
      for (int l = 0; 2 * l <= k; ++l) {
        Real c = factorial(k) / (factorial(l) * factorial(l + r - 1) * factorial(k - 2 * l));
        sum.add(c * ipow(Real(1) + s * v, k - 2 * l) * ipow((Real(1) - v * v) / 2, l) *
                ipow((Real(1) - s * s) / 2, l + r - 1));
      }
    } else {
      for (int l = 0; 2 * l + 2 <= k; ++l) {
        Real c = factorial(k) / (factorial(l) * factorial(l + 1) * factorial(k - 2 * l - 2));
        sum.add(c * ipow(Real(1) + s * v, k - 2 * l - 2) * ipow((Real(1) - v * v) / 2, l + 1) *
                ipow((Real(1) - s * s) / 2, l));
      }
    }
    return sum.value() * std::exp(s * xi);
  };

  KahanSum<Real> acc;
  if (r == 0) {
    if (tilde)
      acc.add((ipow(Real(1) + v, k) * std::exp(xi) + ipow(Real(1) - v, k) * std::exp(-xi)) / 2);
    else
      acc.add(ipow(Real(1) + v, k) * std::exp(xi));
  }
  const Quadrature& q = tilde ? gauss_legendre_sym(quad_order) : gauss_legendre_01(quad_order);
  KahanSum<Real> integral;
  for (std::size_t i = 0; i < q.x.size(); ++i)
    integral.add(Real(q.w[i]) * integrand(Real(q.x[i])));
  acc.add(tilde ? integral.value() / 2 : integral.value());
  return acc.value();
}

template <class Real>
Real a_kernel(int k, int r, Real v, Real xi, KernelMethod method, const SeriesPolicy& pol = {},
              bool tilde = false, int quad_order = 64) {
  return method == KernelMethod::series ? a_kernel_series(k, r, v, xi, pol, tilde)
                                        : a_kernel_integral(k, r, v, xi, quad_order, tilde);
}

template <class Real>
Real a_tilde(int k, int r, Real v, Real xi, const SeriesPolicy& pol = {}) {
  return a_kernel_series(k, r, v, xi, pol, true);
}

// T(k, r, rho; v, xi): as the A kernel but with a shortened rising factorial
// and the falling-factorial weight (k-j)!/(k-j-rho)!, which vanishes for
// j > k - rho. Defined for k >= 1; at k = 0 the rho = r corner degenerates
// to 0 * infinity and the S/T route identities no longer close.
template <class Real>
Real t_kernel(int k, int r, int rho, Real v, Real xi, const SeriesPolicy& pol = {},
              bool tilde = false) {
  if (k < 1 || r < 0 || rho < 0 || rho > r)
    raise(errc::bad_input, "t_kernel requires k >= 1 and 0 <= rho <= r");
  if (rho > k) return 0;  // every j-weight vanishes
  return detail::kernel_series<Real>(
      k, k + r - rho - 1, k + r - 1, v, xi, pol, tilde,
      [&](int j) { return falling(Real(k - j), rho); }, falling(Real(k), rho));
}

// S as the alternating T combination; the (-1)^tau sign makes this the
// binomial inverse of the T-from-S reconstruction.
template <class Real>
Real s_kernel_from_t(int k, int r, int rho, Real v, Real xi, const SeriesPolicy& pol = {},
                     bool tilde = false) {
  if (k < 1 || rho < 0 || rho > r)
    raise(errc::bad_input, "s_kernel requires k >= 1 and 0 <= rho <= r");
  KahanSum<Real> acc;
  for (int tau = 0; tau <= r - rho; ++tau) {
    Real sign = (tau % 2 == 0) ? Real(1) : Real(-1);
    acc.add(sign * Real(binomial(r - rho, tau)) * t_kernel(k, r, rho + tau, v, xi, pol, tilde));
  }
  return acc.value();
}

// S as the A-kernel combination; nonnegative term by term for |v| <= 1 in the
// tilde variant, so this is the route the resummed density uses.
template <class Real>
Real s_kernel(int k, int r, int rho, Real v, Real xi, const SeriesPolicy& pol = {},
              bool tilde = false) {
  if (k < 1 || rho < 0 || rho > r)
    raise(errc::bad_input, "s_kernel requires k >= 1 and 0 <= rho <= r");
  if (rho > k) return 0;
  Real pref = falling(Real(k), rho);
  KahanSum<Real> acc;
  Real oddfac = 1;  // (2a)! / (2^a a!) = (2a-1)!!
  for (int a = 0; 2 * a <= r - rho; ++a) {
    acc.add(Real(binomial(r - rho, 2 * a)) * oddfac *
            a_kernel_series(k - rho, a + rho, v, xi, pol, tilde));
    oddfac *= Real(2 * a + 1);
  }
  return pref * acc.value();
}

// Both finite sums of the binomial/Pochhammer resummation used to collapse
// the jump-count sum of the density:
//   2^j sum_{l>=j, l=j(2)} C(k-j,(l-j)/2) ((2k+m-l)/2)_r C^l D^(2k-l)
//     = (C^2+D^2)^k v^j sum_rho (-1)^rho C(r,rho) ((2k+m-j)/2)_{r-rho}
//         (k-j)_(rho falling) (C v / (2D))^rho,   v = 2CD/(C^2+D^2).
template <class Real>
IdentitySides<Real> lemma5_sides(int j, int k, int m, int r, Real C, Real D) {
  if (j < 0 || j > k || ((j ^ m) & 1)) raise(errc::bad_input, "lemma5 requires 0 <= j <= k, j = m mod 2");
  if (D == Real(0)) raise(errc::degenerate_d, "DegenerateD: the resummed side divides by D");
  IdentitySides<Real> out;
  KahanSum<Real> lhs;
  for (int s = 0; s <= k - j; ++s) {
    int l = j + 2 * s;
    lhs.add(Real(binomial(k - j, s)) * rising(Real(2 * k + m - l) / 2, r) * ipow(C, l) *
            ipow(D, 2 * k - l));
  }
  out.lhs = ipow(Real(2), j) * lhs.value();

  Real n2 = C * C + D * D;
  Real v = 2 * C * D / n2;
  KahanSum<Real> rhs;
  Real u = C * v / (2 * D);
  for (int rho = 0; rho <= r; ++rho) {
    Real sign = (rho % 2 == 0) ? Real(1) : Real(-1);
    rhs.add(sign * Real(binomial(r, rho)) * rising(Real(2 * k + m - j) / 2, r - rho) *
            falling(Real(k - j), rho) * ipow(u, rho));
  }
  out.rhs = ipow(n2, k) * ipow(v, j) * rhs.value();
  return out;
}

}  // namespace bmv
