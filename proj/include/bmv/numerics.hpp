#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "bmv/errors.hpp"

namespace bmv {

// Compensated (Kahan) accumulator.
template <class Real>
struct KahanSum {
  Real sum = 0;
  Real carry = 0;

  void add(Real x) {
    Real y = x - carry;
    Real t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  Real value() const { return sum; }
};

// n! as double, exact for n <= 22 and correctly rounded from a table beyond.
double factorial(int n);

// Binomial coefficient in double arithmetic; 0 outside the triangle.
double binomial(long long n, long long k);

// Falling factorial x(x-1)...(x-n+1); empty product for n = 0.
template <class Real>
Real falling(Real x, int n) {
  Real p = 1;
  for (int i = 0; i < n; ++i) p *= x - Real(i);
  return p;
}

// Rising factorial x(x+1)...(x+n-1); empty product for n = 0.
template <class Real>
Real rising(Real x, int n) {
  Real p = 1;
  for (int i = 0; i < n; ++i) p *= x + Real(i);
  return p;
}

// Integer power with small exponent.
template <class Real>
Real ipow(Real x, int n) {
  Real p = 1;
  Real base = x;
  for (int e = n; e > 0; e >>= 1) {
    if (e & 1) p *= base;
    base *= base;
  }
  return p;
}

// Gauss-Legendre rule mapped to [0,1] (nodes strictly interior).
struct Quadrature {
  std::vector<double> x;
  std::vector<double> w;
};

// Cached; thread-safe. Supported orders: any n >= 1 (computed on first use).
const Quadrature& gauss_legendre_01(int order);

// Same rule on [-1,1].
const Quadrature& gauss_legendre_sym(int order);

// SplitMix64 step; used to decorrelate per-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace bmv
