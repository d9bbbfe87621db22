#include "bmv/numerics.hpp"

#include <map>
#include <mutex>

namespace bmv {

const char* to_string(errc c) {
  switch (c) {
    case errc::bad_input: return "BadInput";
    case errc::asymmetric_input: return "AsymmetricInput";
    case errc::negative_b: return "NegativeB";
    case errc::size_limit: return "SizeLimit";
    case errc::infeasible: return "Infeasible";
    case errc::degenerate_b: return "DegenerateB";
    case errc::insufficient_grid: return "InsufficientGrid";
    case errc::overflow: return "Overflow";
    case errc::pole_in_c: return "PoleInC";
    case errc::truncation_failure: return "TruncationFailure";
    case errc::degenerate_d: return "DegenerateD";
    case errc::degenerate_direction: return "DegenerateDirection";
    case errc::breakpoint: return "Breakpoint";
    case errc::tail_bound_exceeded: return "TailBoundExceeded";
  }
  return "Error";
}

double factorial(int n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(171);
    t[0] = 1.0;
    for (int i = 1; i <= 170; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  if (n < 0) raise(errc::bad_input, "factorial of negative argument");
  if (n > 170) raise(errc::overflow, "factorial overflows double beyond 170!");
  return table[static_cast<std::size_t>(n)];
}

double binomial(long long n, long long k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double c = 1.0;
  for (long long i = 1; i <= k; ++i) c *= double(n - k + i) / double(i);
  return c;
}

namespace {

Quadrature compute_gauss_legendre(int n) {
  // Newton iteration on P_n; standard symmetric construction on [-1,1].
  Quadrature q;
  q.x.resize(static_cast<std::size_t>(n));
  q.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = t;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - t * t) * dp * dp);
    q.x[static_cast<std::size_t>(i)] = -t;
    q.w[static_cast<std::size_t>(i)] = w;
    q.x[static_cast<std::size_t>(n - 1 - i)] = t;
    q.w[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return q;
}

std::mutex cache_mutex;

}  // namespace

const Quadrature& gauss_legendre_sym(int order) {
  if (order < 1) raise(errc::bad_input, "quadrature order must be positive");
  static std::map<int, Quadrature> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
  return it->second;
}

const Quadrature& gauss_legendre_01(int order) {
  if (order < 1) raise(errc::bad_input, "quadrature order must be positive");
  static std::map<int, Quadrature> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(order);
  if (it == cache.end()) {
    Quadrature q = compute_gauss_legendre(order);
    for (auto& xi : q.x) xi = 0.5 * (xi + 1.0);
    for (auto& wi : q.w) wi *= 0.5;
    it = cache.emplace(order, std::move(q)).first;
  }
  return it->second;
}

}  // namespace bmv
