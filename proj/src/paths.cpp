#include "bmv/paths.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bmv {

std::string to_string(int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1
                            : static_cast<unsigned __int128>(v);
  std::string s;
  while (u > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

namespace {

int128 checked_mul(int128 a, int128 b) {
  int128 out;
  if (__builtin_mul_overflow(a, b, &out)) raise(errc::overflow, "path count exceeds 128-bit range");
  return out;
}

}  // namespace

int128 binomial_exact(long long n, long long k) {
  if (k < 0 || n < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  int128 c = 1;
  for (long long i = 1; i <= k; ++i) {
    c = checked_mul(c, n - k + i);
    c /= i;  // exact: c is a binomial coefficient after each step
  }
  return c;
}

std::vector<FavorablePath> enumerate_paths(int d, int n, std::uint64_t max_count) {
  if (d < 2) raise(errc::bad_input, "enumerate_paths requires d >= 2");
  if (n < 2) raise(errc::bad_input, "enumerate_paths requires n >= 2");
  long double bound = d * std::pow(static_cast<long double>(d - 1), n - 1);
  if (bound > static_cast<long double>(max_count)) {
    std::ostringstream os;
    os << "SizeLimit: d(d-1)^(n-1) = " << static_cast<double>(bound) << " exceeds cap "
       << max_count;
    raise(errc::size_limit, os.str());
  }

  std::vector<FavorablePath> out;
  FavorablePath cur(static_cast<std::size_t>(n));
  // Depth-first in state order gives lexicographic output.
  auto rec = [&](auto&& self, int pos) -> void {
    if (pos == n) {
      if (cur.back() != cur.front()) out.push_back(cur);
      return;
    }
    for (int s = 1; s <= d; ++s) {
      if (pos > 0 && s == cur[static_cast<std::size_t>(pos - 1)]) continue;
      cur[static_cast<std::size_t>(pos)] = s;
      self(self, pos + 1);
    }
  };
  rec(rec, 0);
  return out;
}

PathStats path_stats(const FavorablePath& gamma) {
  const int n = static_cast<int>(gamma.size());
  if (n < 2) raise(errc::bad_input, "favorable paths have length >= 2");
  PathStats st;
  st.start = gamma.front();
  int edge[4][4] = {};
  for (int i = 0; i < n; ++i) {
    int a = gamma[static_cast<std::size_t>(i)];
    int b = gamma[static_cast<std::size_t>((i + 1) % n)];  // closing edge included
    if (a < 1 || a > 3 || b < 1 || b > 3) raise(errc::bad_input, "path_stats expects states in {1,2,3}");
    if (a == b) raise(errc::bad_input, "not a favorable path: repeated neighbor");
    if (a > b) std::swap(a, b);
    ++edge[a][b];
    int s = gamma[static_cast<std::size_t>(i)];
    if (s == 1) ++st.k.k1;
    else if (s == 2) ++st.k.k2;
    else ++st.k.k3;
  }
  st.l.l12 = edge[1][2];
  st.l.l13 = edge[1][3];
  st.l.l23 = edge[2][3];
  return st;
}

JumpCounts jumps_from_characteristic(const PathCharacteristic& k) {
  JumpCounts l;
  l.l12 = k.k1 + k.k2 - k.k3;
  l.l13 = k.k1 + k.k3 - k.k2;
  l.l23 = k.k2 + k.k3 - k.k1;
  if (l.l12 < 0 || l.l13 < 0 || l.l23 < 0) {
    std::ostringstream os;
    os << "Infeasible: characteristic (" << k.k1 << "," << k.k2 << "," << k.k3
       << ") yields a negative jump count";
    raise(errc::infeasible, os.str());
  }
  return l;
}

PathCharacteristic characteristic_from_jumps(const JumpCounts& l) {
  if (l.l12 < 0 || l.l13 < 0 || l.l23 < 0) raise(errc::infeasible, "negative jump count");
  if (((l.l12 ^ l.l13) & 1) || ((l.l13 ^ l.l23) & 1))
    raise(errc::infeasible, "jump counts must share parity");
  PathCharacteristic k;
  k.k1 = (l.l12 + l.l13) / 2;
  k.k2 = (l.l12 + l.l23) / 2;
  k.k3 = (l.l13 + l.l23) / 2;
  return k;
}

PathCount count_paths(int k, int l, int m) {
  if (k < 0 || l < 0 || m < 0) raise(errc::bad_input, "count_paths arguments must be >= 0");
  PathCount out;
  if (((l ^ m) & 1) != 0) return out;  // parity mismatch: no paths
  if (k == 0) {
    // Loops avoiding state 1 alternate between 2 and 3: two per even length.
    out.p1 = 0;
    out.p = (l == 0 && m >= 2 && m % 2 == 0) ? 2 : 0;
    return out;
  }
  int128 p1 = 0;
  for (int j = m & 1; j <= k; j += 2) {
    int128 term = binomial_exact(k, j);
    if (term == 0) continue;
    term = checked_mul(term, binomial_exact((m - j) / 2 + k - 1, k - 1));
    if (term == 0) continue;
    term = checked_mul(term, binomial_exact(k - j, (l - j) / 2));
    if (term == 0) continue;
    if (j >= 127) raise(errc::overflow, "2^j exceeds 128-bit range");
    term = checked_mul(term, int128(1) << j);
    p1 += term;
  }
  out.p1 = p1;
  const int n = 2 * k + m;
  int128 pn = checked_mul(p1, n);
  if (pn % k != 0) raise(errc::overflow, "count_paths divisibility check failed");
  out.p = pn / k;
  return out;
}

}  // namespace bmv
