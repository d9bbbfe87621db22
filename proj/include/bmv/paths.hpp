#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bmv/errors.hpp"

namespace bmv {

// A favorable path is a loop skeleton on {1,...,d}: no two neighbors equal
// and the last state different from the first (so the closing step is a jump).
using FavorablePath = std::vector<int>;

// Visit counts of a favorable path on {1,2,3}.
struct PathCharacteristic {
  int k1 = 0, k2 = 0, k3 = 0;
  int n() const { return k1 + k2 + k3; }
};

// Edge-usage exponents of the loop monomial a12^l12 a13^l13 a23^l23,
// counting the closing edge.
struct JumpCounts {
  int l12 = 0, l13 = 0, l23 = 0;
};

struct PathStats {
  PathCharacteristic k;
  JumpCounts l;
  int start = 0;  // first state of the loop
};

using int128 = __int128;

std::string to_string(int128 v);

// Exact binomial coefficient; 0 outside the triangle; Overflow beyond int128.
int128 binomial_exact(long long n, long long k);

// All favorable paths of length n on {1,...,d} in lexicographic order.
// SizeLimit if d (d-1)^(n-1) exceeds max_count; the default admits
// d <= 4, n <= 14.
std::vector<FavorablePath> enumerate_paths(int d, int n, std::uint64_t max_count = 1u << 23);

PathStats path_stats(const FavorablePath& gamma);

// The two directions of the visit-count / jump-count bijection on {1,2,3}.
// Infeasible when the counts cannot come from any favorable path.
JumpCounts jumps_from_characteristic(const PathCharacteristic& k);
PathCharacteristic characteristic_from_jumps(const JumpCounts& l);

struct PathCount {
  int128 p1 = 0;  // paths starting at state 1
  int128 p = 0;   // all paths
};

// Closed-form count of favorable paths on {1,2,3} with k visits to state 1,
// l jumps along 1-3 and m jumps along 2-3 (so 2k-l jumps along 1-2).
// Exact integers; (0,0) when l and m have different parity.
PathCount count_paths(int k, int l, int m);

}  // namespace bmv
