#include <doctest.h>

#include <map>

#include "bmv/paths.hpp"
#include "oracles.hpp"

using namespace bmv;

TEST_CASE("enumerate_paths basics") {
  CHECK(enumerate_paths(3, 2).size() == 6);
  CHECK(enumerate_paths(2, 3).empty());  // odd loops do not close on two states
  CHECK(enumerate_paths(3, 4).size() == 18);
  CHECK_THROWS_AS(enumerate_paths(3, 30), Error);  // SizeLimit
  // lexicographic and duplicate-free
  auto paths = enumerate_paths(3, 3);
  for (std::size_t i = 1; i < paths.size(); ++i) CHECK(paths[i - 1] < paths[i]);
  // general d: |C_n| = (d-1)^n + (d-1)(-1)^n
  CHECK(enumerate_paths(4, 3).size() == 24);
  CHECK(enumerate_paths(4, 5).size() == 240);
  CHECK(enumerate_paths(2, 6).size() == 2);
}

TEST_CASE("path_stats visit and jump counts include the closing edge") {
  PathStats st = path_stats({1, 2});
  CHECK(st.k.k1 == 1);
  CHECK(st.k.k2 == 1);
  CHECK(st.k.k3 == 0);
  CHECK(st.l.l12 == 2);
  CHECK(st.l.l13 == 0);
  CHECK(st.start == 1);

  st = path_stats({1, 3, 1, 3});
  CHECK(st.k.k1 == 2);
  CHECK(st.k.k3 == 2);
  CHECK(st.l.l13 == 4);
  CHECK(st.l.l23 == 0);

  st = path_stats({1, 2, 3});
  CHECK(st.l.l12 == 1);
  CHECK(st.l.l13 == 1);
  CHECK(st.l.l23 == 1);
}

TEST_CASE("characteristic and jump counts are a bijection") {
  JumpCounts l = jumps_from_characteristic({1, 1, 1});
  CHECK(l.l12 == 1);
  CHECK(l.l13 == 1);
  CHECK(l.l23 == 1);
  PathCharacteristic k = characteristic_from_jumps({0, 4, 0});
  CHECK(k.k1 == 2);
  CHECK(k.k2 == 0);
  CHECK(k.k3 == 2);
  CHECK_THROWS_AS(jumps_from_characteristic({2, 0, 1}), Error);
  CHECK_THROWS_AS(characteristic_from_jumps({1, 0, 0}), Error);  // parity

  // round trip on everything the enumerator produces up to n = 9
  for (int n = 2; n <= 9; ++n)
    for (const auto& g : enumerate_paths(3, n)) {
      PathStats st = path_stats(g);
      JumpCounts jl = jumps_from_characteristic(st.k);
      CHECK(jl.l12 == st.l.l12);
      CHECK(jl.l13 == st.l.l13);
      CHECK(jl.l23 == st.l.l23);
      PathCharacteristic kk = characteristic_from_jumps(st.l);
      CHECK(kk.k1 == st.k.k1);
      CHECK(kk.k2 == st.k.k2);
      CHECK(kk.k3 == st.k.k3);
    }
}

TEST_CASE("count_paths reproduces the reference table") {
  CHECK(count_paths(1, 0, 0).p1 == 1);
  CHECK(count_paths(1, 1, 1).p1 == 2);
  CHECK(count_paths(2, 4, 0).p1 == 1);
  CHECK(count_paths(1, 2, 2).p1 == 1);
  CHECK(count_paths(1, 1, 0).p1 == 0);  // parity mismatch
  CHECK(count_paths(1, 0, 0).p == 2);
}

TEST_CASE("count_paths equals brute-force enumeration for n <= 10") {
  for (int n = 2; n <= 10; ++n) {
    std::map<std::tuple<int, int, int>, long long> total, start1;
    auto paths = enumerate_paths(3, n);
    for (const auto& g : paths) {
      PathStats st = path_stats(g);
      auto key = std::make_tuple(st.k.k1, st.l.l13, st.l.l23);
      ++total[key];
      if (st.start == 1) ++start1[key];
    }
    long long sum_p = 0;
    for (const auto& [key, cnt] : total) {
      auto [k, l, m] = key;
      PathCount pc = count_paths(k, l, m);
      CHECK(pc.p == cnt);
      CHECK(pc.p1 == start1[key]);
      sum_p += cnt;
    }
    CHECK(sum_p == static_cast<long long>(paths.size()));
  }
}

TEST_CASE("start-1 generating function matches enumeration to degree 8") {
  // Transfer-matrix series in (a12, a13, a23): the cofactor over the full
  // determinant, minus the empty-walk constant, generates ord over loops
  // starting at 1. The cofactor numerator is 1 - a23^2.
  const int deg = 8;
  oracles::Poly3 num(deg), den(deg);
  num.set(0, 0, 0, 1);
  num.set(0, 0, 2, -1);
  den.set(0, 0, 0, 1);
  den.set(1, 1, 1, -2);
  den.set(2, 0, 0, -1);
  den.set(0, 2, 0, -1);
  den.set(0, 0, 2, -1);
  oracles::Poly3 series = oracles::Poly3::divide(num, den, deg);

  std::map<std::uint32_t, long long> expected;
  expected[oracles::Poly3::key(0, 0, 0)] = 1;  // empty walk
  for (int n = 2; n <= deg; ++n)
    for (const auto& g : enumerate_paths(3, n)) {
      PathStats st = path_stats(g);
      if (st.start != 1) continue;
      if (st.l.l12 + st.l.l13 + st.l.l23 > deg) continue;
      ++expected[oracles::Poly3::key(st.l.l12, st.l.l13, st.l.l23)];
    }
  // paths longer than deg cannot produce total degree <= deg monomials,
  // so the comparison is exact on the truncation
  for (const auto& [key, coef] : series.coefficients()) {
    auto it = expected.find(key);
    CHECK(coef == (it == expected.end() ? 0 : it->second));
  }
  for (const auto& [key, coef] : expected) CHECK(series.get(static_cast<int>(key >> 20),
                                                            static_cast<int>((key >> 10) & 0x3ff),
                                                            static_cast<int>(key & 0x3ff)) == coef);
}

TEST_CASE("substituted generating function matches count_paths to degree 8") {
  // Variables (x, a13, a23) with a12^2 -> x, a13 -> sqrt(x) a13 marking k1.
  const int deg = 8;
  oracles::Poly3 num(deg), den(deg);
  num.set(0, 0, 0, 1);
  num.set(0, 0, 2, -1);
  den.set(0, 0, 0, 1);
  den.set(0, 0, 2, -1);
  den.set(1, 1, 1, -2);
  den.set(1, 2, 0, -1);
  den.set(1, 0, 0, -1);
  oracles::Poly3 series = oracles::Poly3::divide(num, den, deg);
  for (int k = 1; k <= deg; ++k)
    for (int l = 0; l + k <= deg; ++l)
      for (int m = 0; m + l + k <= deg; ++m)
        CHECK(series.get(k, l, m) == static_cast<long long>(count_paths(k, l, m).p1));
  CHECK(series.get(0, 0, 0) == 1);
  CHECK(series.get(0, 0, 2) == 0);  // loops avoiding state 1 are not generated here
}

TEST_CASE("int128 formatting") {
  CHECK(to_string(int128(0)) == "0");
  CHECK(to_string(int128(-42)) == "-42");
  int128 big = 1;
  for (int i = 0; i < 12; ++i) big *= 1000;
  CHECK(to_string(big) == "1000000000000000000000000000000000000");
}
