// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Run through ctest or directly; `acceptance 4` runs criterion 4 only.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "bmv/core.hpp"
#include "bmv/density.hpp"
#include "bmv/identities.hpp"
#include "bmv/mcsim.hpp"
#include "bmv/paths.hpp"
#include "bmv/verify.hpp"

using namespace bmv;

namespace {

constexpr std::uint64_t kMasterSeed = 20240614;

struct Outcome {
  bool pass = true;
  std::string detail;
};

void note(Outcome& o, bool ok, const std::string& what) {
  if (!ok) {
    o.pass = false;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += what;
  }
}

std::vector<double> interval_grid(const CanonicalForm& cf, int per_interval) {
  std::vector<double> xs;
  double b2 = cf.b2(), b3 = cf.b3();
  for (int i = 0; i < per_interval; ++i) xs.push_back(b3 * (i + 0.5) / per_interval);
  for (int i = 0; i < per_interval; ++i)
    xs.push_back(b3 + (b2 - b3) * (i + 0.5) / per_interval);
  return xs;
}

// 1. Closed-form path counts reproduce the reference table exactly.
Outcome criterion1() {
  Outcome o;
  note(o, count_paths(1, 0, 0).p1 == 1, "P1(1,0,0) != 1");
  note(o, count_paths(1, 1, 1).p1 == 2, "P1(1,1,1) != 2");
  note(o, count_paths(1, 2, 2).p1 == 1, "P1(1,2,2) != 1");
  note(o, count_paths(2, 4, 0).p1 == 1, "P1(2,4,0) != 1");
  return o;
}

// 2. Counts match brute-force enumeration for every characteristic with
//    n <= 12, and per-n totals match the loop count.
Outcome criterion2() {
  Outcome o;
  for (int n = 2; n <= 12; ++n) {
    auto paths = enumerate_paths(3, n, 1u << 24);
    std::map<std::tuple<int, int, int>, long long> total, start1;
    for (const auto& g : paths) {
      PathStats st = path_stats(g);
      auto key = std::make_tuple(st.k.k1, st.l.l13, st.l.l23);
      ++total[key];
      if (st.start == 1) ++start1[key];
    }
    long long covered = 0;
    for (const auto& [key, cnt] : total) {
      auto [k, l, m] = key;
      PathCount pc = count_paths(k, l, m);
      note(o, pc.p == cnt, "P mismatch at n=" + std::to_string(n));
      note(o, pc.p1 == start1[key], "P1 mismatch at n=" + std::to_string(n));
      covered += cnt;
    }
    note(o, covered == static_cast<long long>(paths.size()),
         "characteristic sum misses paths at n=" + std::to_string(n));
    // closed-form total over all feasible (k,l,m) with 2k+m = n
    long long closed = 0;
    for (int k = 0; 2 * k <= n; ++k) {
      int m = n - 2 * k;
      for (int l = m & 1; l <= 2 * k; l += 2)
        closed += static_cast<long long>(count_paths(k, l, m).p);
    }
    note(o, closed == static_cast<long long>(paths.size()),
         "sum of P over characteristics != |C_n| at n=" + std::to_string(n));
  }
  return o;
}

// 3. Hypergeometric identity suites on their documented grids.
Outcome criterion3() {
  Outcome o;
  for (const auto& suite : identity_suites()) {
    IdentityReport rep = run_identity_suite(suite);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s max_err=%.3g (tol %.0e) min_kernel=%.3g worst=%s",
                  suite.c_str(), rep.max_error, rep.threshold, rep.min_kernel,
                  rep.worst_case.c_str());
    note(o, rep.passed(), buf);
  }
  return o;
}

// 4. Route equivalence at matched truncation n_max = 10 on 50 seeded
//    problems, 40 grid points each.
Outcome criterion4() {
  Outcome o;
  std::mt19937_64 rng(kMasterSeed);
  TruncationPolicy tp;
  tp.n_max = 10;
  tp.tol = 1e-12;
  double worst12 = 0, worst13 = 0;
  for (int t = 0; t < 50; ++t) {
    BMVProblem p = random_problem(rng);
    CanonicalForm cf = canonicalize(p);
    for (double x : interval_grid(cf, 20)) {
      double bf = psi_bruteforce(x, cf, tp).value;
      double l12 = psi_le12(x, cf, tp).value;
      double l13 = psi_le13(x, cf, tp).value;
      double sc = 1.0 + std::abs(bf);
      worst12 = std::max(worst12, std::abs(bf - l12) / sc);
      worst13 = std::max(worst13, std::abs(bf - l13) / sc);
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max|bf-le12|=%.3g (tol 1e-10), max|bf-le13|=%.3g (tol 1e-8)",
                worst12, worst13);
  o.detail = buf;
  o.pass = worst12 <= 1e-10 && worst13 <= 1e-8;
  return o;
}

// 5. Laplace round trip with tail-bound-selected truncation.
Outcome criterion5() {
  Outcome o;
  std::mt19937_64 rng(kMasterSeed);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    BMVProblem p = random_problem(rng);
    CanonicalForm cf = canonicalize(p);
    // pick n_max from the tail bound maximized over both intervals
    CanonicalView lo = lower_view(cf), up = upper_view(cf);
    double target = 1e-7 * std::max(1.0, trace_exp(p, 0.0));
    int n_max = 30;
    for (int n = 10; n <= 30; n += 2) {
      double bound = std::max(psi_tail_bound(n, 0.999 * lo.b3, lo),
                              psi_tail_bound(n, 0.999 * up.b3, up));
      if (bound < target) {
        n_max = n;
        break;
      }
    }
    TruncationPolicy tp;
    tp.n_max = n_max;
    tp.tol = 1e-12;
    GridSpec grid;
    grid.kind = GridSpec::Kind::gauss;
    grid.points_per_interval = 96;
    SignedMeasure m = build_measure(p, grid, tp, PsiMethod::le12);
    for (double z : {0.0, 0.5, 1.0, 2.0, 5.0}) {
      double lap = laplace_of_measure(m, z);
      double tr = trace_exp(p, z);
      worst = std::max(worst, std::abs(lap - tr) / tr);
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max rel error %.3g (tol 1e-5)", worst);
  o.detail = buf;
  o.pass = worst <= 1e-5;
  return o;
}

// 6. Positivity under the sufficient conditions, plus termwise nonnegativity
//    of the two-state family.
Outcome criterion6() {
  Outcome o;
  std::mt19937_64 rng(kMasterSeed + 6);
  TruncationPolicy tp;
  tp.n_max = 40;
  tp.tol = 1e-12;
  double worst_ratio = 0;  // most negative min / (1 + max|psi|)
  for (int t = 0; t < 100; ++t) {
    BMVProblem p = random_positive_problem(rng);
    CanonicalForm cf = canonicalize(p);
    double min_psi = 0, max_abs = 0;
    for (double x : interval_grid(cf, 20)) {
      double v = psi_le13(x, cf, tp).value;
      min_psi = std::min(min_psi, v);
      max_abs = std::max(max_abs, std::abs(v));
    }
    worst_ratio = std::min(worst_ratio, min_psi / (1.0 + max_abs));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "min psi ratio %.3g (tol -1e-9)", worst_ratio);
  o.detail = buf;
  o.pass = worst_ratio >= -1e-9;

  // two-state family: every contributing loop term is nonnegative
  std::mt19937_64 rng2(kMasterSeed + 66);
  auto u01 = [&rng2] { return static_cast<double>(rng2() >> 11) * 0x1.0p-53; };
  TruncationPolicy tp2;
  tp2.n_max = 12;
  for (int t = 0; t < 10; ++t) {
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    a(0, 0) = -1 + 2 * u01();
    a(1, 1) = -1 + 2 * u01();
    a(2, 2) = -1 + 2 * u01();
    a(0, 1) = a(1, 0) = -2 + 4 * u01();
    CanonicalForm cf = canonicalize(ingest(a, Eigen::Vector3d(0, 0.7 + u01(), 0.3 + 0.3 * u01())));
    bool all_nonneg = true;
    for (double x : interval_grid(cf, 5))
      psi_bruteforce_view(x < cf.b3() ? x : cf.b2() - x,
                          x < cf.b3() ? lower_view(cf) : upper_view(cf), tp2,
                          [&](const PathCharacteristic&, double term) {
                            all_nonneg = all_nonneg && term >= 0.0;
                          });
    note(o, all_nonneg, "negative loop term in the two-state family");
  }
  return o;
}

// 7. Derivative signs on z in [0,10] and agreement of the two derivative routes.
Outcome criterion7() {
  Outcome o;
  std::mt19937_64 rng(kMasterSeed);
  std::vector<double> zs;
  for (double z = 0.0; z <= 10.0; z += 0.5) zs.push_back(z);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    BMVProblem p = random_problem(rng);
    BernsteinReport rep = bernstein_checks(p, zs);
    note(o, rep.all_signs_ok, "sign violation at problem " + std::to_string(t));
    worst = std::max(worst, rep.max_dphi_mismatch);
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max dphi mismatch %.3g (tol 1e-6)", worst);
  if (!o.detail.empty()) o.detail += "; ";
  o.detail += buf;
  o.pass = o.pass && worst <= 1e-6;
  return o;
}

// 8. The first-conjecture counterexample at eps = 0.1.
Outcome criterion8() {
  Outcome o;
  std::vector<double> xs;
  for (int i = 1; i <= 99; ++i) xs.push_back(i / 100.0);
  CounterexampleReport rep = counterexample(0.1, xs, 8);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max |ratio - poly| = %.3g (tol 0.5), negative near 0: %s",
                rep.max_abs_dev, rep.negative_near_zero ? "yes" : "no");
  o.detail = buf;
  o.pass = rep.max_abs_dev <= 5.0 * 0.1 && rep.negative_near_zero;
  return o;
}

// 9. Monte Carlo validation: trace estimates and histogram bins.
Outcome criterion9() {
  Outcome o;
  std::mt19937_64 rng(kMasterSeed);
  MCConfig cfg;
  cfg.samples = 1000000;
  cfg.seed = 42;
  cfg.streams = 8;
  double worst_sigma = 0;
  for (int t = 0; t < 10; ++t) {
    BMVProblem p = random_problem(rng);
    for (double z : {0.0, 0.7}) {
      MCEstimate est = fk_trace_estimate(p, z, cfg);
      double sig = std::abs(est.estimate - trace_exp(p, z)) / est.std_error;
      worst_sigma = std::max(worst_sigma, sig);
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "worst trace deviation %.2f sigma (tol 3)", worst_sigma);
  o.detail = buf;
  o.pass = worst_sigma <= 3.0;

  std::mt19937_64 rng2(kMasterSeed);
  TruncationPolicy tp;
  tp.n_max = 24;
  tp.tol = 1e-12;
  double worst_bin = 0;
  for (int t = 0; t < 2; ++t) {
    BMVProblem p = random_problem(rng2);
    CanonicalForm cf = canonicalize(p);
    const int bins = 16;
    HistogramResult hr = density_histogram(cf, bins, cfg);
    for (int bin = 0; bin < bins; ++bin) {
      double lo = hr.edges[static_cast<std::size_t>(bin)];
      double hi = hr.edges[static_cast<std::size_t>(bin + 1)];
      double avg = 0;
      const int sub = 8;
      for (int i = 0; i < sub; ++i)
        avg += psi_le12(lo + (i + 0.5) * (hi - lo) / sub, cf, tp).value / sub;
      double sig = std::abs(hr.density[static_cast<std::size_t>(bin)] - avg) /
                   hr.density_se[static_cast<std::size_t>(bin)];
      worst_bin = std::max(worst_bin, sig);
    }
  }
  std::snprintf(buf, sizeof(buf), "worst histogram bin %.2f sigma (tol 3)", worst_bin);
  o.detail += std::string("; ") + buf;
  o.pass = o.pass && worst_bin <= 3.0;
  return o;
}

// 10. Trace-level invariances and the canonicalization round trip.
Outcome criterion10() {
  Outcome o;
  std::mt19937_64 rng(kMasterSeed);
  double worst = 0;
  for (int t = 0; t < 20; ++t) {
    InvarianceReport rep = invariance_checks(random_problem(rng));
    worst = std::max({worst, rep.max_rel_a_shift, rep.max_rel_b_shift, rep.max_rel_permutation,
                      rep.max_rel_roundtrip});
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max rel deviation %.3g (tol 1e-12)", worst);
  o.detail = buf;
  o.pass = worst <= 1e-12;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  struct Entry {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Entry entries[] = {
      {1, "path-count table", criterion1},
      {2, "count vs enumeration (n <= 12)", criterion2},
      {3, "hypergeometric identity suites", criterion3},
      {4, "density route equivalence", criterion4},
      {5, "Laplace round trip", criterion5},
      {6, "certified positivity", criterion6},
      {7, "derivative signs", criterion7},
      {8, "counterexample reproduction", criterion8},
      {9, "Monte Carlo validation", criterion9},
      {10, "invariance suite", criterion10},
  };
  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  bool all_pass = true;
  for (const Entry& e : entries) {
    if (only != 0 && e.id != only) continue;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o = e.run();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %2d: %s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL", e.id, e.name,
                secs, o.detail.empty() ? "" : " -- ", o.detail.c_str());
    std::fflush(stdout);
    all_pass = all_pass && o.pass;
  }
  return all_pass ? 0 : 1;
}
