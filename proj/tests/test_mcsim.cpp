#include <doctest.h>

#include <cmath>

#include "bmv/density.hpp"
#include "bmv/mcsim.hpp"
#include "bmv/verify.hpp"
#include "oracles.hpp"

using namespace bmv;

namespace {

Eigen::Matrix3d sym(double a1, double a2, double a3, double a12, double a13, double a23) {
  Eigen::Matrix3d m;
  m << a1, a12, a13, a12, a2, a23, a13, a23, a3;
  return m;
}

}  // namespace

TEST_CASE("trajectories respect the jump structure") {
  RngStream rng(42, 0);
  for (int i = 0; i < 2000; ++i) {
    Trajectory t = sample_trajectory(3, rng);
    for (std::size_t j = 0; j + 1 < t.states.size(); ++j) CHECK(t.states[j] != t.states[j + 1]);
    for (std::size_t j = 1; j < t.jump_times.size(); ++j)
      CHECK(t.jump_times[j] > t.jump_times[j - 1]);
    if (!t.jump_times.empty()) {
      CHECK(t.jump_times.front() > 0.0);
      CHECK(t.jump_times.back() <= 1.0);
    }
  }
}

TEST_CASE("jump count and start distributions") {
  RngStream rng(42, 1);
  const int n_samples = 1000000;
  std::vector<int> jump_hist(16, 0);
  std::vector<int> start_hist(4, 0);
  for (int i = 0; i < n_samples; ++i) {
    Trajectory t = sample_trajectory(3, rng);
    if (t.n_jumps() < 16) ++jump_hist[static_cast<std::size_t>(t.n_jumps())];
    ++start_hist[static_cast<std::size_t>(t.states.front())];
  }
  // P(N_1 = n) = e^{-2} 2^n / n!
  for (int n = 0; n <= 8; ++n) {
    double pn = std::exp(-2.0) * std::pow(2.0, n) / std::tgamma(n + 1.0);
    double se = std::sqrt(pn * (1.0 - pn) / n_samples);
    CHECK(std::abs(jump_hist[static_cast<std::size_t>(n)] / double(n_samples) - pn) <= 4.0 * se);
  }
  for (int s = 1; s <= 3; ++s) {
    double se = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / n_samples);
    CHECK(std::abs(start_hist[static_cast<std::size_t>(s)] / double(n_samples) - 1.0 / 3.0) <=
          4.0 * se);
  }
}

TEST_CASE("loop-conditioned durations are uniform on the simplex") {
  // condition on the loop (1,2): two jumps, path 1 -> 2 -> 1
  RngStream rng(42, 2);
  std::vector<double> t1, t2, t3;
  for (int i = 0; i < 800000; ++i) {
    Trajectory t = sample_trajectory(3, rng);
    if (t.n_jumps() != 2 || t.states[0] != 1 || t.states[1] != 2 || t.states[2] != 1) continue;
    t1.push_back(t.jump_times[0]);
    t2.push_back(t.jump_times[1] - t.jump_times[0]);
    t3.push_back(1.0 - t.jump_times[1]);
  }
  REQUIRE(t1.size() > 5000);
  auto beta12 = [](double u) { return 1.0 - (1.0 - u) * (1.0 - u); };
  for (auto* v : {&t1, &t2, &t3}) {
    double d = oracles::ks_statistic(*v, beta12);
    CHECK(oracles::ks_pvalue(d, v->size()) > 0.001);
  }
}

TEST_CASE("determinism across runs and thread counts") {
  std::mt19937_64 seed_rng(8);
  BMVProblem p = random_problem(seed_rng);
  MCConfig cfg;
  cfg.samples = 100000;
  cfg.seed = 42;
  cfg.streams = 8;
  cfg.threads = 1;
  MCEstimate a = fk_trace_estimate(p, 0.7, cfg);
  cfg.threads = 4;
  MCEstimate b = fk_trace_estimate(p, 0.7, cfg);
  MCEstimate c = fk_trace_estimate(p, 0.7, cfg);
  CHECK(a.estimate == b.estimate);
  CHECK(a.std_error == b.std_error);
  CHECK(b.estimate == c.estimate);
  cfg.seed = 43;
  MCEstimate d = fk_trace_estimate(p, 0.7, cfg);
  CHECK(d.estimate != a.estimate);
}

TEST_CASE("trace functional hits known values") {
  MCConfig cfg;
  cfg.samples = 400000;
  cfg.seed = 42;
  // A = B = 0: only jump-free loops contribute, estimate = 3
  BMVProblem zero = ingest(Eigen::Matrix3d::Zero(), Eigen::Vector3d::Zero());
  MCEstimate est = fk_trace_estimate(zero, 1.0, cfg);
  CHECK(std::abs(est.estimate - 3.0) <= 3.0 * est.std_error);

  // diagonal A commutes with B
  BMVProblem diag = ingest(sym(0.5, -0.25, 1.0, 0, 0, 0), Eigen::Vector3d(0.0, 1.5, 0.7));
  double exact = std::exp(0.5) + std::exp(-0.25 - 1.5) + std::exp(1.0 - 0.7);
  est = fk_trace_estimate(diag, 1.0, cfg);
  CHECK(std::abs(est.estimate - exact) <= 3.0 * est.std_error);

  // generic problem against the eigendecomposition, including z = 0
  std::mt19937_64 rng(17);
  BMVProblem p = random_problem(rng);
  for (double z : {0.0, 0.7}) {
    est = fk_trace_estimate(p, z, cfg);
    CHECK(std::abs(est.estimate - trace_exp(p, z)) <= 3.0 * est.std_error);
  }
}

TEST_CASE("vector functional matches the semigroup at several horizons") {
  std::mt19937_64 rng(23);
  BMVProblem p = random_problem(rng);
  MCConfig cfg;
  cfg.samples = 400000;
  cfg.seed = 42;
  const double z = 0.5;
  Eigen::Vector3d r(0.3, -0.8, 1.1);
  for (double t : {0.25, 0.5, 1.0}) {
    Eigen::Matrix3d m = t * (p.A.a - z * p.B.matrix());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
    Eigen::Matrix3d mexp = es.eigenvectors() *
                           es.eigenvalues().array().exp().matrix().asDiagonal() *
                           es.eigenvectors().transpose();
    Eigen::Vector3d exact_vec = (mexp * r) * std::exp(-t * 2.0);
    for (int i = 1; i <= 3; ++i) {
      MCEstimate est = fk_vector_estimate(p, z, t, i, r, cfg);
      CHECK(std::abs(est.estimate - exact_vec(i - 1)) <= 3.5 * est.std_error);
    }
  }
}

TEST_CASE("generator check") {
  SymmetricMatrix3 A;
  A.a = sym(0.0, 0.0, 0.0, 0.8, -0.6, 0.4);
  MCConfig cfg;
  cfg.samples = 2000000;
  cfg.seed = 42;

  auto constant = [](double, int) { return 1.0; };
  GeneratorCheck gc = generator_check(A, constant, 1.0, 1, 0.01, cfg);
  CHECK(gc.exact == 0.0);
  CHECK(gc.empirical == 0.0);

  // f(zeta, i) = zeta r_i has exact image (A0 - (d-1)I) r at zeta = 1
  Eigen::Vector3d r(0.5, 1.25, -0.75);
  auto linear = [&r](double zeta, int i) { return zeta * r(i - 1); };
  for (int i = 1; i <= 3; ++i) {
    gc = generator_check(A, linear, 1.0, i, 0.01, cfg);
    Eigen::Matrix3d a0 = A.a;
    a0.diagonal().setZero();
    double expect = ((a0 - 2.0 * Eigen::Matrix3d::Identity()) * r)(i - 1);
    CHECK(gc.exact == doctest::Approx(expect).epsilon(1e-13));
    CHECK(std::abs(gc.empirical - gc.exact) <= 3.0 * gc.std_error + 5.0 * 0.01);
  }
}

TEST_CASE("histogram estimates atoms and the density") {
  // zero off-diagonal: all loop weights vanish, atoms remain
  BMVProblem diag = ingest(sym(0.4, -0.2, 0.1, 0, 0, 0), Eigen::Vector3d(0, 2, 1));
  MCConfig cfg;
  cfg.samples = 400000;
  cfg.seed = 42;
  HistogramResult hr = density_histogram(canonicalize(diag), 16, cfg);
  for (double v : hr.density) CHECK(v == 0.0);
  // canonical slot order: (a at b=0, a at b=2, a at b=1)
  const double slot_a[3] = {0.4, -0.2, 0.1};
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(hr.atom_est[static_cast<std::size_t>(i)] - std::exp(slot_a[i])) <=
          3.0 * hr.atom_se[static_cast<std::size_t>(i)]);

  // generic problem: bins against the triple-sum bin averages
  std::mt19937_64 rng(29);
  BMVProblem p = random_problem(rng);
  CanonicalForm cf = canonicalize(p);
  cfg.samples = 1500000;
  const int bins = 12;
  hr = density_histogram(cf, bins, cfg);
  TruncationPolicy tp;
  tp.n_max = 24;
  int checked = 0;
  for (int bin = 0; bin < bins; ++bin) {
    double lo = hr.edges[static_cast<std::size_t>(bin)];
    double hi = hr.edges[static_cast<std::size_t>(bin + 1)];
    double avg = 0;
    const int sub = 8;
    for (int i = 0; i < sub; ++i)
      avg += psi_le12(lo + (i + 0.5) * (hi - lo) / sub, cf, tp).value / sub;
    CHECK(std::abs(hr.density[static_cast<std::size_t>(bin)] - avg) <=
          3.0 * hr.density_se[static_cast<std::size_t>(bin)] + 1e-12);
    ++checked;
  }
  CHECK(checked == bins);
}

TEST_CASE("histogram tracks the density route on a counterexample-style matrix") {
  // The component measure of this family turns negative near 0; the trace
  // measure stays positive but is strongly lopsided, which stresses the
  // bin/density comparison.
  const double eps = 0.25;
  BMVProblem p =
      ingest(sym(0, 0, 0, eps * eps / 2, eps, -eps), Eigen::Vector3d(0.0, 1.0, 0.25));
  CanonicalForm cf = canonicalize(p);
  MCConfig cfg;
  cfg.samples = 1000000;
  cfg.seed = 42;
  const int bins = 8;
  HistogramResult hr = density_histogram(cf, bins, cfg);
  TruncationPolicy tp;
  tp.n_max = 20;
  for (int bin = 0; bin < bins; ++bin) {
    double lo = hr.edges[static_cast<std::size_t>(bin)];
    double hi = hr.edges[static_cast<std::size_t>(bin + 1)];
    double avg = 0;
    const int sub = 8;
    for (int i = 0; i < sub; ++i)
      avg += psi_le12(lo + (i + 0.5) * (hi - lo) / sub, cf, tp).value / sub;
    CHECK(std::abs(hr.density[static_cast<std::size_t>(bin)] - avg) <=
          3.0 * hr.density_se[static_cast<std::size_t>(bin)] + 1e-12);
  }
}
