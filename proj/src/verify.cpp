#include "bmv/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "bmv/numerics.hpp"
#include "bmv/paths.hpp"

namespace bmv {

double trace_exp(const BMVProblem& p, double z) {
  Eigen::Matrix3d m = p.A.a - z * p.B.matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m, Eigen::EigenvaluesOnly);
  const Eigen::Vector3d& ev = es.eigenvalues();
  return std::exp(ev(0)) + std::exp(ev(1)) + std::exp(ev(2));
}

double laplace_of_measure(const SignedMeasure& m, double z) {
  KahanSum<double> acc;
  for (const auto& [loc, w] : m.atoms) acc.add(w * std::exp(-z * loc));
  if (m.xs.empty()) return acc.value();

  if (!m.quad_w.empty()) {
    for (std::size_t i = 0; i < m.xs.size(); ++i)
      acc.add(m.quad_w[i] * m.psis[i] * std::exp(-z * m.xs[i]));
    return acc.value();
  }

  // Uniform midpoint grids per interval tag.
  int max_tag = *std::max_element(m.interval_tag.begin(), m.interval_tag.end());
  for (int tag = 0; tag <= max_tag; ++tag) {
    std::vector<double> xs, fs;
    for (std::size_t i = 0; i < m.xs.size(); ++i) {
      if (m.interval_tag[i] != tag) continue;
      xs.push_back(m.xs[i]);
      fs.push_back(m.psis[i] * std::exp(-z * m.xs[i]));
    }
    if (xs.size() < 64)
      raise(errc::insufficient_grid, "InsufficientGrid: need >= 64 density samples per interval");
    double h = xs[1] - xs[0];
    for (std::size_t i = 1; i + 1 < xs.size(); ++i)
      if (std::abs((xs[i + 1] - xs[i]) - h) > 1e-9 * (1.0 + std::abs(h)))
        raise(errc::insufficient_grid, "midpoint quadrature expects a uniform grid");
    KahanSum<double> part;
    for (double f : fs) part.add(f);
    acc.add(h * part.value());
  }
  return acc.value();
}

namespace {

struct EigenSplit {
  Eigen::Vector3d ev;
  Eigen::Matrix3d bhat;  // B in the eigenbasis of A - zB
};

EigenSplit eigen_split(const BMVProblem& p, double z) {
  Eigen::Matrix3d m = p.A.a - z * p.B.matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  EigenSplit out;
  out.ev = es.eigenvalues();
  out.bhat = es.eigenvectors().transpose() * p.B.matrix() * es.eigenvectors();
  return out;
}

double dphi_trace(const BMVProblem& p, double z) {
  EigenSplit s = eigen_split(p, z);
  double acc = 0;
  for (int i = 0; i < 3; ++i) acc += std::exp(s.ev(i)) * s.bhat(i, i);
  return -acc;
}

// phi'' = sum_ij |B_ij|^2 g(l_j - l_i) e^{l_i},  g(u) = (e^u - 1)/u.
double d2phi_closed(const BMVProblem& p, double z) {
  EigenSplit s = eigen_split(p, z);
  auto g = [](double u) { return std::abs(u) < 1e-8 ? 1.0 + u / 2.0 : std::expm1(u) / u; };
  KahanSum<double> acc;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      acc.add(s.bhat(i, j) * s.bhat(j, i) * g(s.ev(j) - s.ev(i)) * std::exp(s.ev(i)));
  return acc.value();
}

double d2phi_quadrature(const BMVProblem& p, double z) {
  EigenSplit s = eigen_split(p, z);
  const Quadrature& q = gauss_legendre_01(32);
  KahanSum<double> acc;
  for (std::size_t n = 0; n < q.x.size(); ++n) {
    double t = q.x[n];
    KahanSum<double> inner;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        inner.add(s.bhat(i, j) * s.bhat(j, i) * std::exp(t * (s.ev(j) - s.ev(i)) + s.ev(i)));
    acc.add(q.w[n] * inner.value());
  }
  return acc.value();
}

double richardson_fd1(const BMVProblem& p, double z, double h) {
  auto d = [&](double step) { return (trace_exp(p, z + step) - trace_exp(p, z - step)) / (2 * step); };
  return (4.0 * d(h / 2) - d(h)) / 3.0;
}

double richardson_fd2(const BMVProblem& p, double z, double h) {
  auto d = [&](double step) {
    return (trace_exp(p, z + step) - 2.0 * trace_exp(p, z) + trace_exp(p, z - step)) /
           (step * step);
  };
  return (4.0 * d(h / 2) - d(h)) / 3.0;
}

}  // namespace

BernsteinReport bernstein_checks(const BMVProblem& p, const std::vector<double>& z_grid) {
  BernsteinReport rep;
  rep.all_signs_ok = true;
  for (double z : z_grid) {
    BernsteinRow row;
    row.z = z;
    row.phi = trace_exp(p, z);
    row.dphi_trace = dphi_trace(p, z);
    double h = 1e-4 * (1.0 + std::abs(z));
    row.dphi_fd = richardson_fd1(p, z, h);
    row.d2phi_closed = d2phi_closed(p, z);
    row.d2phi_quad = d2phi_quadrature(p, z);
    row.d2phi_fd = richardson_fd2(p, z, h);
    double sign_slack = 1e-12 * (1.0 + std::abs(row.phi));
    row.signs_ok = row.phi >= 0.0 && -row.dphi_trace >= -sign_slack &&
                   row.d2phi_closed >= -sign_slack;
    rep.all_signs_ok = rep.all_signs_ok && row.signs_ok;
    rep.max_dphi_mismatch =
        std::max(rep.max_dphi_mismatch,
                 std::abs(row.dphi_trace - row.dphi_fd) / (1.0 + std::abs(row.dphi_trace)));
    rep.max_d2phi_mismatch =
        std::max(rep.max_d2phi_mismatch,
                 std::abs(row.d2phi_closed - row.d2phi_quad) / (1.0 + std::abs(row.d2phi_closed)));
    rep.rows.push_back(row);
  }
  return rep;
}

const char* to_string(Certificate::Reason r) {
  switch (r) {
    case Certificate::Reason::commuting: return "Commuting";
    case Certificate::Reason::dim_le2: return "DimLE2";
    case Certificate::Reason::two_eigenvalues: return "TwoEigenvalues";
    case Certificate::Reason::degenerate_tie: return "DegenerateTie";
    case Certificate::Reason::nonneg_product: return "NonnegProduct";
    case Certificate::Reason::theorem_th: return "TheoremTH";
  }
  return "?";
}

const char* to_string(Certificate::Verdict v) {
  return v == Certificate::Verdict::proven_positive ? "ProvenPositive" : "Unknown";
}

Certificate certificate(const BMVProblem& p) {
  Certificate cert;
  CanonicalForm cf = canonicalize(p);
  const Eigen::Matrix3d& a = cf.problem.A.a;
  const Eigen::Vector3d& b = cf.problem.B.b;
  const double scale = 1.0 + a.cwiseAbs().maxCoeff();

  // A and B commute iff a_ij (b_j - b_i) = 0 for all off-diagonal pairs.
  bool commuting = true;
  for (int i = 0; i < 3 && commuting; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j && std::abs(a(i, j) * (b(j) - b(i))) > 1e-14 * scale * (1.0 + b.maxCoeff())) {
        commuting = false;
        break;
      }
  if (commuting) cert.reasons.push_back(Certificate::Reason::commuting);

  // A state with no couplings splits off a 1-dimensional block.
  for (int s = 0; s < 3; ++s) {
    int o1 = (s + 1) % 3, o2 = (s + 2) % 3;
    if (a(s, o1) == 0.0 && a(s, o2) == 0.0) {
      cert.reasons.push_back(Certificate::Reason::dim_le2);
      break;
    }
  }

  const double tie12 = b(2) - b(0);  // b3 - b1 in canonical slots
  const double tie23 = b(1) - b(2);  // b2 - b3
  if (tie12 == 0.0 || tie23 == 0.0)
    cert.reasons.push_back(Certificate::Reason::two_eigenvalues);
  else if (cf.degenerate)
    cert.reasons.push_back(Certificate::Reason::degenerate_tie);

  const double prod = a(0, 1) * a(0, 2) * a(1, 2);
  if (prod >= 0.0) cert.reasons.push_back(Certificate::Reason::nonneg_product);

  if (!cf.degenerate) {
    const double b1 = b(0), b2 = b(1), b3 = b(2);  // b1 = 0 after canonicalization
    cert.cond1_lower =
        std::abs(a(0, 1)) / std::sqrt(b2 - b1) - std::abs(a(0, 2)) / std::sqrt(b3 - b1);
    cert.cond1_upper =
        std::abs(a(0, 1)) / std::sqrt(b2 - b1) - std::abs(a(1, 2)) / std::sqrt(b2 - b3);
    cert.cond2 = a(0, 0) * (b2 - b3) + a(1, 1) * (b3 - b1) + a(2, 2) * (b1 - b2);
    cert.cond2_b1zero = a(0, 0) * (b2 - b3) + a(1, 1) * b3 - a(2, 2) * b2;
    if (cert.cond1_lower >= 0.0 && cert.cond1_upper >= 0.0 && cert.cond2 >= 0.0)
      cert.reasons.push_back(Certificate::Reason::theorem_th);
  }

  cert.verdict = cert.reasons.empty() ? Certificate::Verdict::unknown
                                      : Certificate::Verdict::proven_positive;
  return cert;
}

CounterexampleReport counterexample(double eps, const std::vector<double>& x_grid, int n_max) {
  if (!(eps > 0.0) || eps > 0.3) raise(errc::bad_input, "counterexample expects 0 < eps <= 0.3");
  CounterexampleReport rep;
  rep.eps = eps;
  rep.n_max = n_max;

  // e1-component loop sum for A = [[0, e^2/2, e], [e^2/2, 0, -e], [e, -e, 0]],
  // B = diag(0, 1, 0). With b1 = b3 = 0 the support is [0, 1] and points are
  // reached through the swapped frame (indices 1 and 2 exchanged,
  // b2 -> 1, b3 -> 1 - 0), where the original start-1 loops start at 2.
  CanonicalView view;
  view.b2 = 1.0;
  view.b3 = 1.0;
  view.a12 = eps * eps / 2.0;
  view.a13 = -eps;  // swapped: original a23
  view.a23 = eps;   // swapped: original a13

  const double eps4 = eps * eps * eps * eps;
  rep.negative_near_zero = true;
  for (double x : x_grid) {
    if (!(x > 0.0) || !(x < 1.0)) raise(errc::bad_input, "counterexample grid must lie in (0,1)");
    const double xt = 1.0 - x;  // evaluation point of the swapped frame
    KahanSum<double> acc;
    for (int n = 2; n <= n_max; ++n) {
      for (int k1 = 1; k1 <= n; ++k1) {    // swapped k1 = original k2 (vanishes when 0)
        for (int k2 = 1; k2 <= n - k1; ++k2) {  // swapped k2 = original start count
          PathCharacteristic k{k1, k2, n - k1 - k2};
          int l12 = k.k1 + k.k2 - k.k3;
          int l13 = k.k1 + k.k3 - k.k2;
          int l23 = k.k2 + k.k3 - k.k1;
          if (l12 < 0 || l13 < 0 || l23 < 0) continue;
          PathCount pc = count_paths(k1, l13, l23);
          if (pc.p == 0) continue;
          double count_start2 = static_cast<double>(pc.p) * k.k2 / n;
          double ord = ipow(view.a12, l12) * ipow(view.a13, l13) * ipow(view.a23, l23);
          if (ord == 0.0) continue;
          acc.add(count_start2 * ord * phi(k, 2, xt, view));
        }
      }
    }
    CounterexamplePoint pt;
    pt.x = x;
    pt.ratio = 12.0 * acc.value() / eps4;
    double om = 1.0 - x;
    pt.poly = 3.0 * om - 6.0 * om * om + 2.0 * om * om * om;
    rep.max_abs_dev = std::max(rep.max_abs_dev, std::abs(pt.ratio - pt.poly));
    if (x <= 0.05 && pt.ratio >= 0.0) rep.negative_near_zero = false;
    rep.points.push_back(pt);
  }
  return rep;
}

InvarianceReport invariance_checks(const BMVProblem& p, const std::vector<double>& z_grid) {
  InvarianceReport rep;
  const double lam1 = 1.0, lam2 = 1.0;
  CanonicalForm cf = canonicalize(p);

  BMVProblem pa = p;
  pa.A.a.diagonal().array() += lam1;
  BMVProblem pb = p;
  pb.B.b.array() += lam2;

  static const std::array<std::array<int, 3>, 6> perms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  for (double z : z_grid) {
    double base = trace_exp(p, z);
    double rel = 1.0 + std::abs(base);
    rep.max_rel_a_shift = std::max(
        rep.max_rel_a_shift, std::abs(trace_exp(pa, z) - std::exp(lam1) * base) / rel);
    rep.max_rel_b_shift = std::max(
        rep.max_rel_b_shift, std::abs(trace_exp(pb, z) - std::exp(-z * lam2) * base) / rel);
    for (const auto& perm : perms) {
      BMVProblem pp;
      pp.A.a = permute_conjugate(p.A.a, perm);
      for (int s = 0; s < 3; ++s) pp.B.b(s) = p.B.b(perm[static_cast<std::size_t>(s)]);
      rep.max_rel_permutation =
          std::max(rep.max_rel_permutation, std::abs(trace_exp(pp, z) - base) / rel);
    }
    double canon = cf.mass_scale * std::exp(-z * cf.b_shift) * trace_exp(cf.problem, z);
    rep.max_rel_roundtrip = std::max(rep.max_rel_roundtrip, std::abs(canon - base) / rel);
  }
  return rep;
}

BMVProblem random_problem(std::mt19937_64& rng) {
  // Hand-rolled uniforms keep the seeded problem set identical across
  // standard-library implementations.
  auto u01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto ua = [&] { return -2.0 + 4.0 * u01(); };
  auto ug = [&] { return 0.2 + 1.2 * u01(); };
  Eigen::Matrix3d a;
  for (int i = 0; i < 3; ++i) a(i, i) = ua();
  a(0, 1) = a(1, 0) = ua();
  a(0, 2) = a(2, 0) = ua();
  a(1, 2) = a(2, 1) = ua();
  double b3 = ug();
  double b2 = b3 + ug();
  return ingest(a, Eigen::Vector3d(0.0, b2, b3));
}

BMVProblem random_positive_problem(std::mt19937_64& rng) {
  for (int tries = 0; tries < 100000; ++tries) {
    BMVProblem p = random_problem(rng);
    Certificate cert = certificate(p);
    for (auto r : cert.reasons)
      if (r == Certificate::Reason::theorem_th) return p;
  }
  raise(errc::bad_input, "failed to sample a certified-positive problem");
}

}  // namespace bmv
