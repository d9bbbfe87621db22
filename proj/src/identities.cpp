#include "bmv/identities.hpp"

#include <cmath>
#include <sstream>

#include "bmv/hyperfun.hpp"
#include "bmv/numerics.hpp"

namespace bmv {

namespace {

struct Tracker {
  IdentityReport rep;

  void record(double lhs, double rhs, const std::string& label) {
    double err = std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
    ++rep.cases;
    if (err > rep.max_error) {
      rep.max_error = err;
      rep.worst_case = label;
    }
  }
  void kernel_value(double v) { rep.min_kernel = std::min(rep.min_kernel, v); }
};

std::string label4(const char* name, double a, double b, double c, double d) {
  std::ostringstream os;
  os << name << "(" << a << "," << b << "," << c << "," << d << ")";
  return os.str();
}

IdentityReport gauss_suite() {
  Tracker t;
  t.rep.suite = "gauss";
  t.rep.threshold = 1e-12;
  const double bs[] = {-3.25, -1.25, 0.5, 1.75, 3.5};
  const double cs[] = {0.5, 1.5, 2.75, 4.25, 7.5};
  for (int a = -1; a >= -6; --a)
    for (double b : bs)
      for (double c : cs) {
        double lhs = hyp2f1_terminating(a, b, c, 1.0);
        // Chu-Vandermonde value of the terminating series at z = 1.
        double rhs = rising(c - b, -a) / rising(c, -a);
        t.record(lhs, rhs, label4("gauss", a, b, c, 1.0));
      }
  return t.rep;
}

IdentityReport pfaff_suite() {
  Tracker t;
  t.rep.suite = "pfaff";
  t.rep.threshold = 1e-12;
  const double bs[] = {1.5, 2.0, 3.5};
  const double cs[] = {4.0, 5.5};
  const double zs[] = {-2.0, -0.5, 0.3, 0.5, 0.9};
  for (int a = 0; a >= -5; --a)
    for (double b : bs)
      for (double c : cs)
        for (double z : zs) {
          auto sides = pfaff_check(a, b, c, z);
          t.record(sides.lhs, sides.rhs, label4("pfaff", a, b, c, z));
        }
  return t.rep;
}

IdentityReport lemma5_suite() {
  Tracker t;
  t.rep.suite = "lemma5";
  t.rep.threshold = 1e-10;
  const std::pair<double, double> cds[] = {{0.7, 1.3}, {-1.1, 0.4}, {0.35, -0.8}};
  for (int k = 1; k <= 6; ++k)
    for (int m = 0; m <= 3; ++m)
      for (int j = m & 1; j <= k; j += 2)
        for (int r = 0; r <= 3; ++r)
          for (auto [C, D] : cds) {
            auto sides = lemma5_sides(j, k, m, r, C, D);
            std::ostringstream os;
            os << "lemma5(j=" << j << ",k=" << k << ",m=" << m << ",r=" << r << ",C=" << C
               << ",D=" << D << ")";
            t.record(sides.lhs, sides.rhs, os.str());
          }
  return t.rep;
}

IdentityReport lebasic_suite() {
  Tracker t;
  t.rep.suite = "lebasic";
  t.rep.threshold = 1e-8;
  const double vs[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const double xis[] = {-2.0, -0.5, 0.0, 0.5, 2.0};
  for (int k = 0; k <= 8; ++k)
    for (int r = 0; r <= 4; ++r)
      for (double v : vs)
        for (double xi : xis)
          for (bool tilde : {false, true}) {
            double series = a_kernel_series(k, r, v, xi, {}, tilde);
            double integral = a_kernel_integral(k, r, v, xi, 64, tilde);
            std::ostringstream os;
            os << (tilde ? "A~" : "A") << "(k=" << k << ",r=" << r << ",v=" << v << ",xi=" << xi
               << ")";
            t.record(series, integral, os.str());
            if (tilde) t.kernel_value(series);
          }
  return t.rep;
}

IdentityReport lereps_suite() {
  Tracker t;
  t.rep.suite = "lereps";
  t.rep.threshold = 1e-9;
  const double vs[] = {-1.0, -0.5, 0.0, 0.5, 1.0};
  const double xis[] = {-2.0, -0.5, 0.0, 0.5, 2.0};
  for (int k = 1; k <= 6; ++k)
    for (int r = 0; r <= 3; ++r)
      for (int rho = 0; rho <= r; ++rho)
        for (double v : vs)
          for (double xi : xis)
            for (bool tilde : {false, true}) {
              double s_from_t = s_kernel_from_t(k, r, rho, v, xi, {}, tilde);
              double s_from_a = s_kernel(k, r, rho, v, xi, {}, tilde);
              std::ostringstream os;
              os << (tilde ? "S~" : "S") << "(k=" << k << ",r=" << r << ",rho=" << rho
                 << ",v=" << v << ",xi=" << xi << ")";
              t.record(s_from_t, s_from_a, os.str());

              // T reconstructs from S with plain binomial weights.
              double trec = 0;
              for (int tau = 0; tau <= r - rho; ++tau)
                trec += binomial(r - rho, tau) * s_kernel(k, r, rho + tau, v, xi, {}, tilde);
              double tdirect = t_kernel(k, r, rho, v, xi, {}, tilde);
              t.record(tdirect, trec, "T-reconstruction " + os.str());
              if (tilde) {
                t.kernel_value(s_from_a);
                t.kernel_value(tdirect);
              }
            }
  return t.rep;
}

}  // namespace

std::vector<std::string> identity_suites() {
  return {"gauss", "pfaff", "lemma5", "lebasic", "lereps"};
}

IdentityReport run_identity_suite(const std::string& suite) {
  if (suite == "gauss") return gauss_suite();
  if (suite == "pfaff") return pfaff_suite();
  if (suite == "lemma5") return lemma5_suite();
  if (suite == "lebasic") return lebasic_suite();
  if (suite == "lereps") return lereps_suite();
  raise(errc::bad_input, "unknown identity suite: " + suite);
}

}  // namespace bmv
