#include "bmv/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bmv {

BMVProblem ingest(const Eigen::Matrix3d& raw_A, const Eigen::Vector3d& raw_B, double sym_tol) {
  if (!raw_A.allFinite() || !raw_B.allFinite())
    raise(errc::bad_input, "problem entries must be finite");
  for (int i = 0; i < 3; ++i) {
    if (raw_B(i) < 0.0) {
      std::ostringstream os;
      os << "NegativeB: B[" << i + 1 << "] = " << raw_B(i) << " violates B >= 0";
      raise(errc::negative_b, os.str());
    }
  }
  double delta = (raw_A - raw_A.transpose()).cwiseAbs().maxCoeff();
  if (delta > sym_tol) {
    std::ostringstream os;
    os << "AsymmetricInput: max |A - A^T| = " << delta << " exceeds tolerance " << sym_tol;
    raise(errc::asymmetric_input, os.str());
  }
  BMVProblem p;
  p.A.a = 0.5 * (raw_A + raw_A.transpose());
  p.A.sym_delta = 0.5 * delta;
  p.B.b = raw_B;
  return p;
}

Eigen::Matrix3d permute_conjugate(const Eigen::Matrix3d& a, const std::array<int, 3>& perm) {
  Eigen::Matrix3d out;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out(i, j) = a(perm[static_cast<std::size_t>(i)],
                                              perm[static_cast<std::size_t>(j)]);
  return out;
}

CanonicalForm canonicalize(const BMVProblem& p, double tie_tol, bool normalize_a) {
  CanonicalForm cf;
  const Eigen::Vector3d& b = p.B.b;
  if (tie_tol < 0.0) tie_tol = 1e-9 * (1.0 + b.maxCoeff());
  cf.tie_tol = tie_tol;

  // Sort indices by b ascending (ties broken by index), then assign
  // slot 1 <- smallest, slot 2 <- largest, slot 3 <- middle.
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return b(i) < b(j); });
  cf.perm = {order[0], order[2], order[1]};

  cf.b_shift = b(order[0]);
  Eigen::Vector3d bc;
  for (int s = 0; s < 3; ++s) bc(s) = b(cf.perm[static_cast<std::size_t>(s)]) - cf.b_shift;
  cf.degenerate = (b(order[1]) - b(order[0]) <= tie_tol) || (b(order[2]) - b(order[1]) <= tie_tol);

  Eigen::Matrix3d ac = permute_conjugate(p.A.a, cf.perm);
  cf.a_shift = normalize_a ? ac.diagonal().maxCoeff() : 0.0;
  cf.mass_scale = std::exp(cf.a_shift);
  ac.diagonal().array() -= cf.a_shift;

  cf.problem.A.a = ac;
  cf.problem.A.sym_delta = p.A.sym_delta;
  cf.problem.B.b = bc;
  return cf;
}

}  // namespace bmv
