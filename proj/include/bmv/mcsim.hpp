#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "bmv/core.hpp"

namespace bmv {

// Deterministic per-stream generator (xoshiro256**), seeded from
// seed XOR stream-index through a SplitMix64 scramble. Streams evolve
// independently, so results do not depend on how streams map to threads.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t next_u64();
  double uniform01();                  // in [0, 1)
  double exponential(double rate);
  int uniform_int(int n);              // in {0, ..., n-1}

 private:
  std::uint64_t s_[4];
};

struct MCConfig {
  std::int64_t samples = 1'000'000;
  std::uint64_t seed = 42;
  int streams = 8;
  int threads = 0;  // 0 = hardware concurrency, capped at streams
};

// One realization of the jump process on {1,...,d} over [0, horizon]:
// Poisson(d-1) jump clock, uniform jumps to another state, uniform start.
struct Trajectory {
  int d = 0;
  std::vector<int> states;       // states[0] = X_0, then the post-jump states
  std::vector<double> jump_times;
  int n_jumps() const { return static_cast<int>(jump_times.size()); }
};

Trajectory sample_trajectory(int d, RngStream& rng, double horizon = 1.0);
Trajectory sample_trajectory_from(int d, int start, RngStream& rng, double horizon = 1.0);

struct MCEstimate {
  double estimate = 0;
  double std_error = 0;
  std::int64_t samples = 0;
};

// Trace functional at horizon 1: mean of d e^(d-1) Z_1 1{X_1 = X_0}
// exp(int a - z int b) over the jump process.
MCEstimate fk_trace_estimate(const BMVProblem& p, double z, const MCConfig& cfg);

// Vector functional at horizon t started at state i (1-based):
// estimates e^{-t(d-1)} (exp(t(A - zB)) r)_i.
MCEstimate fk_vector_estimate(const BMVProblem& p, double z, double t, int i,
                              const Eigen::Vector3d& r, const MCConfig& cfg);

struct HistogramResult {
  std::vector<double> edges;         // bin edges, breakpoint b3 on an edge
  std::vector<double> density;       // per-bin estimate of the mean density
  std::vector<double> density_se;
  std::vector<double> atom_est;      // one per state, estimates exp(a_ii)
  std::vector<double> atom_se;
};

// Loop-weight histogram of the occupation functional; unbiased for the
// bin-averaged density of the absolutely continuous part. Expects the
// canonical frame.
HistogramResult density_histogram(const CanonicalForm& cf, int bins, const MCConfig& cfg);

struct GeneratorCheck {
  double empirical = 0;
  double std_error = 0;
  double exact = 0;
};

// Finite-t approximation of the generator applied to f at (zeta, i), against
// the exact jump-operator value. Only the off-diagonal entries of A drive the
// jumps.
GeneratorCheck generator_check(const SymmetricMatrix3& A,
                               const std::function<double(double, int)>& f, double zeta, int i,
                               double t_small, const MCConfig& cfg);

}  // namespace bmv
