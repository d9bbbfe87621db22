#include "bmv/mcsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "bmv/numerics.hpp"

namespace bmv {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_index) {
  // Plain seed XOR stream-index would alias neighbouring seeds (XOR with a
  // small index only permutes low bits), so the index is spread first.
  std::uint64_t state = seed ^ (0x9E3779B97F4A7C15ull * (stream_index + 1));
  for (auto& word : s_) word = splitmix64(state);
}

std::uint64_t RngStream::next_u64() {
  std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

int RngStream::uniform_int(int n) {
  int v = static_cast<int>(uniform01() * n);
  return v < n ? v : n - 1;
}

Trajectory sample_trajectory_from(int d, int start, RngStream& rng, double horizon) {
  if (d < 2) raise(errc::bad_input, "jump process requires d >= 2");
  Trajectory traj;
  traj.d = d;
  traj.states.push_back(start);
  double t = rng.exponential(d - 1);
  int cur = start;
  while (t <= horizon) {
    int j = rng.uniform_int(d - 1);
    int next = j + 1 < cur ? j + 1 : j + 2;  // uniform over the other states
    traj.states.push_back(next);
    traj.jump_times.push_back(t);
    cur = next;
    t += rng.exponential(d - 1);
  }
  return traj;
}

Trajectory sample_trajectory(int d, RngStream& rng, double horizon) {
  int start = 1 + rng.uniform_int(d);
  return sample_trajectory_from(d, start, rng, horizon);
}

namespace {

struct StreamSums {
  KahanSum<double> sum;
  KahanSum<double> sum_sq;
  std::int64_t count = 0;
};

// Runs `body(stream_rng, n_samples, accumulator)` over cfg.streams streams,
// each with a fixed sample share, merging per-stream sums in stream order so
// the result is independent of thread scheduling.
template <class Body>
MCEstimate run_streams(const MCConfig& cfg, Body&& body) {
  if (cfg.samples < 1) raise(errc::bad_input, "samples must be >= 1");
  const int streams = std::max(1, cfg.streams);
  std::vector<StreamSums> sums(static_cast<std::size_t>(streams));
  auto run_one = [&](int s) {
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(s));
    std::int64_t lo = cfg.samples * s / streams;
    std::int64_t hi = cfg.samples * (s + 1) / streams;
    body(rng, hi - lo, sums[static_cast<std::size_t>(s)]);
  };
  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, streams));
  if (threads == 1) {
    for (int s = 0; s < streams; ++s) run_one(s);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int s = next.fetch_add(1); s < streams; s = next.fetch_add(1)) run_one(s);
      });
    for (auto& th : pool) th.join();
  }
  KahanSum<double> total, total_sq;
  std::int64_t n = 0;
  for (const auto& s : sums) {
    total.add(s.sum.value());
    total_sq.add(s.sum_sq.value());
    n += s.count;
  }
  MCEstimate est;
  est.samples = n;
  est.estimate = total.value() / static_cast<double>(n);
  double var = (total_sq.value() - total.value() * est.estimate) / (static_cast<double>(n) - 1.0);
  est.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(n));
  return est;
}

// Occupation-weighted exponent sum over a trajectory on [0, horizon].
double occupation_dot(const Trajectory& traj, const Eigen::Vector3d& w, double horizon) {
  double acc = 0;
  double prev = 0;
  for (std::size_t i = 0; i < traj.jump_times.size(); ++i) {
    acc += w(traj.states[i] - 1) * (traj.jump_times[i] - prev);
    prev = traj.jump_times[i];
  }
  acc += w(traj.states.back() - 1) * (horizon - prev);
  return acc;
}

double jump_weight(const Trajectory& traj, const Eigen::Matrix3d& a) {
  double z = 1.0;
  for (std::size_t i = 0; i + 1 < traj.states.size(); ++i)
    z *= a(traj.states[i] - 1, traj.states[i + 1] - 1);
  return z;
}

}  // namespace

MCEstimate fk_trace_estimate(const BMVProblem& p, double z, const MCConfig& cfg) {
  const int d = 3;
  const Eigen::Matrix3d a = p.A.a;
  const Eigen::Vector3d adiag = p.A.diagonal();
  const Eigen::Vector3d b = p.B.b;
  const double pref = d * std::exp(d - 1.0);
  return run_streams(cfg, [&](RngStream& rng, std::int64_t n, StreamSums& out) {
    for (std::int64_t i = 0; i < n; ++i) {
      Trajectory traj = sample_trajectory(d, rng);
      double w = 0.0;
      if (traj.states.back() == traj.states.front()) {
        double zprod = jump_weight(traj, a);
        if (zprod != 0.0)
          w = pref * zprod *
              std::exp(occupation_dot(traj, adiag, 1.0) - z * occupation_dot(traj, b, 1.0));
      }
      out.sum.add(w);
      out.sum_sq.add(w * w);
      ++out.count;
    }
  });
}

MCEstimate fk_vector_estimate(const BMVProblem& p, double z, double t, int i,
                              const Eigen::Vector3d& r, const MCConfig& cfg) {
  if (i < 1 || i > 3) raise(errc::bad_input, "start state must be in {1,2,3}");
  const int d = 3;
  const Eigen::Matrix3d a = p.A.a;
  const Eigen::Vector3d adiag = p.A.diagonal();
  const Eigen::Vector3d b = p.B.b;
  return run_streams(cfg, [&](RngStream& rng, std::int64_t n, StreamSums& out) {
    for (std::int64_t s = 0; s < n; ++s) {
      Trajectory traj = sample_trajectory_from(d, i, rng, t);
      double zprod = jump_weight(traj, a);
      double w = 0.0;
      if (zprod != 0.0)
        w = zprod * r(traj.states.back() - 1) *
            std::exp(occupation_dot(traj, adiag, t) - z * occupation_dot(traj, b, t));
      out.sum.add(w);
      out.sum_sq.add(w * w);
      ++out.count;
    }
  });
}

HistogramResult density_histogram(const CanonicalForm& cf, int bins, const MCConfig& cfg) {
  if (cf.degenerate) raise(errc::degenerate_b, "histogram requires a non-degenerate problem");
  if (bins < 2) raise(errc::bad_input, "need at least two bins");
  const int d = 3;
  const double b2 = cf.b2(), b3 = cf.b3();
  const Eigen::Matrix3d a = cf.problem.A.a;
  const Eigen::Vector3d adiag = cf.problem.A.diagonal();
  const Eigen::Vector3d b = cf.problem.B.b;
  const double pref = d * std::exp(d - 1.0);

  // Uniform bins on (0, b2) with b3 forced onto an edge so the density jump
  // never straddles a bin.
  int n_lo = std::clamp(static_cast<int>(std::lround(bins * b3 / b2)), 1, bins - 1);
  int n_up = bins - n_lo;
  std::vector<double> edges;
  for (int i = 0; i <= n_lo; ++i) edges.push_back(b3 * i / n_lo);
  for (int i = 1; i <= n_up; ++i) edges.push_back(b3 + (b2 - b3) * i / n_up);

  struct Accum {
    std::vector<KahanSum<double>> w, w2;
    std::vector<KahanSum<double>> atom, atom2;
    std::int64_t count = 0;
  };
  std::vector<Accum> per_stream(static_cast<std::size_t>(std::max(1, cfg.streams)));
  for (auto& acc : per_stream) {
    acc.w.resize(static_cast<std::size_t>(bins));
    acc.w2.resize(static_cast<std::size_t>(bins));
    acc.atom.resize(3);
    acc.atom2.resize(3);
  }

  const int streams = std::max(1, cfg.streams);
  auto run_one = [&](int s) {
    RngStream rng(cfg.seed, static_cast<std::uint64_t>(s));
    std::int64_t lo = cfg.samples * s / streams;
    std::int64_t hi = cfg.samples * (s + 1) / streams;
    Accum& acc = per_stream[static_cast<std::size_t>(s)];
    for (std::int64_t i = lo; i < hi; ++i) {
      Trajectory traj = sample_trajectory(d, rng);
      ++acc.count;
      if (traj.states.back() != traj.states.front()) continue;
      if (traj.n_jumps() == 0) {
        int state = traj.states.front() - 1;
        double w = pref * std::exp(adiag(state));
        acc.atom[static_cast<std::size_t>(state)].add(w);
        acc.atom2[static_cast<std::size_t>(state)].add(w * w);
        continue;
      }
      double zprod = jump_weight(traj, a);
      if (zprod == 0.0) continue;
      double w = pref * zprod * std::exp(occupation_dot(traj, adiag, 1.0));
      double y = occupation_dot(traj, b, 1.0);
      auto it = std::upper_bound(edges.begin(), edges.end(), y);
      int bin = static_cast<int>(it - edges.begin()) - 1;
      if (bin < 0 || bin >= bins) continue;  // y on the boundary has measure zero
      acc.w[static_cast<std::size_t>(bin)].add(w);
      acc.w2[static_cast<std::size_t>(bin)].add(w * w);
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, streams));
  if (threads == 1) {
    for (int s = 0; s < streams; ++s) run_one(s);
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int s = next.fetch_add(1); s < streams; s = next.fetch_add(1)) run_one(s);
      });
    for (auto& th : pool) th.join();
  }

  HistogramResult hr;
  hr.edges = edges;
  hr.density.resize(static_cast<std::size_t>(bins));
  hr.density_se.resize(static_cast<std::size_t>(bins));
  hr.atom_est.resize(3);
  hr.atom_se.resize(3);
  double n_total = 0;
  for (const auto& acc : per_stream) n_total += static_cast<double>(acc.count);
  auto finalize = [&](double sum, double sum_sq, double scale, double& mean, double& se) {
    mean = sum / n_total * scale;
    double var = (sum_sq - sum * sum / n_total) / (n_total - 1.0);
    se = std::sqrt(std::max(0.0, var) / n_total) * scale;
  };
  for (int bin = 0; bin < bins; ++bin) {
    KahanSum<double> s, s2;
    for (const auto& acc : per_stream) {
      s.add(acc.w[static_cast<std::size_t>(bin)].value());
      s2.add(acc.w2[static_cast<std::size_t>(bin)].value());
    }
    double width = edges[static_cast<std::size_t>(bin + 1)] - edges[static_cast<std::size_t>(bin)];
    finalize(s.value(), s2.value(), 1.0 / width, hr.density[static_cast<std::size_t>(bin)],
             hr.density_se[static_cast<std::size_t>(bin)]);
  }
  for (int state = 0; state < 3; ++state) {
    KahanSum<double> s, s2;
    for (const auto& acc : per_stream) {
      s.add(acc.atom[static_cast<std::size_t>(state)].value());
      s2.add(acc.atom2[static_cast<std::size_t>(state)].value());
    }
    finalize(s.value(), s2.value(), 1.0, hr.atom_est[static_cast<std::size_t>(state)],
             hr.atom_se[static_cast<std::size_t>(state)]);
  }
  return hr;
}

GeneratorCheck generator_check(const SymmetricMatrix3& A,
                               const std::function<double(double, int)>& f, double zeta, int i,
                               double t_small, const MCConfig& cfg) {
  if (i < 1 || i > 3) raise(errc::bad_input, "state must be in {1,2,3}");
  if (t_small <= 0.0) raise(errc::bad_input, "t_small must be positive");
  const int d = 3;
  GeneratorCheck gc;
  KahanSum<double> exact;
  for (int j = 1; j <= d; ++j) {
    if (j == i) continue;
    exact.add(f(zeta * A.a(i - 1, j - 1), j) - f(zeta, i));
  }
  gc.exact = exact.value();

  const Eigen::Matrix3d a = A.a;
  MCEstimate est = run_streams(cfg, [&](RngStream& rng, std::int64_t n, StreamSums& out) {
    for (std::int64_t s = 0; s < n; ++s) {
      Trajectory traj = sample_trajectory_from(d, i, rng, t_small);
      double w = (f(zeta * jump_weight(traj, a), traj.states.back()) - f(zeta, i)) / t_small;
      out.sum.add(w);
      out.sum_sq.add(w * w);
      ++out.count;
    }
  });
  gc.empirical = est.estimate;
  gc.std_error = est.std_error;
  return gc;
}

}  // namespace bmv
