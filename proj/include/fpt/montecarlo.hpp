#ifndef FPT_MONTECARLO_HPP
#define FPT_MONTECARLO_HPP

// Monte Carlo oracle for the first-passage distribution: Brownian paths with
// exact Gaussian increments on the grid, plus a bridge correction for
// crossings between grid points.  All randomness is counter-based (a
// splitmix64-style finalizer over (seed, batch, path, step) indices), so the
// estimate is a pure function of its arguments: batches can be farmed out to
// any number of threads and merged as integer histograms without changing a
// single bit of the result.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include "fpt/boundary.hpp"
#include "fpt/error.hpp"
#include "fpt/grid.hpp"
#include "fpt/specfun.hpp"

namespace fpt {

struct McEstimate {
  TimeGrid grid;
  std::vector<double> cdf_hat;    // empirical F at the grid nodes
  std::vector<double> std_error;  // binomial standard error per node
  long long n_paths = 0;
  std::uint64_t seed = 0;
};

enum class McCrossing {
  bridge,    // sign test + Brownian-bridge sub-step correction
  sign_only  // discrete sign test only (biased low; kept for comparison)
};

// Probability that a Brownian bridge from w0 to w1 over dt dips below the
// line segment from b0 to b1.  Values at or below the boundary mean the
// crossing already happened: report certainty and let the caller record it.
inline double bridge_crossing_prob(double w0, double w1, double b0, double b1,
                                   double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw domain_error("bridge_crossing_prob: requires dt > 0");
  const double d0 = w0 - b0, d1 = w1 - b1;
  if (d0 <= 0.0 || d1 <= 0.0) return 1.0;
  return std::exp(-2.0 * d0 * d1 / dt);
}

namespace detail {

inline constexpr std::uint64_t golden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer evaluated at position k of the stream seeded by h
inline std::uint64_t mix(std::uint64_t h, std::uint64_t k) {
  std::uint64_t x = h + golden * (k + 1);
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// strictly inside (0,1): safe for the normal quantile
inline double to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

inline constexpr long long mc_batch = 8192;  // fixed: partition never depends on threads

inline int mc_threads() {
  if (const char* env = std::getenv("FPT_NUM_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

// first-crossing step of one path, or 0 if it survives the horizon
inline int mc_walk(std::uint64_t path_seed, const std::vector<double>& bv,
                   double h, double sqrt_h, McCrossing mode) {
  const int N = static_cast<int>(bv.size()) - 1;
  double w = 0.0;
  for (int k = 1; k <= N; ++k) {
    const double z = sf::norm_quantile(to_unit(mix(path_seed, 2 * k - 2)));
    const double w1 = w + sqrt_h * z;
    if (w1 <= bv[k]) return k;
    if (mode == McCrossing::bridge) {
      const double p = std::exp(-2.0 * (w - bv[k - 1]) * (w1 - bv[k]) / h);
      if (to_unit(mix(path_seed, 2 * k - 1)) < p) return k;
    }
    w = w1;
  }
  return 0;
}

}  // namespace detail

inline McEstimate mc_fpt(const Boundary& b, const TimeGrid& grid, long long n_paths,
                         std::uint64_t seed, McCrossing mode = McCrossing::bridge) {
  if (n_paths < 1000)
    throw domain_error("mc_fpt: needs at least 1000 paths for a usable estimate");
  std::vector<double> bv(grid.N + 1);
  for (int i = 0; i <= grid.N; ++i) bv[i] = b(grid.t[i]);
  if (!(bv[0] < 0.0)) throw domain_error("mc_fpt: boundary must start below zero");

  const long long n_batches = (n_paths + detail::mc_batch - 1) / detail::mc_batch;
  const int n_threads =
      static_cast<int>(std::min<long long>(detail::mc_threads(), n_batches));
  const double sqrt_h = std::sqrt(grid.h);

  // per-thread integer histograms of first-crossing steps; summed at the end,
  // so the estimate is independent of the thread count
  std::vector<std::vector<std::uint64_t>> hists(
      n_threads, std::vector<std::uint64_t>(grid.N + 1, 0));
  auto worker = [&](int tid) {
    std::vector<std::uint64_t>& hist = hists[tid];
    for (long long bi = tid; bi < n_batches; bi += n_threads) {
      const std::uint64_t batch_seed = detail::mix(seed, static_cast<std::uint64_t>(bi));
      const long long lo = bi * detail::mc_batch;
      const long long hi = std::min(n_paths, lo + detail::mc_batch);
      for (long long j = 0; j < hi - lo; ++j) {
        const std::uint64_t path_seed =
            detail::mix(batch_seed, static_cast<std::uint64_t>(j));
        const int k = detail::mc_walk(path_seed, bv, grid.h, sqrt_h, mode);
        if (k > 0) ++hist[k];
      }
    }
  };
  if (n_threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }

  McEstimate out;
  out.grid = grid;
  out.n_paths = n_paths;
  out.seed = seed;
  out.cdf_hat.assign(grid.N + 1, 0.0);
  out.std_error.assign(grid.N + 1, 0.0);
  std::uint64_t cum = 0;
  const double n = static_cast<double>(n_paths);
  for (int i = 1; i <= grid.N; ++i) {
    for (int t = 0; t < n_threads; ++t) cum += hists[t][i];
    const double f = static_cast<double>(cum) / n;
    out.cdf_hat[i] = f;
    out.std_error[i] = std::sqrt(f * (1.0 - f) / n);
  }
  return out;
}

}  // namespace fpt

#endif
