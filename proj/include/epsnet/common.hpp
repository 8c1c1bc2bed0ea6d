#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace epsnet {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Repetition seeds are base + index so parallel runs remain comparable
// across worker counts.
inline std::uint64_t repetition_seed(std::uint64_t base, std::uint64_t rep) {
  return base + rep;
}

// Internal stream derivation (MC shards, per-method streams). splitmix64
// keeps neighbouring base seeds from producing overlapping streams.
inline std::uint64_t derive_stream(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline int worker_count() {
  if (const char* env = std::getenv("BANDIT_SUBSET_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(shard) for shard in [0, num_shards). Shards own independent
// state; callers merge per-shard results in shard order so the outcome
// does not depend on scheduling or the worker count.
template <typename Fn>
void parallel_shards(int num_shards, Fn&& fn, int workers = -1) {
  if (workers <= 0) workers = worker_count();
  workers = std::min(workers, num_shards);
  if (workers <= 1) {
    for (int s = 0; s < num_shards; ++s) fn(s);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int s = next.fetch_add(1);
        if (s >= num_shards) return;
        fn(s);
      }
    });
  }
  for (auto& t : pool) t.join();
}

// Welford accumulator with deterministic pairwise merge.
struct RunningMoments {
  long long count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double d = x - mean;
    mean += d / static_cast<double>(count);
    m2 += d * (x - mean);
  }

  void merge(const RunningMoments& o) {
    if (o.count == 0) return;
    if (count == 0) {
      *this = o;
      return;
    }
    const double n1 = static_cast<double>(count);
    const double n2 = static_cast<double>(o.count);
    const double d = o.mean - mean;
    const double n = n1 + n2;
    mean += d * n2 / n;
    m2 += o.m2 + d * d * n1 * n2 / n;
    count += o.count;
  }

  double sample_variance() const {
    return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
  }
  double sample_stddev() const { return std::sqrt(sample_variance()); }
  double standard_error() const {
    return count > 0 ? sample_stddev() / std::sqrt(static_cast<double>(count))
                     : 0.0;
  }
};

// Spearman rank correlation with average ranks on ties.
inline double spearman_rho(const std::vector<double>& x,
                           const std::vector<double>& y) {
  const std::size_t n = x.size();
  auto ranks = [&](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
      const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  const double den = std::sqrt(dx * dy);
  return den > 0 ? num / den : 0.0;
}

}  // namespace epsnet
