#pragma once

// Seeded instance generators.  Every generator is a pure function of
// (kind, grid, seed); identical inputs produce identical objects, which the
// CLI serializes to byte-identical JSON.

#include <random>

#include "dhap/czop.hpp"

namespace dhap {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 step; decorrelates per-trial streams from one master seed.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline DyadicFunction gen_function(GridConfig g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0, 1);
  DyadicFunction f(g);
  for (auto& v : f.values) v = Complex{nd(rng), nd(rng)};
  return f;
}

inline DyadicFunction gen_mean_zero_function(GridConfig g, std::uint64_t seed) {
  DyadicFunction f = gen_function(g, seed);
  Complex m = integral(f) / g.domain_length();
  for (auto& v : f.values) v -= m;
  return f;
}

inline DyadicFunction gen_real_mean_zero_function(GridConfig g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0, 1);
  DyadicFunction f(g);
  for (auto& v : f.values) v = Complex{nd(rng), 0};
  Complex m = integral(f) / g.domain_length();
  for (auto& v : f.values) v -= m;
  return f;
}

inline WeightMap gen_weights(GridConfig g, std::uint64_t seed, double keep = 0.5) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::exponential_distribution<double> e(1.0);
  std::vector<std::pair<IntervalId, double>> entries;
  for (std::int64_t id = 0; id < g.interval_count(); ++id)
    if (u(rng) < keep) entries.push_back({IntervalId(id), e(rng)});
  return WeightMap::from_sorted(g, std::move(entries));
}

/// Weights post-normalized so that size*(a, all tiles) = 1.
inline WeightMap gen_carleson_weights(GridConfig g, std::uint64_t seed, double keep = 0.5) {
  WeightMap a = gen_weights(g, seed, keep);
  double ms = maximal_size(a, TileSet::all(g));
  if (ms > 0) a.scale(1.0 / ms);
  return a;
}

/// Admissibility-normalized kernel: the sibling constants are scaled so the
/// smallest admissible C equals 1.
inline PerfectDyadicKernel gen_kernel(GridConfig g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0, 1);
  PerfectDyadicKernel K(g);
  for (std::int64_t id = 1; id < g.cell_count() - 1; ++id) {
    double len = length_of(g, IntervalId(id));
    K.set(IntervalId(id), Complex{nd(rng), nd(rng)} / len, Complex{nd(rng), nd(rng)} / len);
  }
  double c = kernel_admissibility(K);
  if (c > 0) {
    PerfectDyadicKernel scaled(g);
    for (std::int64_t id = 1; id < g.cell_count() - 1; ++id)
      scaled.set(IntervalId(id), K.lr(IntervalId(id)) / c, K.rl(IntervalId(id)) / c);
    return scaled;
  }
  return K;
}

/// Accretive function: Re b >= 1/2 pointwise (hence pseudo-accretive with
/// margin >= 1/2 on every tile).
inline DyadicFunction gen_accretive(GridConfig g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  DyadicFunction b(g);
  for (auto& v : b.values) v = Complex{0.5 + u(rng), u(rng) - 0.5};
  return b;
}

/// Per-tile testing functions, accretive on each tile and normalized to
/// [b^i_P]_P = 1 exactly.
inline AccretiveSystem gen_accretive_system(GridConfig g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  AccretiveSystem sys(g);
  for (std::int64_t id = 0; id < g.interval_count(); ++id) {
    auto [lo, hi] = cell_range(g, IntervalId(id));
    for (auto side : {TbSide::B1, TbSide::B2}) {
      std::vector<Complex> cells(std::size_t(hi - lo));
      Complex mean{0, 0};
      for (auto& c : cells) {
        c = Complex{0.5 + u(rng), 0.5 * (u(rng) - 0.5)};
        mean += c;
      }
      mean /= double(cells.size());
      for (auto& c : cells) c /= mean;
      sys.set(side, IntervalId(id), std::move(cells));
    }
  }
  return sys;
}

}  // namespace dhap
