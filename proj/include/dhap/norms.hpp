#pragma once

// Size, maximal size, BMO, mean, square and maximal functions, L^p and weak
// L^p.  All quantities are computed exactly from the piecewise-constant cell
// representation; the only approximation anywhere is double rounding.

#include <cmath>
#include <limits>

#include "dhap/function.hpp"

namespace dhap {

/// size of a non-negative weight on a convex tree:
/// (1/|I_T|) * sum of a(P) over P in T.
inline double tree_size(const WeightMap& a, const Tree& T) {
  if (!is_convex(T.members)) throw Error(ErrorKind::NonConvexTree, "tree_size needs a convex tree");
  double s = 0;
  for (IntervalId id : T.members.ids()) s += a.at(id);
  return s / T.top_length();
}

// Chain-closed accumulation under each prospective top Q in S:
// s(Q) = a(Q) + s(children present in S).  For non-negative weights the
// supremum over convex trees with top Q is attained by this maximal
// chain-closed set, so size*(a, S) = max_Q s(Q)/|I_Q|.
inline double maximal_size(const WeightMap& a, const TileSet& S) {
  if (S.empty()) return 0.0;  // stated convention
  const auto& ids = S.ids();
  std::vector<double> s(ids.size(), 0.0);
  auto index_of = [&ids](IntervalId id) -> std::ptrdiff_t {
    auto it = std::lower_bound(ids.begin(), ids.end(), id);
    if (it == ids.end() || *it != id) return -1;
    return it - ids.begin();
  };
  double best = 0.0;
  for (std::ptrdiff_t i = std::ptrdiff_t(ids.size()) - 1; i >= 0; --i) {
    IntervalId id = ids[std::size_t(i)];
    double acc = a.at(id);
    if (level_of(id) < 2 * S.grid().M) {
      std::ptrdiff_t l = index_of(left_child_id(id));
      std::ptrdiff_t r = index_of(right_child_id(id));
      if (l >= 0) acc += s[std::size_t(l)];
      if (r >= 0) acc += s[std::size_t(r)];
    }
    s[std::size_t(i)] = acc;
    best = std::max(best, acc / length_of(S.grid(), id));
  }
  return best;
}

inline WeightMap squared_weights(const CoefficientMap& c) {
  std::vector<std::pair<IntervalId, double>> entries;
  entries.reserve(c.size());
  for (const auto& [id, v] : c.entries()) entries.push_back({id, std::norm(v)});
  return WeightMap::from_sorted(c.grid(), std::move(entries));
}

/// ||f||_BMO = size*(|Wf|^2, all lacunary tiles with children)^(1/2).
inline double bmo_norm(const DyadicFunction& f) {
  WeightMap a = squared_weights(wavelet_transform(f));
  return std::sqrt(maximal_size(a, TileSet::all_with_children(f.grid)));
}

/// mean of f on a tile, [|f|]_{I_P}.
inline double tile_mean(const DyadicFunction& f, IntervalId id) {
  auto [lo, hi] = cell_range(f.grid, id);
  double s = 0;
  for (std::int64_t c = lo; c < hi; ++c) s += std::abs(f.values[std::size_t(c)]);
  return s / double(hi - lo);
}

inline double maximal_mean(const DyadicFunction& f, const TileSet& S) {
  // Absolute-value interval sums once, then one lookup per tile.
  const GridConfig& g = f.grid;
  std::vector<double> sums(std::size_t(g.interval_count()));
  std::int64_t leaf = g.cell_count() - 1;
  for (std::int64_t c = 0; c < g.cell_count(); ++c)
    sums[std::size_t(leaf + c)] = std::abs(f.values[std::size_t(c)]) * g.cell_width();
  for (std::int64_t id = leaf - 1; id >= 0; --id)
    sums[std::size_t(id)] = sums[std::size_t(2 * id + 1)] + sums[std::size_t(2 * id + 2)];
  double best = 0;
  for (IntervalId id : S.ids()) best = std::max(best, sums[id] / length_of(g, id));
  return best;
}

/// Pointwise magnitude of the Littlewood-Paley square function,
/// |Sf|(x) = (sum_P |Wf(P)|^2 chi_{I_P}(x)/|I_P|)^(1/2).
inline DyadicFunction square_function(const DyadicFunction& f) {
  const GridConfig& g = f.grid;
  CoefficientMap w = wavelet_transform(f);
  std::vector<double> acc(std::size_t(g.cell_count()), 0.0);
  for (const auto& [id, v] : w.entries()) {
    double add = std::norm(v) / length_of(g, id);
    if (add == 0) continue;
    auto [lo, hi] = cell_range(g, id);
    for (std::int64_t c = lo; c < hi; ++c) acc[std::size_t(c)] += add;
  }
  DyadicFunction out(g);
  for (std::size_t i = 0; i < acc.size(); ++i) out.values[i] = std::sqrt(acc[i]);
  return out;
}

/// Cancellative dyadic maximal function, sup over I containing x of |[f]_I|.
inline DyadicFunction cancellative_maximal(const DyadicFunction& f) {
  const GridConfig& g = f.grid;
  auto sums = interval_integrals(f);
  DyadicFunction out(g);
  std::int64_t leaf = g.cell_count() - 1;
  for (std::int64_t c = 0; c < g.cell_count(); ++c) {
    double best = 0;
    IntervalId id = IntervalId(leaf + c);
    while (true) {
      best = std::max(best, std::abs(sums[id] / length_of(g, id)));
      if (id == kRootId) break;
      id = parent_id(id);
    }
    out.values[std::size_t(c)] = best;
  }
  return out;
}

/// Dyadic Hardy-Littlewood maximal function, M f = (cancellative max of |f|).
inline DyadicFunction hardy_littlewood_maximal(const DyadicFunction& f) {
  DyadicFunction absf(f.grid);
  for (std::size_t i = 0; i < f.values.size(); ++i) absf.values[i] = std::abs(f.values[i]);
  return cancellative_maximal(absf);
}

inline double lp_norm(const DyadicFunction& f, double p) {
  if (!(p > 0)) throw Error(ErrorKind::ExponentRange, "lp_norm needs p > 0");
  if (std::isinf(p)) {
    double m = 0;
    for (auto v : f.values) m = std::max(m, std::abs(v));
    return m;
  }
  double s = 0;
  for (auto v : f.values) s += std::pow(std::abs(v), p);
  return std::pow(s * f.cell_width(), 1.0 / p);
}

/// Weak L^p quasi-norm, sup_lambda lambda |{|f| >= lambda}|^(1/p); since |f|
/// attains finitely many values the sup is scanned over them.
inline double weak_lp_norm(const DyadicFunction& f, double p) {
  if (!(p > 0) || std::isinf(p)) throw Error(ErrorKind::ExponentRange, "weak_lp_norm needs 0 < p < inf");
  std::vector<double> vals;
  vals.reserve(f.values.size());
  for (auto v : f.values) vals.push_back(std::abs(v));
  std::sort(vals.begin(), vals.end(), std::greater<>());
  double best = 0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (vals[i] == 0) break;
    if (i + 1 < vals.size() && vals[i + 1] == vals[i]) continue;  // measure at this level
    double measure = double(i + 1) * f.cell_width();
    best = std::max(best, vals[i] * std::pow(measure, 1.0 / p));
  }
  return best;
}

// Witness for the weak-L^p characterization: the subset E' of E obtained by
// removing the cells where |f| >= C A |E|^(-1/p), with C doubled from 2^(1/p)
// until |E'| >= |E|/2.
struct WeakLpWitness {
  std::vector<std::int64_t> retained_cells;  // E'
  double retained_measure = 0;               // |E'|
  double pairing_abs = 0;                    // |<f, chi_{E'}>|
  double bound = 0;                          // A |E|^(1/p')
  double threshold_constant = 0;             // final C
  int doublings = 0;
};

inline WeakLpWitness weak_lp_witness(const DyadicFunction& f,
                                     const std::vector<std::int64_t>& E_cells, double p, double A,
                                     int max_doublings = 60) {
  if (E_cells.empty()) throw Error(ErrorKind::ParseError, "weak_lp_witness needs |E| > 0");
  double w = f.cell_width();
  double E_measure = double(E_cells.size()) * w;
  double C = std::pow(2.0, 1.0 / p);
  WeakLpWitness out;
  for (int d = 0; d <= max_doublings; ++d) {
    double cut = C * A * std::pow(E_measure, -1.0 / p);
    out.retained_cells.clear();
    for (auto c : E_cells)
      if (std::abs(f.values[std::size_t(c)]) < cut) out.retained_cells.push_back(c);
    out.retained_measure = double(out.retained_cells.size()) * w;
    out.threshold_constant = C;
    out.doublings = d;
    if (out.retained_measure >= E_measure / 2) break;
    if (d == max_doublings)
      throw Error(ErrorKind::HypothesisFail, "no admissible threshold keeps half of E");
    C *= 2;
  }
  Complex s{0, 0};
  for (auto c : out.retained_cells) s += f.values[std::size_t(c)];
  out.pairing_abs = std::abs(s * w);
  double pprime = p / (p - 1.0);  // may be negative for p < 1
  out.bound = A * std::pow(E_measure, 1.0 / pprime);
  return out;
}

}  // namespace dhap
