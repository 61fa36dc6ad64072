#pragma once

// Dyadic test functions and the Haar wavelet calculus.
//
// A DyadicFunction is an element of S: complex values on the 2^(2M) finest
// cells of [0, 2^M], piecewise constant at scale 2^-M.  The pairing is the
// real (non-conjugating) one, <f, g> = int f g, matching the conventions of
// the surrounding algebra; "orthogonal" always refers to this bilinear form.

#include <cmath>
#include <complex>
#include <vector>

#include "dhap/core.hpp"

namespace dhap {

using Complex = std::complex<double>;

struct DyadicFunction {
  GridConfig grid;
  std::vector<Complex> values;  // one per finest cell, left to right

  DyadicFunction() = default;
  explicit DyadicFunction(GridConfig g)
      : grid(g), values(std::size_t(g.cell_count()), Complex{0.0, 0.0}) {}
  DyadicFunction(GridConfig g, std::vector<Complex> v) : grid(g), values(std::move(v)) {
    if (values.size() != std::size_t(g.cell_count()))
      throw Error(ErrorKind::ConfigInvalid, "value count does not match 2^(2M)");
  }

  std::size_t cells() const { return values.size(); }
  double cell_width() const { return grid.cell_width(); }

  DyadicFunction& operator+=(const DyadicFunction& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
  }
  DyadicFunction& operator-=(const DyadicFunction& o) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
  }
  DyadicFunction& operator*=(Complex c) {
    for (auto& v : values) v *= c;
    return *this;
  }

  friend DyadicFunction operator+(DyadicFunction a, const DyadicFunction& b) { return a += b; }
  friend DyadicFunction operator-(DyadicFunction a, const DyadicFunction& b) { return a -= b; }
  friend DyadicFunction operator*(Complex c, DyadicFunction a) { return a *= c; }
};

inline DyadicFunction constant_function(GridConfig g, Complex c) {
  DyadicFunction f(g);
  for (auto& v : f.values) v = c;
  return f;
}

// chi_I as an element of S.
inline DyadicFunction indicator(GridConfig g, const DyadicInterval& I) {
  DyadicFunction f(g);
  auto [lo, hi] = cell_range(g, id_of(g, I));
  for (std::int64_t c = lo; c < hi; ++c) f.values[std::size_t(c)] = 1.0;
  return f;
}

inline DyadicFunction pointwise_product(const DyadicFunction& f, const DyadicFunction& g) {
  DyadicFunction h(f.grid);
  for (std::size_t i = 0; i < h.values.size(); ++i) h.values[i] = f.values[i] * g.values[i];
  return h;
}

// int f g with the real pairing.
inline Complex pairing(const DyadicFunction& f, const DyadicFunction& g) {
  Complex s{0, 0};
  for (std::size_t i = 0; i < f.values.size(); ++i) s += f.values[i] * g.values[i];
  return s * f.cell_width();
}

inline Complex integral(const DyadicFunction& f) {
  Complex s{0, 0};
  for (auto v : f.values) s += v;
  return s * f.cell_width();
}

inline double l2_norm(const DyadicFunction& f) {
  double s = 0;
  for (auto v : f.values) s += std::norm(v);
  return std::sqrt(s * f.cell_width());
}

// Integrals over every dyadic interval, indexed by interval id; one upward
// sweep over the implicit segment tree.
inline std::vector<Complex> interval_integrals(const DyadicFunction& f) {
  const GridConfig& g = f.grid;
  std::vector<Complex> sums(std::size_t(g.interval_count()));
  std::int64_t leaf_base = g.cell_count() - 1;  // id of the first finest cell
  double w = g.cell_width();
  for (std::int64_t c = 0; c < g.cell_count(); ++c)
    sums[std::size_t(leaf_base + c)] = f.values[std::size_t(c)] * w;
  for (std::int64_t id = leaf_base - 1; id >= 0; --id)
    sums[std::size_t(id)] =
        sums[std::size_t(2 * id + 1)] + sums[std::size_t(2 * id + 2)];
  return sums;
}

/// [f]_I, the mean of f on I, computed exactly from cell values.
inline Complex average(const DyadicFunction& f, const DyadicInterval& I) {
  const GridConfig& g = f.grid;
  auto [lo, hi] = cell_range(g, id_of(g, I));
  Complex s{0, 0};
  for (std::int64_t c = lo; c < hi; ++c) s += f.values[std::size_t(c)];
  return s / double(hi - lo);
}

inline Complex average_by_id(const DyadicFunction& f, const std::vector<Complex>& integrals,
                             IntervalId id) {
  return integrals[id] / length_of(f.grid, id);
}

/// The L2-normalized Haar wavelet of a tile: mother for lacunary tiles (which
/// must have children), father for non-lacunary ones.
inline DyadicFunction haar(const GridConfig& g, const Tile& P) {
  DyadicFunction f(g);
  IntervalId id = id_of(g, P.interval);
  double len = interval_length(P.interval);
  double nrm = 1.0 / std::sqrt(len);
  auto [lo, hi] = cell_range(g, id);
  if (P.kind == TileKind::NonLacunary) {
    for (std::int64_t c = lo; c < hi; ++c) f.values[std::size_t(c)] = nrm;
    return f;
  }
  if (P.interval.k <= -g.M)
    throw Error(ErrorKind::BottomScale, "mother wavelet needs children");
  std::int64_t mid = (lo + hi) / 2;
  for (std::int64_t c = lo; c < mid; ++c) f.values[std::size_t(c)] = nrm;
  for (std::int64_t c = mid; c < hi; ++c) f.values[std::size_t(c)] = -nrm;
  return f;
}

// Coefficients on lacunary tiles, canonically ordered by interval id.
// Used for Wf, adapted coefficients, multiplier symbols and discrete measures.
class CoefficientMap {
 public:
  CoefficientMap() = default;
  explicit CoefficientMap(GridConfig g) : grid_(g) {}

  const GridConfig& grid() const { return grid_; }
  const std::vector<std::pair<IntervalId, Complex>>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  Complex at(IntervalId id) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const auto& e, IntervalId v) { return e.first < v; });
    return (it != entries_.end() && it->first == id) ? it->second : Complex{0, 0};
  }

  void set(IntervalId id, Complex v) {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const auto& e, IntervalId w) { return e.first < w; });
    if (it != entries_.end() && it->first == id)
      it->second = v;
    else
      entries_.insert(it, {id, v});
  }

  // Bulk construction from id-ordered data.
  static CoefficientMap from_sorted(GridConfig g,
                                    std::vector<std::pair<IntervalId, Complex>> entries) {
    CoefficientMap m(g);
    m.entries_ = std::move(entries);
    return m;
  }

 private:
  GridConfig grid_;
  std::vector<std::pair<IntervalId, Complex>> entries_;
};

// Non-negative real coefficients (weights a(P), discrete measures mu(P)).
class WeightMap {
 public:
  WeightMap() = default;
  explicit WeightMap(GridConfig g) : grid_(g) {}

  const GridConfig& grid() const { return grid_; }
  const std::vector<std::pair<IntervalId, double>>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  double at(IntervalId id) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const auto& e, IntervalId v) { return e.first < v; });
    return (it != entries_.end() && it->first == id) ? it->second : 0.0;
  }

  void set(IntervalId id, double v) {
    if (v < 0) throw Error(ErrorKind::ParseError, "weights must be non-negative");
    auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                               [](const auto& e, IntervalId w) { return e.first < w; });
    if (it != entries_.end() && it->first == id)
      it->second = v;
    else
      entries_.insert(it, {id, v});
  }

  static WeightMap from_sorted(GridConfig g, std::vector<std::pair<IntervalId, double>> entries) {
    WeightMap m(g);
    for (auto& [id, v] : entries)
      if (v < 0) throw Error(ErrorKind::ParseError, "weights must be non-negative");
    m.entries_ = std::move(entries);
    return m;
  }

  WeightMap& scale(double c) {
    for (auto& [id, v] : entries_) v *= c;
    return *this;
  }

 private:
  GridConfig grid_;
  std::vector<std::pair<IntervalId, double>> entries_;
};

/// Wf(P) = <f, phi_P> over all lacunary tiles with children.
inline CoefficientMap wavelet_transform(const DyadicFunction& f) {
  const GridConfig& g = f.grid;
  auto sums = interval_integrals(f);
  std::int64_t n = g.cell_count() - 1;  // internal nodes = tiles with children
  std::vector<std::pair<IntervalId, Complex>> entries;
  entries.reserve(std::size_t(n));
  for (std::int64_t id = 0; id < n; ++id) {
    double nrm = 1.0 / std::sqrt(length_of(g, IntervalId(id)));
    Complex c = (sums[std::size_t(2 * id + 1)] - sums[std::size_t(2 * id + 2)]) * nrm;
    entries.push_back({IntervalId(id), c});
  }
  return CoefficientMap::from_sorted(g, std::move(entries));
}

/// sum_P c(P) phi_P.
inline DyadicFunction reconstruct(const CoefficientMap& c) {
  const GridConfig& g = c.grid();
  DyadicFunction f(g);
  for (const auto& [id, v] : c.entries()) {
    if (v == Complex{0, 0}) continue;
    auto [lo, hi] = cell_range(g, id);
    if (hi - lo < 2) throw Error(ErrorKind::BottomScale, "coefficient at a childless tile");
    double nrm = 1.0 / std::sqrt(length_of(g, id));
    std::int64_t mid = (lo + hi) / 2;
    Complex add = v * nrm;
    for (std::int64_t x = lo; x < mid; ++x) f.values[std::size_t(x)] += add;
    for (std::int64_t x = mid; x < hi; ++x) f.values[std::size_t(x)] -= add;
  }
  return f;
}

namespace detail {
// Disjointness in the phase-plane sense: lacunary/lacunary tiles are disjoint
// iff their intervals differ; non-lacunary pairs need disjoint intervals;
// for mixed pairs the non-lacunary interval must not sit strictly inside the
// lacunary one.
inline bool tiles_disjoint(const Tile& A, const Tile& B) {
  if (A.kind == TileKind::Lacunary && B.kind == TileKind::Lacunary)
    return !(A.interval == B.interval);
  if (A.kind == TileKind::NonLacunary && B.kind == TileKind::NonLacunary)
    return !intervals_intersect(A.interval, B.interval);
  const Tile& lac = A.kind == TileKind::Lacunary ? A : B;
  const Tile& non = A.kind == TileKind::Lacunary ? B : A;
  bool proper_subset = interval_contains(lac.interval, non.interval) &&
                       !(lac.interval == non.interval);
  return !proper_subset;
}
}  // namespace detail

/// Phase space projection Pi_T over a set of pairwise disjoint tiles.
inline DyadicFunction project(const DyadicFunction& f, const std::vector<Tile>& tiles) {
  for (std::size_t i = 0; i < tiles.size(); ++i)
    for (std::size_t j = i + 1; j < tiles.size(); ++j)
      if (!detail::tiles_disjoint(tiles[i], tiles[j]))
        throw Error(ErrorKind::DisjointnessViolation, "projection tiles must be disjoint");
  const GridConfig& g = f.grid;
  auto sums = interval_integrals(f);
  DyadicFunction out(g);
  for (const Tile& P : tiles) {
    IntervalId id = id_of(g, P.interval);
    double len = length_of(g, id);
    auto [lo, hi] = cell_range(g, id);
    if (P.kind == TileKind::NonLacunary) {
      Complex avg = sums[id] / len;  // <f, phi> phi = [f]_I chi_I
      for (std::int64_t x = lo; x < hi; ++x) out.values[std::size_t(x)] += avg;
    } else {
      if (hi - lo < 2) throw Error(ErrorKind::BottomScale, "lacunary projection needs children");
      Complex c = (sums[left_child_id(id)] - sums[right_child_id(id)]) / std::sqrt(len);
      Complex add = c / std::sqrt(len);
      std::int64_t mid = (lo + hi) / 2;
      for (std::int64_t x = lo; x < mid; ++x) out.values[std::size_t(x)] += add;
      for (std::int64_t x = mid; x < hi; ++x) out.values[std::size_t(x)] -= add;
    }
  }
  return out;
}

/// Pi_T for a lacunary tree (all member tiles, mother wavelets).
inline DyadicFunction project_tree(const DyadicFunction& f, const Tree& T) {
  const GridConfig& g = f.grid;
  auto sums = interval_integrals(f);
  DyadicFunction out(g);
  for (IntervalId id : T.members.ids()) {
    auto [lo, hi] = cell_range(g, id);
    if (hi - lo < 2) continue;  // childless tiles carry no coefficient
    double len = length_of(g, id);
    Complex c = (sums[left_child_id(id)] - sums[right_child_id(id)]) / std::sqrt(len);
    Complex add = c / std::sqrt(len);
    std::int64_t mid = (lo + hi) / 2;
    for (std::int64_t x = lo; x < mid; ++x) out.values[std::size_t(x)] += add;
    for (std::int64_t x = mid; x < hi; ++x) out.values[std::size_t(x)] -= add;
  }
  return out;
}

}  // namespace dhap
