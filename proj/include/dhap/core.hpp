#pragma once

// Dyadic interval and tile combinatorics on the truncated half-line [0, 2^M].
//
// Intervals are stored as (k, j) integer pairs denoting [j*2^k, (j+1)*2^k];
// all geometry here is integer arithmetic.  Internally intervals are addressed
// by their index in an implicit perfect binary segment tree: the root [0, 2^M]
// has index 0 and the children of node n are 2n+1 and 2n+2.  Index order is
// the canonical tile order (decreasing scale, then increasing offset).

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dhap {

enum class ErrorKind {
  TopScale,
  BottomScale,
  DisjointnessViolation,
  NonConvexTree,
  NotMeanZero,
  NotReal,
  SizeHypothesisFail,
  MeanHypothesisFail,
  HypothesisFail,
  WitnessInvalid,
  PackingViolation,
  AccretivityFail,
  ScaleViolation,
  DegenerateAverage,
  ParaAccretivityFail,
  SystemInvalid,
  ExponentRange,
  ConfigInvalid,
  ParseError,
};

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::TopScale: return "TopScale";
    case ErrorKind::BottomScale: return "BottomScale";
    case ErrorKind::DisjointnessViolation: return "DisjointnessViolation";
    case ErrorKind::NonConvexTree: return "NonConvexTree";
    case ErrorKind::NotMeanZero: return "NotMeanZero";
    case ErrorKind::NotReal: return "NotReal";
    case ErrorKind::SizeHypothesisFail: return "SizeHypothesisFail";
    case ErrorKind::MeanHypothesisFail: return "MeanHypothesisFail";
    case ErrorKind::HypothesisFail: return "HypothesisFail";
    case ErrorKind::WitnessInvalid: return "WitnessInvalid";
    case ErrorKind::PackingViolation: return "PackingViolation";
    case ErrorKind::AccretivityFail: return "AccretivityFail";
    case ErrorKind::ScaleViolation: return "ScaleViolation";
    case ErrorKind::DegenerateAverage: return "DegenerateAverage";
    case ErrorKind::ParaAccretivityFail: return "ParaAccretivityFail";
    case ErrorKind::SystemInvalid: return "SystemInvalid";
    case ErrorKind::ExponentRange: return "ExponentRange";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Default numeric tolerances.  Identity tests use relative tolerance
// `rel_tol` with absolute floor `abs_tol`.
struct Tolerances {
  double rel = 1e-9;
  double abs = 1e-12;
};

/// Truncation exponent M: spatial domain [0, 2^M], scales 2^-M .. 2^M.
/// The finest partition has 2^(2M) cells of width 2^-M.
struct GridConfig {
  int M = 1;

  GridConfig() = default;
  explicit GridConfig(int m) : M(m) {
    if (m < 1 || m > 12) throw Error(ErrorKind::ConfigInvalid, "M must be in [1, 12]");
  }

  int levels() const { return 2 * M; }          // levels 0..2M, level = M - k
  std::int64_t cell_count() const { return std::int64_t(1) << (2 * M); }
  double cell_width() const { return std::ldexp(1.0, -M); }
  double domain_length() const { return std::ldexp(1.0, M); }
  // Total number of dyadic intervals (nodes of the implicit tree).
  std::int64_t interval_count() const { return (std::int64_t(1) << (2 * M + 1)) - 1; }

  bool operator==(const GridConfig&) const = default;
};

using IntervalId = std::uint32_t;
inline constexpr IntervalId kRootId = 0;

inline int level_of(IntervalId id) { return std::bit_width(std::uint32_t(id) + 1u) - 1; }
inline IntervalId parent_id(IntervalId id) { return ((id + 1u) >> 1) - 1u; }
inline IntervalId left_child_id(IntervalId id) { return 2 * id + 1; }
inline IntervalId right_child_id(IntervalId id) { return 2 * id + 2; }
inline std::int64_t offset_of(IntervalId id) {
  return std::int64_t(id) + 1 - (std::int64_t(1) << level_of(id));
}

// a is an ancestor of b (or equal): both intervals dyadic, I_b subseteq I_a.
inline bool is_ancestor_or_self(IntervalId a, IntervalId b) {
  int la = level_of(a), lb = level_of(b);
  if (la > lb) return false;
  return ((std::uint64_t(b) + 1) >> (lb - la)) - 1 == a;
}

// The dyadic interval [j*2^k, (j+1)*2^k], with -M <= k <= M and
// (j+1)*2^k <= 2^M.  Validity is checked against a grid on conversion.
struct DyadicInterval {
  int k = 0;
  std::int64_t j = 0;

  bool operator==(const DyadicInterval&) const = default;
};

inline DyadicInterval interval_of(const GridConfig& g, IntervalId id) {
  return DyadicInterval{g.M - level_of(id), offset_of(id)};
}

inline IntervalId id_of(const GridConfig& g, const DyadicInterval& I) {
  if (I.k < -g.M || I.k > g.M) throw Error(ErrorKind::ParseError, "interval scale out of range");
  int level = g.M - I.k;
  if (I.j < 0 || I.j >= (std::int64_t(1) << level))
    throw Error(ErrorKind::ParseError, "interval offset out of range");
  return IntervalId((std::int64_t(1) << level) - 1 + I.j);
}

inline double interval_length(const DyadicInterval& I) { return std::ldexp(1.0, I.k); }
inline double interval_left(const DyadicInterval& I) { return double(I.j) * interval_length(I); }
inline double interval_right(const DyadicInterval& I) { return double(I.j + 1) * interval_length(I); }

inline double length_of(const GridConfig& g, IntervalId id) {
  return std::ldexp(1.0, g.M - level_of(id));
}

// Cell range [first, last) covered by an interval, in units of the finest
// cells; cells carry half-open [a, b) semantics.
inline std::pair<std::int64_t, std::int64_t> cell_range(const GridConfig& g, IntervalId id) {
  int level = level_of(id);
  std::int64_t width = std::int64_t(1) << (2 * g.M - level);
  std::int64_t first = offset_of(id) * width;
  return {first, first + width};
}

inline DyadicInterval parent(const GridConfig& g, const DyadicInterval& I) {
  if (I.k >= g.M) throw Error(ErrorKind::TopScale, "interval at top scale has no parent");
  return DyadicInterval{I.k + 1, I.j / 2};
}

inline std::pair<DyadicInterval, DyadicInterval> children(const GridConfig& g,
                                                          const DyadicInterval& I) {
  if (I.k <= -g.M) throw Error(ErrorKind::BottomScale, "interval at bottom scale has no children");
  return {DyadicInterval{I.k - 1, 2 * I.j}, DyadicInterval{I.k - 1, 2 * I.j + 1}};
}

// Positive-measure intersection; by nesting this is containment one way or
// the other.
inline bool intervals_intersect(const DyadicInterval& A, const DyadicInterval& B) {
  double l = std::max(interval_left(A), interval_left(B));
  double r = std::min(interval_right(A), interval_right(B));
  return r > l;
}

inline bool interval_contains(const DyadicInterval& outer, const DyadicInterval& inner) {
  return interval_left(outer) <= interval_left(inner) &&
         interval_right(inner) <= interval_right(outer);
}

enum class TileKind { Lacunary, NonLacunary };

// A Heisenberg tile of unit area.  The frequency band is implied by the kind:
// lacunary P+(I) sits at [1/|I|, 2/|I|], non-lacunary P0(I) at [0, 1/|I|].
struct Tile {
  DyadicInterval interval;
  TileKind kind = TileKind::Lacunary;

  bool operator==(const Tile&) const = default;
};

inline Tile lacunary(const DyadicInterval& I) { return Tile{I, TileKind::Lacunary}; }
inline Tile nonlacunary(const DyadicInterval& I) { return Tile{I, TileKind::NonLacunary}; }

/// The <=' order on lacunary tiles: P <=' Q iff I_P is contained in I_Q.
inline bool tile_leq(const GridConfig&, const Tile& P, const Tile& Q) {
  if (P.kind != TileKind::Lacunary || Q.kind != TileKind::Lacunary)
    throw Error(ErrorKind::ParseError, "tile_leq is defined on lacunary tiles");
  return interval_contains(Q.interval, P.interval);
}

// A duplicate-free collection of lacunary tiles, held in canonical order
// (decreasing scale, then increasing offset = increasing interval id).
class TileSet {
 public:
  TileSet() = default;
  explicit TileSet(GridConfig g) : grid_(g) {}
  TileSet(GridConfig g, std::vector<IntervalId> ids) : grid_(g), ids_(std::move(ids)) {
    normalize();
  }

  const GridConfig& grid() const { return grid_; }
  const std::vector<IntervalId>& ids() const { return ids_; }
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }

  bool contains(IntervalId id) const {
    return std::binary_search(ids_.begin(), ids_.end(), id);
  }

  void insert(IntervalId id) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it == ids_.end() || *it != id) ids_.insert(it, id);
  }

  void erase(IntervalId id) {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
    if (it != ids_.end() && *it == id) ids_.erase(it);
  }

  // All lacunary tiles of the grid.
  static TileSet all(GridConfig g) {
    std::size_t n = std::size_t(g.interval_count());
    std::vector<IntervalId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = IntervalId(i);
    return TileSet(g, std::move(ids));
  }

  // All lacunary tiles with children (the Haar coefficient domain).
  static TileSet all_with_children(GridConfig g) {
    std::size_t n = std::size_t((std::int64_t(1) << (2 * g.M)) - 1);
    std::vector<IntervalId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = IntervalId(i);
    return TileSet(g, std::move(ids));
  }

  TileSet set_minus(const TileSet& other) const {
    std::vector<IntervalId> out;
    std::set_difference(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                        std::back_inserter(out));
    return TileSet(grid_, std::move(out));
  }

  TileSet set_union(const TileSet& other) const {
    std::vector<IntervalId> out;
    std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                   std::back_inserter(out));
    return TileSet(grid_, std::move(out));
  }

  TileSet set_intersect(const TileSet& other) const {
    std::vector<IntervalId> out;
    std::set_intersection(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                          std::back_inserter(out));
    return TileSet(grid_, std::move(out));
  }

  bool operator==(const TileSet&) const = default;

 private:
  void normalize() {
    std::sort(ids_.begin(), ids_.end());
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
  }

  GridConfig grid_;
  std::vector<IntervalId> ids_;
};

// A lacunary tree: members all <=' the top tile, top included.
struct Tree {
  IntervalId top = kRootId;
  TileSet members;

  const GridConfig& grid() const { return members.grid(); }
  double top_length() const { return length_of(members.grid(), top); }
};

inline bool is_valid_tree(const Tree& t) {
  if (!t.members.contains(t.top)) return false;
  for (IntervalId id : t.members.ids())
    if (!is_ancestor_or_self(t.top, id)) return false;
  return true;
}

/// Tree(P) within the whole grid, or Tree(P) intersected with `within`
/// ("complete with respect to" the collection).
inline Tree complete_tree(const GridConfig& g, IntervalId top) {
  std::vector<IntervalId> ids;
  int top_level = level_of(top);
  std::int64_t lo = top, hi = top;
  for (int level = top_level; level <= 2 * g.M; ++level) {
    for (std::int64_t id = lo; id <= hi; ++id) ids.push_back(IntervalId(id));
    lo = 2 * lo + 1;
    hi = 2 * hi + 2;
  }
  return Tree{top, TileSet(g, std::move(ids))};
}

inline Tree complete_tree(const GridConfig& g, IntervalId top, const TileSet& within) {
  if (!within.contains(top))
    throw Error(ErrorKind::ParseError, "complete_tree: top not in the collection");
  std::vector<IntervalId> ids;
  for (IntervalId id : within.ids())
    if (is_ancestor_or_self(top, id)) ids.push_back(id);
  return Tree{top, TileSet(g, std::move(ids))};
}

/// Convexity of a collection: every chain between comparable members stays
/// inside.  Equivalent formulation used here: whenever a tile has a proper
/// ancestor in the set, its parent is in the set.
inline bool is_convex(const TileSet& S) {
  for (IntervalId id : S.ids()) {
    if (id == kRootId) continue;
    IntervalId p = parent_id(id);
    if (S.contains(p)) continue;
    // No immediate parent: any higher ancestor in S breaks a chain.
    IntervalId a = p;
    while (true) {
      if (S.contains(a)) return false;
      if (a == kRootId) break;
      a = parent_id(a);
    }
  }
  return true;
}

inline bool is_convex_tree(const Tree& t) { return is_valid_tree(t) && is_convex(t.members); }

// Maximal tiles of a collection (no proper ancestor inside).  Their spatial
// intervals are pairwise disjoint.
inline std::vector<IntervalId> maximal_tiles(const TileSet& S) {
  std::vector<IntervalId> out;
  for (IntervalId id : S.ids()) {
    bool has_ancestor = false;
    IntervalId a = id;
    while (a != kRootId) {
      a = parent_id(a);
      if (S.contains(a)) {
        has_ancestor = true;
        break;
      }
    }
    if (!has_ancestor) out.push_back(id);
  }
  return out;
}

/// Least alpha for which S is an alpha-packing of T (uniform=false), or a
/// uniform alpha-packing (uniform=true, sup over dyadic J of the restricted
/// length sum divided by |J|).  Empty S gives 0.
inline double packing_constant(const TileSet& S, const Tree& T, bool uniform) {
  const GridConfig& g = S.grid();
  if (S.empty()) return 0.0;
  if (!uniform) {
    double sum = 0;
    for (IntervalId id : S.ids()) sum += length_of(g, id);
    return sum / length_of(g, T.top);
  }
  // sum(J) = total length of members below J, accumulated by walking every
  // member up to the root.  Any J not visited has sum 0.
  std::vector<std::pair<IntervalId, double>> sums;
  for (IntervalId id : S.ids()) {
    double len = length_of(g, id);
    IntervalId a = id;
    while (true) {
      sums.push_back({a, len});
      if (a == kRootId) break;
      a = parent_id(a);
    }
  }
  std::sort(sums.begin(), sums.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  double best = 0;
  std::size_t i = 0;
  while (i < sums.size()) {
    IntervalId id = sums[i].first;
    double total = 0;
    for (; i < sums.size() && sums[i].first == id; ++i) total += sums[i].second;
    best = std::max(best, total / length_of(g, id));
  }
  return best;
}

/// The parent tiles {2P : P in S}, duplicates merged.
inline TileSet doubled_tiles(const TileSet& S) {
  std::vector<IntervalId> out;
  for (IntervalId id : S.ids()) {
    if (id == kRootId) throw Error(ErrorKind::TopScale, "doubled_tiles: tile at top scale");
    out.push_back(parent_id(id));
  }
  return TileSet(S.grid(), std::move(out));
}

}  // namespace dhap
