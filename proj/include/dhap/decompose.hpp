#pragma once

// Stopping-time algorithms and decomposition verifiers: the sampling and
// good-lambda bounds for maximal size, the John-Nirenberg distribution check,
// Calderon-Zygmund selection by size and by mean, convexification, the two
// tree-slicing algorithms (greedy and heavy/light), extrapolation of discrete
// Carleson measures, and the atomic decomposition of dyadic H^p.
//
// Every algorithm returns its measured constants; postconditions are
// re-checked independently of the construction path (see verify_* helpers).

#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "dhap/norms.hpp"

namespace dhap {

// ---------------------------------------------------------------------------
// Shared result types

struct LabeledTree {
  Tree tree;
  std::string label;  // small / heavy / light / iterate / selected / removed
};

struct TreeDecomposition {
  GridConfig grid;
  std::vector<LabeledTree> trees;
  TileSet exceptional;                     // the tile part of the partition
  std::map<std::string, double> measured;  // named constants, re-checkable
};

inline WeightMap restrict_weights(const WeightMap& a, const TileSet& S) {
  std::vector<std::pair<IntervalId, double>> entries;
  for (const auto& [id, v] : a.entries())
    if (S.contains(id)) entries.push_back({id, v});
  return WeightMap::from_sorted(a.grid(), std::move(entries));
}

inline double weight_sum(const WeightMap& a, const TileSet& S) {
  double s = 0;
  for (IntervalId id : S.ids()) s += a.at(id);
  return s;
}

// Splits a convex collection into trees rooted at its maximal tiles.
inline std::vector<Tree> split_into_trees(const TileSet& piece) {
  std::vector<Tree> out;
  for (IntervalId top : maximal_tiles(piece)) {
    std::vector<IntervalId> members;
    for (IntervalId id : piece.ids())
      if (is_ancestor_or_self(top, id)) members.push_back(id);
    out.push_back(Tree{top, TileSet(piece.grid(), std::move(members))});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lemma-style verifiers

struct SampWitness {
  double A = 0;
  double eta = 0;
  // Per complete tree (keyed by its top), the trees removed before measuring.
  std::map<IntervalId, std::vector<Tree>> removed;
};

struct SampReport {
  double measured_max_size = 0;
  double bound = 0;  // A / eta
  double slack = 0;
};

/// Verifies the sampling hypothesis on every tree complete with respect to S
/// and asserts size*(a, S) <= A/eta.
inline SampReport tree_samp_bound(const TileSet& S, const WeightMap& a, const SampWitness& w,
                                  Tolerances tol = {}) {
  if (!(w.eta > 0 && w.eta <= 1)) throw Error(ErrorKind::WitnessInvalid, "eta must be in (0,1]");
  const GridConfig& g = S.grid();
  for (IntervalId top : S.ids()) {
    Tree T = complete_tree(g, top, S);
    TileSet removed_union(g);
    double top_lengths = 0;
    auto it = w.removed.find(top);
    if (it != w.removed.end()) {
      for (const Tree& Tp : it->second) {
        for (IntervalId id : Tp.members.ids())
          if (!T.members.contains(id))
            throw Error(ErrorKind::WitnessInvalid, "removed tree leaves the ambient tree");
        removed_union = removed_union.set_union(Tp.members);
        top_lengths += length_of(g, Tp.top);
      }
    }
    double lenT = length_of(g, top);
    if (top_lengths > (1 - w.eta) * lenT * (1 + tol.rel) + tol.abs)
      throw Error(ErrorKind::WitnessInvalid, "tops are not a (1-eta)-packing");
    double outside = weight_sum(a, T.members.set_minus(removed_union)) / lenT;
    if (outside > w.A * (1 + tol.rel) + tol.abs)
      throw Error(ErrorKind::WitnessInvalid, "size outside the removed trees exceeds A");
  }
  SampReport r;
  r.measured_max_size = maximal_size(a, S);
  r.bound = w.A / w.eta;
  r.slack = r.bound - r.measured_max_size;
  if (r.slack < -tol.rel * r.bound - tol.abs)
    throw Error(ErrorKind::HypothesisFail, "conclusion A/eta violated");
  return r;
}

struct GoodLambdaReport {
  bool hypothesis_ok = true;
  IntervalId offending_top = kRootId;
  double measured_max_size = 0;
  double bound = 0;
  bool conclusion_ok = false;
};

/// Good-lambda characterization: if on every complete tree the level set
/// {sum_P a(P) chi_{I_P}/|I_P| >= A} fills at most (1-eta) of I_T, then
/// size*(a, S) <= A/eta.  Hypothesis failures are reported, not thrown.
inline GoodLambdaReport good_lambda(const TileSet& S, const WeightMap& a, double A, double eta,
                                    Tolerances tol = {}) {
  if (!(eta > 0 && eta < 1)) throw Error(ErrorKind::ConfigInvalid, "eta must be in (0,1)");
  const GridConfig& g = S.grid();
  GoodLambdaReport rep;
  std::vector<double> acc(std::size_t(g.cell_count()));
  for (IntervalId top : S.ids()) {
    Tree T = complete_tree(g, top, S);
    auto [tlo, thi] = cell_range(g, top);
    for (std::int64_t c = tlo; c < thi; ++c) acc[std::size_t(c)] = 0;
    for (IntervalId id : T.members.ids()) {
      double add = a.at(id) / length_of(g, id);
      auto [lo, hi] = cell_range(g, id);
      for (std::int64_t c = lo; c < hi; ++c) acc[std::size_t(c)] += add;
    }
    double measure = 0;
    for (std::int64_t c = tlo; c < thi; ++c)
      if (acc[std::size_t(c)] >= A) measure += g.cell_width();
    if (measure > (1 - eta) * length_of(g, top) + tol.abs) {
      rep.hypothesis_ok = false;
      rep.offending_top = top;
      break;
    }
  }
  rep.measured_max_size = maximal_size(a, S);
  rep.bound = A / eta;
  rep.conclusion_ok = rep.measured_max_size <= rep.bound * (1 + tol.rel) + tol.abs;
  return rep;
}

struct JohnNirenbergReport {
  double bmo = 0;
  struct Level {
    int n;
    double measure;
    double bound;  // 2^(1-n) |I|
  };
  std::vector<Level> levels;
  bool all_ok = true;
  std::vector<std::pair<double, double>> lp_ratios;  // (p, ||f||_p / ((1+p)|I|^{1/p}||f||_BMO))
};

/// Distribution bound |{x in I : f(x) > 2n ||f||_BMO}| <= 2^(1-n) |I| for
/// real mean-zero f supported on I.
inline JohnNirenbergReport john_nirenberg_check(const DyadicFunction& f, const DyadicInterval& I,
                                                Tolerances tol = {}) {
  const GridConfig& g = f.grid;
  IntervalId iid = id_of(g, I);
  auto [lo, hi] = cell_range(g, iid);
  double scale = 0;
  for (std::int64_t c = 0; c < g.cell_count(); ++c) {
    if (std::abs(f.values[std::size_t(c)].imag()) > tol.abs)
      throw Error(ErrorKind::NotReal, "john_nirenberg_check needs real-valued f");
    if ((c < lo || c >= hi) && std::abs(f.values[std::size_t(c)]) > tol.abs)
      throw Error(ErrorKind::NotMeanZero, "f must be supported on I");
    scale = std::max(scale, std::abs(f.values[std::size_t(c)]));
  }
  if (std::abs(integral(f)) > tol.abs * std::max(1.0, scale))
    throw Error(ErrorKind::NotMeanZero, "f must have mean zero");

  JohnNirenbergReport rep;
  rep.bmo = bmo_norm(f);
  double lenI = interval_length(I);
  if (rep.bmo == 0) return rep;  // f == 0 on I

  int n_max = int(std::ceil(scale / (2 * rep.bmo))) + 2;
  n_max = std::min(n_max, 2 * g.M + 64);
  for (int n = 1; n <= n_max; ++n) {
    double cut = 2.0 * n * rep.bmo;
    double measure = 0;
    for (std::int64_t c = lo; c < hi; ++c)
      if (f.values[std::size_t(c)].real() > cut) measure += g.cell_width();
    double bound = std::ldexp(lenI, 1 - n);
    rep.levels.push_back({n, measure, bound});
    if (measure > bound + tol.abs) rep.all_ok = false;
  }
  for (double p : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    double num = 0;
    for (std::int64_t c = lo; c < hi; ++c)
      num += std::pow(std::abs(f.values[std::size_t(c)]), p) * g.cell_width();
    double ratio = std::pow(num, 1.0 / p) / ((1 + p) * std::pow(lenI, 1.0 / p) * rep.bmo);
    rep.lp_ratios.push_back({p, ratio});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Calderon-Zygmund selection (by size and by mean)

namespace detail {
// Full-subtree sums over the implicit interval tree: t(Q) = sum of a over
// Tree(Q) intersect S.
inline std::vector<double> full_subtree_sums(const WeightMap& a, const TileSet& S) {
  const GridConfig& g = S.grid();
  std::vector<double> t(std::size_t(g.interval_count()), 0.0);
  for (const auto& [id, v] : a.entries())
    if (S.contains(id)) t[id] = v;
  for (std::int64_t id = g.interval_count() - 1; id > 0; --id)
    t[std::size_t(parent_id(IntervalId(id)))] += t[std::size_t(id)];
  return t;
}

inline bool has_qualifying_ancestor(const std::vector<char>& qualifies, IntervalId id) {
  while (id != kRootId) {
    id = parent_id(id);
    if (qualifies[id]) return true;
  }
  return false;
}
}  // namespace detail

struct Selection {
  std::vector<Tree> trees;  // complete w.r.t. the input collection
  TileSet remainder;
  std::map<std::string, double> measured;
};

/// Size selection: extracts the maximal complete-w.r.t.-P_n trees with
/// size(a, Tree(Q) cap P_n) >= 2^(n-1); remainder keeps size* <= 2^(n-1).
inline Selection tree_select(const TileSet& P_n, const WeightMap& a, int n, Tolerances tol = {}) {
  const GridConfig& g = P_n.grid();
  if (!is_convex(P_n)) throw Error(ErrorKind::NonConvexTree, "tree_select needs a convex input");
  double cap = std::ldexp(1.0, n);
  double ms = maximal_size(a, P_n);
  if (ms > cap * (1 + tol.rel))
    throw Error(ErrorKind::SizeHypothesisFail, "maximal size exceeds 2^n");

  auto t = detail::full_subtree_sums(a, P_n);
  std::vector<char> qualifies(std::size_t(g.interval_count()), 0);
  for (IntervalId id : P_n.ids())
    if (t[id] >= std::ldexp(length_of(g, id), n - 1)) qualifies[id] = 1;

  Selection sel;
  sel.remainder = P_n;
  for (IntervalId id : P_n.ids()) {
    if (!qualifies[id] || detail::has_qualifying_ancestor(qualifies, id)) continue;
    Tree T = complete_tree(g, id, P_n);
    sel.trees.push_back(T);
    sel.remainder = sel.remainder.set_minus(T.members);
  }
  sel.measured["selected_trees"] = double(sel.trees.size());
  sel.measured["remainder_max_size"] = maximal_size(a, sel.remainder);
  return sel;
}

/// Mean selection: same stopping shape with [|f|]_{I_Q} >= 2^(n-1) on tops.
/// Records the Chebyshev-type width bound sum |I_T| <= 4 * 2^-n *
/// int_{|f| >= 2^(n-2)} |f| (exact for this stopping rule).
inline Selection mean_select(const TileSet& P_n, const DyadicFunction& f, int n,
                             Tolerances tol = {}) {
  const GridConfig& g = P_n.grid();
  if (!is_convex(P_n)) throw Error(ErrorKind::NonConvexTree, "mean_select needs a convex input");
  double cap = std::ldexp(1.0, n);
  double mm = maximal_mean(f, P_n);
  if (mm > cap * (1 + tol.rel))
    throw Error(ErrorKind::MeanHypothesisFail, "maximal mean exceeds 2^n");

  // interval integrals of |f|
  std::vector<double> s(std::size_t(g.interval_count()));
  std::int64_t leaf = g.cell_count() - 1;
  for (std::int64_t c = 0; c < g.cell_count(); ++c)
    s[std::size_t(leaf + c)] = std::abs(f.values[std::size_t(c)]) * g.cell_width();
  for (std::int64_t id = leaf - 1; id >= 0; --id)
    s[std::size_t(id)] = s[std::size_t(2 * id + 1)] + s[std::size_t(2 * id + 2)];

  std::vector<char> qualifies(std::size_t(g.interval_count()), 0);
  for (IntervalId id : P_n.ids())
    if (s[id] / length_of(g, id) >= std::ldexp(1.0, n - 1)) qualifies[id] = 1;

  Selection sel;
  sel.remainder = P_n;
  double width_sum = 0;
  for (IntervalId id : P_n.ids()) {
    if (!qualifies[id] || detail::has_qualifying_ancestor(qualifies, id)) continue;
    Tree T = complete_tree(g, id, P_n);
    width_sum += length_of(g, id);
    sel.trees.push_back(T);
    sel.remainder = sel.remainder.set_minus(T.members);
  }
  double tail = 0;  // int over {|f| >= 2^(n-2)}
  double cut = std::ldexp(1.0, n - 2);
  for (std::int64_t c = 0; c < g.cell_count(); ++c) {
    double v = std::abs(f.values[std::size_t(c)]);
    if (v >= cut) tail += v * g.cell_width();
  }
  sel.measured["selected_trees"] = double(sel.trees.size());
  sel.measured["remainder_max_mean"] = maximal_mean(f, sel.remainder);
  sel.measured["width_sum"] = width_sum;
  sel.measured["cheb_rhs"] = std::ldexp(tail, -n);
  sel.measured["cheb_ratio"] =
      sel.measured["cheb_rhs"] > 0 ? width_sum / sel.measured["cheb_rhs"] : 0.0;
  return sel;
}

// ---------------------------------------------------------------------------
// Convexification

/// Partition of T \ P into convex trees; the tops are the tiles of T \ P
/// whose parent tile is not in T \ P.  If P is a uniform alpha-packing the
/// tops form a uniform (alpha+1)-packing, which the caller can re-measure.
inline std::vector<Tree> convexify(const Tree& T, const TileSet& P) {
  const GridConfig& g = T.grid();
  TileSet R = T.members.set_minus(P);
  std::unordered_map<IntervalId, std::vector<IntervalId>> groups;
  for (IntervalId id : R.ids()) {
    IntervalId cur = id;
    while (cur != kRootId && R.contains(parent_id(cur))) cur = parent_id(cur);
    groups[cur].push_back(id);
  }
  std::vector<Tree> out;
  std::vector<IntervalId> tops;
  tops.reserve(groups.size());
  for (auto& [top, ids] : groups) tops.push_back(top);
  std::sort(tops.begin(), tops.end());
  for (IntervalId top : tops) out.push_back(Tree{top, TileSet(g, std::move(groups[top]))});
  return out;
}

// ---------------------------------------------------------------------------
// Tree slicing (Carleson-measure chopping)

enum class SliceAlgorithm { Garnett, HeavyLight };

namespace detail {

// Greedy subtree selection on a complete tree whose weights obey
// a(P) <= (delta/2)|I_P| with equality at the finest scale: grows the largest
// chain-closed tree keeping every ancestor-rooted size strictly below
// delta/2, then adjoins the boundary row.  The result satisfies
// delta/2 <= size <= size* <= delta.
inline Tree greedy_grow(const GridConfig& g, IntervalId top, const WeightMap& a, double delta) {
  double half = delta / 2;
  if (a.at(top) >= half * length_of(g, top))
    return Tree{top, TileSet(g, {top})};

  std::unordered_set<IntervalId> members{top};
  std::unordered_map<IntervalId, double> s;
  s[top] = a.at(top);

  int top_level = level_of(top);
  std::int64_t lo = std::int64_t(top) * 2 + 1, hi = std::int64_t(top) * 2 + 2;
  for (int level = top_level + 1; level <= 2 * g.M; ++level) {
    for (std::int64_t id = lo; id <= hi; ++id) {
      IntervalId cur = IntervalId(id);
      if (!members.count(parent_id(cur))) continue;
      double w = a.at(cur);
      bool ok = true;
      for (IntervalId anc = cur;;) {
        anc = parent_id(anc);
        auto it = s.find(anc);
        if (it == s.end()) break;  // above the top
        if (!(it->second + w < half * length_of(g, anc))) {
          ok = false;
          break;
        }
        if (anc == top) break;
      }
      if (!ok) continue;
      members.insert(cur);
      s[cur] = w;
      for (IntervalId anc = cur; anc != top;) {
        anc = parent_id(anc);
        s[anc] += w;  // the chain up to the top lies inside the grown tree
      }
    }
    lo = 2 * lo + 1;
    hi = 2 * hi + 2;
  }

  // Boundary row: tiles just above the grown tree.
  std::vector<IntervalId> all(members.begin(), members.end());
  for (IntervalId id : all) {
    if (level_of(id) == 2 * g.M) continue;
    for (IntervalId c : {left_child_id(id), right_child_id(id)})
      if (!members.count(c)) members.insert(c);
  }
  std::vector<IntervalId> ids(members.begin(), members.end());
  return Tree{top, TileSet(g, std::move(ids))};
}

// Partition of a complete tree into greedy trees.
inline std::vector<Tree> greedy_partition(const GridConfig& g, IntervalId root,
                                          const WeightMap& a, double delta) {
  std::vector<Tree> out;
  std::vector<IntervalId> queue{root};
  while (!queue.empty()) {
    IntervalId top = queue.back();
    queue.pop_back();
    Tree T = greedy_grow(g, top, a, delta);
    for (IntervalId id : T.members.ids()) {
      if (level_of(id) == 2 * g.M) continue;
      for (IntervalId c : {left_child_id(id), right_child_id(id)})
        if (!T.members.contains(c)) queue.push_back(c);
    }
    out.push_back(std::move(T));
  }
  std::sort(out.begin(), out.end(), [](const Tree& x, const Tree& y) { return x.top < y.top; });
  return out;
}

inline void slice_heavy_light(const Tree& T0, const WeightMap& a, double delta,
                              TreeDecomposition& out, Tolerances tol, int level,
                              double& worst_t2) {
  const GridConfig& g = T0.grid();
  if (maximal_size(a, T0.members) <= delta) {
    out.trees.push_back({T0, "small"});
    return;
  }
  double lenT0 = length_of(g, T0.top);
  double c = weight_sum(a, T0.members) / lenT0;

  auto t = full_subtree_sums(a, T0.members);
  std::vector<char> fluct(std::size_t(g.interval_count()), 0);
  for (IntervalId id : T0.members.ids()) {
    if (id == T0.top) continue;
    double size = t[id] / length_of(g, id);
    if (std::abs(size - c) >= delta / 2) fluct[id] = 1;
  }
  std::vector<Tree> heavy, light;
  double sum_heavy = 0, sum_light = 0;
  TileSet removed(g);
  for (IntervalId id : T0.members.ids()) {
    if (!fluct[id] || has_qualifying_ancestor(fluct, id)) continue;
    Tree T = complete_tree(g, id, T0.members);
    double size = t[id] / length_of(g, id);
    removed = removed.set_union(T.members);
    if (size >= c + delta / 2) {
      heavy.push_back(std::move(T));
      sum_heavy += length_of(g, id);
    } else {
      light.push_back(std::move(T));
      sum_light += length_of(g, id);
    }
  }
  // Tree counting estimates for this recursion level.
  if (sum_heavy + sum_light > lenT0 * (1 + tol.rel))
    throw Error(ErrorKind::HypothesisFail, "fluctuating trees exceed the top interval");
  double t2_bound = c > 0 ? c / (c + delta / 2) * lenT0 : 0.0;
  if (sum_heavy > t2_bound * (1 + tol.rel) + tol.abs)
    throw Error(ErrorKind::HypothesisFail, "heavy-tree widths violate the counting estimate");
  worst_t2 = std::max(worst_t2, t2_bound > 0 ? sum_heavy / t2_bound : 0.0);

  TileSet T1 = T0.members.set_minus(removed);
  std::vector<IntervalId> buffer_ids;
  for (IntervalId id : T1.ids()) {
    bool boundary = level_of(id) == 2 * g.M;
    if (!boundary)
      for (IntervalId ch : {left_child_id(id), right_child_id(id)})
        if (!T1.contains(ch)) boundary = true;
    if (boundary) buffer_ids.push_back(id);
  }
  TileSet buffer(g, std::move(buffer_ids));
  out.exceptional = out.exceptional.set_union(buffer);

  for (Tree& small : convexify(Tree{T0.top, T1}, buffer)) out.trees.push_back({small, "small"});
  for (Tree& h : heavy) slice_heavy_light(h, a, delta, out, tol, level + 1, worst_t2);
  for (Tree& l : light) slice_heavy_light(l, a, delta, out, tol, level + 1, worst_t2);
}

}  // namespace detail

/// Slices a convex tree of maximal size <= C0 into trees of maximal size
/// <= delta plus an exceptional tile set with a(P) <= C0 |I_P|.  The greedy
/// (Garnett) mode additionally reports the padded sizes delta/2 <= size and
/// its polynomial top-packing; the heavy/light mode records its per-level
/// counting estimates.
inline TreeDecomposition tree_slice(const Tree& T0, const WeightMap& a, double C0, double delta,
                                    SliceAlgorithm algorithm, Tolerances tol = {}) {
  const GridConfig& g = T0.grid();
  if (!is_convex_tree(T0)) throw Error(ErrorKind::NonConvexTree, "tree_slice needs a convex tree");
  if (!(delta > 0) || delta > C0 * (1 + tol.rel))
    throw Error(ErrorKind::ConfigInvalid, "need 0 < delta <= C0");
  if (maximal_size(a, T0.members) > C0 * (1 + tol.rel))
    throw Error(ErrorKind::HypothesisFail, "maximal size exceeds C0");

  TreeDecomposition out{g, {}, TileSet(g), {}};

  if (algorithm == SliceAlgorithm::HeavyLight) {
    double worst_t2 = 0;
    detail::slice_heavy_light(T0, a, delta, out, tol, 0, worst_t2);
    out.measured["t2_worst_ratio"] = worst_t2;
  } else {
    // Exceptional tiles: where the weak Carleson bound delta/2 fails.
    std::vector<IntervalId> big;
    for (IntervalId id : T0.members.ids())
      if (a.at(id) >= (delta / 2) * length_of(g, id)) big.push_back(id);
    out.exceptional = TileSet(g, std::move(big));

    double min_padded_size = std::numeric_limits<double>::infinity();
    double max_padded_size = 0;
    std::vector<Tree> pieces = out.exceptional.empty()
                                   ? std::vector<Tree>{Tree{T0.top, T0.members}}
                                   : convexify(T0, out.exceptional);
    for (const Tree& sub : pieces) {
      // Complete the subtree, extend by zero, and raise the finest row to
      // exactly (delta/2)|I_P|.
      WeightMap apad = restrict_weights(a, sub.members);
      auto [flo, fhi] = cell_range(g, sub.top);
      std::int64_t leaf = g.cell_count() - 1;
      for (std::int64_t cidx = flo; cidx < fhi; ++cidx)
        apad.set(IntervalId(leaf + cidx), (delta / 2) * g.cell_width());

      for (const Tree& part : detail::greedy_partition(g, sub.top, apad, delta)) {
        double psize = weight_sum(apad, part.members) / length_of(g, part.top);
        min_padded_size = std::min(min_padded_size, psize);
        max_padded_size = std::max(max_padded_size, tree_size(apad, part));
        TileSet kept = part.members.set_intersect(sub.members);
        for (Tree& final_tree : split_into_trees(kept))
          out.trees.push_back({final_tree, "small"});
      }
    }
    out.measured["garnett_min_padded_size"] = pieces.empty() ? 0 : min_padded_size;
    out.measured["garnett_max_padded_size"] = max_padded_size;
  }

  // Measured packings (the uniform upgrade is recorded, not re-derived).
  std::vector<IntervalId> tops;
  for (const auto& lt : out.trees) tops.push_back(lt.tree.top);
  TileSet top_set(g, std::move(tops));
  out.measured["top_packing_uniform"] = packing_constant(top_set, T0, true);
  out.measured["top_packing"] = packing_constant(top_set, T0, false);
  out.measured["exceptional_packing_uniform"] = packing_constant(out.exceptional, T0, true);
  out.measured["tree_count"] = double(out.trees.size());
  return out;
}

/// Independent postcondition checker shared by both slicing algorithms.
/// Verifies the exact partition, the per-tree size bound, and the weak
/// Carleson bound on the exceptional tiles.
inline void verify_tree_slice(const Tree& T0, const WeightMap& a, double C0, double delta,
                              const TreeDecomposition& d, Tolerances tol = {}) {
  TileSet seen = d.exceptional;
  std::size_t total = d.exceptional.size();
  for (const auto& lt : d.trees) {
    if (!is_convex_tree(lt.tree))
      throw Error(ErrorKind::HypothesisFail, "slice output tree is not convex");
    if (maximal_size(a, lt.tree.members) > delta * (1 + tol.rel) + tol.abs)
      throw Error(ErrorKind::HypothesisFail, "slice output tree exceeds delta");
    seen = seen.set_union(lt.tree.members);
    total += lt.tree.members.size();
  }
  if (!(seen == T0.members) || total != T0.members.size())
    throw Error(ErrorKind::HypothesisFail, "slice output is not an exact partition");
  const GridConfig& g = T0.grid();
  for (IntervalId id : d.exceptional.ids())
    if (a.at(id) > C0 * length_of(g, id) * (1 + tol.rel) + tol.abs)
      throw Error(ErrorKind::HypothesisFail, "exceptional tile violates the weak Carleson bound");
}

// ---------------------------------------------------------------------------
// Extrapolation of Carleson measures

struct ExtrapolationReport {
  double mu2_max_size = 0;   // measured size*(mu')
  double bound = 0;          // alpha_T C2 + alpha_P C1, from the slice of mu
  double alpha_trees = 0;    // sum |I_T| / |I_top|
  double alpha_tiles = 0;    // sum |I_P| / |I_top|
  IntervalId witness_top = kRootId;
};

/// Reconstructs the extrapolation bound: slices the complete tree over the
/// size*-attaining top of mu', checks the smallness hypothesis of mu' on
/// every produced tree, and bounds size*(mu') by linear combination of C1
/// and C2 with the measured packing constants as coefficients.
inline ExtrapolationReport extrapolate_check(const WeightMap& mu, const WeightMap& mu2,
                                             double delta, double C1, double C2,
                                             Tolerances tol = {}) {
  const GridConfig& g = mu.grid();
  for (const auto& [id, v] : mu2.entries())
    if (v > C1 * length_of(g, id) * (1 + tol.rel) + tol.abs)
      throw Error(ErrorKind::HypothesisFail, "mu' violates the weak Carleson condition");

  TileSet all = TileSet::all(g);
  // On the full tile set, size* is attained on a complete tree; locate its top.
  ExtrapolationReport rep;
  {
    auto sums = detail::full_subtree_sums(mu2, all);
    double best = -1;
    for (IntervalId id : all.ids()) {
      double s = sums[id] / length_of(g, id);
      if (s > best) {
        best = s;
        rep.witness_top = id;
      }
    }
  }
  rep.mu2_max_size = maximal_size(mu2, all);

  Tree T0 = complete_tree(g, rep.witness_top);
  double C0 = std::max(maximal_size(mu, T0.members), delta);
  TreeDecomposition d = tree_slice(T0, mu, C0, delta, SliceAlgorithm::Garnett, tol);
  verify_tree_slice(T0, mu, C0, delta, d, tol);

  double lenTop = length_of(g, rep.witness_top);
  double sum_trees = 0, sum_tiles = 0;
  for (const auto& lt : d.trees) {
    if (tree_size(mu2, lt.tree) > C2 * (1 + tol.rel) + tol.abs)
      throw Error(ErrorKind::HypothesisFail, "mu' is not small on a mu-small tree");
    sum_trees += length_of(g, lt.tree.top);
  }
  for (IntervalId id : d.exceptional.ids()) sum_tiles += length_of(g, id);
  rep.alpha_trees = sum_trees / lenTop;
  rep.alpha_tiles = sum_tiles / lenTop;
  rep.bound = rep.alpha_trees * C2 + rep.alpha_tiles * C1;
  if (rep.mu2_max_size > rep.bound * (1 + tol.rel) + tol.abs)
    throw Error(ErrorKind::HypothesisFail, "extrapolation bound violated");
  return rep;
}

// ---------------------------------------------------------------------------
// Atomic decomposition of dyadic H^p

struct Atom {
  IntervalId top;
  double coefficient;   // c_I >= 0
  DyadicFunction atom;  // a_I in S_0(I), ||a_I||_2 <= |I|^(1/2 - 1/p)
};

struct AtomicDecomposition {
  GridConfig grid;
  double p = 1;
  std::vector<Atom> atoms;
  std::map<std::string, double> measured;
};

/// Iterated size selection on |Wf|^2 from the largest dyadic level downward;
/// atoms are Pi_T f / c_{I_T} with c_{I_T} = 2^(n/2) |I_T|^(1/p).
inline AtomicDecomposition atomic_decompose(const DyadicFunction& f, double p,
                                            Tolerances tol = {}) {
  if (!(p > 0 && p <= 1)) throw Error(ErrorKind::ExponentRange, "p must lie in (0, 1]");
  const GridConfig& g = f.grid;
  double scale = lp_norm(f, std::numeric_limits<double>::infinity());
  if (std::abs(integral(f)) > tol.abs * std::max(1.0, scale))
    throw Error(ErrorKind::NotMeanZero, "atomic decomposition needs mean zero");

  AtomicDecomposition out{g, p, {}, {}};
  WeightMap a = squared_weights(wavelet_transform(f));
  TileSet P_cur = TileSet::all_with_children(g);
  double ms = maximal_size(a, P_cur);
  if (ms == 0) return out;

  int n = int(std::ceil(std::log2(ms)));
  while (std::ldexp(1.0, n) < ms) ++n;

  while (maximal_size(a, P_cur) > 0) {
    Selection sel = tree_select(P_cur, a, n);
    for (const Tree& T : sel.trees) {
      double c = std::pow(2.0, n / 2.0) * std::pow(length_of(g, T.top), 1.0 / p);
      DyadicFunction atom = project_tree(f, T);
      atom *= Complex{1.0 / c, 0};
      out.atoms.push_back({T.top, c, std::move(atom)});
    }
    P_cur = sel.remainder;
    --n;
    if (n < -1100) break;  // weights below double range are exact zeros
  }

  // Reported functionals and the empirical equivalence ratios in both
  // directions: atoms against the square and maximal functionals, and back.
  double sum_cp = 0;
  for (const auto& at : out.atoms) sum_cp += std::pow(at.coefficient, p);
  out.measured["sum_c_p"] = sum_cp;
  out.measured["Sf_p_p"] = std::pow(lp_norm(square_function(f), p), p);
  out.measured["Mf_p_p"] = std::pow(lp_norm(cancellative_maximal(f), p), p);
  double denom = std::min(out.measured["Sf_p_p"], out.measured["Mf_p_p"]);
  out.measured["equivalence_ratio"] = denom > 0 ? sum_cp / denom : 0.0;
  out.measured["square_over_atoms"] = sum_cp > 0 ? out.measured["Sf_p_p"] / sum_cp : 0.0;
  out.measured["maximal_over_atoms"] = sum_cp > 0 ? out.measured["Mf_p_p"] / sum_cp : 0.0;

  DyadicFunction recon(g);
  for (const auto& at : out.atoms) {
    DyadicFunction term = at.atom;
    term *= Complex{at.coefficient, 0};
    recon += term;
  }
  double num = l2_norm(recon - f);
  out.measured["reconstruction_residual"] = l2_norm(f) > 0 ? num / l2_norm(f) : num;
  return out;
}

}  // namespace dhap
