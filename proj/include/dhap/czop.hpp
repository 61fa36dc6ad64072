#pragma once

// Perfect dyadic Calderon-Zygmund operators and the T(1)/T(b) machinery.
//
// A kernel is stored by its sibling-pair constants: for every dyadic I with
// children, the value of K on I_l x I_r and on I_r x I_l.  This makes the
// perfect cancellation conditions and both truncation conditions true by
// construction; dense matrices exist only inside test oracles.

#include <map>
#include <random>

#include "dhap/decompose.hpp"
#include "dhap/paraproduct.hpp"

namespace dhap {

class PerfectDyadicKernel {
 public:
  PerfectDyadicKernel() = default;
  explicit PerfectDyadicKernel(GridConfig g)
      : grid_(g), c_(std::size_t(g.cell_count() - 1), {Complex{0, 0}, Complex{0, 0}}) {}

  const GridConfig& grid() const { return grid_; }

  // lr = value of K on I_l x I_r (x left, y right); rl on I_r x I_l.
  void set(IntervalId id, Complex lr, Complex rl) {
    if (id >= c_.size()) throw Error(ErrorKind::ParseError, "kernel index out of range");
    if (id == kRootId && (lr != Complex{0, 0} || rl != Complex{0, 0}))
      throw Error(ErrorKind::ParseError, "top-scale kernel constants must vanish (truncation)");
    c_[id] = {lr, rl};
  }

  Complex lr(IntervalId id) const { return c_[id].first; }
  Complex rl(IntervalId id) const { return c_[id].second; }
  std::size_t pair_count() const { return c_.size(); }

  PerfectDyadicKernel adjoint() const {
    PerfectDyadicKernel K(grid_);
    for (std::size_t id = 0; id < c_.size(); ++id)
      K.c_[id] = {c_[id].second, c_[id].first};
    return K;
  }

 private:
  GridConfig grid_;
  std::vector<std::pair<Complex, Complex>> c_;
};

/// Smallest C with |c| <= C / |I| for all sibling constants (the kernel
/// condition evaluated at sup |x-y| = |I|).
inline double kernel_admissibility(const PerfectDyadicKernel& K) {
  double best = 0;
  for (std::int64_t id = 0; id < std::int64_t(K.pair_count()); ++id) {
    double len = length_of(K.grid(), IntervalId(id));
    best = std::max(best, len * std::max(std::abs(K.lr(IntervalId(id))),
                                         std::abs(K.rl(IntervalId(id)))));
  }
  return best;
}

/// T f by per-sibling-rectangle integration: contributions accumulate on the
/// interval tree and are pushed down to cells in one sweep.
inline DyadicFunction apply(const PerfectDyadicKernel& K, const DyadicFunction& f) {
  const GridConfig& g = K.grid();
  if (!(f.grid == g)) throw Error(ErrorKind::ConfigInvalid, "grid mismatch");
  auto sums = interval_integrals(f);
  std::vector<Complex> acc(std::size_t(g.interval_count()), Complex{0, 0});
  for (std::int64_t id = 0; id < std::int64_t(K.pair_count()); ++id) {
    IntervalId l = left_child_id(IntervalId(id)), r = right_child_id(IntervalId(id));
    acc[l] += K.lr(IntervalId(id)) * sums[r];
    acc[r] += K.rl(IntervalId(id)) * sums[l];
  }
  for (std::int64_t id = 1; id < g.interval_count(); ++id)
    acc[std::size_t(id)] += acc[parent_id(IntervalId(id))];
  DyadicFunction out(g);
  std::int64_t leaf = g.cell_count() - 1;
  for (std::int64_t c = 0; c < g.cell_count(); ++c)
    out.values[std::size_t(c)] = acc[std::size_t(leaf + c)];
  return out;
}

inline DyadicFunction apply_adjoint(const PerfectDyadicKernel& K, const DyadicFunction& f) {
  return apply(K.adjoint(), f);
}

inline DyadicFunction t_one(const PerfectDyadicKernel& K) {
  return apply(K, constant_function(K.grid(), Complex{1, 0}));
}

inline DyadicFunction t_star_one(const PerfectDyadicKernel& K) {
  return apply_adjoint(K, constant_function(K.grid(), Complex{1, 0}));
}

/// The diagonal symbol <T phi_P, phi_P> for every lacunary tile with
/// children, via the recursion for the box integrals Q(J) = int_{JxJ} K.
inline MultiplierSymbol diagonal_symbol(const PerfectDyadicKernel& K) {
  const GridConfig& g = K.grid();
  std::int64_t n = g.cell_count() - 1;
  std::vector<Complex> box(std::size_t(g.interval_count()), Complex{0, 0});
  for (std::int64_t id = g.interval_count() - 1; id >= 0; --id) {
    if (id >= n) continue;  // finest squares vanish
    double len = length_of(g, IntervalId(id));
    Complex cross = (K.lr(IntervalId(id)) + K.rl(IntervalId(id))) * (len * len / 4);
    box[std::size_t(id)] =
        box[left_child_id(IntervalId(id))] + box[right_child_id(IntervalId(id))] + cross;
  }
  std::vector<std::pair<IntervalId, Complex>> entries;
  entries.reserve(std::size_t(n));
  for (std::int64_t id = 0; id < n; ++id) {
    double len = length_of(g, IntervalId(id));
    Complex cross = (K.lr(IntervalId(id)) + K.rl(IntervalId(id))) * (len * len / 4);
    Complex diag = (box[left_child_id(IntervalId(id))] + box[right_child_id(IntervalId(id))] -
                    cross) /
                   len;
    entries.push_back({IntervalId(id), diag});
  }
  return MultiplierSymbol::from_sorted(g, std::move(entries));
}

/// Measured ||T||_{2->2} by power iteration on T^H T (seeded, deterministic).
/// The Hermitian adjoint is conj . transpose . conj; the plain transpose is
/// the adjoint of the real pairing and is not what the L^2 norm needs.
inline double operator_norm(const PerfectDyadicKernel& K, int max_iter = 200,
                            Tolerances tol = {}) {
  const GridConfig& g = K.grid();
  auto conj_inplace = [](DyadicFunction& h) {
    for (auto& x : h.values) x = std::conj(x);
  };
  std::mt19937_64 rng(0x517cc1b727220a95ULL);
  std::normal_distribution<double> nd(0, 1);
  DyadicFunction v(g);
  for (auto& x : v.values) x = Complex{nd(rng), nd(rng)};
  double nv = l2_norm(v);
  if (nv == 0) return 0;
  v *= Complex{1.0 / nv, 0};
  double sigma = 0;
  for (int it = 0; it < max_iter; ++it) {
    DyadicFunction w = apply(K, v);
    double s = l2_norm(w);
    conj_inplace(w);
    DyadicFunction u = apply_adjoint(K, w);
    conj_inplace(u);
    double nu = l2_norm(u);
    if (nu == 0) return 0;
    u *= Complex{1.0 / nu, 0};
    v = std::move(u);
    if (it > 0 && std::abs(s - sigma) <= tol.rel * std::max(1.0, s)) {
      sigma = s;
      break;
    }
    sigma = s;
  }
  return sigma;
}

/// Residual of the splitting identity
/// Tf == W^-1 <T phi, phi> W f + pi_hl(T1, f) + pi_hh(T*1, f)
/// compared on wavelet coefficients, relative to their scale.
inline double splitting_residual(const PerfectDyadicKernel& K, const DyadicFunction& f) {
  DyadicFunction lhs = apply(K, f);
  DyadicFunction rhs = multiplier_apply(diagonal_symbol(K), f) + pi_hl(t_one(K), f) +
                       pi_hh(t_star_one(K), f);
  CoefficientMap wl = wavelet_transform(lhs);
  CoefficientMap wr = wavelet_transform(rhs);
  double worst = 0, scale = 0;
  for (const auto& [id, c] : wl.entries()) {
    worst = std::max(worst, std::abs(c - wr.at(id)));
    scale = std::max(scale, std::abs(c));
  }
  for (const auto& [id, c] : wr.entries()) scale = std::max(scale, std::abs(c));
  return scale > 0 ? worst / scale : worst;
}

// ---------------------------------------------------------------------------
// Certificates

struct CertificateReport {
  std::map<std::string, double> constants;
  std::map<std::string, bool> verdicts;

  bool all_ok() const {
    for (const auto& [k, v] : verdicts)
      if (!v) return false;
    return true;
  }
};

enum class T1Mode { Global, Local };

/// T(1) certificates: the weak boundedness constant and BMO norms in global
/// mode, the L^1-normalized testing constants in local mode, and in both the
/// directly measured operator norm and the easy converse inequalities
/// (certificate <= ||T||, with constant 1 at this normalization).
inline CertificateReport t1_certificate(const PerfectDyadicKernel& K, T1Mode mode,
                                        Tolerances tol = {}) {
  const GridConfig& g = K.grid();
  CertificateReport rep;
  double norm2 = operator_norm(K);
  rep.constants["norm_2"] = norm2;
  rep.constants["admissibility"] = kernel_admissibility(K);

  if (mode == T1Mode::Global) {
    MultiplierSymbol diag = diagonal_symbol(K);
    double wbp = 0;
    for (const auto& [id, c] : diag.entries()) wbp = std::max(wbp, std::abs(c));
    rep.constants["wbp"] = wbp;
    rep.constants["bmo_T1"] = bmo_norm(t_one(K));
    rep.constants["bmo_Tstar1"] = bmo_norm(t_star_one(K));
    rep.verdicts["wbp_le_norm"] = wbp <= norm2 * (1 + tol.rel) + tol.abs;
    rep.verdicts["bmo_T1_le_norm"] = rep.constants["bmo_T1"] <= norm2 * (1 + tol.rel) + tol.abs;
    rep.verdicts["bmo_Tstar1_le_norm"] =
        rep.constants["bmo_Tstar1"] <= norm2 * (1 + tol.rel) + tol.abs;
  } else {
    double local = 0, local_star = 0;
    PerfectDyadicKernel Kt = K.adjoint();
    for (std::int64_t id = 0; id < g.interval_count(); ++id) {
      DyadicInterval I = interval_of(g, IntervalId(id));
      DyadicFunction chi = indicator(g, I);
      auto [lo, hi] = cell_range(g, IntervalId(id));
      auto l1_on = [&](const DyadicFunction& h) {
        double s = 0;
        for (std::int64_t c = lo; c < hi; ++c) s += std::abs(h.values[std::size_t(c)]);
        return s * g.cell_width();
      };
      double len = length_of(g, IntervalId(id));
      local = std::max(local, l1_on(apply(K, chi)) / len);
      local_star = std::max(local_star, l1_on(apply(Kt, chi)) / len);
    }
    rep.constants["local_t1"] = local;
    rep.constants["local_t1_star"] = local_star;
    rep.verdicts["local_le_norm"] = local <= norm2 * (1 + tol.rel) + tol.abs;
    rep.verdicts["local_star_le_norm"] = local_star <= norm2 * (1 + tol.rel) + tol.abs;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Accretivity and adapted Haar systems

enum class Accretivity { Pseudo, Strong, Para };

struct AccretivityReport {
  double margin = 0;
  bool verdict = false;
};

/// Margins |[b]| over a tile collection: pseudo on the tiles, strong
/// including both children, para as the best comparable-scale subtile.
inline AccretivityReport accretivity(const DyadicFunction& b, const TileSet& S,
                                     Accretivity flavor, double threshold, double theta = 0.5) {
  const GridConfig& g = b.grid;
  auto sums = interval_integrals(b);
  auto avg = [&](IntervalId id) { return std::abs(sums[id] / length_of(g, id)); };
  double margin = std::numeric_limits<double>::infinity();
  for (IntervalId id : S.ids()) {
    switch (flavor) {
      case Accretivity::Pseudo:
        margin = std::min(margin, avg(id));
        break;
      case Accretivity::Strong: {
        if (level_of(id) == 2 * g.M)
          throw Error(ErrorKind::ScaleViolation, "strong accretivity needs children");
        margin = std::min({margin, avg(id), avg(left_child_id(id)), avg(right_child_id(id))});
        break;
      }
      case Accretivity::Para: {
        double len = length_of(g, id);
        double best = 0;
        // Q <=' P with |I_Q| >= theta |I_P|: walk the subtree rows.
        std::int64_t lo = id, hi = id;
        for (int lvl = level_of(id); lvl <= 2 * g.M; ++lvl) {
          if (length_of(g, IntervalId(lo)) < theta * len - 1e-15) break;
          for (std::int64_t q = lo; q <= hi; ++q) best = std::max(best, avg(IntervalId(q)));
          lo = 2 * lo + 1;
          hi = 2 * hi + 2;
        }
        margin = std::min(margin, best);
        break;
      }
    }
  }
  if (S.empty()) margin = 0;
  return {margin, margin >= threshold};
}

// Adapted Haar basis for a fixed function b: phi^b_P tilts the Haar step by
// the child averages of b so that int b phi^b_P = 0, with dual psi^b_P =
// b phi^b_P / (int phi^b_P b phi^b_P).
class AdaptedBasis {
 public:
  AdaptedBasis(const DyadicFunction& b, Tolerances tol = {})
      : b_(b), sums_(interval_integrals(b)), tol_(tol) {
    for (auto v : b.values) scale_ = std::max(scale_, std::abs(v));
  }

  const GridConfig& grid() const { return b_.grid; }
  const DyadicFunction& weight() const { return b_; }

  Complex avg(IntervalId id) const { return sums_[id] / length_of(b_.grid, id); }

  Complex safe_avg(IntervalId id) const {
    Complex a = avg(id);
    if (std::abs(a) <= tol_.abs * std::max(1.0, scale_))
      throw Error(ErrorKind::DegenerateAverage, "vanishing average of b");
    return a;
  }

  /// phi^b_P = |I|^(-1/2) ( [b]_r/[b]_P chi_l - [b]_l/[b]_P chi_r ).
  DyadicFunction wavelet(IntervalId id) const {
    const GridConfig& g = b_.grid;
    if (level_of(id) == 2 * g.M)
      throw Error(ErrorKind::BottomScale, "adapted wavelet needs children");
    Complex ap = safe_avg(id);
    Complex al = avg(left_child_id(id)), ar = avg(right_child_id(id));
    double nrm = 1.0 / std::sqrt(length_of(g, id));
    DyadicFunction out(g);
    auto [lo, hi] = cell_range(g, id);
    std::int64_t mid = (lo + hi) / 2;
    for (std::int64_t c = lo; c < mid; ++c) out.values[std::size_t(c)] = nrm * ar / ap;
    for (std::int64_t c = mid; c < hi; ++c) out.values[std::size_t(c)] = -nrm * al / ap;
    return out;
  }

  /// int phi^b_P b phi^b_P = [b]_l [b]_r / [b]_P.
  Complex pairing_norm(IntervalId id) const {
    Complex ap = safe_avg(id);
    return avg(left_child_id(id)) * avg(right_child_id(id)) / ap;
  }

  /// psi^b_P = b phi^b_P / int(phi^b_P b phi^b_P).
  DyadicFunction dual(IntervalId id) const {
    Complex d = pairing_norm(id);
    if (std::abs(d) <= tol_.abs * std::max(1.0, scale_ * scale_))
      throw Error(ErrorKind::DegenerateAverage, "vanishing adapted normalizer");
    DyadicFunction out = wavelet(id);
    auto [lo, hi] = cell_range(b_.grid, id);
    for (std::int64_t c = lo; c < hi; ++c)
      out.values[std::size_t(c)] *= b_.values[std::size_t(c)] / d;
    return out;
  }

  /// W_b f(P) = <f, phi^b_P>, computed from interval integrals of f.
  Complex coefficient(const std::vector<Complex>& fsums, IntervalId id) const {
    Complex ap = safe_avg(id);
    Complex al = avg(left_child_id(id)), ar = avg(right_child_id(id));
    double nrm = 1.0 / std::sqrt(length_of(b_.grid, id));
    return nrm * (ar / ap * fsums[left_child_id(id)] - al / ap * fsums[right_child_id(id)]);
  }

 private:
  DyadicFunction b_;
  std::vector<Complex> sums_;
  Tolerances tol_;
  double scale_ = 0;
};

inline DyadicFunction adapted_wavelet(const DyadicFunction& b, IntervalId id) {
  return AdaptedBasis(b).wavelet(id);
}

inline DyadicFunction adapted_dual(const DyadicFunction& b, IntervalId id) {
  return AdaptedBasis(b).dual(id);
}

/// Adapted coefficients W_b f(P) over the tiles of a tree (those with
/// children carry coefficients).
inline CoefficientMap adapted_transform(const DyadicFunction& b, const DyadicFunction& f,
                                        const Tree& T) {
  AdaptedBasis basis(b);
  auto fsums = interval_integrals(f);
  std::vector<std::pair<IntervalId, Complex>> entries;
  for (IntervalId id : T.members.ids()) {
    if (level_of(id) == 2 * b.grid.M) continue;
    entries.push_back({id, basis.coefficient(fsums, id)});
  }
  return CoefficientMap::from_sorted(b.grid, std::move(entries));
}

// ---------------------------------------------------------------------------
// Accretive selection (large mean forces pseudo-accretivity off small trees)

struct AccreteSelection {
  double epsilon = 0;
  std::vector<Tree> removed;  // complete w.r.t. T0, tops a (1-eps)-packing
  double removed_packing = 0;
};

/// On a convex tree with ||Pi_{T0} b||_2 <= C0 |I_{T0}|^(1/2) and
/// |[b]_{T0}| >= delta, removes the maximal small-average subtrees; the
/// removed tops cover at most (1-eps) of the top interval, with
/// eps = min(delta/2, delta^2/(8 C0^2)) and one halving retry for rounding.
inline AccreteSelection accrete_select(const Tree& T0, const DyadicFunction& b, double C0,
                                       double delta, Tolerances tol = {}) {
  const GridConfig& g = T0.grid();
  double lenT = T0.top_length();
  double proj = l2_norm(project_tree(b, T0));
  if (proj > C0 * std::sqrt(lenT) * (1 + tol.rel) + tol.abs)
    throw Error(ErrorKind::HypothesisFail, "projection norm exceeds C0 |I|^{1/2}");
  auto sums = interval_integrals(b);
  double top_avg = std::abs(sums[T0.top] / lenT);
  if (top_avg < delta * (1 - tol.rel) - tol.abs)
    throw Error(ErrorKind::HypothesisFail, "top average below delta");

  double eps = std::min(delta / 2, delta * delta / (8 * C0 * C0));
  if (!std::isfinite(eps) || eps <= 0) eps = delta / 2;

  for (int attempt = 0; attempt < 2; ++attempt) {
    // Maximal tiles with |[b]_P| <= eps.
    std::vector<char> small(std::size_t(g.interval_count()), 0);
    for (IntervalId id : T0.members.ids())
      if (std::abs(sums[id] / length_of(g, id)) <= eps) small[id] = 1;
    AccreteSelection out;
    out.epsilon = eps;
    double packing = 0;
    for (IntervalId id : T0.members.ids()) {
      if (!small[id] || detail::has_qualifying_ancestor(small, id)) continue;
      out.removed.push_back(complete_tree(g, id, T0.members));
      packing += length_of(g, id);
    }
    out.removed_packing = packing / lenT;
    if (out.removed_packing <= (1 - eps) + tol.abs) return out;
    eps /= 2;  // rounding guard; impossible when the hypotheses hold exactly
  }
  throw Error(ErrorKind::PackingViolation, "small-average tiles cover too much");
}

// ---------------------------------------------------------------------------
// Subtree pruning and the four-term decomposition

enum class TbSide { B1, B2 };

// Per-tile testing functions with [b^1_P]_P = [b^2_P]_P = 1.
class AccretiveSystem {
 public:
  AccretiveSystem() = default;
  explicit AccretiveSystem(GridConfig g)
      : grid_(g), b1_(std::size_t(g.interval_count())), b2_(std::size_t(g.interval_count())) {}

  const GridConfig& grid() const { return grid_; }

  void set(TbSide side, IntervalId id, std::vector<Complex> cells) {
    auto [lo, hi] = cell_range(grid_, id);
    if (std::int64_t(cells.size()) != hi - lo)
      throw Error(ErrorKind::ParseError, "cell count does not match the tile");
    (side == TbSide::B1 ? b1_ : b2_)[id] = std::move(cells);
  }

  bool has(TbSide side, IntervalId id) const {
    return !(side == TbSide::B1 ? b1_ : b2_)[id].empty();
  }

  /// b^i_P as a full-grid function (zero outside I_P).
  DyadicFunction function(TbSide side, IntervalId id) const {
    const auto& store = side == TbSide::B1 ? b1_ : b2_;
    if (store[id].empty()) throw Error(ErrorKind::SystemInvalid, "missing testing function");
    DyadicFunction out(grid_);
    auto [lo, hi] = cell_range(grid_, id);
    for (std::int64_t c = lo; c < hi; ++c)
      out.values[std::size_t(c)] = store[id][std::size_t(c - lo)];
    return out;
  }

  /// Constant system b^i_P = chi_{I_P}; reduces every T(b) pipeline to T(1).
  static AccretiveSystem constant_system(GridConfig g) {
    AccretiveSystem sys(g);
    for (std::int64_t id = 0; id < g.interval_count(); ++id) {
      auto [lo, hi] = cell_range(g, IntervalId(id));
      std::vector<Complex> ones(std::size_t(hi - lo), Complex{1, 0});
      sys.set(TbSide::B1, IntervalId(id), ones);
      sys.set(TbSide::B2, IntervalId(id), std::move(ones));
    }
    return sys;
  }

  /// Normalization check: [b^i_P]_P = 1 for every tile, both families.
  void validate(Tolerances tol = {}) const {
    for (std::int64_t id = 0; id < grid_.interval_count(); ++id) {
      for (auto side : {TbSide::B1, TbSide::B2}) {
        const auto& store = side == TbSide::B1 ? b1_ : b2_;
        if (store[std::size_t(id)].empty())
          throw Error(ErrorKind::SystemInvalid, "missing testing function");
        Complex mean{0, 0};
        for (Complex v : store[std::size_t(id)]) mean += v;
        mean /= double(store[std::size_t(id)].size());
        if (std::abs(mean - Complex{1, 0}) > 1e-6)
          throw Error(ErrorKind::SystemInvalid, "testing function is not mean-normalized");
      }
    }
  }

 private:
  GridConfig grid_;
  std::vector<std::vector<Complex>> b1_, b2_;
};

struct BufferTerm {
  IntervalId tile;
  // phi_Q = a b chi_{Q_l} + a_r b chi_{Q_r} + a_child b^1_{Q_l} + a_child_r b^1_{Q_r}
  Complex coef_left{0, 0}, coef_right{0, 0};
  Complex coef_child_left{0, 0}, coef_child_right{0, 0};
};

struct PruneResult {
  Tree t1;
  TileSet buffer;
  std::vector<Tree> removed;  // complete trees, sibling-free tops
  double epsilon = 0;

  Complex mean_coefficient{0, 0};  // [f]_P / [b]_P, the multiple of b split off
  CoefficientMap t1_coefficients;  // W_b f on T1
  std::vector<BufferTerm> buffer_terms;
  double reconstruction_residual = 0;
  double coefficient_ratio = 0;  // max |a| / ||f||_inf over non-finest buffers
  std::map<std::string, double> measured;
};

/// Subtree pruning: partitions Tree(P) into a strongly pseudo-accretive zone
/// T1, a buffer 2-packing, and removed complete trees whose tops form a
/// (1-eps)-packing, then decomposes f in S(I_P) into the four-term shape
/// (mean part, adapted expansion on T1, localized removed pieces, buffer
/// corrections) and verifies the reconstruction.
inline PruneResult subtree_prune(const PerfectDyadicKernel& K, IntervalId P, TbSide side,
                                 const AccretiveSystem& sys, const DyadicFunction& f,
                                 Tolerances tol = {}) {
  const GridConfig& g = K.grid();
  auto [plo, phi_] = cell_range(g, P);
  for (std::int64_t c = 0; c < g.cell_count(); ++c)
    if ((c < plo || c >= phi_) && std::abs(f.values[std::size_t(c)]) > tol.abs)
      throw Error(ErrorKind::ParseError, "f must be supported on I_P");

  DyadicFunction b = sys.function(side, P);
  DyadicFunction Tb = side == TbSide::B1 ? apply(K, b) : apply_adjoint(K, b);
  Tree treeP = complete_tree(g, P);
  double lenP = length_of(g, P);

  // Stage 1: remove small-average subtrees.
  double delta = std::abs(average(b, interval_of(g, P)));
  if (delta <= tol.abs) throw Error(ErrorKind::HypothesisFail, "top average of b vanishes");
  double C0 = l2_norm(project_tree(b, treeP)) / std::sqrt(lenP);
  C0 = std::max(C0, tol.abs);
  AccreteSelection stage1 = accrete_select(treeP, b, C0 * (1 + tol.rel), delta, tol);
  double eps = stage1.epsilon;

  // Stage 2: mean-prune |b|^2 + |Tb|^2 at threshold C/eps, C = 4 B_loc / eps.
  std::vector<double> m(std::size_t(g.interval_count()), 0.0);
  {
    std::int64_t leaf = g.cell_count() - 1;
    for (std::int64_t c = 0; c < g.cell_count(); ++c)
      m[std::size_t(leaf + c)] =
          (std::norm(b.values[std::size_t(c)]) + std::norm(Tb.values[std::size_t(c)])) *
          g.cell_width();
    for (std::int64_t id = leaf - 1; id >= 0; --id)
      m[std::size_t(id)] = m[std::size_t(2 * id + 1)] + m[std::size_t(2 * id + 2)];
  }
  double B_loc = std::max(m[P] / lenP, tol.abs);
  double threshold = 4 * B_loc / (eps * eps);

  TileSet removed_union(g);
  std::vector<IntervalId> tops;
  for (const Tree& T : stage1.removed) {
    removed_union = removed_union.set_union(T.members);
    tops.push_back(T.top);
  }
  {
    TileSet T2 = treeP.members.set_minus(removed_union);
    std::vector<char> viol(std::size_t(g.interval_count()), 0);
    for (IntervalId id : T2.ids())
      if (m[id] / length_of(g, id) >= threshold) viol[id] = 1;
    for (IntervalId id : T2.ids())
      if (viol[id] && !detail::has_qualifying_ancestor(viol, id)) tops.push_back(id);
  }

  // Sibling-free completion of the removed tops.
  std::sort(tops.begin(), tops.end());
  tops.erase(std::unique(tops.begin(), tops.end()), tops.end());
  bool changed = true;
  while (changed) {
    changed = false;
    // absorb tops below other tops
    std::vector<IntervalId> keep;
    for (IntervalId t : tops) {
      bool inside = false;
      for (IntervalId o : tops)
        if (o != t && is_ancestor_or_self(o, t)) inside = true;
      if (!inside) keep.push_back(t);
    }
    if (keep.size() != tops.size()) changed = true;
    tops = std::move(keep);
    for (std::size_t i = 0; i + 1 < tops.size(); ++i) {
      IntervalId a = tops[i], bb = tops[i + 1];
      if (a != kRootId && bb != kRootId && parent_id(a) == parent_id(bb) && a != bb) {
        tops[i] = parent_id(a);
        tops.erase(tops.begin() + std::ptrdiff_t(i) + 1);
        changed = true;
        break;
      }
    }
    std::sort(tops.begin(), tops.end());
  }
  for (IntervalId t : tops)
    if (t == P) throw Error(ErrorKind::PackingViolation, "pruning consumed the whole tree");

  PruneResult out;
  out.epsilon = eps / 2;  // the two prunings together keep an eps/2 margin
  removed_union = TileSet(g);
  double removed_lengths = 0;
  for (IntervalId t : tops) {
    Tree T = complete_tree(g, t);
    removed_union = removed_union.set_union(T.members);
    removed_lengths += length_of(g, t);
    out.removed.push_back(std::move(T));
  }
  if (removed_lengths > (1 - out.epsilon) * lenP * (1 + tol.rel))
    throw Error(ErrorKind::PackingViolation, "removed tops exceed the (1-eps) packing");
  out.measured["removed_packing"] = removed_lengths / lenP;

  TileSet T3 = treeP.members.set_minus(removed_union);
  std::vector<IntervalId> buffer_ids;
  for (IntervalId id : T3.ids()) {
    bool boundary = level_of(id) == 2 * g.M;
    if (!boundary)
      for (IntervalId ch : {left_child_id(id), right_child_id(id)})
        if (!T3.contains(ch)) boundary = true;
    if (boundary) buffer_ids.push_back(id);
  }
  out.buffer = TileSet(g, std::move(buffer_ids));
  // T1 may lose its nominal top to the buffer when a child of P was removed;
  // it is then a chain-closed set strictly below P, which the decomposition
  // handles unchanged.
  TileSet t1_set = T3.set_minus(out.buffer);
  out.t1 = Tree{P, t1_set};

  out.measured["buffer_packing"] = packing_constant(out.buffer, treeP, false);
  TileSet convex_zone = t1_set.set_union(out.buffer);
  out.measured["zone_convex"] = is_convex(convex_zone) ? 1.0 : 0.0;
  double mean_bound = 0;
  for (IntervalId id : convex_zone.ids())
    mean_bound = std::max(mean_bound, m[id] / length_of(g, id));
  out.measured["mean_bound"] = mean_bound;
  out.measured["mean_bound_threshold"] = threshold;
  {
    auto bsums = interval_integrals(b);
    double strong = std::numeric_limits<double>::infinity();
    for (IntervalId id : t1_set.ids()) {
      strong = std::min(strong, std::abs(bsums[id] / length_of(g, id)));
      if (level_of(id) < 2 * g.M)
        for (IntervalId ch : {left_child_id(id), right_child_id(id)})
          strong = std::min(strong, std::abs(bsums[ch] / length_of(g, ch)));
    }
    out.measured["t1_strong_margin"] = t1_set.empty() ? 0 : strong;
    double pseudo = std::numeric_limits<double>::infinity();
    for (IntervalId id : convex_zone.ids())
      pseudo = std::min(pseudo, std::abs(bsums[id] / length_of(g, id)));
    out.measured["zone_pseudo_margin"] = convex_zone.empty() ? 0 : pseudo;
  }

  // Stage 3: the four-term decomposition of f.  The leading coefficient is
  // [f]_P / [b]_P, which reduces to [f]_P once [b]_P = 1.
  AdaptedBasis basis(b);
  auto fsums = interval_integrals(f);
  out.mean_coefficient = (fsums[P] / lenP) / basis.safe_avg(P);

  std::vector<std::pair<IntervalId, Complex>> coeffs;
  for (IntervalId id : t1_set.ids()) {
    if (level_of(id) == 2 * g.M) continue;
    coeffs.push_back({id, basis.coefficient(fsums, id)});
  }
  out.t1_coefficients = CoefficientMap::from_sorted(g, std::move(coeffs));

  std::unordered_map<IntervalId, IntervalId> top_of_child;  // removed top -> itself
  for (const Tree& T : out.removed) top_of_child[T.top] = T.top;

  double finf = lp_norm(f, std::numeric_limits<double>::infinity());
  for (IntervalId id : out.buffer.ids()) {
    BufferTerm term;
    term.tile = id;
    if (level_of(id) < 2 * g.M) {
      IntervalId l = left_child_id(id), r = right_child_id(id);
      bool l_top = top_of_child.count(l) > 0, r_top = top_of_child.count(r) > 0;
      if (l_top || r_top) {
        IntervalId other = l_top ? r : l;
        Complex fq = fsums[id] / length_of(g, id);
        Complex bq = basis.safe_avg(id);
        Complex fo = fsums[other] / length_of(g, other);
        Complex bo = basis.safe_avg(other);
        Complex a_main = -fq / bq;
        Complex a_other = -fq / bq + fo / bo;
        IntervalId top = l_top ? l : r;
        Complex a_child = fsums[top] / length_of(g, top);
        if (l_top) {
          term.coef_left = a_main;
          term.coef_right = a_other;
          term.coef_child_left = a_child;
        } else {
          term.coef_left = a_other;
          term.coef_right = a_main;
          term.coef_child_right = a_child;
        }
        double worst = std::max({std::abs(a_main), std::abs(a_other), std::abs(a_child)});
        if (finf > 0) out.coefficient_ratio = std::max(out.coefficient_ratio, worst / finf);
      }
      // No removed child: interior boundary only happens at the finest row,
      // where the truncated model carries no coefficient.
    }
    out.buffer_terms.push_back(term);
  }

  // Reconstruction: [f]_P b + sum_T1 W_b f psi^b + removed pieces + buffers.
  DyadicFunction recon(g);
  {
    DyadicFunction base = b;
    base *= out.mean_coefficient;
    recon += base;
    for (const auto& [id, c] : out.t1_coefficients.entries()) {
      DyadicFunction term = basis.dual(id);
      term *= c;
      recon += term;
    }
    for (const Tree& T : out.removed) {
      auto [lo, hi] = cell_range(g, T.top);
      Complex favg = fsums[T.top] / length_of(g, T.top);
      DyadicFunction piece = sys.function(side, T.top);
      piece *= -favg;
      for (std::int64_t c = lo; c < hi; ++c)
        piece.values[std::size_t(c)] += f.values[std::size_t(c)];
      // piece is supported on I_T by construction
      recon += piece;
    }
    for (const BufferTerm& term : out.buffer_terms) {
      if (level_of(term.tile) == 2 * g.M) continue;
      IntervalId l = left_child_id(term.tile), r = right_child_id(term.tile);
      auto add_chi = [&](IntervalId part, Complex coef) {
        if (coef == Complex{0, 0}) return;
        auto [lo, hi] = cell_range(g, part);
        for (std::int64_t c = lo; c < hi; ++c)
          recon.values[std::size_t(c)] += coef * b.values[std::size_t(c)];
      };
      add_chi(l, term.coef_left);
      add_chi(r, term.coef_right);
      if (term.coef_child_left != Complex{0, 0}) {
        DyadicFunction child = sys.function(side, l);
        child *= term.coef_child_left;
        recon += child;
      }
      if (term.coef_child_right != Complex{0, 0}) {
        DyadicFunction child = sys.function(side, r);
        child *= term.coef_child_right;
        recon += child;
      }
    }
  }
  double fn = l2_norm(f);
  out.reconstruction_residual = fn > 0 ? l2_norm(recon - f) / fn : l2_norm(recon - f);
  return out;
}

// ---------------------------------------------------------------------------
// Semmes-style identity and the remaining lemma checks

/// Solves for T(1) through the splitting of T(b) and compares with the direct
/// computation, coefficient by coefficient (relative to their scale).
inline std::pair<DyadicFunction, double> semmes_t1(const PerfectDyadicKernel& K,
                                                   const DyadicFunction& b, double c_acc = 0.5) {
  const GridConfig& g = K.grid();
  auto margin = accretivity(b, TileSet::all_with_children(g), Accretivity::Pseudo, c_acc);
  if (!margin.verdict)
    throw Error(ErrorKind::AccretivityFail, "b is not pseudo-accretive at the requested margin");

  DyadicFunction Tb = apply(K, b);
  DyadicFunction inner = Tb - multiplier_apply(diagonal_symbol(K), b) - pi_hh(t_star_one(K), b);
  CoefficientMap w = wavelet_transform(inner);
  auto bsums = interval_integrals(b);
  std::vector<std::pair<IntervalId, Complex>> entries;
  entries.reserve(w.size());
  for (const auto& [id, c] : w.entries()) {
    Complex avg = bsums[id] / length_of(g, id);
    entries.push_back({id, c / avg});
  }
  DyadicFunction t1_form = reconstruct(CoefficientMap::from_sorted(g, std::move(entries)));

  CoefficientMap direct = wavelet_transform(t_one(K));
  CoefficientMap solved = wavelet_transform(t1_form);
  double worst = 0, scale = 0;
  for (const auto& [id, c] : direct.entries()) {
    worst = std::max(worst, std::abs(c - solved.at(id)));
    scale = std::max(scale, std::abs(c));
  }
  for (const auto& [id, c] : solved.entries()) scale = std::max(scale, std::abs(c));
  return {t1_form, scale > 0 ? worst / scale : worst};
}

/// ||f||_{L^2(I_P)} over (||f - [f]_P||_{L^2(I_P)} + |I_P|^{-1/2} |<f, b^1_P>|).
inline double split_lemma_check(IntervalId P, const DyadicFunction& f,
                                const AccretiveSystem& sys) {
  const GridConfig& g = f.grid;
  auto [lo, hi] = cell_range(g, P);
  double len = length_of(g, P);
  Complex mean{0, 0};
  for (std::int64_t c = lo; c < hi; ++c) mean += f.values[std::size_t(c)];
  mean /= double(hi - lo);
  double n2 = 0, osc = 0;
  for (std::int64_t c = lo; c < hi; ++c) {
    n2 += std::norm(f.values[std::size_t(c)]) * g.cell_width();
    osc += std::norm(f.values[std::size_t(c)] - mean) * g.cell_width();
  }
  DyadicFunction b1 = sys.function(TbSide::B1, P);
  Complex pair{0, 0};
  for (std::int64_t c = lo; c < hi; ++c)
    pair += f.values[std::size_t(c)] * b1.values[std::size_t(c)];
  pair *= g.cell_width();
  double denom = std::sqrt(osc) + std::abs(pair) / std::sqrt(len);
  return denom > 0 ? std::sqrt(n2) / denom : 0.0;
}

struct TruncReport {
  double k_hyp = 0;
  double ratio = 0;  // int_{2 I_Q} |T(b^1_P chi_Q)|^2 / (K_hyp |I_Q|)
};

/// Truncation property of the testing functions.
inline TruncReport trunc_check(const PerfectDyadicKernel& K, IntervalId P, IntervalId Q,
                               const AccretiveSystem& sys, TbSide side, Tolerances tol = {}) {
  const GridConfig& g = K.grid();
  if (!is_ancestor_or_self(P, Q))
    throw Error(ErrorKind::ParseError, "trunc_check needs Q <=' P");
  DyadicFunction b = sys.function(side, P);
  DyadicFunction Tb = side == TbSide::B1 ? apply(K, b) : apply_adjoint(K, b);
  auto [qlo, qhi] = cell_range(g, Q);
  double lenQ = length_of(g, Q);
  TruncReport rep;
  for (std::int64_t c = qlo; c < qhi; ++c)
    rep.k_hyp += (std::norm(b.values[std::size_t(c)]) + std::norm(Tb.values[std::size_t(c)])) *
                 g.cell_width();
  rep.k_hyp /= lenQ;

  DyadicFunction truncated(g);
  for (std::int64_t c = qlo; c < qhi; ++c)
    truncated.values[std::size_t(c)] = b.values[std::size_t(c)];
  DyadicFunction Ttr = side == TbSide::B1 ? apply(K, truncated) : apply_adjoint(K, truncated);
  IntervalId outer = Q == kRootId ? Q : parent_id(Q);
  auto [olo, ohi] = cell_range(g, outer);
  double num = 0;
  for (std::int64_t c = olo; c < ohi; ++c)
    num += std::norm(Ttr.values[std::size_t(c)]) * g.cell_width();
  double denom = std::max(rep.k_hyp, tol.abs) * lenQ;
  rep.ratio = num / denom;
  return rep;
}

struct OrthoReport {
  double bessel_ratio = 0;    // (sum |W_b f|^2)^(1/2) / ||f||_2
  double variant_ratio = 0;   // with b' f and the mean* normalizer
  double b_mean_bound = 0;    // || |b|^2 ||_{mean*(T)}
};

inline OrthoReport ortho_check(const Tree& T, const DyadicFunction& b, const DyadicFunction& f,
                               const DyadicFunction& bprime, double c_acc = 0.5) {
  const GridConfig& g = b.grid;
  auto margin = accretivity(b, T.members, Accretivity::Pseudo, c_acc);
  if (!margin.verdict)
    throw Error(ErrorKind::AccretivityFail, "b is not pseudo-accretive on the tree");

  OrthoReport rep;
  DyadicFunction b2(g), bp2(g);
  for (std::size_t i = 0; i < b.values.size(); ++i) {
    b2.values[i] = std::norm(b.values[i]);
    bp2.values[i] = std::norm(bprime.values[i]);
  }
  rep.b_mean_bound = maximal_mean(b2, T.members);
  double bp_bound = maximal_mean(bp2, T.members);

  AdaptedBasis basis(b);
  auto fsums = interval_integrals(f);
  DyadicFunction bpf = pointwise_product(bprime, f);
  auto bpfsums = interval_integrals(bpf);
  double s1 = 0, s2 = 0;
  for (IntervalId id : T.members.ids()) {
    if (level_of(id) == 2 * g.M) continue;
    s1 += std::norm(basis.coefficient(fsums, id));
    s2 += std::norm(basis.coefficient(bpfsums, id));
  }
  double fn = l2_norm(f);
  rep.bessel_ratio = fn > 0 ? std::sqrt(s1) / fn : 0.0;
  double denom = fn * std::sqrt(bp_bound);
  rep.variant_ratio = denom > 0 ? std::sqrt(s2) / denom : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Local and global T(b) certificates

enum class TbMode { TwoSided, OneSided };

struct TbConfig {
  double c_acc = 0.5;
  int sample_tops = 12;
  std::uint64_t seed = 1;
};

/// Measured-constant pipeline for the local T(b) theorem: validates the
/// system, measures the four-term testing bound, runs the pruning on sampled
/// tops with chi_{I_P}, evaluates the pointwise coefficient bound on
/// T1 cap T2, and records the adapted Carleson quantity next to ||T||_{2->2}.
inline CertificateReport local_tb_certificate(const PerfectDyadicKernel& K,
                                              const AccretiveSystem& sys, TbMode mode,
                                              TbConfig cfg = {}, Tolerances tol = {}) {
  const GridConfig& g = K.grid();
  sys.validate(tol);

  CertificateReport rep;
  rep.constants["norm_2"] = operator_norm(K);

  // Testing-function L2 budget over all tiles.
  double B_sys = 0;
  for (std::int64_t id = 0; id < g.interval_count(); ++id) {
    DyadicFunction b1 = sys.function(TbSide::B1, IntervalId(id));
    DyadicFunction tb1 = apply(K, b1);
    double total = 0;
    auto [lo, hi] = cell_range(g, IntervalId(id));
    for (std::int64_t c = lo; c < hi; ++c)
      total += (std::norm(b1.values[std::size_t(c)]) + std::norm(tb1.values[std::size_t(c)])) *
               g.cell_width();
    if (mode == TbMode::TwoSided) {
      DyadicFunction b2 = sys.function(TbSide::B2, IntervalId(id));
      DyadicFunction tb2 = apply_adjoint(K, b2);
      for (std::int64_t c = lo; c < hi; ++c)
        total += (std::norm(b2.values[std::size_t(c)]) + std::norm(tb2.values[std::size_t(c)])) *
                 g.cell_width();
    }
    B_sys = std::max(B_sys, total / length_of(g, IntervalId(id)));
  }
  rep.constants["B_sys"] = B_sys;

  // Shared T(1)-comparable data.
  {
    MultiplierSymbol diag = diagonal_symbol(K);
    double wbp = 0;
    for (const auto& [id, c] : diag.entries()) wbp = std::max(wbp, std::abs(c));
    rep.constants["wbp"] = wbp;
    rep.constants["bmo_T1"] = bmo_norm(t_one(K));
    rep.constants["bmo_Tstar1"] = bmo_norm(t_star_one(K));
  }

  // Sampled tops: the root plus a seeded selection.
  std::vector<IntervalId> sample{kRootId};
  {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_int_distribution<std::int64_t> pick(0, g.cell_count() - 2);
    while (std::int64_t(sample.size()) < std::min<std::int64_t>(cfg.sample_tops,
                                                                g.cell_count() - 1))
      sample.push_back(IntervalId(pick(rng)));
    std::sort(sample.begin(), sample.end());
    sample.erase(std::unique(sample.begin(), sample.end()), sample.end());
  }

  double worst_recon = 0, worst_tcarl = 0, worst_pointwise = 0, worst_eps = 1;
  double worst_dual_targ = 0;
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  for (IntervalId P : sample) {
    DyadicFunction chiP = indicator(g, interval_of(g, P));
    PruneResult prune = subtree_prune(K, P, TbSide::B1, sys, chiP, tol);
    worst_recon = std::max(worst_recon, prune.reconstruction_residual);
    worst_eps = std::min(worst_eps, prune.epsilon);

    // Dual testing quantity |int_{I_P} T f| / (|I_P| ||f||_inf) at f = chi.
    {
      DyadicFunction Tchi = apply(K, chiP);
      auto [lo, hi] = cell_range(g, P);
      Complex s{0, 0};
      for (std::int64_t c = lo; c < hi; ++c) s += Tchi.values[std::size_t(c)];
      worst_dual_targ = std::max(worst_dual_targ,
                                 std::abs(s) * g.cell_width() / length_of(g, P));
    }

    // Adapted Carleson quantity: || |<T* chi_{I_P}, psi^{b1}_Q>|^2 ||_{size(T1)}.
    DyadicFunction b1 = sys.function(TbSide::B1, P);
    AdaptedBasis basis(b1);
    DyadicFunction Tstar_chi = apply_adjoint(K, chiP);
    double tcarl = 0;
    for (IntervalId Q : prune.t1.members.ids()) {
      if (level_of(Q) == 2 * g.M) continue;
      tcarl += std::norm(pairing(Tstar_chi, basis.dual(Q)));
    }
    rep.constants["tcarl_P" + std::to_string(P)] = tcarl / length_of(g, P);
    worst_tcarl = std::max(worst_tcarl, tcarl / length_of(g, P));

    if (mode == TbMode::TwoSided) {
      // A sampled descendant P' <=' P for the pointwise coefficient bound.
      Tree treeP = complete_tree(g, P);
      std::vector<IntervalId> inner;
      for (IntervalId q : treeP.members.ids())
        if (level_of(q) < 2 * g.M) inner.push_back(q);
      std::uniform_int_distribution<std::size_t> pick(0, inner.size() - 1);
      IntervalId Pp = inner[pick(rng)];
      DyadicFunction chiPp = indicator(g, interval_of(g, Pp));
      PruneResult prune2 = subtree_prune(K, Pp, TbSide::B2, sys, chiPp, tol);

      DyadicFunction b2 = sys.function(TbSide::B2, Pp);
      DyadicFunction Tstar_b2 = apply_adjoint(K, b2);
      DyadicFunction Tb1 = apply(K, b1);
      CoefficientMap haar_b2 = wavelet_transform(b2);
      auto s1 = interval_integrals(pointwise_product(b1, Tstar_b2));
      auto s2 = interval_integrals(pointwise_product(b2, Tb1));
      auto s3 = interval_integrals(Tb1);
      TileSet common = prune.t1.members.set_intersect(prune2.t1.members);
      for (IntervalId Q : common.ids()) {
        if (level_of(Q) == 2 * g.M) continue;
        double lhs = std::abs(pairing(Tstar_chi, pointwise_product(b1, basis.wavelet(Q))));
        double rhs = std::abs(haar_b2.at(Q)) + std::abs(basis.coefficient(s1, Q)) +
                     std::abs(basis.coefficient(s2, Q)) + std::abs(basis.coefficient(s3, Q));
        if (rhs > tol.abs)
          worst_pointwise = std::max(worst_pointwise, lhs / rhs);
      }
    }
  }
  rep.constants["fform_residual"] = worst_recon;
  rep.constants["tcarl_max"] = worst_tcarl;
  rep.constants["dual_targ_max"] = worst_dual_targ;
  rep.constants["epsilon_min"] = worst_eps;
  if (mode == TbMode::TwoSided) rep.constants["pointwise_ratio"] = worst_pointwise;

  if (mode == TbMode::OneSided) {
    // One-sided route: off the small-average trees of each sampled complete
    // tree, the T(1) coefficients carry at most a bounded energy density.
    DyadicFunction T1fun = t_one(K);
    CoefficientMap wT1 = wavelet_transform(T1fun);
    double worst_targ = 0;
    for (IntervalId P : sample) {
      Tree treeP = complete_tree(g, P);
      DyadicFunction bP = sys.function(TbSide::B1, P);
      double delta = std::abs(average(bP, interval_of(g, P)));
      if (delta <= tol.abs) continue;
      double C0 = std::max(l2_norm(project_tree(bP, treeP)) / std::sqrt(length_of(g, P)),
                           tol.abs);
      AccreteSelection sel = accrete_select(treeP, bP, C0 * (1 + tol.rel), delta, tol);
      TileSet removed(g);
      for (const Tree& T : sel.removed) removed = removed.set_union(T.members);
      double sum = 0;
      for (IntervalId Q : treeP.members.set_minus(removed).ids())
        sum += std::norm(wT1.at(Q));
      worst_targ = std::max(worst_targ, sum / length_of(g, P));
    }
    rep.constants["weak_targ_max"] = worst_targ;
  }

  rep.verdicts["system_normalized"] = true;  // validate() would have thrown
  rep.verdicts["fform_exact"] = worst_recon <= tol.rel * 100 + tol.abs;
  rep.verdicts["constants_finite"] = std::isfinite(B_sys) && std::isfinite(worst_tcarl) &&
                                     std::isfinite(worst_pointwise);
  return rep;
}

/// Per-tile system from a para-accretive function: for each tile P, pick the
/// tile itself when |[b]_P| clears the margin, otherwise the comparable-scale
/// subtile Q <=' P (|I_Q| >= theta |I_P|) with the largest average, and take
/// b_P = b chi_{I_Q} |I_P| / (|I_Q| [b]_Q), which has mean exactly one on I_P.
inline AccretiveSystem build_tb_system(const DyadicFunction& b1, const DyadicFunction& b2,
                                       double theta, double c_acc = 0.5) {
  const GridConfig& g = b1.grid;
  AccretiveSystem sys(g);
  auto build = [&](const DyadicFunction& bb, TbSide side) {
    auto sums = interval_integrals(bb);
    auto avg_abs = [&](std::int64_t q) {
      return std::abs(sums[std::size_t(q)] / length_of(g, IntervalId(q)));
    };
    for (std::int64_t id = 0; id < g.interval_count(); ++id) {
      double len = length_of(g, IntervalId(id));
      IntervalId chosen = IntervalId(id);
      if (avg_abs(id) < c_acc) {
        double best_avg = avg_abs(id);
        std::int64_t lo = id, hi = id;
        for (int lvl = level_of(IntervalId(id)); lvl <= 2 * g.M; ++lvl) {
          if (length_of(g, IntervalId(lo)) < theta * len - 1e-15) break;
          for (std::int64_t q = lo; q <= hi; ++q)
            if (avg_abs(q) > best_avg) {
              best_avg = avg_abs(q);
              chosen = IntervalId(q);
            }
          lo = 2 * lo + 1;
          hi = 2 * hi + 2;
        }
        if (best_avg < c_acc)
          throw Error(ErrorKind::ParaAccretivityFail, "no comparable subtile clears the margin");
      }
      Complex avgQ = sums[chosen] / length_of(g, chosen);
      auto [qlo, qhi] = cell_range(g, chosen);
      auto [plo, phi_] = cell_range(g, IntervalId(id));
      Complex factor = (len / length_of(g, chosen)) / avgQ;
      std::vector<Complex> cells(std::size_t(phi_ - plo), Complex{0, 0});
      for (std::int64_t c = qlo; c < qhi; ++c)
        cells[std::size_t(c - plo)] = bb.values[std::size_t(c)] * factor;
      sys.set(side, IntervalId(id), std::move(cells));
    }
  };
  build(b1, TbSide::B1);
  build(b2, TbSide::B2);
  return sys;
}

/// Global T(b): constructs the per-tile system from para-accretive b1, b2,
/// verifies it, measures the modified weak boundedness constant, and
/// delegates to the local certificate.
inline CertificateReport global_tb_certificate(const PerfectDyadicKernel& K,
                                               const DyadicFunction& b1,
                                               const DyadicFunction& b2, double theta,
                                               TbConfig cfg = {}, Tolerances tol = {}) {
  const GridConfig& g = K.grid();
  auto p1 = accretivity(b1, TileSet::all(g), Accretivity::Para, cfg.c_acc, theta);
  auto p2 = accretivity(b2, TileSet::all(g), Accretivity::Para, cfg.c_acc, theta);
  if (!p1.verdict || !p2.verdict)
    throw Error(ErrorKind::ParaAccretivityFail, "para-accretivity margin below threshold");

  AccretiveSystem sys = build_tb_system(b1, b2, theta, cfg.c_acc);

  CertificateReport rep = local_tb_certificate(K, sys, TbMode::TwoSided, cfg, tol);
  rep.constants["para_margin_b1"] = p1.margin;
  rep.constants["para_margin_b2"] = p2.margin;
  rep.constants["bmo_b1"] = bmo_norm(b1);
  rep.constants["bmo_b2"] = bmo_norm(b2);
  rep.constants["bmo_Tb1"] = bmo_norm(apply(K, b1));
  rep.constants["bmo_Tstar_b2"] = bmo_norm(apply_adjoint(K, b2));

  // Modified weak boundedness constant over dyadic triples I, J <= K with
  // comparable lengths (|I|, |J| >= theta |K|).
  double mwbp = 0;
  for (std::int64_t kid = 0; kid < g.interval_count(); ++kid) {
    double lenK = length_of(g, IntervalId(kid));
    std::int64_t lo = kid, hi = kid;
    std::vector<IntervalId> subs;
    for (int lvl = level_of(IntervalId(kid)); lvl <= 2 * g.M; ++lvl) {
      if (length_of(g, IntervalId(lo)) < theta * lenK - 1e-15) break;
      for (std::int64_t q = lo; q <= hi; ++q) subs.push_back(IntervalId(q));
      lo = 2 * lo + 1;
      hi = 2 * hi + 2;
    }
    for (IntervalId I : subs) {
      DyadicFunction bI(g);
      auto [ilo, ihi] = cell_range(g, I);
      for (std::int64_t c = ilo; c < ihi; ++c) bI.values[std::size_t(c)] = b1.values[std::size_t(c)];
      DyadicFunction TbI = apply(K, bI);
      for (IntervalId J : subs) {
        auto [jlo, jhi] = cell_range(g, J);
        Complex val{0, 0};
        for (std::int64_t c = jlo; c < jhi; ++c)
          val += TbI.values[std::size_t(c)] * b2.values[std::size_t(c)];
        mwbp = std::max(mwbp, std::abs(val * g.cell_width()) / lenK);
      }
    }
  }
  rep.constants["mwbp"] = mwbp;
  return rep;
}

}  // namespace dhap
