// Acceptance runner: executes the eight release criteria at their pinned
// scales, trial counts, and tolerances, printing one PASS/FAIL line per
// criterion.  Exit code is nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "dhap/random.hpp"
#include "dhap/serialize.hpp"
#include "dhap/suites.hpp"
#include "dhap/svg.hpp"

using namespace dhap;

namespace {

struct Criterion {
  std::string name;
  bool pass = true;
  std::string detail;
};

double now_seconds() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// --- test-side oracles (independent of the library's fast paths) -----------

double brute_maximal_size(const WeightMap& a, const TileSet& S, std::size_t limit) {
  struct Rec {
    const TileSet& S;
    const WeightMap& a;
    std::size_t limit;
    void sums(IntervalId node, std::vector<double>& out) const {
      const GridConfig& g = S.grid();
      std::vector<double> acc{a.at(node)};
      if (level_of(node) < 2 * g.M)
        for (IntervalId c : {left_child_id(node), right_child_id(node)}) {
          if (!S.contains(c)) continue;
          std::vector<double> child;
          sums(c, child);
          if (acc.size() * (child.size() + 1) > limit)
            throw std::overflow_error("enumeration too large");
          std::vector<double> next;
          next.reserve(acc.size() * (child.size() + 1));
          for (double s : acc) {
            next.push_back(s);
            for (double cs : child) next.push_back(s + cs);
          }
          acc = std::move(next);
        }
      out = std::move(acc);
    }
  } rec{S, a, limit};
  double best = 0;
  for (IntervalId top : S.ids()) {
    std::vector<double> sums;
    rec.sums(top, sums);
    for (double s : sums) best = std::max(best, s / length_of(S.grid(), top));
  }
  return best;
}

// Dense kernel matrix built cell by cell from the sibling constants.
std::vector<std::vector<Complex>> dense_matrix(const PerfectDyadicKernel& K) {
  const GridConfig& g = K.grid();
  std::int64_t n = g.cell_count(), leaf = n - 1;
  std::vector<std::vector<Complex>> A(std::size_t(n),
                                      std::vector<Complex>(std::size_t(n), Complex{0, 0}));
  for (std::int64_t x = 0; x < n; ++x)
    for (std::int64_t y = 0; y < n; ++y) {
      if (x == y) continue;
      IntervalId a = IntervalId(leaf + x), b = IntervalId(leaf + y);
      while (a != b) {
        if (level_of(a) >= level_of(b)) a = parent_id(a);
        else b = parent_id(b);
      }
      auto [lo, hi] = cell_range(g, a);
      A[std::size_t(x)][std::size_t(y)] =
          ((x < (lo + hi) / 2) ? K.lr(a) : K.rl(a)) * g.cell_width();
    }
  return A;
}

DyadicFunction dense_apply(const std::vector<std::vector<Complex>>& A, const DyadicFunction& f) {
  DyadicFunction out(f.grid);
  for (std::size_t x = 0; x < A.size(); ++x) {
    Complex s{0, 0};
    for (std::size_t y = 0; y < A.size(); ++y) s += A[x][y] * f.values[y];
    out.values[x] = s;
  }
  return out;
}

// ---------------------------------------------------------------------------

Criterion criterion1_exact_identities() {
  Criterion c{"1 exact-identity suite (M=6, 200 trials, 1e-9)"};
  double t0 = now_seconds();
  GridConfig g(6);
  const int trials = 200;
  const double tol = 1e-9;
  double worst = 0;
  std::uint64_t master = 0xC1;

  for (int t = 0; t < trials && c.pass; ++t) {
    std::uint64_t s = mix_seed(master, std::uint64_t(t));
    std::mt19937_64 rng(s);

    // Parseval
    DyadicFunction f0 = gen_mean_zero_function(g, s);
    {
      CoefficientMap w = wavelet_transform(f0);
      double sum = 0;
      for (const auto& [id, v] : w.entries()) sum += std::norm(v);
      double n2 = l2_norm(f0);
      double rel = std::abs(sum - n2 * n2) / std::max(n2 * n2, 1e-12);
      worst = std::max(worst, rel);
    }

    // product decomposition + symmetries + multiplier identities
    DyadicFunction g0 = gen_mean_zero_function(g, s ^ 0x10);
    worst = std::max(worst, product_identity_residual(f0, g0));
    {
      DyadicFunction h = gen_function(g, s ^ 0x20);
      auto rep = permute_check(f0, g0, h);
      worst = std::max({worst, rep.max_discrepancy, rep.hh_mult_discrepancy,
                        rep.tril_discrepancy});
      DyadicFunction a = pi_hl(f0, h);
      DyadicFunction b = multiplier_apply(average_symbol(h), f0);
      worst = std::max(worst, l2_norm(a - b) / std::max(1.0, l2_norm(a)));
    }

    // splitting and Semmes identities
    PerfectDyadicKernel K = gen_kernel(g, s ^ 0x30);
    worst = std::max(worst, splitting_residual(K, gen_function(g, s ^ 0x40)));
    {
      DyadicFunction b = gen_accretive(g, s ^ 0x50);
      auto [t1f, res] = semmes_t1(K, b);
      worst = std::max(worst, res);
    }

    // adapted basis: weighted mean zero, the normalizer formula, sampled
    // biorthogonality, and the coefficient round trip
    {
      DyadicFunction b = gen_accretive(g, s ^ 0x60);
      AdaptedBasis basis(b);
      std::uniform_int_distribution<std::int64_t> pick(0, g.cell_count() - 2);
      std::vector<IntervalId> sample;
      for (int i = 0; i < 12; ++i) sample.push_back(IntervalId(pick(rng)));
      for (IntervalId P : sample) {
        DyadicFunction phi = basis.wavelet(P);
        worst = std::max(worst, std::abs(integral(pointwise_product(b, phi))));
        Complex direct = pairing(pointwise_product(b, phi), phi);
        worst = std::max(worst, std::abs(direct - basis.pairing_norm(P)));
        DyadicFunction psi = basis.dual(P);
        for (IntervalId Q : sample) {
          Complex gram = pairing(psi, basis.wavelet(Q));
          Complex expect = P == Q ? Complex{1, 0} : Complex{0, 0};
          worst = std::max(worst, std::abs(gram - expect));
        }
      }
    }

    // four-term decomposition on a random tile
    {
      AccretiveSystem sys = gen_accretive_system(g, s ^ 0x70);
      PerfectDyadicKernel K6 = gen_kernel(g, s ^ 0x80);
      std::mt19937_64 rng6(s ^ 0x90);
      std::uniform_int_distribution<std::int64_t> pick(0, g.cell_count() - 2);
      IntervalId P = IntervalId(pick(rng6));
      auto [lo, hi] = cell_range(g, P);
      DyadicFunction f(g);
      std::normal_distribution<double> nd(0, 1);
      for (std::int64_t cell = lo; cell < hi; ++cell)
        f.values[std::size_t(cell)] = Complex{nd(rng6), nd(rng6)};
      PruneResult res = subtree_prune(K6, P, TbSide::B1, sys, f);
      worst = std::max(worst, res.reconstruction_residual);
    }

    if (worst > tol) {
      c.pass = false;
      c.detail = "residual " + fmt(worst) + " at seed " + std::to_string(s);
    }
  }
  double elapsed = now_seconds() - t0;
  if (elapsed >= 60) {
    c.pass = false;
    c.detail += " runtime " + fmt(elapsed) + " s >= 60 s";
  }
  if (c.pass) c.detail = "max residual " + fmt(worst) + ", " + fmt(elapsed) + " s";
  return c;
}

Criterion criterion2_brute_force_oracles() {
  Criterion c{"2 brute-force oracle equivalence (M<=3, 1e-12)"};
  double worst = 0;
  std::uint64_t master = 0xC2;

  // size* against full enumeration of convex trees
  for (int M : {1, 2}) {
    GridConfig g(M);
    TileSet S = TileSet::all(g);
    for (int t = 0; t < 10; ++t) {
      WeightMap a = gen_weights(g, mix_seed(master, std::uint64_t(M * 100 + t)), 0.8);
      worst = std::max(worst,
                       std::abs(maximal_size(a, S) - brute_maximal_size(a, S, 2'000'000)));
    }
  }
  {
    GridConfig g(3);
    for (int t = 0; t < 40; ++t) {
      std::uint64_t s = mix_seed(master, 1000 + std::uint64_t(t));
      std::mt19937_64 rng(s);
      std::uniform_real_distribution<double> u(0, 1);
      std::vector<IntervalId> ids;
      for (std::int64_t id = 0; id < g.interval_count(); ++id)
        if (u(rng) < 0.25) ids.push_back(IntervalId(id));
      TileSet S(g, std::move(ids));
      if (S.empty()) continue;
      WeightMap a = gen_weights(g, s, 0.9);
      worst = std::max(worst,
                       std::abs(maximal_size(a, S) - brute_maximal_size(a, S, 2'000'000)));
    }
  }

  // kernel operations against the dense cell-by-cell matrix
  for (int M : {1, 2, 3}) {
    GridConfig g(M);
    for (int t = 0; t < 8; ++t) {
      std::uint64_t s = mix_seed(master, 2000 + std::uint64_t(M * 100 + t));
      PerfectDyadicKernel K = gen_kernel(g, s);
      auto A = dense_matrix(K);
      DyadicFunction f = gen_function(g, s ^ 0x1);
      DyadicFunction fast = apply(K, f), slow = dense_apply(A, f);
      for (std::size_t i = 0; i < fast.values.size(); ++i)
        worst = std::max(worst, std::abs(fast.values[i] - slow.values[i]));
      // adjoint: transpose
      auto At = A;
      for (std::size_t x = 0; x < A.size(); ++x)
        for (std::size_t y = 0; y < A.size(); ++y) At[x][y] = A[y][x];
      DyadicFunction fadj = apply_adjoint(K, f), sadj = dense_apply(At, f);
      for (std::size_t i = 0; i < fadj.values.size(); ++i)
        worst = std::max(worst, std::abs(fadj.values[i] - sadj.values[i]));
      DyadicFunction one = constant_function(g, Complex{1, 0});
      DyadicFunction t1f = t_one(K), t1s = dense_apply(A, one);
      for (std::size_t i = 0; i < t1f.values.size(); ++i)
        worst = std::max(worst, std::abs(t1f.values[i] - t1s.values[i]));
      MultiplierSymbol diag = diagonal_symbol(K);
      for (const auto& [id, val] : diag.entries()) {
        DyadicFunction phi = haar(g, lacunary(interval_of(g, id)));
        worst = std::max(worst, std::abs(val - pairing(dense_apply(A, phi), phi)));
      }
    }
  }

  // weak Lp against the threshold scan
  {
    GridConfig g(3);
    for (int t = 0; t < 20; ++t) {
      DyadicFunction f = gen_function(g, mix_seed(master, 3000 + std::uint64_t(t)));
      for (double p : {0.5, 1.5, 2.0}) {
        double brute = 0;
        for (auto v : f.values) {
          double lam = std::abs(v);
          if (lam == 0) continue;
          std::int64_t count = 0;
          for (auto w : f.values)
            if (std::abs(w) >= lam) ++count;
          brute = std::max(brute, lam * std::pow(double(count) * f.cell_width(), 1.0 / p));
        }
        worst = std::max(worst, std::abs(weak_lp_norm(f, p) - brute));
      }
    }
  }

  c.pass = worst <= 1e-12;
  c.detail = "max deviation " + fmt(worst);
  return c;
}

Criterion criterion3_stopping_time() {
  Criterion c{"3 stopping-time postconditions (M<=5, 200 trials)"};
  std::uint64_t master = 0xC3;
  int violations = 0;
  const int trials = 200;
  std::string first_violation;

  auto fail = [&](const std::string& what, std::uint64_t s) {
    ++violations;
    if (first_violation.empty()) first_violation = what + " seed " + std::to_string(s);
  };

  // tree_select / mean_select
  for (int t = 0; t < trials; ++t) {
    int M = 3 + int(t % 3);
    GridConfig g(M);
    TileSet all = TileSet::all(g);
    std::uint64_t s = mix_seed(master, std::uint64_t(t));
    WeightMap a = gen_weights(g, s, 0.6);
    double ms = maximal_size(a, all);
    if (ms > 0) {
      int n = int(std::ceil(std::log2(ms)));
      while (std::ldexp(1.0, n) < ms) ++n;
      Selection sel = tree_select(all, a, n);
      TileSet seen = sel.remainder;
      std::size_t total = sel.remainder.size();
      for (const Tree& T : sel.trees) {
        seen = seen.set_union(T.members);
        total += T.members.size();
        double size = tree_size(a, T);
        if (size < std::ldexp(1.0, n - 1) * (1 - 1e-9) ||
            size > std::ldexp(1.0, n) * (1 + 1e-9))
          fail("tree_select med-size", s);
      }
      if (!(seen == all) || total != all.size()) fail("tree_select partition", s);
      if (maximal_size(a, sel.remainder) > std::ldexp(1.0, n - 1) * (1 + 1e-9))
        fail("tree_select remainder", s);
    }

    DyadicFunction f = gen_function(g, s ^ 0x101);
    double mm = maximal_mean(f, all);
    if (mm > 0) {
      int n = int(std::ceil(std::log2(mm)));
      while (std::ldexp(1.0, n) < mm) ++n;
      Selection sel = mean_select(all, f, n);
      TileSet seen = sel.remainder;
      std::size_t total = sel.remainder.size();
      for (const Tree& T : sel.trees) {
        seen = seen.set_union(T.members);
        total += T.members.size();
        double m = tile_mean(f, T.top);
        if (m < std::ldexp(1.0, n - 1) * (1 - 1e-9) || m > std::ldexp(1.0, n) * (1 + 1e-9))
          fail("mean_select top band", s);
      }
      if (!(seen == all) || total != all.size()) fail("mean_select partition", s);
      if (maximal_mean(f, sel.remainder) > std::ldexp(1.0, n - 1) * (1 + 1e-9))
        fail("mean_select remainder", s);
      if (sel.measured.at("cheb_ratio") > 4 + 1e-9) fail("mean_select width bound", s);
    }
  }

  // tree_slice both modes + convexify
  for (int t = 0; t < trials; ++t) {
    int M = 3 + int(t % 3);
    GridConfig g(M);
    std::uint64_t s = mix_seed(master, 10'000 + std::uint64_t(t));
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<IntervalId> ids;
    for (std::int64_t id = 0; id < g.interval_count(); ++id)
      if (u(rng) < 0.7) ids.push_back(IntervalId(id));
    TileSet base(g, std::move(ids));
    if (base.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, base.size() - 1);
    IntervalId top = base.ids()[pick(rng)];
    std::vector<IntervalId> members{top};
    for (std::size_t i = 0; i < members.size(); ++i) {
      IntervalId id = members[i];
      if (level_of(id) == 2 * g.M) continue;
      for (IntervalId ch : {left_child_id(id), right_child_id(id)})
        if (base.contains(ch)) members.push_back(ch);
    }
    Tree T0{top, TileSet(g, std::move(members))};
    WeightMap a = restrict_weights(gen_weights(g, s, 0.7), T0.members);
    double C0 = maximal_size(a, T0.members);
    if (C0 == 0) continue;
    double delta = C0 * (0.1 + 0.8 * u(rng));
    for (auto alg : {SliceAlgorithm::Garnett, SliceAlgorithm::HeavyLight}) {
      try {
        TreeDecomposition d = tree_slice(T0, a, C0, delta, alg);
        verify_tree_slice(T0, a, C0, delta, d);
        if (alg == SliceAlgorithm::HeavyLight && d.measured.at("t2_worst_ratio") > 1 + 1e-9)
          fail("t-2 estimate", s);
      } catch (const std::exception& e) {
        fail(std::string("tree_slice: ") + e.what(), s);
      }
    }
    // convexify partition
    TileSet P = restrict_weights(gen_weights(g, s ^ 0x77, 0.3), T0.members).empty()
                    ? TileSet(g)
                    : TileSet(g);
    {
      std::vector<IntervalId> pids;
      for (IntervalId id : T0.members.ids())
        if (u(rng) < 0.3) pids.push_back(id);
      P = TileSet(g, std::move(pids));
    }
    auto parts = convexify(T0, P);
    TileSet seen(g);
    std::size_t total = 0;
    std::vector<IntervalId> tops;
    for (const Tree& part : parts) {
      if (!is_convex_tree(part)) fail("convexify convexity", s);
      seen = seen.set_union(part.members);
      total += part.members.size();
      tops.push_back(part.top);
    }
    TileSet expect = T0.members.set_minus(P);
    if (!(seen == expect) || total != expect.size()) fail("convexify partition", s);
    double alpha = packing_constant(P, T0, true);
    if (packing_constant(TileSet(g, tops), T0, true) > alpha + 1 + 1e-9)
      fail("convexify packing", s);
  }

  // the clean greedy chain: uniform 2 C0 / delta top packing
  for (int t = 0; t < trials / 4; ++t) {
    int M = 3 + int(t % 3);
    GridConfig g(M);
    std::uint64_t s = mix_seed(master, 20'000 + std::uint64_t(t));
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> u(0, 1);
    double delta = 0.2 + 0.8 * u(rng);
    std::vector<std::pair<IntervalId, double>> entries;
    std::int64_t leaf = g.cell_count() - 1;
    for (std::int64_t id = 0; id < g.interval_count(); ++id) {
      double len = length_of(g, IntervalId(id));
      entries.push_back(
          {IntervalId(id), id >= leaf ? (delta / 2) * len : u(rng) * (delta / 2) * len * 0.999});
    }
    WeightMap a = WeightMap::from_sorted(g, std::move(entries));
    double C0 = maximal_size(a, TileSet::all(g));
    auto parts = detail::greedy_partition(g, kRootId, a, delta);
    Tree root = complete_tree(g, kRootId);
    std::vector<IntervalId> tops;
    for (const Tree& T : parts) {
      tops.push_back(T.top);
      if (tree_size(a, T) < delta / 2 * (1 - 1e-9)) fail("greedy size lower bound", s);
      if (maximal_size(a, T.members) > delta * (1 + 1e-9)) fail("greedy size* bound", s);
    }
    if (packing_constant(TileSet(g, tops), root, true) > 2 * C0 / delta + 1e-9)
      fail("greedy 2C0/delta packing", s);
  }

  // accrete_select and subtree_prune
  for (int t = 0; t < trials; ++t) {
    int M = 3 + int(t % 2);
    GridConfig g(M);
    std::uint64_t s = mix_seed(master, 30'000 + std::uint64_t(t));
    Tree whole = complete_tree(g, kRootId);
    DyadicFunction b = gen_function(g, s);
    double delta = std::abs(average(b, DyadicInterval{g.M, 0}));
    if (delta >= 0.05) {
      double C0 = l2_norm(project_tree(b, whole)) / std::sqrt(whole.top_length());
      try {
        auto sel = accrete_select(whole, b, C0 * 1.001, delta);
        if (sel.removed_packing > 1 - sel.epsilon + 1e-12) fail("accrete packing", s);
      } catch (const std::exception& e) {
        fail(std::string("accrete_select: ") + e.what(), s);
      }
    }

    std::mt19937_64 rng(s ^ 0x5);
    PerfectDyadicKernel K = gen_kernel(g, s ^ 0x6);
    AccretiveSystem sys = gen_accretive_system(g, s ^ 0x7);
    std::uniform_int_distribution<std::int64_t> pick(0, g.cell_count() - 2);
    IntervalId P = IntervalId(pick(rng));
    auto [lo, hi] = cell_range(g, P);
    DyadicFunction f(g);
    std::normal_distribution<double> nd(0, 1);
    for (std::int64_t cell = lo; cell < hi; ++cell)
      f.values[std::size_t(cell)] = Complex{nd(rng), nd(rng)};
    try {
      PruneResult res = subtree_prune(K, P, TbSide::B1, sys, f);
      if (res.reconstruction_residual > 1e-9) fail("f-form reconstruction", s);
      if (res.measured.at("buffer_packing") > 2 + 1e-9) fail("buffer 2-packing", s);
      if (res.measured.at("removed_packing") > 1 - res.epsilon + 1e-9)
        fail("removed (1-eps)-packing", s);
      if (res.measured.at("mean_bound") > res.measured.at("mean_bound_threshold") * (1 + 1e-9))
        fail("mean bounds", s);
    } catch (const std::exception& e) {
      fail(std::string("subtree_prune: ") + e.what(), s);
    }
  }

  c.pass = violations == 0;
  c.detail = violations == 0 ? "zero violations"
                             : std::to_string(violations) + " violations; first: " + first_violation;
  return c;
}

Criterion criterion4_john_nirenberg() {
  Criterion c{"4 John-Nirenberg distribution (M=6, 200 trials)"};
  double t0 = now_seconds();
  GridConfig g(6);
  int violations = 0;
  for (int t = 0; t < 200; ++t) {
    DyadicFunction f = gen_real_mean_zero_function(g, mix_seed(0xC4, std::uint64_t(t)));
    auto rep = john_nirenberg_check(f, DyadicInterval{g.M, 0});
    if (!rep.all_ok) ++violations;
  }
  double elapsed = now_seconds() - t0;
  c.pass = violations == 0 && elapsed < 10;
  c.detail = std::to_string(violations) + " violations, " + fmt(elapsed) + " s";
  return c;
}

Criterion criterion5_atoms() {
  Criterion c{"5 atomic decomposition (M=5, p in {1/2,1}, 100 trials)"};
  std::uint64_t master = 0xC5;
  std::string detail;
  for (double p : {0.5, 1.0}) {
    std::map<int, double> suite_max;
    for (int M : {4, 5}) {
      GridConfig g(M);
      double worst_ratio = 0;
      for (int t = 0; t < 100; ++t) {
        std::uint64_t s = mix_seed(master, std::uint64_t(t) + std::uint64_t(M * 1000) +
                                               std::uint64_t(p * 10));
        DyadicFunction f = gen_mean_zero_function(g, s);
        AtomicDecomposition d = atomic_decompose(f, p);
        if (d.measured.at("reconstruction_residual") > 1e-9) {
          c.pass = false;
          c.detail = "reconstruction residual at seed " + std::to_string(s);
        }
        for (const auto& at : d.atoms) {
          double len = length_of(g, at.top);
          if (l2_norm(at.atom) > std::pow(len, 0.5 - 1.0 / p) * (1 + 1e-9)) {
            c.pass = false;
            c.detail = "atom norm bound at seed " + std::to_string(s);
          }
          CoefficientMap w = wavelet_transform(at.atom);
          for (const auto& [id, v] : w.entries())
            if (!is_ancestor_or_self(at.top, id) && std::abs(v) > 1e-9) {
              c.pass = false;
              c.detail = "atom W-support at seed " + std::to_string(s);
            }
        }
        worst_ratio = std::max(worst_ratio, d.measured.at("equivalence_ratio"));
      }
      if (!std::isfinite(worst_ratio)) {
        c.pass = false;
        c.detail = "equivalence ratio not finite";
      }
      suite_max[M] = worst_ratio;
    }
    double stability = suite_max[5] / std::max(suite_max[4], 1e-300);
    if (stability > 2 || stability < 0.5) {
      c.pass = false;
      c.detail = "ratio unstable between M=4 and M=5: " + fmt(stability);
    }
    detail += "p=" + fmt(p) + ": max ratio M4 " + fmt(suite_max[4]) + ", M5 " +
              fmt(suite_max[5]) + "; ";
  }
  if (c.pass) c.detail = detail;
  return c;
}

Criterion criterion6_embedding_and_paraproducts() {
  Criterion c{"6 embedding + paraproduct reports stable over M in {4,5,6}"};
  std::uint64_t master = 0xC6;
  const int trials = 60;
  std::string detail;

  std::map<int, double> embed2;
  for (double p : {1.5, 2.0, 3.0}) {
    std::map<int, double> of_m;
    for (int M : {4, 5, 6}) {
      GridConfig g(M);
      TileSet all = TileSet::all(g);
      double worst = 0;
      for (int t = 0; t < trials; ++t) {
        std::uint64_t s =
            mix_seed(master, std::uint64_t(t) + std::uint64_t(M * 1000) + std::uint64_t(p * 10));
        WeightMap a = gen_carleson_weights(g, s);
        DyadicFunction f = gen_function(g, s ^ 0x9);
        worst = std::max(worst, carleson_embed_report(all, a, f, p).ratio);
      }
      of_m[M] = worst;
      if (!std::isfinite(worst)) c.pass = false;
      if (p == 2.0) {
        embed2[M] = worst;
        if (worst > 8.0) {
          c.pass = false;
          c.detail = "p=2 embedding ratio " + fmt(worst) + " exceeds the cap 8 at M=" +
                     std::to_string(M);
        }
      }
    }
    for (int M : {5, 6}) {
      double ratio = of_m[M] / std::max(of_m[M - 1], 1e-300);
      if (ratio > 2 || ratio < 0.5) {
        c.pass = false;
        c.detail += "embed p=" + fmt(p) + " unstable M" + std::to_string(M - 1) + "->" +
                    std::to_string(M) + ": " + fmt(ratio) + "; ";
      }
    }
  }
  detail += "embed p=2 max: " + fmt(embed2[4]) + "/" + fmt(embed2[5]) + "/" + fmt(embed2[6]);

  std::map<ParaproductBound, std::string> kinds{{ParaproductBound::HlL2Linf, "hl"},
                                                {ParaproductBound::LhL2Bmo, "lh"},
                                                {ParaproductBound::HhL2Bmo, "hhL2"},
                                                {ParaproductBound::HhBmoBmo, "hhBMO"},
                                                {ParaproductBound::WeakLpLq, "weak"}};
  for (auto& [kind, label] : kinds) {
    std::map<int, double> of_m;
    for (int M : {4, 5, 6}) {
      GridConfig g(M);
      double worst = 0;
      for (int t = 0; t < trials; ++t) {
        std::uint64_t s = mix_seed(master, 50'000 + std::uint64_t(t) + std::uint64_t(M * 1000) +
                                               std::uint64_t(label.size()));
        DyadicFunction f = gen_function(g, s);
        DyadicFunction h = gen_function(g, s ^ 0xA);
        worst = std::max(worst, paraproduct_bound_report(kind, f, h, 2, 2));
      }
      of_m[M] = worst;
      if (!std::isfinite(worst)) c.pass = false;
    }
    for (int M : {5, 6}) {
      double ratio = of_m[M] / std::max(of_m[M - 1], 1e-300);
      if (ratio > 2 || ratio < 0.5) {
        c.pass = false;
        c.detail += label + " unstable M" + std::to_string(M - 1) + "->" + std::to_string(M) +
                    ": " + fmt(ratio) + "; ";
      }
    }
  }
  if (c.pass && c.detail.empty()) c.detail = detail;
  return c;
}

Criterion criterion7_certificates() {
  Criterion c{"7 T(1)/T(b) certificates (100 kernels, M=4)"};
  std::uint64_t master = 0xC7;
  GridConfig g(4);
  double worst_wbp = 0, worst_bmo = 0, worst_local = 0, worst_pointwise = 0;

  for (int t = 0; t < 100; ++t) {
    std::uint64_t s = mix_seed(master, std::uint64_t(t));
    PerfectDyadicKernel K = gen_kernel(g, s);
    auto rep = t1_certificate(K, T1Mode::Global);
    if (!rep.all_ok()) {
      c.pass = false;
      c.detail = "global converse failed at seed " + std::to_string(s);
      break;
    }
    double norm = rep.constants.at("norm_2");
    if (norm > 0) {
      worst_wbp = std::max(worst_wbp, rep.constants.at("wbp") / norm);
      worst_bmo = std::max(worst_bmo, rep.constants.at("bmo_T1") / norm);
    }
    auto local = t1_certificate(K, T1Mode::Local);
    if (!local.all_ok()) {
      c.pass = false;
      c.detail = "local converse failed at seed " + std::to_string(s);
      break;
    }
    if (norm > 0) worst_local = std::max(worst_local, local.constants.at("local_t1") / norm);
  }

  // pointwise ratio over a sampled certificate suite
  if (c.pass) {
    for (int t = 0; t < 10; ++t) {
      std::uint64_t s = mix_seed(master, 1000 + std::uint64_t(t));
      PerfectDyadicKernel K = gen_kernel(g, s);
      AccretiveSystem sys = gen_accretive_system(g, s ^ 0xB);
      auto rep = local_tb_certificate(K, sys, TbMode::TwoSided, TbConfig{0.5, 8, s});
      if (!rep.all_ok()) {
        c.pass = false;
        c.detail = "local T(b) certificate failed at seed " + std::to_string(s);
        break;
      }
      worst_pointwise = std::max(worst_pointwise, rep.constants.at("pointwise_ratio"));
    }
  }

  // constant-b system reproduces the T(1) verdicts exactly
  if (c.pass) {
    std::uint64_t s = mix_seed(master, 555);
    PerfectDyadicKernel K = gen_kernel(GridConfig(3), s);
    auto tb = local_tb_certificate(K, AccretiveSystem::constant_system(GridConfig(3)),
                                   TbMode::TwoSided);
    auto t1 = t1_certificate(K, T1Mode::Global);
    for (const char* key : {"wbp", "bmo_T1", "bmo_Tstar1", "norm_2"})
      if (std::abs(tb.constants.at(key) - t1.constants.at(key)) > 1e-12) {
        c.pass = false;
        c.detail = std::string("constant-b mismatch on ") + key;
      }
  }

  if (c.pass)
    c.detail = "wbp/norm " + fmt(worst_wbp) + ", bmoT1/norm " + fmt(worst_bmo) +
               ", local/norm " + fmt(worst_local) + ", pointwise " + fmt(worst_pointwise);
  return c;
}

Criterion criterion8_determinism_and_runtime() {
  Criterion c{"8 determinism + verify --suite all --m 4 < 5 min"};
  RunConfig cfg;
  cfg.M = 4;
  cfg.seed = 2024;
  cfg.trials = 50;  // the CLI default

  double t0 = now_seconds();
  SuiteReport a = run_suite("all", cfg);
  double elapsed = now_seconds() - t0;
  SuiteReport b = run_suite("all", cfg);

  std::string ja = to_json(a, false).dump(2);
  std::string jb = to_json(b, false).dump(2);
  if (ja != jb) {
    c.pass = false;
    c.detail = "reports are not byte-identical";
    return c;
  }
  if (!a.all_pass()) {
    c.pass = false;
    for (const auto& chk : a.checks)
      if (!chk.pass) {
        c.detail = "suite check failed: " + chk.name + " (" + chk.note + ")";
        break;
      }
    return c;
  }
  if (elapsed >= 300) {
    c.pass = false;
    c.detail = "runtime " + fmt(elapsed) + " s";
    return c;
  }

  // SVG byte-identity on a seeded decomposition
  GridConfig g(4);
  WeightMap w = gen_carleson_weights(g, 99);
  Tree root = complete_tree(g, kRootId);
  double C0 = std::max(maximal_size(w, root.members), 0.4);
  TreeDecomposition d1 = tree_slice(root, w, C0, 0.4, SliceAlgorithm::Garnett);
  TreeDecomposition d2 = tree_slice(root, w, C0, 0.4, SliceAlgorithm::Garnett);
  if (render_svg(d1) != render_svg(d2)) {
    c.pass = false;
    c.detail = "SVG bytes differ";
    return c;
  }
  c.detail = "all suites green in " + fmt(elapsed) + " s, reports and SVG byte-identical";
  return c;
}

}  // namespace

int main() {
  std::vector<Criterion> results;
  results.push_back(criterion1_exact_identities());
  results.push_back(criterion2_brute_force_oracles());
  results.push_back(criterion3_stopping_time());
  results.push_back(criterion4_john_nirenberg());
  results.push_back(criterion5_atoms());
  results.push_back(criterion6_embedding_and_paraproducts());
  results.push_back(criterion7_certificates());
  results.push_back(criterion8_determinism_and_runtime());

  bool all = true;
  for (const auto& r : results) {
    std::printf("[%s] criterion %s: %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    all = all && r.pass;
  }
  std::printf("%s\n", all ? "ACCEPTANCE: all criteria passed" : "ACCEPTANCE: FAILURES PRESENT");
  return all ? 0 : 1;
}
