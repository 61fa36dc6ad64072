#include <catch2/catch_amalgamated.hpp>

#include "dhap/random.hpp"
#include "dhap/serialize.hpp"
#include "dhap/suites.hpp"
#include "dhap/svg.hpp"
#include "test_util.hpp"

using namespace dhap;
using Catch::Approx;

TEST_CASE("JSON round trips are exact", "[harness]") {
  GridConfig g(3);
  std::uint64_t seed = 77;

  DyadicFunction f = gen_function(g, seed);
  REQUIRE(function_from_json(to_json(f)).values == f.values);

  DyadicFunction real = gen_real_mean_zero_function(g, seed);
  Json jr = to_json(real);
  REQUIRE(jr.value("real", false));
  REQUIRE(function_from_json(jr).values == real.values);

  WeightMap a = gen_weights(g, seed);
  REQUIRE(weights_from_json(to_json(a)).entries() == a.entries());

  CoefficientMap w = wavelet_transform(f);
  REQUIRE(coefficients_from_json(to_json(w)).entries() == w.entries());

  PerfectDyadicKernel K = gen_kernel(g, seed);
  PerfectDyadicKernel K2 = kernel_from_json(to_json(K));
  for (std::int64_t id = 0; id < std::int64_t(K.pair_count()); ++id) {
    REQUIRE(K.lr(IntervalId(id)) == K2.lr(IntervalId(id)));
    REQUIRE(K.rl(IntervalId(id)) == K2.rl(IntervalId(id)));
  }

  std::mt19937_64 rng(seed);
  Tree T = testutil::random_convex_tree(g, rng);
  Tree T2 = tree_from_json(to_json(T));
  REQUIRE(T2.top == T.top);
  REQUIRE(T2.members == T.members);

  AccretiveSystem sys = gen_accretive_system(GridConfig(2), seed);
  AccretiveSystem sys2 = system_from_json(to_json(sys));
  for (std::int64_t id = 0; id < GridConfig(2).interval_count(); ++id)
    REQUIRE(sys.function(TbSide::B1, IntervalId(id)).values ==
            sys2.function(TbSide::B1, IntervalId(id)).values);

  // decomposition
  WeightMap aw = gen_carleson_weights(g, seed);
  Tree root = complete_tree(g, kRootId);
  double C0 = std::max(maximal_size(aw, root.members), 0.5);
  TreeDecomposition d = tree_slice(root, aw, C0, 0.5, SliceAlgorithm::Garnett);
  TreeDecomposition d2 = decomposition_from_json(to_json(d));
  REQUIRE(d2.trees.size() == d.trees.size());
  REQUIRE(d2.exceptional == d.exceptional);
  REQUIRE(d2.measured == d.measured);

  // atoms
  AtomicDecomposition ad = atomic_decompose(gen_mean_zero_function(g, seed), 0.5);
  AtomicDecomposition ad2 = atoms_from_json(to_json(ad));
  REQUIRE(ad2.p == ad.p);
  REQUIRE(ad2.atoms.size() == ad.atoms.size());
  for (std::size_t i = 0; i < ad.atoms.size(); ++i) {
    REQUIRE(ad2.atoms[i].top == ad.atoms[i].top);
    REQUIRE(ad2.atoms[i].coefficient == ad.atoms[i].coefficient);
    REQUIRE(ad2.atoms[i].atom.values == ad.atoms[i].atom.values);
  }
  REQUIRE(ad2.measured == ad.measured);
}

TEST_CASE("kernel JSON rejects top-scale constants", "[harness]") {
  Json bad{{"M", 2},
           {"sibling_constants",
            Json::array({Json{{"k", 2}, {"j", 0}, {"lr", Json::array({1.0, 0.0})},
                              {"rl", Json::array({0.0, 0.0})}}})}};
  REQUIRE_THROWS_MATCHES(kernel_from_json(bad), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::ParseError;
                         }));
}

TEST_CASE("generators are deterministic and normalized", "[harness]") {
  GridConfig g(4);
  for (std::uint64_t seed : {1ull, 42ull, 977ull}) {
    REQUIRE(to_json(gen_function(g, seed)).dump() == to_json(gen_function(g, seed)).dump());
    REQUIRE(to_json(gen_kernel(g, seed)).dump() == to_json(gen_kernel(g, seed)).dump());

    WeightMap c = gen_carleson_weights(g, seed);
    if (!c.empty())
      REQUIRE(maximal_size(c, TileSet::all(g)) == Approx(1.0).epsilon(1e-9));

    PerfectDyadicKernel K = gen_kernel(g, seed);
    REQUIRE(kernel_admissibility(K) == Approx(1.0).epsilon(1e-9));

    DyadicFunction b = gen_accretive(g, seed);
    for (auto v : b.values) REQUIRE(v.real() >= 0.5);

    DyadicFunction mz = gen_mean_zero_function(g, seed);
    REQUIRE(std::abs(integral(mz)) < 1e-9);
  }
}

TEST_CASE("suite reports are deterministic without timing", "[harness]") {
  RunConfig cfg;
  cfg.M = 3;
  cfg.seed = 11;
  cfg.trials = 5;
  SuiteReport a = run_suite("core", cfg);
  SuiteReport b = run_suite("core", cfg);
  REQUIRE(to_json(a, false).dump() == to_json(b, false).dump());
  REQUIRE(a.all_pass());
}

TEST_CASE("every suite passes at a small scale", "[harness][suites]") {
  RunConfig cfg;
  cfg.M = 3;
  cfg.seed = 7;
  cfg.trials = 6;
  for (const std::string& name : suite_names()) {
    SuiteReport rep = run_suite(name, cfg);
    INFO(format_text(rep));
    REQUIRE(rep.all_pass());
  }
}

TEST_CASE("SVG rendering is deterministic and well-formed", "[harness]") {
  GridConfig g(2);
  TileSet S(g, {kRootId, id_of(g, DyadicInterval{1, 0}), id_of(g, DyadicInterval{0, 3})});
  std::string one = render_svg(S);
  std::string two = render_svg(S);
  REQUIRE(one == two);
  REQUIRE(one.find("<svg") != std::string::npos);
  REQUIRE(one.find("</svg>") != std::string::npos);
  // three tiles + background + one legend swatch
  std::size_t rects = 0, pos = 0;
  while ((pos = one.find("<rect", pos)) != std::string::npos) {
    ++rects;
    pos += 5;
  }
  REQUIRE(rects == 5);

  std::string flipped = render_svg(S, /*half_plane=*/true);
  REQUIRE(flipped != one);
  REQUIRE(flipped.find("Carleson") != std::string::npos);

  // empty set: axes only
  std::string empty = render_svg(TileSet(g));
  REQUIRE(empty.find("<svg") != std::string::npos);

  // Tree([0,1]) at M=1: three stacked rectangles
  GridConfig g1(1);
  std::string tree3 = render_svg(complete_tree(g1, id_of(g1, DyadicInterval{0, 0})).members);
  rects = 0;
  pos = 0;
  while ((pos = tree3.find("<rect", pos)) != std::string::npos) {
    ++rects;
    pos += 5;
  }
  REQUIRE(rects == 5);  // background + 3 tiles + 1 legend swatch
}

TEST_CASE("decomposition SVG carries labels", "[harness]") {
  GridConfig g(3);
  WeightMap a = gen_carleson_weights(g, 5);
  Tree root = complete_tree(g, kRootId);
  double C0 = std::max(maximal_size(a, root.members), 0.4);
  TreeDecomposition d = tree_slice(root, a, C0, 0.4, SliceAlgorithm::Garnett);
  std::string svg = render_svg(d);
  REQUIRE(svg.find("#4caf50") != std::string::npos);  // small trees present
  REQUIRE(render_svg(d) == svg);
}
