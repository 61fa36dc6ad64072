#include <catch2/catch_amalgamated.hpp>

#include "dhap/paraproduct.hpp"
#include "test_util.hpp"

using namespace dhap;
using Catch::Approx;

namespace {

DyadicInterval iv(int k, std::int64_t j) { return DyadicInterval{k, j}; }

DyadicFunction haar_pair_m1() {
  GridConfig g(1);
  return DyadicFunction(g, {Complex{1, 0}, Complex{1, 0}, Complex{-1, 0}, Complex{-1, 0}});
}

}  // namespace

TEST_CASE("wavelet multipliers", "[paraproduct]") {
  std::mt19937_64 rng(41);
  GridConfig g(3);

  // a == 1 acts as the identity on S_0.
  MultiplierSymbol ones(g);
  for (std::int64_t id = 0; id < g.cell_count() - 1; ++id)
    ones.set(IntervalId(id), Complex{1, 0});
  DyadicFunction f = testutil::random_mean_zero(g, rng);
  DyadicFunction mf = multiplier_apply(ones, f);
  REQUIRE(l2_norm(mf - f) < 1e-9 * l2_norm(f));

  REQUIRE(l2_norm(multiplier_apply(MultiplierSymbol(g), f)) == 0.0);

  // ||W^-1 a W f||_2 <= max|a_P| ||f||_2.
  for (int t = 0; t < 20; ++t) {
    DyadicFunction h = testutil::random_function(g, rng);
    MultiplierSymbol a(g);
    double amax = 0;
    std::normal_distribution<double> n(0, 1);
    for (std::int64_t id = 0; id < g.cell_count() - 1; ++id) {
      Complex v{n(rng), n(rng)};
      a.set(IntervalId(id), v);
      amax = std::max(amax, std::abs(v));
    }
    REQUIRE(l2_norm(multiplier_apply(a, h)) <= amax * l2_norm(h) + 1e-9);
  }
}

TEST_CASE("paraproducts of the M=1 Haar pair", "[paraproduct]") {
  DyadicFunction f = haar_pair_m1();
  // Means of f vanish at the only coefficient scale, so hl and lh vanish,
  // and pi_hh = (sqrt2)^2 chi_[0,2] / 2 = chi_[0,2] = f*f pointwise.
  REQUIRE(l2_norm(pi_hl(f, f)) < 1e-12);
  REQUIRE(l2_norm(pi_lh(f, f)) < 1e-12);
  DyadicFunction hh = pi_hh(f, f);
  for (auto v : hh.values) REQUIRE(std::abs(v - Complex{1, 0}) < 1e-12);
  REQUIRE(product_identity_residual(f, f) < 1e-12);
}

TEST_CASE("degenerate paraproduct arguments", "[paraproduct]") {
  std::mt19937_64 rng(42);
  GridConfig g(3);
  DyadicFunction f = testutil::random_mean_zero(g, rng);
  DyadicFunction one = constant_function(g, Complex{1, 0});

  // pi_hl(f, 1) = f on S_0 ([1]_P = 1).
  REQUIRE(l2_norm(pi_hl(f, one) - f) < 1e-9 * l2_norm(f));
  // pi_hh(1, g) = 0 (W1 = 0).
  REQUIRE(l2_norm(pi_hh(one, f)) < 1e-12);
}

TEST_CASE("single-wavelet products land in exactly one paraproduct", "[paraproduct]") {
  GridConfig g(2);
  struct Case {
    DyadicInterval P, Q;
  };
  // P >' Q, P <' Q, P = Q.
  for (const Case& c :
       {Case{iv(1, 0), iv(0, 0)}, Case{iv(0, 0), iv(1, 0)}, Case{iv(0, 0), iv(0, 0)}}) {
    DyadicFunction f = haar(g, lacunary(c.P));
    DyadicFunction gfun = haar(g, lacunary(c.Q));
    REQUIRE(product_identity_residual(f, gfun) < 1e-12);
    int nonzero = 0;
    if (l2_norm(pi_hl(f, gfun)) > 1e-12) ++nonzero;
    if (l2_norm(pi_lh(f, gfun)) > 1e-12) ++nonzero;
    if (l2_norm(pi_hh(f, gfun)) > 1e-12) ++nonzero;
    REQUIRE(nonzero == 1);
    bool P_above = interval_contains(c.P, c.Q) && !(c.P == c.Q);
    bool Q_above = interval_contains(c.Q, c.P) && !(c.P == c.Q);
    if (P_above) REQUIRE(l2_norm(pi_lh(f, gfun)) > 1e-12);  // f low, g high
    if (Q_above) REQUIRE(l2_norm(pi_hl(f, gfun)) > 1e-12);
    if (c.P == c.Q) REQUIRE(l2_norm(pi_hh(f, gfun)) > 1e-12);
  }
}

TEST_CASE("product decomposition on random mean-zero pairs", "[paraproduct]") {
  std::mt19937_64 rng(43);
  GridConfig g(6);
  for (int t = 0; t < 50; ++t) {
    DyadicFunction f = testutil::random_mean_zero(g, rng);
    DyadicFunction h = testutil::random_mean_zero(g, rng);
    REQUIRE(product_identity_residual(f, h) <= 1e-9);
  }
  REQUIRE_THROWS_MATCHES(
      product_identity_residual(constant_function(g, Complex{1, 0}),
                                constant_function(g, Complex{1, 0})),
      Error, Catch::Matchers::Predicate<Error>(
                 [](const Error& e) { return e.kind() == ErrorKind::NotMeanZero; }));
}

TEST_CASE("pairing symmetries, multiplier commutation, triple sum", "[paraproduct]") {
  GridConfig g1(1);
  DyadicFunction zero(g1);
  DyadicFunction f1 = haar_pair_m1();
  auto rz = permute_check(f1, f1, zero);
  REQUIRE(std::abs(rz.common_value) == 0.0);
  REQUIRE(rz.max_discrepancy < 1e-12);

  // f = g = h = phi_{P+([0,1])}: the common value is [phi]_{[0,1]} = 0.
  GridConfig g2(2);
  DyadicFunction phi = haar(g2, lacunary(iv(0, 0)));
  auto rphi = permute_check(phi, phi, phi);
  REQUIRE(std::abs(rphi.common_value) < 1e-12);

  std::mt19937_64 rng(44);
  GridConfig g(5);
  for (int t = 0; t < 25; ++t) {
    DyadicFunction f = testutil::random_function(g, rng);
    DyadicFunction h = testutil::random_function(g, rng);
    DyadicFunction k = testutil::random_function(g, rng);
    auto rep = permute_check(f, h, k);
    REQUIRE(rep.max_discrepancy <= 1e-9);
    REQUIRE(rep.hh_mult_discrepancy <= 1e-9);
    REQUIRE(rep.tril_discrepancy <= 1e-9);
  }
}

TEST_CASE("hl/lh are wavelet multipliers in the other argument", "[paraproduct]") {
  std::mt19937_64 rng(45);
  GridConfig g(4);
  for (int t = 0; t < 20; ++t) {
    DyadicFunction f = testutil::random_function(g, rng);
    DyadicFunction h = testutil::random_function(g, rng);
    DyadicFunction a = pi_hl(f, h);
    DyadicFunction b = multiplier_apply(average_symbol(h), f);
    REQUIRE(l2_norm(a - b) <= 1e-9 * std::max(1.0, l2_norm(a)));
    DyadicFunction c = pi_lh(f, h);
    DyadicFunction d = multiplier_apply(average_symbol(f), h);
    REQUIRE(l2_norm(c - d) <= 1e-9 * std::max(1.0, l2_norm(c)));

    // Orthogonality form: ||pi_lh(f,h)||_2^2 = sum |Wh|^2 |[f]_P|^2.
    CoefficientMap wh = wavelet_transform(h);
    auto fsums = interval_integrals(f);
    double sum = 0;
    for (const auto& [id, v] : wh.entries())
      sum += std::norm(v) * std::norm(fsums[id] / length_of(g, id));
    double n = l2_norm(c);
    REQUIRE(n * n == Approx(sum).epsilon(1e-9).margin(1e-12));
  }
}

TEST_CASE("Carleson embedding report", "[paraproduct][embed]") {
  GridConfig g(3);
  TileSet all = TileSet::all(g);
  DyadicFunction one = constant_function(g, Complex{1, 0});

  auto rzero = carleson_embed_report(all, WeightMap(g), one, 2.0);
  REQUIRE(rzero.ratio == 0.0);

  // Weights |I_P| along the spatial column over [0, 2^-M]: a geometric
  // series with L = sum |I_P| and R = size* * |domain|.
  WeightMap column(g);
  IntervalId id = kRootId;
  double expected_l = 0;
  while (true) {
    column.set(id, length_of(g, id));
    expected_l += length_of(g, id);
    if (level_of(id) == 2 * g.M) break;
    id = left_child_id(id);
  }
  auto rcol = carleson_embed_report(all, column, one, 2.0);
  REQUIRE(rcol.lhs == Approx(expected_l));
  REQUIRE(rcol.ratio <= 8.0);

  std::mt19937_64 rng(46);
  GridConfig g5(5);
  TileSet all5 = TileSet::all(g5);
  for (double p : {1.5, 2.0, 3.0}) {
    double worst = 0;
    for (int t = 0; t < 20; ++t) {
      WeightMap a = testutil::random_weights(g5, rng, 0.5);
      DyadicFunction f = testutil::random_function(g5, rng);
      auto rep = carleson_embed_report(all5, a, f, p);
      worst = std::max(worst, rep.ratio);
    }
    REQUIRE(std::isfinite(worst));
    if (p == 2.0) REQUIRE(worst <= 8.0);  // dyadic embedding constant is 4
  }

  REQUIRE_THROWS_MATCHES(carleson_embed_report(all, WeightMap(g), one, 1.0), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.kind() == ErrorKind::ExponentRange;
                         }));
}

TEST_CASE("paraproduct bound reports", "[paraproduct]") {
  std::mt19937_64 rng(47);
  GridConfig g(4);

  // Constant g in lh mode: Wg = 0 so the paraproduct vanishes.
  DyadicFunction f = testutil::random_function(g, rng);
  REQUIRE(paraproduct_bound_report(ParaproductBound::LhL2Bmo, f,
                                   constant_function(g, Complex{2, 0})) == 0.0);

  // hh on the Haar pair: pi_hh = chi_[0,2] has BMO norm zero.
  DyadicFunction pair = haar_pair_m1();
  REQUIRE(paraproduct_bound_report(ParaproductBound::HhBmoBmo, pair, pair) == 0.0);

  for (auto kind : {ParaproductBound::HlL2Linf, ParaproductBound::LhL2Bmo,
                    ParaproductBound::HhL2Bmo, ParaproductBound::HhBmoBmo}) {
    double worst = 0;
    for (int t = 0; t < 15; ++t) {
      DyadicFunction a = testutil::random_function(g, rng);
      DyadicFunction b = testutil::random_function(g, rng);
      worst = std::max(worst, paraproduct_bound_report(kind, a, b));
    }
    REQUIRE(std::isfinite(worst));
    REQUIRE(worst > 0);
  }

  double worst_weak = 0;
  for (int t = 0; t < 15; ++t) {
    DyadicFunction a = testutil::random_function(g, rng);
    DyadicFunction b = testutil::random_function(g, rng);
    worst_weak =
        std::max(worst_weak, paraproduct_bound_report(ParaproductBound::WeakLpLq, a, b, 2, 2));
  }
  REQUIRE(std::isfinite(worst_weak));

  REQUIRE_THROWS_MATCHES(
      paraproduct_bound_report(ParaproductBound::WeakLpLq, f, f, 1.0, 2.0), Error,
      Catch::Matchers::Predicate<Error>(
          [](const Error& e) { return e.kind() == ErrorKind::ExponentRange; }));
}

TEST_CASE("weak-type exceptional-set report", "[paraproduct]") {
  std::mt19937_64 rng(48);
  GridConfig g(4);
  std::vector<std::int64_t> all_cells;
  for (std::int64_t c = 0; c < g.cell_count(); ++c) all_cells.push_back(c);

  // Zero input: nothing removed, zero pairing.
  auto z = weak_paraproduct_report(DyadicFunction(g), DyadicFunction(g), 2, 2, all_cells);
  REQUIRE(z.pairing_ratio == 0.0);
  REQUIRE(z.retained_fraction == 1.0);

  for (int t = 0; t < 25; ++t) {
    DyadicFunction f = testutil::random_function(g, rng);
    DyadicFunction h = testutil::random_function(g, rng);
    for (auto [p, q] : std::vector<std::pair<double, double>>{{2, 2}, {1.5, 3.0}}) {
      auto rep = weak_paraproduct_report(f, h, p, q, all_cells);
      REQUIRE(rep.retained_fraction >= 0.5);
      REQUIRE(rep.doublings <= 60);
      REQUIRE(std::isfinite(rep.pairing_ratio));
    }
  }

  REQUIRE_THROWS_AS(weak_paraproduct_report(DyadicFunction(g), DyadicFunction(g), 2, 2, {}),
                    Error);
}
