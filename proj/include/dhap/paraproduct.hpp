#pragma once

// Wavelet multipliers and the three dyadic paraproducts, together with their
// exact algebraic identities (product decomposition, pairing symmetries, the
// lacunary/non-lacunary triple sum) and the measured-constant reports for the
// Carleson embedding and the paraproduct estimates.

#include "dhap/norms.hpp"

namespace dhap {

// The sequence a_P of a wavelet multiplier W^-1 a_P W.
using MultiplierSymbol = CoefficientMap;

/// W^-1 a_P W f = sum_P a_P Wf(P) phi_P; maps S_0 to S_0.
inline DyadicFunction multiplier_apply(const MultiplierSymbol& a, const DyadicFunction& f) {
  CoefficientMap w = wavelet_transform(f);
  std::vector<std::pair<IntervalId, Complex>> entries;
  entries.reserve(w.size());
  for (const auto& [id, c] : w.entries()) {
    Complex s = a.at(id);
    if (s != Complex{0, 0}) entries.push_back({id, s * c});
  }
  return reconstruct(CoefficientMap::from_sorted(f.grid, std::move(entries)));
}

inline MultiplierSymbol average_symbol(const DyadicFunction& g) {
  auto sums = interval_integrals(g);
  std::int64_t n = g.grid.cell_count() - 1;
  std::vector<std::pair<IntervalId, Complex>> entries;
  entries.reserve(std::size_t(n));
  for (std::int64_t id = 0; id < n; ++id)
    entries.push_back({IntervalId(id), sums[std::size_t(id)] / length_of(g.grid, IntervalId(id))});
  return MultiplierSymbol::from_sorted(g.grid, std::move(entries));
}

/// pi_hl(f, g) = sum_P Wf(P) [g]_P phi_P.
inline DyadicFunction pi_hl(const DyadicFunction& f, const DyadicFunction& g) {
  CoefficientMap wf = wavelet_transform(f);
  auto gsums = interval_integrals(g);
  std::vector<std::pair<IntervalId, Complex>> entries;
  entries.reserve(wf.size());
  for (const auto& [id, c] : wf.entries())
    entries.push_back({id, c * (gsums[id] / length_of(f.grid, id))});
  return reconstruct(CoefficientMap::from_sorted(f.grid, std::move(entries)));
}

/// pi_lh(f, g) = sum_P [f]_P Wg(P) phi_P.
inline DyadicFunction pi_lh(const DyadicFunction& f, const DyadicFunction& g) {
  return pi_hl(g, f);
}

/// pi_hh(f, g) = sum_P Wf(P) Wg(P) chi_{I_P} / |I_P|; lands in S, not S_0.
inline DyadicFunction pi_hh(const DyadicFunction& f, const DyadicFunction& g) {
  CoefficientMap wf = wavelet_transform(f);
  CoefficientMap wg = wavelet_transform(g);
  DyadicFunction out(f.grid);
  for (const auto& [id, cf] : wf.entries()) {
    Complex prod = cf * wg.at(id);
    if (prod == Complex{0, 0}) continue;
    Complex add = prod / length_of(f.grid, id);
    auto [lo, hi] = cell_range(f.grid, id);
    for (std::int64_t x = lo; x < hi; ++x) out.values[std::size_t(x)] += add;
  }
  return out;
}

/// || fg - pi_hl - pi_lh - pi_hh ||_2, relative to ||fg||_2 when nonzero.
/// The decomposition is an identity on S_0 x S_0.
inline double product_identity_residual(const DyadicFunction& f, const DyadicFunction& g,
                                        Tolerances tol = {}) {
  double sf = lp_norm(f, std::numeric_limits<double>::infinity());
  double sg = lp_norm(g, std::numeric_limits<double>::infinity());
  if (std::abs(integral(f)) > tol.abs * std::max(1.0, sf) ||
      std::abs(integral(g)) > tol.abs * std::max(1.0, sg))
    throw Error(ErrorKind::NotMeanZero, "product decomposition needs mean-zero inputs");
  DyadicFunction lhs = pointwise_product(f, g);
  DyadicFunction rhs = pi_hl(f, g) + pi_lh(f, g) + pi_hh(f, g);
  double denom = l2_norm(lhs);
  double num = l2_norm(lhs - rhs);
  return denom > 0 ? num / denom : num;
}

struct PermuteReport {
  Complex common_value;        // sum_P Wf(P) Wg(P) [h]_P
  double max_discrepancy = 0;  // across the six pairings
  double hh_mult_discrepancy = 0;
  double tril_discrepancy = 0;
};

/// Evaluates the six pairings of the paraproduct symmetry display, the
/// multiplier-commutation identity for pi_hh, and the triple-sum expansion
/// through father wavelets.  All must agree to rounding.
inline PermuteReport permute_check(const DyadicFunction& f, const DyadicFunction& g,
                                   const DyadicFunction& h,
                                   const MultiplierSymbol* symbol = nullptr) {
  const GridConfig& grid = f.grid;
  CoefficientMap wf = wavelet_transform(f);
  CoefficientMap wg = wavelet_transform(g);
  auto hsums = interval_integrals(h);

  PermuteReport rep;
  Complex common{0, 0};
  for (const auto& [id, cf] : wf.entries())
    common += cf * wg.at(id) * (hsums[id] / length_of(grid, id));
  rep.common_value = common;

  Complex vals[6] = {
      pairing(pi_hh(f, g), h), pairing(pi_hl(g, h), f), pairing(pi_lh(h, f), g),
      pairing(pi_hh(g, f), h), pairing(pi_hl(f, h), g), pairing(pi_lh(h, g), f),
  };
  double scale = std::abs(common);
  for (Complex v : vals) scale = std::max(scale, std::abs(v));
  for (Complex v : vals) rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(v - common));
  if (scale > 0) rep.max_discrepancy /= scale;

  // pi_hh(W^-1 a W f, g) = pi_hh(f, W^-1 a W g).
  MultiplierSymbol sym;
  if (symbol) {
    sym = *symbol;
  } else {
    std::vector<std::pair<IntervalId, Complex>> entries;
    for (std::int64_t id = 0; id < grid.cell_count() - 1; ++id)
      entries.push_back({IntervalId(id), Complex{1.0 + double(id % 3), 0.5}});
    sym = MultiplierSymbol::from_sorted(grid, std::move(entries));
  }
  DyadicFunction left = pi_hh(multiplier_apply(sym, f), g);
  DyadicFunction right = pi_hh(f, multiplier_apply(sym, g));
  double mscale = std::max(l2_norm(left), l2_norm(right));
  rep.hh_mult_discrepancy = mscale > 0 ? l2_norm(left - right) / mscale : 0.0;

  // int pi_hh(f,g) h = sum_I |I|^(-1/2) <f,phi+> <g,phi+> <h,phi0>.
  Complex tril{0, 0};
  for (const auto& [id, cf] : wf.entries()) {
    double len = length_of(grid, id);
    Complex father = hsums[id] / std::sqrt(len);  // <h, phi_{P0(I)}>
    tril += (cf * wg.at(id) * father) / std::sqrt(len);
  }
  Complex lhs = pairing(pi_hh(f, g), h);
  double tscale = std::max(std::abs(lhs), std::abs(tril));
  rep.tril_discrepancy = tscale > 0 ? std::abs(lhs - tril) / tscale : 0.0;
  return rep;
}

struct EmbedReport {
  double lhs = 0;    // sum_P a(P) |[f]_P|^p
  double rhs = 0;    // size*(a, S) ||f||_p^p
  double ratio = 0;  // infinity-guarded
};

/// Carleson embedding: sum_P a(P) |[f]_{I_P}|^p against size*(a) ||f||_p^p.
inline EmbedReport carleson_embed_report(const TileSet& S, const WeightMap& a,
                                         const DyadicFunction& f, double p) {
  if (!(p > 1) || std::isinf(p))
    throw Error(ErrorKind::ExponentRange, "embedding needs 1 < p < inf");
  auto sums = interval_integrals(f);
  EmbedReport rep;
  for (IntervalId id : S.ids())
    rep.lhs += a.at(id) * std::pow(std::abs(sums[id] / length_of(f.grid, id)), p);
  rep.rhs = maximal_size(a, S) * std::pow(lp_norm(f, p), p);
  rep.ratio = rep.rhs > 0 ? rep.lhs / rep.rhs
                          : (rep.lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0);
  return rep;
}

enum class ParaproductBound {
  HlL2Linf,    // ||pi_hl(f,g)||_2 <~ ||f||_2 ||g||_inf
  LhL2Bmo,     // ||pi_lh(f,g)||_2 <~ ||f||_2 ||g||_BMO
  HhL2Bmo,     // ||pi_hh(f,g)||_2 <~ ||f||_2 ||g||_BMO
  HhBmoBmo,    // ||pi_hh(f,g)||_BMO <~ ||f||_BMO ||g||_BMO
  WeakLpLq,    // ||pi(f,g)||_{r,inf} <~ ||f||_p ||g||_q, 1/r = 1/p + 1/q
};

// Weak-type testing through the exceptional set
// E' = E \ { M|f|^p + M|g|^q >= C } (inputs normalized in L^p, L^q), with C
// doubled until E' keeps half of E.
struct WeakParaproductReport {
  double pairing_ratio = 0;    // max over the three paraproducts of
                               // |<pi, chi_{E'}>| / (||f||_p ||g||_q |E|^{1/r'})
  double retained_fraction = 0;
  double threshold = 0;        // final C
  int doublings = 0;           // capped at 60
};

inline WeakParaproductReport weak_paraproduct_report(const DyadicFunction& f,
                                                     const DyadicFunction& g, double p, double q,
                                                     const std::vector<std::int64_t>& E_cells,
                                                     int max_doublings = 60) {
  if (!(p > 1) || !(q > 1) || std::isinf(p) || std::isinf(q))
    throw Error(ErrorKind::ExponentRange, "weak mode needs 1 < p, q < inf");
  if (E_cells.empty()) throw Error(ErrorKind::ParseError, "need |E| > 0");
  const GridConfig& grid = f.grid;
  double nf = lp_norm(f, p), ng = lp_norm(g, q);
  WeakParaproductReport rep;
  if (nf == 0 || ng == 0) {
    rep.retained_fraction = 1;
    return rep;
  }
  double r = 1.0 / (1.0 / p + 1.0 / q);
  double rprime = r / (r - 1.0);  // negative when r < 1

  // M|f|^p + M|g|^q for the normalized inputs.
  DyadicFunction fp(grid), gq(grid);
  for (std::size_t i = 0; i < fp.values.size(); ++i) {
    fp.values[i] = std::pow(std::abs(f.values[i]) / nf, p);
    gq.values[i] = std::pow(std::abs(g.values[i]) / ng, q);
  }
  DyadicFunction level = cancellative_maximal(fp) + cancellative_maximal(gq);

  double w = grid.cell_width();
  double E_measure = double(E_cells.size()) * w;
  double C = 1;
  std::vector<std::int64_t> retained;
  for (int d = 0; d <= max_doublings; ++d) {
    retained.clear();
    for (auto c : E_cells)
      if (level.values[std::size_t(c)].real() < C) retained.push_back(c);
    rep.threshold = C;
    rep.doublings = d;
    rep.retained_fraction = double(retained.size()) / double(E_cells.size());
    if (rep.retained_fraction >= 0.5) break;
    if (d == max_doublings)
      throw Error(ErrorKind::HypothesisFail, "exceptional set swallows half of E");
    C *= 2;
  }

  DyadicFunction chi(grid);
  for (auto c : retained) chi.values[std::size_t(c)] = 1.0;
  double bound = nf * ng * std::pow(E_measure, 1.0 / rprime);
  for (const DyadicFunction& piece : {pi_hl(f, g), pi_lh(f, g), pi_hh(f, g)})
    rep.pairing_ratio = std::max(rep.pairing_ratio, std::abs(pairing(piece, chi)) / bound);
  return rep;
}

/// Measured ratio (left norm over right product of norms) for one estimate;
/// the weak mode returns the worst of the three paraproducts.
inline double paraproduct_bound_report(ParaproductBound kind, const DyadicFunction& f,
                                       const DyadicFunction& g, double p = 2, double q = 2) {
  auto guarded = [](double num, double den) { return den > 0 ? num / den : 0.0; };
  switch (kind) {
    case ParaproductBound::HlL2Linf:
      return guarded(l2_norm(pi_hl(f, g)),
                     l2_norm(f) * lp_norm(g, std::numeric_limits<double>::infinity()));
    case ParaproductBound::LhL2Bmo:
      return guarded(l2_norm(pi_lh(f, g)), l2_norm(f) * bmo_norm(g));
    case ParaproductBound::HhL2Bmo:
      return guarded(l2_norm(pi_hh(f, g)), l2_norm(f) * bmo_norm(g));
    case ParaproductBound::HhBmoBmo:
      return guarded(bmo_norm(pi_hh(f, g)), bmo_norm(f) * bmo_norm(g));
    case ParaproductBound::WeakLpLq: {
      if (!(p > 1) || !(q > 1) || std::isinf(p) || std::isinf(q))
        throw Error(ErrorKind::ExponentRange, "weak mode needs 1 < p, q < inf");
      double r = 1.0 / (1.0 / p + 1.0 / q);
      double den = lp_norm(f, p) * lp_norm(g, q);
      double worst = 0;
      worst = std::max(worst, guarded(weak_lp_norm(pi_hl(f, g), r), den));
      worst = std::max(worst, guarded(weak_lp_norm(pi_lh(f, g), r), den));
      worst = std::max(worst, guarded(weak_lp_norm(pi_hh(f, g), r), den));
      return worst;
    }
  }
  return 0;
}

}  // namespace dhap
