#pragma once

// JSON encodings of every domain type.  Field layouts are part of the file
// contract: intervals are {"k","j"}, tiles carry a "kind" string, complex
// scalars are [re, im] pairs, and functions may use the compact real form
// ("real": true) when every imaginary part is negligible.

#include <fstream>

#include <json.hpp>

#include "dhap/czop.hpp"

namespace dhap {

using Json = nlohmann::ordered_json;

inline Json to_json(const DyadicInterval& I) { return Json{{"k", I.k}, {"j", I.j}}; }

inline DyadicInterval interval_from_json(const Json& j) {
  if (!j.contains("k") || !j.contains("j")) throw Error(ErrorKind::ParseError, "interval needs k,j");
  return DyadicInterval{j.at("k").get<int>(), j.at("j").get<std::int64_t>()};
}

inline Json to_json(const Tile& t) {
  return Json{{"interval", to_json(t.interval)},
              {"kind", t.kind == TileKind::Lacunary ? "lacunary" : "nonlacunary"}};
}

inline Tile tile_from_json(const Json& j) {
  Tile t;
  t.interval = interval_from_json(j.at("interval"));
  std::string kind = j.value("kind", "lacunary");
  if (kind == "lacunary")
    t.kind = TileKind::Lacunary;
  else if (kind == "nonlacunary")
    t.kind = TileKind::NonLacunary;
  else
    throw Error(ErrorKind::ParseError, "unknown tile kind: " + kind);
  return t;
}

inline Json to_json(const TileSet& S) {
  Json tiles = Json::array();
  for (IntervalId id : S.ids()) tiles.push_back(to_json(lacunary(interval_of(S.grid(), id))));
  return Json{{"M", S.grid().M}, {"tiles", tiles}};
}

inline Json to_json(const Tree& T) {
  Json j = to_json(T.members);
  j["top"] = to_json(lacunary(interval_of(T.grid(), T.top)));
  return j;
}

inline TileSet tileset_from_json(const Json& j) {
  GridConfig g(j.at("M").get<int>());
  std::vector<IntervalId> ids;
  for (const Json& t : j.at("tiles")) {
    Tile tile = tile_from_json(t);
    if (tile.kind != TileKind::Lacunary)
      throw Error(ErrorKind::ParseError, "tile sets hold lacunary tiles");
    ids.push_back(id_of(g, tile.interval));
  }
  return TileSet(g, std::move(ids));
}

inline Tree tree_from_json(const Json& j) {
  TileSet S = tileset_from_json(j);
  if (!j.contains("top")) throw Error(ErrorKind::ParseError, "tree needs a top tile");
  IntervalId top = id_of(S.grid(), tile_from_json(j.at("top")).interval);
  Tree T{top, std::move(S)};
  if (!is_valid_tree(T)) throw Error(ErrorKind::ParseError, "not a valid tree");
  return T;
}

inline Json to_json(Complex c) { return Json::array({c.real(), c.imag()}); }

inline Complex complex_from_json(const Json& j) {
  if (j.is_number()) return Complex{j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2)
    return Complex{j.at(0).get<double>(), j.at(1).get<double>()};
  throw Error(ErrorKind::ParseError, "complex values are numbers or [re, im]");
}

// The compact real form is used only when every imaginary part is exactly
// zero by default, keeping parse(emit(x)) == x; pass a positive cutoff to
// compact nearly-real data at the cost of dropping negligible parts.
inline Json to_json(const DyadicFunction& f, double real_cutoff = 0.0) {
  bool real = true;
  for (auto v : f.values)
    if (std::abs(v.imag()) > real_cutoff) {
      real = false;
      break;
    }
  Json values = Json::array();
  if (real)
    for (auto v : f.values) values.push_back(v.real());
  else
    for (auto v : f.values) values.push_back(to_json(v));
  Json j{{"M", f.grid.M}, {"values", values}};
  if (real) j["real"] = true;
  return j;
}

inline DyadicFunction function_from_json(const Json& j) {
  GridConfig g(j.at("M").get<int>());
  const Json& vals = j.at("values");
  if (std::int64_t(vals.size()) != g.cell_count())
    throw Error(ErrorKind::ParseError, "value count does not match 2^(2M)");
  DyadicFunction f(g);
  for (std::size_t i = 0; i < vals.size(); ++i) f.values[i] = complex_from_json(vals[i]);
  return f;
}

inline Json to_json(const CoefficientMap& c) {
  Json entries = Json::array();
  for (const auto& [id, v] : c.entries())
    entries.push_back(Json{{"tile", to_json(lacunary(interval_of(c.grid(), id)))},
                           {"value", to_json(v)}});
  return Json{{"M", c.grid().M}, {"entries", entries}};
}

inline CoefficientMap coefficients_from_json(const Json& j) {
  GridConfig g(j.at("M").get<int>());
  std::vector<std::pair<IntervalId, Complex>> entries;
  for (const Json& e : j.at("entries"))
    entries.push_back({id_of(g, tile_from_json(e.at("tile")).interval),
                       complex_from_json(e.at("value"))});
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return CoefficientMap::from_sorted(g, std::move(entries));
}

inline Json to_json(const WeightMap& a) {
  Json entries = Json::array();
  for (const auto& [id, v] : a.entries())
    entries.push_back(
        Json{{"tile", to_json(lacunary(interval_of(a.grid(), id)))}, {"value", v}});
  return Json{{"M", a.grid().M}, {"entries", entries}};
}

inline WeightMap weights_from_json(const Json& j) {
  GridConfig g(j.at("M").get<int>());
  std::vector<std::pair<IntervalId, double>> entries;
  for (const Json& e : j.at("entries")) {
    Complex c = complex_from_json(e.at("value"));
    if (c.imag() != 0) throw Error(ErrorKind::ParseError, "weights are real");
    entries.push_back({id_of(g, tile_from_json(e.at("tile")).interval), c.real()});
  }
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return WeightMap::from_sorted(g, std::move(entries));
}

inline Json to_json(const PerfectDyadicKernel& K) {
  Json constants = Json::array();
  const GridConfig& g = K.grid();
  for (std::int64_t id = 0; id < std::int64_t(K.pair_count()); ++id) {
    if (K.lr(IntervalId(id)) == Complex{0, 0} && K.rl(IntervalId(id)) == Complex{0, 0}) continue;
    DyadicInterval I = interval_of(g, IntervalId(id));
    constants.push_back(Json{{"k", I.k},
                             {"j", I.j},
                             {"lr", to_json(K.lr(IntervalId(id)))},
                             {"rl", to_json(K.rl(IntervalId(id)))}});
  }
  return Json{{"M", g.M}, {"sibling_constants", constants}};
}

inline PerfectDyadicKernel kernel_from_json(const Json& j) {
  GridConfig g(j.at("M").get<int>());
  PerfectDyadicKernel K(g);
  for (const Json& e : j.at("sibling_constants")) {
    DyadicInterval I{e.at("k").get<int>(), e.at("j").get<std::int64_t>()};
    IntervalId id = id_of(g, I);
    if (id >= K.pair_count())
      throw Error(ErrorKind::ParseError, "sibling constant at a childless interval");
    // K.set rejects nonzero constants at the top scale.
    K.set(id, complex_from_json(e.at("lr")), complex_from_json(e.at("rl")));
  }
  return K;
}

inline Json to_json(const AccretiveSystem& sys) {
  const GridConfig& g = sys.grid();
  Json j{{"M", g.M}};
  for (auto side : {TbSide::B1, TbSide::B2}) {
    Json list = Json::array();
    for (std::int64_t id = 0; id < g.interval_count(); ++id) {
      if (!sys.has(side, IntervalId(id))) continue;
      DyadicFunction f = sys.function(side, IntervalId(id));
      auto [lo, hi] = cell_range(g, IntervalId(id));
      Json vals = Json::array();
      for (std::int64_t c = lo; c < hi; ++c) vals.push_back(to_json(f.values[std::size_t(c)]));
      list.push_back(Json{{"tile", to_json(lacunary(interval_of(g, IntervalId(id))))},
                          {"values", vals}});
    }
    j[side == TbSide::B1 ? "b1" : "b2"] = list;
  }
  return j;
}

inline AccretiveSystem system_from_json(const Json& j) {
  GridConfig g(j.at("M").get<int>());
  AccretiveSystem sys(g);
  for (auto side : {TbSide::B1, TbSide::B2}) {
    for (const Json& e : j.at(side == TbSide::B1 ? "b1" : "b2")) {
      IntervalId id = id_of(g, tile_from_json(e.at("tile")).interval);
      std::vector<Complex> cells;
      for (const Json& v : e.at("values")) cells.push_back(complex_from_json(v));
      sys.set(side, id, std::move(cells));
    }
  }
  return sys;
}

inline Json to_json(const TreeDecomposition& d) {
  Json trees = Json::array();
  for (const auto& lt : d.trees) {
    Json t = to_json(lt.tree);
    t["label"] = lt.label;
    trees.push_back(t);
  }
  Json measured;
  for (const auto& [k, v] : d.measured) measured[k] = v;
  return Json{{"M", d.grid.M},
              {"trees", trees},
              {"exceptional", to_json(d.exceptional)["tiles"]},
              {"measured", measured}};
}

inline TreeDecomposition decomposition_from_json(const Json& j) {
  GridConfig g(j.at("M").get<int>());
  TreeDecomposition d{g, {}, TileSet(g), {}};
  for (const Json& t : j.at("trees")) {
    Json plain = t;
    plain["M"] = g.M;
    d.trees.push_back({tree_from_json(plain), t.value("label", "small")});
  }
  std::vector<IntervalId> ids;
  for (const Json& t : j.at("exceptional"))
    ids.push_back(id_of(g, tile_from_json(t).interval));
  d.exceptional = TileSet(g, std::move(ids));
  if (j.contains("measured"))
    for (auto it = j.at("measured").begin(); it != j.at("measured").end(); ++it)
      d.measured[it.key()] = it.value().get<double>();
  return d;
}

inline Json to_json(const AtomicDecomposition& d) {
  Json atoms = Json::array();
  for (const auto& at : d.atoms)
    atoms.push_back(Json{{"interval", to_json(interval_of(d.grid, at.top))},
                         {"c", at.coefficient},
                         {"atom", to_json(at.atom)}});
  Json measured;
  for (const auto& [k, v] : d.measured) measured[k] = v;
  return Json{{"M", d.grid.M}, {"p", d.p}, {"atoms", atoms}, {"measured", measured}};
}

inline AtomicDecomposition atoms_from_json(const Json& j) {
  GridConfig g(j.at("M").get<int>());
  AtomicDecomposition d{g, j.at("p").get<double>(), {}, {}};
  for (const Json& a : j.at("atoms"))
    d.atoms.push_back(Atom{id_of(g, interval_from_json(a.at("interval"))),
                           a.at("c").get<double>(), function_from_json(a.at("atom"))});
  if (j.contains("measured"))
    for (auto it = j.at("measured").begin(); it != j.at("measured").end(); ++it)
      d.measured[it.key()] = it.value().get<double>();
  return d;
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("bad JSON: ") + e.what());
  }
  return j;
}

inline void save_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::ParseError, "cannot write " + path);
  out << text;
}

}  // namespace dhap
