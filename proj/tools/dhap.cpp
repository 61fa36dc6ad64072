// dhap: dyadic harmonic analysis toolkit.
//
//   dhap verify    --suite <name> --m <M> --seed <s> --trials <n> [--out DIR]
//   dhap decompose --kind <k> --input f.json [--delta d] [--algorithm ...]
//   dhap render    --input d.json -o out.svg [--half-plane]
//   dhap gen       --kind <k> --m <M> --seed <s> [--output FILE]
//
// DHAP_TOL overrides the relative tolerance.  Any failed suite check makes
// the exit code nonzero; the report names the violated invariant and the
// offending per-trial seed.

#include <climits>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "dhap/suites.hpp"
#include "dhap/svg.hpp"

namespace {

using namespace dhap;

Tolerances tolerances_from_env() {
  Tolerances tol;
  if (const char* env = std::getenv("DHAP_TOL")) {
    char* end = nullptr;
    double v = std::strtod(env, &end);
    if (end != env && v > 0) tol.rel = v;
  }
  return tol;
}

int cmd_verify(const std::string& suite, RunConfig cfg, const std::string& outdir) {
  SuiteReport rep = run_suite(suite, cfg);
  std::string text = format_text(rep);
  std::cout << text;
  if (!outdir.empty()) {
    std::filesystem::create_directories(outdir);
    // The JSON report omits wall-clock so identical runs are byte-identical;
    // timings stay in the text rendering.
    save_text(outdir + "/report_" + suite + ".json", to_json(rep, false).dump(2) + "\n");
    save_text(outdir + "/report_" + suite + ".txt", text);
  }
  return rep.all_pass() ? 0 : 1;
}

int cmd_decompose(const std::string& kind, const std::string& input, const std::string& output,
                  double delta, double c0, int n, double p, const std::string& algorithm,
                  Tolerances tol) {
  Json in = load_json(input);
  Json out;
  if (kind == "tree_slice") {
    WeightMap a = weights_from_json(in);
    GridConfig g = a.grid();
    Tree root = complete_tree(g, kRootId);
    double C0 = c0 > 0 ? c0 : std::max(maximal_size(a, root.members), delta);
    SliceAlgorithm alg = algorithm == "heavy-light" ? SliceAlgorithm::HeavyLight
                                                    : SliceAlgorithm::Garnett;
    TreeDecomposition d = tree_slice(root, a, C0, delta, alg, tol);
    verify_tree_slice(root, a, C0, delta, d, tol);
    out = to_json(d);
  } else if (kind == "tree_select") {
    WeightMap a = weights_from_json(in);
    GridConfig g = a.grid();
    TileSet all = TileSet::all(g);
    int level = n;
    if (level == INT_MIN) {
      double ms = maximal_size(a, all);
      level = ms > 0 ? int(std::ceil(std::log2(ms))) : 0;
      while (std::ldexp(1.0, level) < ms) ++level;
    }
    Selection sel = tree_select(all, a, level, tol);
    TreeDecomposition d{g, {}, sel.remainder, sel.measured};
    for (const Tree& T : sel.trees) d.trees.push_back({T, "selected"});
    d.measured["n"] = level;
    out = to_json(d);
  } else if (kind == "mean_select") {
    DyadicFunction f = function_from_json(in);
    GridConfig g = f.grid;
    TileSet all = TileSet::all(g);
    int level = n;
    if (level == INT_MIN) {
      double mm = maximal_mean(f, all);
      level = mm > 0 ? int(std::ceil(std::log2(mm))) : 0;
      while (std::ldexp(1.0, level) < mm) ++level;
    }
    Selection sel = mean_select(all, f, level, tol);
    TreeDecomposition d{g, {}, sel.remainder, sel.measured};
    for (const Tree& T : sel.trees) d.trees.push_back({T, "selected"});
    d.measured["n"] = level;
    out = to_json(d);
  } else if (kind == "atoms") {
    DyadicFunction f = function_from_json(in);
    out = to_json(atomic_decompose(f, p, tol));
  } else {
    throw Error(ErrorKind::ConfigInvalid, "unknown decomposition kind: " + kind);
  }

  std::string text = out.dump(2) + "\n";
  if (output.empty()) {
    std::cout << text;
  } else {
    save_text(output, text);
    if (out.contains("measured"))
      save_text(output + ".measured.json", out.at("measured").dump(2) + "\n");
  }
  return 0;
}

int cmd_render(const std::string& input, const std::string& output, bool half_plane) {
  Json in = load_json(input);
  std::string svg;
  if (in.contains("trees"))
    svg = render_svg(decomposition_from_json(in), half_plane);
  else if (in.contains("tiles"))
    svg = render_svg(tileset_from_json(in), half_plane);
  else
    throw Error(ErrorKind::ParseError, "input is neither a decomposition nor a tile set");
  if (output.empty())
    std::cout << svg;
  else
    save_text(output, svg);
  return 0;
}

int cmd_gen(const std::string& kind, int M, std::uint64_t seed, const std::string& output) {
  GridConfig g(M);
  Json out;
  if (kind == "function") out = to_json(gen_function(g, seed));
  else if (kind == "mean_zero_function") out = to_json(gen_mean_zero_function(g, seed));
  else if (kind == "weights") out = to_json(gen_weights(g, seed));
  else if (kind == "carleson_weights") out = to_json(gen_carleson_weights(g, seed));
  else if (kind == "kernel") out = to_json(gen_kernel(g, seed));
  else if (kind == "accretive_b") out = to_json(gen_accretive(g, seed));
  else if (kind == "accretive_system") out = to_json(gen_accretive_system(g, seed));
  else throw Error(ErrorKind::ConfigInvalid, "unknown generator kind: " + kind);
  std::string text = out.dump(2) + "\n";
  if (output.empty())
    std::cout << text;
  else
    save_text(output, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dyadic harmonic analysis toolkit"};
  app.require_subcommand(1);
  Tolerances tol = tolerances_from_env();

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  std::string suite = "all";
  RunConfig cfg;
  cfg.tol = tol;
  std::string outdir;
  verify->add_option("--suite", suite,
                     "core|norms|decompose|extrapolate|atoms|paraproduct|embed|t1|tb|all");
  verify->add_option("--m", cfg.M, "truncation exponent");
  verify->add_option("--seed", cfg.seed, "master seed");
  verify->add_option("--trials", cfg.trials, "trials per randomized check");
  verify->add_option("--c-acc", cfg.c_acc, "accretivity margin threshold");
  verify->add_option("--out", outdir, "directory for report files");

  auto* decompose = app.add_subcommand("decompose", "run a stopping-time decomposition");
  std::string dkind = "tree_slice", dinput, doutput, algorithm = "garnett";
  double delta = 0.5, c0 = 0, pexp = 1.0;
  int nlevel = INT_MIN;
  decompose->add_option("--kind", dkind, "tree_slice|tree_select|mean_select|atoms");
  decompose->add_option("--input", dinput, "input JSON (weights or function)")->required();
  decompose->add_option("--output", doutput, "output JSON path (stdout if omitted)");
  decompose->add_option("--delta", delta, "target size for tree_slice");
  decompose->add_option("--c0", c0, "size* bound (measured if omitted)");
  decompose->add_option("--n", nlevel, "dyadic level for tree/mean selection");
  decompose->add_option("--p", pexp, "exponent for atomic decomposition");
  decompose->add_option("--algorithm", algorithm, "garnett|heavy-light");

  auto* render = app.add_subcommand("render", "render tiles or a decomposition to SVG");
  std::string rinput, routput;
  bool half_plane = false;
  render->add_option("--input", rinput, "decomposition or tile-set JSON")->required();
  render->add_option("-o,--output", routput, "SVG path (stdout if omitted)");
  render->add_flag("--half-plane", half_plane, "Carleson-box rendering");

  auto* gen = app.add_subcommand("gen", "generate a random instance");
  std::string gkind = "function", goutput;
  int gM = 4;
  std::uint64_t gseed = 1;
  gen->add_option("--kind", gkind,
                  "function|mean_zero_function|weights|carleson_weights|kernel|accretive_b|"
                  "accretive_system");
  gen->add_option("--m", gM, "truncation exponent");
  gen->add_option("--seed", gseed, "seed");
  gen->add_option("--output", goutput, "output path (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) return cmd_verify(suite, cfg, outdir);
    if (decompose->parsed())
      return cmd_decompose(dkind, dinput, doutput, delta, c0, nlevel, pexp, algorithm, tol);
    if (render->parsed()) return cmd_render(rinput, routput, half_plane);
    if (gen->parsed()) return cmd_gen(gkind, gM, gseed, goutput);
  } catch (const dhap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
