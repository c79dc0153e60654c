#include "nnlab/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nnlab/nngraph.hpp"
#include "nnlab/stats.hpp"
#include "nnlab/svg.hpp"
#include "nnlab/topology.hpp"

namespace nnlab {

namespace fs = std::filesystem;

namespace {

constexpr int64_t kDefaultSide = 64;

std::string hex64(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed: " + p.string());
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SpecError("malformed JSON in " + what + ": " + e.what());
  }
}

WeightField iid_box_weights(const GeneratorSpec& spec, const Domain& box, const SeededRng& rng) {
  IidRule rule(spec.dim, rng.derive("iid"));
  WeightField w(box);
  for (int64_t s = 0; s < box.num_slots(); ++s)
    if (box.slot_valid(s)) w.set_slot(s, rule.weight(box.site(s / box.dim()), static_cast<int>(s % box.dim())));
  return w;
}

std::string cycle_text(const OutMap& g, int64_t start) {
  std::string s;
  int64_t u = start;
  do {
    s += g.domain().site(u).str() + " -> ";
    u = g.out(u);
  } while (u != start);
  return s + g.domain().site(start).str();
}

Json suite(bool ok, const std::string& witness = {}) {
  Json j = {{"status", ok ? "pass" : "fail"}};
  if (!ok) j["witness"] = witness;
  return j;
}

Json skipped(const std::string& why) { return {{"status", "skipped"}, {"reason", why}}; }

}  // namespace

Domain resolve_domain(const RunConfig& c) {
  const int d = c.spec.output_dim();
  if (c.box) {
    if (c.box->dim() != d) throw SpecError("box dimension does not match the generator");
    return *c.box;
  }
  if (c.torus) {
    if (static_cast<int>(c.torus->size()) != d) throw SpecError("torus dimension does not match the generator");
    return Domain::torus(*c.torus);
  }
  return Domain::torus(torus_sides_for(c.spec, kDefaultSide));
}

Realization generate(const RunConfig& c) {
  Domain dom = resolve_domain(c);
  SeededRng rng(c.seed);
  const bool iid = c.spec.variant == GeneratorSpec::Variant::IIDWeights;
  if (iid) {
    WeightField w = dom.is_torus() ? sample_iid_uniform(dom, rng.derive("iid")) : iid_box_weights(c.spec, dom, rng);
    OutMap g = build_nn_directed(w);
    return {dom, std::move(g), std::move(w), "sampled"};
  }
  std::vector<int64_t> sides;
  for (int i = 0; i < dom.dim(); ++i) sides.push_back(dom.side(i));
  OutMap g = dom.is_torus() ? realize_torus(c.spec, sides, rng) : realize_window(c.spec, dom, rng);
  if (verify_theorem3_preconditions(g).ok()) {
    WeightField w = construct_weights(g, rng.derive("construct"));
    return {dom, std::move(g), std::move(w), "constructed"};
  }
  return {dom, std::move(g), std::nullopt, "none"};
}

void write_run(const std::string& dir, const RunConfig& c, const Realization& r) {
  make_dir(dir);
  std::ostringstream graph;
  r.graph.write_jsonl(graph);
  write_file(fs::path(dir) / "graph.jsonl", graph.str());
  Json files = {{"graph.jsonl", hex64(fnv1a64(graph.str()))}};
  if (r.weights) {
    std::ostringstream w;
    r.weights->write_csv(w);
    write_file(fs::path(dir) / "weights.csv", w.str());
    files["weights.csv"] = hex64(fnv1a64(w.str()));
  }
  RunConfig persisted = c;
  persisted.out.clear();
  Json manifest = {{"code_version", kCodeVersion},
                   {"spec_hash", spec_hash(c.spec)},
                   {"config", to_json(persisted)},
                   {"domain", to_json(r.domain)},
                   {"weights", r.weight_source},
                   {"files", files}};
  write_file(fs::path(dir) / "manifest.json", manifest.dump(2) + "\n");
}

std::pair<RunConfig, Realization> read_run(const std::string& dir) {
  Json manifest = parse_json(read_file(fs::path(dir) / "manifest.json"), "manifest.json");
  if (!manifest.contains("config") || !manifest.contains("domain")) throw SpecError("manifest lacks config or domain");
  RunConfig c = run_config_from_json(manifest.at("config"));
  Domain dom = domain_from_json(manifest.at("domain"));
  std::istringstream graph(read_file(fs::path(dir) / "graph.jsonl"));
  OutMap g = OutMap::read_jsonl(dom, graph);
  std::optional<WeightField> w;
  std::string source = manifest.value("weights", std::string("none"));
  if (fs::exists(fs::path(dir) / "weights.csv")) {
    std::istringstream in(read_file(fs::path(dir) / "weights.csv"));
    w = WeightField::read_csv(dom, in);
  }
  return {c, Realization{dom, std::move(g), std::move(w), source}};
}

Json verify_realization(const Realization& r) {
  const OutMap& g = r.graph;
  const Domain& dom = r.domain;
  Json suites = Json::object();
  ComponentLabeling comps = undirected_components(g);
  Orbits orb = orbit_structure(g);

  // A cycle of length >= 3 is allowed only as the torus image of an infinite
  // path, which shows up as nonzero winding.
  std::string cyc_witness;
  int64_t bad_cycles = 0;
  for (int64_t v = 0; v < g.size(); ++v) {
    if (orb.kind[v] != Orbits::kLongCycle || orb.end[v] != v) continue;
    if (dom.is_torus() && comps.wrapping[comps.label[v]]) continue;
    if (bad_cycles++ == 0) cyc_witness = cycle_text(g, v);
  }
  suites["no_long_cycles"] = suite(bad_cycles == 0, cyc_witness);

  auto members = comps.members();
  int64_t checked = 0, failed = 0;
  std::string st_witness;
  for (int32_t k = 0; k < comps.count(); ++k) {
    if (comps.boundary_touching[k] || comps.wrapping[k]) continue;
    if (orb.kind[members[k][0]] == Orbits::kLongCycle) continue;
    ++checked;
    StructureReport rep = verify_component_structure(members[k], g);
    if (!rep.pass() && failed++ == 0) st_witness = rep.witness;
  }
  suites["structure"] = suite(failed == 0, st_witness);
  suites["structure"]["components_checked"] = checked;

  if (r.weights) {
    MonotoneReport m = check_adjacent_monotone(g, *r.weights);
    suites["monotone"] = suite(m.violations == 0, m.witness);
    suites["monotone"]["pairs_checked"] = m.pairs_checked;
  } else {
    suites["monotone"] = skipped("no weights");
  }

  if (verify_theorem3_preconditions(g).ok()) {
    Json rt = roundtrip_report(g);
    suites["roundtrip"] = suite(rt.at("pass").get<bool>(), rt.value("witness", std::string()));
  } else {
    suites["roundtrip"] = skipped("weight construction preconditions not met");
  }

  if (dom.dim() == 2 && !dom.is_torus()) {
    TopologyReport t = check_topology(comps, dom);
    suites["topology"] = suite(t.pass(), t.witness);
    suites["topology"]["pieces"] = t.pieces;
  } else {
    suites["topology"] = skipped("needs a d = 2 box");
  }

  bool pass = true;
  for (auto& [name, s] : suites.items()) pass = pass && s.at("status") != "fail";
  return {{"pass", pass}, {"suites", suites}, {"domain", dom.describe()}};
}

Json roundtrip_report(const OutMap& g) {
  WeightField w = construct_weights(g, SeededRng(0).derive("roundtrip"));
  OutMap back = build_nn_directed(w);
  int64_t compared = 0, mismatches = 0;
  std::string witness;
  const Domain& dom = g.domain();
  for (int64_t v = 0; v < g.size(); ++v) {
    if (!g.has_out(v)) continue;
    ++compared;
    if (back.out(v) != g.out(v) && mismatches++ == 0)
      witness = dom.site(v).str() + " expected " + dom.site(g.out(v)).str() + " got " +
                (back.has_out(v) ? dom.site(back.out(v)).str() : std::string("none"));
  }
  Json j = {{"pass", mismatches == 0}, {"compared", compared}, {"mismatches", mismatches}};
  if (mismatches) j["witness"] = witness;
  return j;
}

namespace {

struct Options {
  std::string spec_file, model, torus, box, seeds, out, run, format;
  std::optional<uint64_t> seed;
  std::optional<int> dim, level, k, layers;
  bool independent_layers = false;
  bool regions = false, curve = false, timing = false, no_structure = false;
  int64_t cap = CensusOptions{}.cap;
  int nmax = CurveOptions{}.nmax;
  unsigned threads = 0;
};

void add_spec_options(CLI::App* app, Options& o) {
  app->add_option("--spec", o.spec_file, "JSON generator spec or run config");
  app->add_option("--model", o.model, "iid | zm | dyadic | layered | finitek | typec");
  app->add_option("--torus", o.torus, "torus sides, e.g. 128x128");
  app->add_option("--box", o.box, "box sides WxH or corners x0,y0:x1,y1");
  app->add_option("--seed", o.seed, "seed");
  app->add_option("--dim", o.dim, "dimension (iid, dyadic, finitek)");
  app->add_option("--level", o.level, "dyadic level n");
  app->add_option("--k", o.k, "FiniteK k");
  app->add_option("--layers", o.layers, "layer count");
  app->add_flag("--independent-layers", o.independent_layers, "sample each layer separately");
}

// Spec file first, then flags on top of it.
RunConfig build_config(const Options& o) {
  RunConfig c;
  bool have_spec = false;
  if (!o.spec_file.empty()) {
    Json j = parse_json(read_file(o.spec_file), o.spec_file);
    if (j.is_object() && j.contains("spec")) {
      c = run_config_from_json(j);
    } else {
      c.spec = spec_from_json(j);
      if (c.spec.seed) c.seed = *c.spec.seed;
    }
    have_spec = true;
  }
  if (!o.model.empty()) {
    c.spec = spec_for_model(o.model);
    have_spec = true;
  }
  if (!have_spec) throw SpecError("need --spec or --model");
  GeneratorSpec& s = c.spec;
  GeneratorSpec& leaf = s.base ? *s.base : s;
  if (o.dim) leaf.dim = *o.dim;
  if (o.level) leaf.level = *o.level;
  if (o.k) leaf.k = *o.k;
  if (o.layers) s.layers = *o.layers;
  if (o.independent_layers) s.shared = false;
  Json check = to_json(s);  // re-validate after overrides
  c.spec = spec_from_json(check);
  c.spec.seed.reset();
  if (o.seed) c.seed = *o.seed;
  if (!o.torus.empty()) {
    c.torus = parse_sides(o.torus);
    c.box.reset();
  }
  if (!o.box.empty()) {
    c.box = parse_box(o.box);
    c.torus.reset();
  }
  if (!o.seeds.empty()) c.seeds = parse_seed_range(o.seeds);
  c.out = o.out;
  if (!o.format.empty()) c.format = o.format;
  return c;
}

Realization load_or_generate(const Options& o) {
  if (!o.run.empty()) return read_run(o.run).second;
  return generate(build_config(o));
}

void emit(const std::string& text, const std::string& dir, const std::string& name, std::ostream& out) {
  if (dir.empty()) {
    out << text;
    return;
  }
  make_dir(dir);
  write_file(fs::path(dir) / name, text);
}

int cmd_generate(const Options& o, std::ostream& out) {
  RunConfig c = build_config(o);
  if (c.out.empty()) throw SpecError("generate needs --out DIR");
  Realization r = generate(c);
  write_run(c.out, c, r);
  out << Json{{"out", c.out}, {"domain", r.domain.describe()}, {"edges", r.graph.edge_count()}, {"weights", r.weight_source}}.dump()
      << "\n";
  return kExitOk;
}

int cmd_verify(const Options& o, std::ostream& out) {
  Realization r = [&] {
    try {
      return load_or_generate(o);
    } catch (const StructureError& e) {
      out << Json{{"pass", false}, {"error", e.what()}, {"witness", e.witness()}}.dump() << "\n";
      throw;
    }
  }();
  Json report = verify_realization(r);
  emit(report.dump(2) + "\n", o.out, "verify.json", out);
  return report.at("pass").get<bool>() ? kExitOk : kExitPropertyFailure;
}

int cmd_roundtrip(const Options& o, std::ostream& out) {
  Realization r = load_or_generate(o);
  PreconditionReport pre = verify_theorem3_preconditions(r.graph);
  if (!pre.ok()) {
    Json j = {{"pass", false}, {"error", "weight construction preconditions not met"}};
    if (!pre.missing_out.empty()) j["witness"] = "no out-edge at " + pre.missing_out.front().str();
    if (!pre.long_cycles.empty()) {
      std::string s;
      for (const auto& x : pre.long_cycles.front()) s += (s.empty() ? "" : " -> ") + x.str();
      j["witness"] = s;
    }
    emit(j.dump(2) + "\n", o.out, "roundtrip.json", out);
    return kExitPropertyFailure;
  }
  Json j = roundtrip_report(r.graph);
  emit(j.dump(2) + "\n", o.out, "roundtrip.json", out);
  return j.at("pass").get<bool>() ? kExitOk : kExitPropertyFailure;
}

int cmd_census(const Options& o, std::ostream& out) {
  RunConfig c = build_config(o);
  if (c.seeds.empty() && o.seeds.empty()) c.seeds = {c.seed};
  const std::string hash = spec_hash(c.spec);
  if (o.curve) {
    if (c.spec.variant != GeneratorSpec::Variant::IIDWeights || c.spec.dim != 2)
      throw SpecError("--curve needs the iid model in d = 2");
    CurveOptions opt;
    opt.nmax = o.nmax;
    opt.threads = o.threads;
    if (c.torus) {
      if (c.torus->size() != 2 || (*c.torus)[0] != (*c.torus)[1]) throw SpecError("--curve needs a square torus");
      opt.L = (*c.torus)[0];
    }
    opt.block = std::min<int64_t>(opt.block, opt.L);
    if (c.seeds.empty()) return kExitOk;
    CurveEstimate est = connection_probability_curve(c.seeds, opt);
    std::ostringstream p, ratio;
    write_curve_csv(p, est.p, hash);
    write_curve_csv(ratio, est.ratio, hash);
    emit(p.str(), c.out, "curve_p.csv", out);
    if (!c.out.empty()) emit(ratio.str(), c.out, "curve_ratio.csv", out);
    return kExitOk;
  }
  CensusHost host;
  if (c.torus) {
    host.torus = *c.torus;
  } else {
    host.window = c.box ? *c.box : Domain::box_sides(std::vector<int64_t>(c.spec.output_dim(), kDefaultSide));
  }
  if (host.window && host.window->dim() != c.spec.output_dim()) throw SpecError("box dimension does not match the generator");
  if (host.torus && static_cast<int>(host.torus->size()) != c.spec.output_dim())
    throw SpecError("torus dimension does not match the generator");
  CensusOptions opt;
  opt.cap = o.cap;
  opt.structure = !o.no_structure;
  opt.timing = o.timing;
  opt.threads = o.threads;
  std::vector<CensusRecord> recs = component_census(c.spec, host, c.seeds, opt);
  std::ostringstream os;
  if (c.format == "csv") {
    os << "# spec_hash=" << hash << " code_version=" << kCodeVersion << "\n";
    os << "seed,components,infinite,boundary_touching,wrapping,miniloops,long_cycles,max_backward,structure_pass_rate\n";
    for (const auto& r : recs)
      os << r.seed << ',' << r.components << ',' << r.infinite << ',' << r.boundary_touching << ',' << r.wrapping << ','
         << r.miniloops << ',' << r.long_cycles << ',' << r.max_backward << ',' << r.structure_pass_rate << "\n";
    emit(os.str(), c.out, "census.csv", out);
  } else if (c.format == "json") {
    for (const auto& r : recs) os << to_json(r, o.timing).dump() << "\n";
    emit(os.str(), c.out, "census.jsonl", out);
  } else {
    throw SpecError("census --format must be json or csv");
  }
  return kExitOk;
}

int cmd_export(const Options& o, std::ostream& out) {
  Realization r = load_or_generate(o);
  if (r.domain.dim() != 2) throw SpecError("export needs d = 2");
  ComponentLabeling comps = undirected_components(r.graph);
  const std::string format = o.format.empty() ? "svg" : o.format;
  if (o.regions) {
    if (r.domain.is_torus()) throw SpecError("region export needs a box");
    RegionClassification rc = classify_regions(comps, r.domain);
    if (format == "svg") {
      emit(svg_regions(rc, r.domain), o.out, "regions.svg", out);
    } else if (format == "csv") {
      std::ostringstream os;
      write_regions_csv(os, rc, r.domain);
      emit(os.str(), o.out, "regions.csv", out);
    } else {
      throw SpecError("region export --format must be svg or csv");
    }
    return kExitOk;
  }
  if (format == "svg") {
    emit(svg_outmap(r.graph, &comps), o.out, "graph.svg", out);
  } else if (format == "json") {
    std::ostringstream os;
    r.graph.write_jsonl(os);
    emit(os.str(), o.out, "graph.jsonl", out);
  } else {
    throw SpecError("export --format must be svg or json");
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"nnlab: nearest-neighbor graphs on Z^d"};
  app.require_subcommand(1);
  Options o;
  auto* gen = app.add_subcommand("generate", "generate a realization and persist it");
  auto* ver = app.add_subcommand("verify", "run the property suites");
  auto* cen = app.add_subcommand("census", "component census over seeds");
  auto* exp = app.add_subcommand("export", "export SVG or data");
  auto* rt = app.add_subcommand("roundtrip", "weight construction round trip");
  for (auto* sc : {gen, ver, cen, exp, rt}) {
    add_spec_options(sc, o);
    sc->add_option("--out", o.out, "output directory");
    sc->add_option("--format", o.format, "json | csv | svg");
    sc->add_option("--threads", o.threads, "worker threads (capped by NN_LAB_THREADS)");
  }
  for (auto* sc : {ver, exp, rt}) sc->add_option("--run", o.run, "directory written by generate");
  cen->add_option("--seeds", o.seeds, "seed range N..M");
  cen->add_option("--cap", o.cap, "walk step cap for the infinite-component proxy");
  cen->add_flag("--curve", o.curve, "connection probability curve p(n) instead of a census");
  cen->add_option("--nmax", o.nmax, "largest n for --curve");
  cen->add_flag("--timing", o.timing, "include runtime in records");
  cen->add_flag("--no-structure", o.no_structure, "skip the per-component structure check");
  exp->add_flag("--regions", o.regions, "region classification instead of the arrow diagram");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    if (*gen) return cmd_generate(o, out);
    if (*ver) return cmd_verify(o, out);
    if (*cen) return cmd_census(o, out);
    if (*exp) return cmd_export(o, out);
    if (*rt) return cmd_roundtrip(o, out);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIoError;
  } catch (const StructureError& e) {
    err << "property failure: " << e.what() << (e.witness().empty() ? "" : "\nwitness: " + e.witness()) << "\n";
    return kExitPropertyFailure;
  } catch (const SpecError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    // Malformed input files surface here (bad numbers, missing JSON keys).
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace nnlab
