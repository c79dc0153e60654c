#include "nnlab/io.hpp"

#include <charconv>
#include <cstdio>
#include <ostream>
#include <set>
#include <sstream>

namespace nnlab {

namespace {

int64_t parse_int(std::string_view s, const char* what) {
  int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw SpecError(std::string("bad ") + what + ": '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i)
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  return out;
}

void require_keys(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
  if (!j.is_object()) throw SpecError(std::string(what) + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw SpecError(std::string("unknown key in ") + what + ": " + it.key());
}

template <class T>
T get(const Json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw SpecError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

Json to_json(const Site& s) { return Json(s.to_vector()); }

Site site_from_json(const Json& j) {
  try {
    return Site::from(j.get<std::vector<int64_t>>());
  } catch (const Json::exception& e) {
    throw SpecError(std::string("bad site: ") + e.what());
  }
}

Json to_json(const Domain& d) {
  if (d.is_torus()) {
    std::vector<int64_t> sides;
    for (int i = 0; i < d.dim(); ++i) sides.push_back(d.side(i));
    return {{"torus", sides}};
  }
  return {{"lo", to_json(d.lo())}, {"hi", to_json(d.hi())}};
}

Domain domain_from_json(const Json& j) {
  if (j.contains("torus")) return Domain::torus(get<std::vector<int64_t>>(j, "torus", {}));
  if (j.contains("lo") && j.contains("hi")) return Domain::box(site_from_json(j.at("lo")), site_from_json(j.at("hi")));
  throw SpecError("domain needs 'torus' or 'lo'/'hi'");
}

Json to_json(const GeneratorSpec& s) {
  using V = GeneratorSpec::Variant;
  Json j = {{"variant", variant_name(s.variant)}};
  switch (s.variant) {
    case V::IIDWeights:
      j["dim"] = s.dim;
      break;
    case V::ZernerMerkl:
      break;
    case V::Dyadic:
      j["dim"] = s.dim;
      j["level"] = s.level;
      if (s.shift) j["shift"] = *s.shift;
      break;
    case V::FiniteK:
      j["dim"] = s.dim;
      j["level"] = s.level;
      j["k"] = s.k;
      break;
    case V::Layered:
      j["layers"] = s.layers;
      j["shared"] = s.shared;
      j["base"] = to_json(*s.base);
      break;
    case V::TypeCModified:
      j["base"] = to_json(*s.base);
      break;
  }
  if (s.seed) j["seed"] = *s.seed;
  return j;
}

GeneratorSpec spec_from_json(const Json& j) {
  require_keys(j, {"variant", "dim", "level", "shift", "k", "layers", "shared", "base", "seed"}, "generator spec");
  if (!j.contains("variant") || !j.at("variant").is_string()) throw SpecError("generator spec needs a string 'variant'");
  GeneratorSpec s = spec_for_model(j.at("variant").get<std::string>());
  using V = GeneratorSpec::Variant;
  s.dim = get<int>(j, "dim", s.dim);
  s.level = get<int>(j, "level", s.level);
  s.k = get<int>(j, "k", s.k);
  s.layers = get<int>(j, "layers", s.layers);
  s.shared = get<bool>(j, "shared", s.shared);
  if (j.contains("shift")) s.shift = get<std::vector<int64_t>>(j, "shift", {});
  if (j.contains("seed")) s.seed = get<uint64_t>(j, "seed", 0);
  if (j.contains("base")) s.base = std::make_shared<GeneratorSpec>(spec_from_json(j.at("base")));

  if (s.variant == V::ZernerMerkl) s.dim = 2;
  if (s.dim < 1 || s.dim > kMaxDim) throw SpecError("dim out of range");
  if ((s.variant == V::Dyadic || s.variant == V::FiniteK) && (s.level < 1 || s.level > 60))
    throw SpecError("level must be in 1..60");
  if (s.variant == V::FiniteK && (s.k < 1 || s.dim < 2)) throw SpecError("FiniteK needs k >= 1 and dim >= 2");
  if (s.variant == V::Layered && s.layers < 1) throw SpecError("layers must be positive");
  if (s.shift && static_cast<int>(s.shift->size()) != s.dim) throw SpecError("shift length must equal dim");
  if (s.shift)
    for (int64_t z : *s.shift)
      if (z < 0 || (s.level < 63 && z >= (int64_t{1} << s.level))) throw SpecError("shift entries must lie in [0, 2^level)");
  if (s.output_dim() > kMaxDim) throw SpecError("output dimension out of range");
  return s;
}

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string spec_hash(const GeneratorSpec& s) {
  Json j = to_json(s);
  j.erase("seed");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

Json to_json(const CensusRecord& r, bool with_runtime) {
  Json hist = Json::object();
  for (auto [bin, n] : r.size_histogram) hist[std::to_string(bin)] = n;
  Json j = {{"spec_hash", r.spec_hash},
            {"code_version", r.code_version},
            {"seed", r.seed},
            {"host", r.host},
            {"components", r.components},
            {"infinite", r.infinite},
            {"boundary_touching", r.boundary_touching},
            {"wrapping", r.wrapping},
            {"size_log2_histogram", hist},
            {"miniloops", r.miniloops},
            {"long_cycles", r.long_cycles},
            {"max_backward", r.max_backward},
            {"max_backward_capped", r.max_backward_capped},
            {"structure_checked", r.structure_checked},
            {"structure_pass_rate", r.structure_pass_rate}};
  if (with_runtime && r.runtime_s) j["runtime_s"] = *r.runtime_s;
  return j;
}

std::vector<int64_t> parse_sides(const std::string& text) {
  std::vector<int64_t> sides;
  for (auto part : split(text, 'x')) {
    int64_t v = parse_int(part, "side");
    if (v < 1) throw SpecError("sides must be positive: " + text);
    sides.push_back(v);
  }
  if (sides.empty() || sides.size() > static_cast<size_t>(kMaxDim)) throw SpecError("bad size list: " + text);
  return sides;
}

Domain parse_box(const std::string& text) {
  auto corners = split(text, ':');
  if (corners.size() == 1) return Domain::box_sides(parse_sides(text));
  if (corners.size() != 2) throw SpecError("bad box: " + text);
  std::vector<int64_t> lo, hi;
  for (auto p : split(corners[0], ',')) lo.push_back(parse_int(p, "box corner"));
  for (auto p : split(corners[1], ',')) hi.push_back(parse_int(p, "box corner"));
  if (lo.size() != hi.size()) throw SpecError("box corners differ in dimension: " + text);
  for (size_t i = 0; i < lo.size(); ++i)
    if (lo[i] > hi[i]) throw SpecError("box corner order: " + text);
  return Domain::box(Site::from(lo), Site::from(hi));
}

std::vector<uint64_t> parse_seed_range(const std::string& text) {
  auto dots = text.find("..");
  if (dots == std::string::npos) {
    int64_t s = parse_int(text, "seed");
    if (s < 0) throw SpecError("seeds must be nonnegative");
    return {static_cast<uint64_t>(s)};
  }
  int64_t a = parse_int(std::string_view(text).substr(0, dots), "seed range");
  int64_t b = parse_int(std::string_view(text).substr(dots + 2), "seed range");
  if (a < 0 || b < 0) throw SpecError("seeds must be nonnegative");
  std::vector<uint64_t> out;
  for (int64_t s = a; s <= b; ++s) out.push_back(static_cast<uint64_t>(s));
  return out;  // empty when b < a
}

Json to_json(const RunConfig& c) {
  Json j = {{"spec", to_json(c.spec)}, {"seed", c.seed}, {"seeds", c.seeds}, {"format", c.format}};
  if (c.torus) j["domain"] = {{"torus", *c.torus}};
  if (c.box) j["domain"] = to_json(*c.box);
  if (!c.out.empty()) j["out"] = c.out;
  return j;
}

RunConfig run_config_from_json(const Json& j) {
  require_keys(j, {"spec", "domain", "seed", "seeds", "out", "format"}, "run config");
  RunConfig c;
  if (!j.contains("spec")) throw SpecError("run config needs 'spec'");
  c.spec = spec_from_json(j.at("spec"));
  if (j.contains("domain")) {
    Domain d = domain_from_json(j.at("domain"));
    if (d.is_torus()) {
      std::vector<int64_t> sides;
      for (int i = 0; i < d.dim(); ++i) sides.push_back(d.side(i));
      c.torus = sides;
    } else {
      c.box = d;
    }
  }
  c.seed = get<uint64_t>(j, "seed", 0);
  c.seeds = get<std::vector<uint64_t>>(j, "seeds", {});
  c.out = get<std::string>(j, "out", "");
  c.format = get<std::string>(j, "format", "json");
  return c;
}

void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& pts, const std::string& hash) {
  os << "# spec_hash=" << hash << " code_version=" << kCodeVersion << "\n";
  os << "n,p,ci_lo,ci_hi\n";
  char buf[128];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", p.n, p.value, p.lo, p.hi);
    os << buf;
  }
}

}  // namespace nnlab
