#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nnlab/generators.hpp"
#include "nnlab/lattice.hpp"
#include "nnlab/stats.hpp"

namespace nnlab {

using Json = nlohmann::json;

inline constexpr const char* kCodeVersion = "nnlab-0.3.0";

Json to_json(const Site& s);
Site site_from_json(const Json& j);

Json to_json(const Domain& d);
Domain domain_from_json(const Json& j);

// {"variant": name, ...} with only the fields the variant reads. Unknown keys
// and wrong types raise SpecError.
Json to_json(const GeneratorSpec& s);
GeneratorSpec spec_from_json(const Json& j);

uint64_t fnv1a64(std::string_view bytes);
// Hex FNV-1a of the canonical (sorted-key, compact) spec document, seed excluded.
std::string spec_hash(const GeneratorSpec& s);

Json to_json(const CensusRecord& r, bool with_runtime = false);

// "128x128" or "64x64x64".
std::vector<int64_t> parse_sides(const std::string& text);
// "WxH[xD]" for [0,W) x [0,H) ..., or "x0,y0:x1,y1" with inclusive corners.
Domain parse_box(const std::string& text);
// "N..M" inclusive, or a single "N".
std::vector<uint64_t> parse_seed_range(const std::string& text);

struct RunConfig {
  GeneratorSpec spec;
  std::optional<std::vector<int64_t>> torus;
  std::optional<Domain> box;
  uint64_t seed = 0;
  std::vector<uint64_t> seeds;
  std::string out;
  std::string format = "json";
};

Json to_json(const RunConfig& c);
RunConfig run_config_from_json(const Json& j);

// curves -> CSV rows "n,p,ci_lo,ci_hi" behind a comment header with hash and version.
void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& pts, const std::string& hash);

}  // namespace nnlab
