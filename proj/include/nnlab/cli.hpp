#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "nnlab/io.hpp"
#include "nnlab/outmap.hpp"
#include "nnlab/weights.hpp"

namespace nnlab {

enum ExitCode : int { kExitOk = 0, kExitPropertyFailure = 1, kExitConfigError = 2, kExitIoError = 3 };

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Realization {
  Domain domain;
  OutMap graph;
  std::optional<WeightField> weights;
  std::string weight_source;  // "sampled", "constructed" or "none"
};

// Domain a config asks for: its box, its torus, or a default torus of side 64.
Domain resolve_domain(const RunConfig& c);
Realization generate(const RunConfig& c);

// Writes graph.jsonl, weights.csv (when present) and manifest.json into dir.
void write_run(const std::string& dir, const RunConfig& c, const Realization& r);
// Reads a directory written by write_run.
std::pair<RunConfig, Realization> read_run(const std::string& dir);

// Property suites over one realization; "pass" is true iff no suite failed.
Json verify_realization(const Realization& r);
// build_nn_directed(construct_weights(g)) against g at every vertex with an out-edge.
Json roundtrip_report(const OutMap& g);

// Entry point for the nnlab executable. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nnlab
