#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nnlab/lattice.hpp"
#include "nnlab/outmap.hpp"
#include "nnlab/weights.hpp"

namespace nnlab {

// Each vertex points along its minimum-weight incident edge. Throws
// StructureError if two weights coincide.
OutMap build_nn_directed(const WeightField& w);

struct ComponentLabeling {
  std::vector<int32_t> label;  // per vertex, dense ids from 0
  std::vector<int64_t> size;
  std::vector<char> boundary_touching;  // box: some vertex within distance 2 of the boundary
  std::vector<char> wrapping;           // torus: terminal cycle winds around the torus
  std::vector<char> infinite_proxy;     // the flag censuses count
  std::vector<int32_t> miniloops;

  int32_t count() const { return static_cast<int32_t>(size.size()); }
  int32_t infinite_count() const;
  std::vector<std::vector<int64_t>> members() const;
};

ComponentLabeling undirected_components(const OutMap& g);

struct PathTrace {
  enum class Terminal { TwoCycle, ExitedDomain, StepCapReached };
  std::vector<Site> vertices;  // for TwoCycle the final entry repeats the previous-but-one
  Terminal terminal = Terminal::ExitedDomain;
  Site u, v;                   // two-cycle endpoints, u entered first
  size_t edges() const { return vertices.empty() ? 0 : vertices.size() - 1; }
};

// step_cap < 0 selects the default of four times the domain size.
PathTrace forward_path(const Site& x, const OutMap& g, int64_t step_cap = -1);

std::vector<Site> backward_set(const Site& x, const OutMap& g);

bool check_monotone_decreasing(const PathTrace& trace, const WeightField& w);
std::pair<double, double> infimum_supremum_along(const PathTrace& trace, const WeightField& w);

std::optional<Site> r_descendant(const Site& x, double r, const OutMap& g, const WeightField& w);

struct StructureReport {
  int64_t vertices = 0;
  int64_t directed_edges = 0;
  int64_t undirected_edges = 0;
  int64_t two_cycles = 0;
  bool tree = false;
  bool one_miniloop = false;
  bool oriented = false;  // every forward path ends in the miniloop
  std::string witness;
  bool pass() const { return tree && one_miniloop && oriented; }
};

StructureReport verify_component_structure(const std::vector<int64_t>& component, const OutMap& g);

// Per-vertex terminal of the forward orbit.
struct Orbits {
  enum Kind : uint8_t { kTwoCycle = 0, kSink = 1, kLongCycle = 2 };
  std::vector<uint8_t> kind;
  std::vector<int64_t> end;  // 2-cycle: smaller endpoint; sink: the sink; long cycle: smallest cycle vertex
  std::vector<int64_t> entry;  // first vertex of the terminal cycle reached (or the sink)
  int64_t long_cycles = 0;
};

Orbits orbit_structure(const OutMap& g);

struct MonotoneReport {
  int64_t pairs_checked = 0;
  int64_t violations = 0;
  std::string witness;
};

// Checks w(x,y) > w(y,z) for every pair of edges x->y->z with x != z.
MonotoneReport check_adjacent_monotone(const OutMap& g, const WeightField& w);

}  // namespace nnlab
