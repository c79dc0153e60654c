#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nnlab/lattice.hpp"
#include "nnlab/nngraph.hpp"

namespace nnlab {

// Planar analysis on a d = 2 box window. A site set is a mask over window
// indices (nonzero = member).
using Mask = std::vector<char>;

Mask mask_of(const std::vector<Site>& sites, const Domain& window);
std::vector<Site> sites_of(const Mask& m, const Domain& window);

struct SiteComponents {
  std::vector<int32_t> label;  // -1 outside the set
  std::vector<int64_t> size;
  std::vector<char> touches_boundary;
  int32_t count() const { return static_cast<int32_t>(size.size()); }
};

SiteComponents site_components(const Mask& V, const Domain& window);

// V plus every site-component of its complement that misses the window boundary.
Mask closure(const Mask& V, const Domain& window);

struct DualPath {
  std::vector<DualVertex> vertices;  // closed paths repeat the first vertex at the end
  bool closed = false;
  std::vector<DualEdge> edges() const;
};

// Dual edges separating closure(V) from its complement, oriented with the
// closure on the left and chained into maximal paths and circuits. Paths are
// clipped at the window edge.
std::vector<DualPath> dual_boundary(const Mask& V, const Domain& window);

struct DegreeReport {
  int64_t vertices = 0;
  int64_t checked = 0;  // outside the exempt margin
  int64_t bad = 0;
  std::string witness;
};

// Degree of every dual vertex of B(V); vertices with a surrounding site within
// `margin` of the window edge are exempt.
DegreeReport dual_degrees(const Mask& V, const Domain& window, int64_t margin = 2);

// Sites outside closure(V) along its single open boundary path, with the
// common neighbor inserted between diagonal steps. Throws StructureError when
// the boundary is not a single open path.
std::vector<Site> star_boundary_path(const Mask& V, const Domain& window);

// Collapses repeats and inserts, between consecutive diagonal sites, their
// common site-neighbor that lies outside the closure.
std::vector<Site> insert_common_neighbors(const std::vector<Site>& xs, const std::function<bool(const Site&)>& in_closure);

struct RegionClassification {
  enum class Tag : uint8_t { Unassigned, InClosure, TypeB, TypeC };
  std::vector<Tag> tag;
  std::vector<int32_t> region;         // closure: type-(a) index; otherwise region id
  std::vector<int32_t> a_component;    // component id behind each type-(a) region
  std::vector<int64_t> a_size, b_size, c_size;
  std::vector<std::vector<int32_t>> c_touches_a;  // per type-(c) region, *-adjacent (a) regions
  std::vector<std::vector<int32_t>> c_touches_b;
  int64_t overlaps = 0;
  int64_t unassigned = 0;
  int64_t forbidden = 0;  // type-(c) regions *-adjacent to three or more (a)/(b) regions

  int32_t type_a() const { return static_cast<int32_t>(a_size.size()); }
  int32_t type_b() const { return static_cast<int32_t>(b_size.size()); }
  int32_t type_c() const { return static_cast<int32_t>(c_size.size()); }
};

// Type (a): closures of the components flagged infinite_proxy. The rest of the
// window splits into site-components that touch the boundary (b) or not (c).
RegionClassification classify_regions(const ComponentLabeling& comps, const Domain& window);

struct TopologyReport {
  int64_t pieces = 0;
  int64_t idempotence_failures = 0;
  int64_t neighbor_hole_failures = 0;
  int64_t degree_checked = 0;
  int64_t degree_failures = 0;
  int64_t interior_circuits = 0;  // closed circuits of boundary-touching pieces
  int64_t partition_failures = 0;
  std::string witness;
  bool pass() const {
    return idempotence_failures == 0 && neighbor_hole_failures == 0 && degree_failures == 0 && interior_circuits == 0 &&
           partition_failures == 0;
  }
};

// Runs the closure, neighbor-hole and degree-two checks on every site-component
// of every component's window restriction, then the region partition check.
TopologyReport check_topology(const ComponentLabeling& comps, const Domain& window, int64_t margin = 2);

}  // namespace nnlab
