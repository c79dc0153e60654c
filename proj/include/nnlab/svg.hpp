#pragma once

#include <iosfwd>
#include <string>

#include "nnlab/nngraph.hpp"
#include "nnlab/outmap.hpp"
#include "nnlab/topology.hpp"

namespace nnlab {

// Arrow diagram of a d = 2 OutMap: axis 0 runs right, axis 1 runs up. Sites
// are colored by component label when `comps` is given. Each arrow carries
// data-from/data-to attributes so the output can be checked as text.
std::string svg_outmap(const OutMap& g, const ComponentLabeling* comps = nullptr);

// Region overlay: type-(a) cells shaded by component, (b) and (c) hatched.
std::string svg_regions(const RegionClassification& rc, const Domain& window);

// One row per window site: x,y,tag,region.
void write_regions_csv(std::ostream& os, const RegionClassification& rc, const Domain& window);

}  // namespace nnlab
