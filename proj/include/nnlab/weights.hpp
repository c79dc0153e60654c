#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "nnlab/lattice.hpp"
#include "nnlab/outmap.hpp"
#include "nnlab/rng.hpp"

namespace nnlab {

// Real weights on the edges of a domain, indexed by edge slot.
class WeightField {
 public:
  explicit WeightField(Domain dom);

  const Domain& domain() const { return dom_; }
  double at_slot(int64_t slot) const { return w_[slot]; }
  void set_slot(int64_t slot, double x) { w_[slot] = x; }
  double weight(int64_t u, int64_t v) const { return w_[dom_.slot_of(u, v)]; }
  double weight(const UEdge& e) const;
  const std::vector<double>& raw() const { return w_; }

  // Returns the first pair of slots sharing a weight, or {-1,-1}.
  std::pair<int64_t, int64_t> find_tie() const;

  // CSV: a0..a{d-1}, b0..b{d-1}, weight (hex float, exact round trip).
  void write_csv(std::ostream& os) const;
  static WeightField read_csv(const Domain& dom, std::istream& is);

  friend bool operator==(const WeightField& a, const WeightField& b);

 private:
  Domain dom_;
  std::vector<double> w_;  // NaN on invalid slots
};

WeightField sample_iid_uniform(const Domain& dom, const SeededRng& rng);

// Backward-set sizes #C_x for every vertex, in linear time. Throws
// StructureError when g has a directed cycle of length >= 3.
std::vector<int64_t> backward_sizes(const OutMap& g);

// Weight 1/(V(e)+U(e)) on edges of g and 1+U(e) elsewhere.
WeightField construct_weights(const OutMap& g, const SeededRng& rng);

struct PreconditionReport {
  std::vector<Site> missing_out;        // active vertices with no out-edge
  std::vector<std::vector<Site>> long_cycles;
  std::vector<DEdge> off_lattice;       // always empty for an OutMap; kept for file input
  bool ok() const { return missing_out.empty() && long_cycles.empty() && off_lattice.empty(); }
};

// Active vertices: all torus vertices; interior vertices of a box.
PreconditionReport verify_theorem3_preconditions(const OutMap& g);
PreconditionReport verify_theorem3_preconditions(const OutMap& g, const std::vector<char>& active);

}  // namespace nnlab
