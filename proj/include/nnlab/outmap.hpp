#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "nnlab/lattice.hpp"

namespace nnlab {

// A digraph with out-degree at most one on a finite domain.
class OutMap {
 public:
  explicit OutMap(Domain dom);

  const Domain& domain() const { return dom_; }
  int64_t size() const { return static_cast<int64_t>(out_.size()); }

  bool has_out(int64_t v) const { return out_[v] >= 0; }
  int64_t out(int64_t v) const { return out_[v]; }  // -1 when absent
  std::optional<Site> out(const Site& x) const;

  void set(int64_t v, int64_t w);  // requires w adjacent to v
  void set(const Site& x, const Site& y);
  void set_unchecked(int64_t v, int64_t w) { out_[v] = w; }
  void clear(int64_t v) { out_[v] = -1; }

  int64_t edge_count() const;
  std::vector<DEdge> edges() const;  // sorted by source
  std::vector<int32_t> in_degrees() const;
  const std::vector<int64_t>& raw() const { return out_; }

  // Keeps the edges with both endpoints inside `window` (a box inside a box domain).
  OutMap restricted(const Domain& window) const;

  void write_jsonl(std::ostream& os) const;
  // Throws StructureError on a duplicate source or a non-adjacent edge.
  static OutMap read_jsonl(const Domain& dom, std::istream& is);

  friend bool operator==(const OutMap& a, const OutMap& b) { return a.dom_ == b.dom_ && a.out_ == b.out_; }

 private:
  Domain dom_;
  std::vector<int64_t> out_;
};

}  // namespace nnlab
