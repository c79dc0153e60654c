#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnlab {

constexpr int kMaxDim = 8;

class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a graph violates a structural invariant. The witness is a list
// of sites rendered as text (e.g. the offending cycle).
class StructureError : public std::runtime_error {
 public:
  StructureError(const std::string& what, std::string witness = {})
      : std::runtime_error(what), witness_(std::move(witness)) {}
  const std::string& witness() const { return witness_; }

 private:
  std::string witness_;
};

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Site {
  int dim = 0;
  std::array<int64_t, kMaxDim> c{};

  Site() = default;
  explicit Site(int d) : dim(d) {
    if (d < 1 || d > kMaxDim) throw DomainError("dimension out of range: " + std::to_string(d));
  }
  Site(std::initializer_list<int64_t> xs);
  static Site from(const std::vector<int64_t>& xs);
  static Site unit(int d, int axis, int64_t sign = 1);

  int64_t& operator[](int i) { return c[i]; }
  int64_t operator[](int i) const { return c[i]; }

  Site operator+(const Site& o) const;
  Site operator-(const Site& o) const;
  Site scaled(int64_t k) const;

  std::vector<int64_t> to_vector() const { return {c.begin(), c.begin() + dim}; }
  std::string str() const;

  friend bool operator==(const Site& a, const Site& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i)
      if (a.c[i] != b.c[i]) return false;
    return true;
  }
  friend std::strong_ordering operator<=>(const Site& a, const Site& b) {
    if (a.dim != b.dim) return a.dim <=> b.dim;
    for (int i = 0; i < a.dim; ++i)
      if (auto r = a.c[i] <=> b.c[i]; r != 0) return r;
    return std::strong_ordering::equal;
  }
};

int64_t l1_distance(const Site& a, const Site& b);
int64_t linf_distance(const Site& a, const Site& b);

struct SiteHash {
  size_t operator()(const Site& s) const noexcept;
};

// Undirected edge, stored with the lexicographically smaller endpoint first.
struct UEdge {
  Site a, b;
  UEdge() = default;
  UEdge(const Site& x, const Site& y);
  friend bool operator==(const UEdge&, const UEdge&) = default;
  friend auto operator<=>(const UEdge&, const UEdge&) = default;
};

struct DEdge {
  Site from, to;
  friend bool operator==(const DEdge&, const DEdge&) = default;
  friend auto operator<=>(const DEdge&, const DEdge&) = default;
};

// Box{lo, hi} with inclusive bounds, or a torus with the given side lengths.
// Vertices carry dense indices; axis 0 is the most significant, so index
// order is lexicographic site order.
class Domain {
 public:
  static Domain box(const Site& lo, const Site& hi);
  static Domain box_sides(const std::vector<int64_t>& sides);  // [0, side) per axis
  static Domain torus(const std::vector<int64_t>& sides);

  bool is_torus() const { return torus_; }
  int dim() const { return d_; }
  int64_t size() const { return n_; }
  const Site& lo() const { return lo_; }
  const Site& hi() const { return hi_; }
  int64_t side(int axis) const { return side_[axis]; }

  bool contains(const Site& x) const;
  int64_t index(const Site& x) const;  // throws DomainError when outside
  Site site(int64_t v) const;
  Site wrap(const Site& x) const;  // torus reduction; identity on boxes

  // Neighbor of v along axis in direction sign (+1/-1); -1 if truncated.
  int64_t step(int64_t v, int axis, int sign) const;
  std::vector<int64_t> neighbor_indices(int64_t v) const;
  bool adjacent(int64_t u, int64_t v) const;

  // True when all 2d neighbors exist (always on a torus).
  bool is_interior(int64_t v) const;
  // Within L-infinity distance `margin` of the box boundary (never on a torus).
  bool near_boundary(int64_t v, int64_t margin = 1) const;

  // Edge slots: slot v*d + axis is the edge {v, v + e_axis}.
  int64_t num_slots() const { return n_ * d_; }
  bool slot_valid(int64_t slot) const;
  int64_t slot_of(int64_t u, int64_t v) const;  // throws if not adjacent
  std::pair<int64_t, int64_t> slot_ends(int64_t slot) const;
  int64_t num_edges() const;

  std::string describe() const;
  friend bool operator==(const Domain&, const Domain&) = default;

 private:
  bool torus_ = false;
  int d_ = 0;
  Site lo_, hi_;
  std::array<int64_t, kMaxDim> side_{};
  std::array<int64_t, kMaxDim> stride_{};
  int64_t n_ = 0;
  void init_strides();
};

std::vector<Site> neighbors(const Site& x, const Domain& dom);
std::vector<Site> star_neighbors(const Site& x, const Domain& dom);

// Dual lattice of Z^2. Dual vertices live at Z^2 + (1/2,1/2); we store twice
// the coordinates, so both entries are odd.
struct DualVertex {
  int64_t x2 = 1, y2 = 1;
  static DualVertex half(int64_t hx, int64_t hy);  // from doubled coordinates
  std::string str() const;
  friend bool operator==(const DualVertex&, const DualVertex&) = default;
  friend auto operator<=>(const DualVertex&, const DualVertex&) = default;
};

struct DualEdge {
  DualVertex a, b;  // a < b
  DualEdge() = default;
  DualEdge(const DualVertex& p, const DualVertex& q);
  friend bool operator==(const DualEdge&, const DualEdge&) = default;
  friend auto operator<=>(const DualEdge&, const DualEdge&) = default;
};

DualEdge dual_of(const UEdge& e);
UEdge primal_of(const DualEdge& f);

}  // namespace nnlab
