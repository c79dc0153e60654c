#include "nnlab/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace nnlab {

Site::Site(std::initializer_list<int64_t> xs) : Site(static_cast<int>(xs.size())) {
  int i = 0;
  for (int64_t v : xs) c[i++] = v;
}

Site Site::from(const std::vector<int64_t>& xs) {
  Site s(static_cast<int>(xs.size()));
  for (size_t i = 0; i < xs.size(); ++i) s.c[i] = xs[i];
  return s;
}

Site Site::unit(int d, int axis, int64_t sign) {
  Site s(d);
  s.c[axis] = sign;
  return s;
}

Site Site::operator+(const Site& o) const {
  Site r = *this;
  for (int i = 0; i < dim; ++i) r.c[i] += o.c[i];
  return r;
}

Site Site::operator-(const Site& o) const {
  Site r = *this;
  for (int i = 0; i < dim; ++i) r.c[i] -= o.c[i];
  return r;
}

Site Site::scaled(int64_t k) const {
  Site r = *this;
  for (int i = 0; i < dim; ++i) r.c[i] *= k;
  return r;
}

std::string Site::str() const {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << c[i];
  os << ')';
  return os.str();
}

int64_t l1_distance(const Site& a, const Site& b) {
  int64_t s = 0;
  for (int i = 0; i < a.dim; ++i) s += std::llabs(a.c[i] - b.c[i]);
  return s;
}

int64_t linf_distance(const Site& a, const Site& b) {
  int64_t s = 0;
  for (int i = 0; i < a.dim; ++i) s = std::max<int64_t>(s, std::llabs(a.c[i] - b.c[i]));
  return s;
}

size_t SiteHash::operator()(const Site& s) const noexcept {
  uint64_t h = 0x9e3779b97f4a7c15ULL ^ static_cast<uint64_t>(s.dim);
  for (int i = 0; i < s.dim; ++i) {
    h ^= static_cast<uint64_t>(s.c[i]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<size_t>(h);
}

UEdge::UEdge(const Site& x, const Site& y) {
  if (x == y) throw DomainError("edge endpoints coincide: " + x.str());
  if (x < y) {
    a = x;
    b = y;
  } else {
    a = y;
    b = x;
  }
}

Domain Domain::box(const Site& lo, const Site& hi) {
  if (lo.dim != hi.dim || lo.dim < 1) throw DomainError("box corners disagree on dimension");
  Domain D;
  D.d_ = lo.dim;
  D.lo_ = lo;
  D.hi_ = hi;
  for (int i = 0; i < D.d_; ++i) {
    if (lo[i] > hi[i]) throw DomainError("box has lo > hi on axis " + std::to_string(i));
    D.side_[i] = hi[i] - lo[i] + 1;
  }
  D.init_strides();
  return D;
}

Domain Domain::box_sides(const std::vector<int64_t>& sides) {
  Site lo(static_cast<int>(sides.size())), hi(static_cast<int>(sides.size()));
  for (size_t i = 0; i < sides.size(); ++i) {
    if (sides[i] < 1) throw DomainError("box side must be positive");
    hi[static_cast<int>(i)] = sides[i] - 1;
  }
  return box(lo, hi);
}

Domain Domain::torus(const std::vector<int64_t>& sides) {
  if (sides.empty() || sides.size() > kMaxDim) throw DomainError("torus dimension out of range");
  Domain D;
  D.torus_ = true;
  D.d_ = static_cast<int>(sides.size());
  D.lo_ = Site(D.d_);
  D.hi_ = Site(D.d_);
  for (int i = 0; i < D.d_; ++i) {
    if (sides[i] < 3) throw DomainError("torus side must be at least 3");
    D.side_[i] = sides[i];
    D.hi_[i] = sides[i] - 1;
  }
  D.init_strides();
  return D;
}

void Domain::init_strides() {
  int64_t s = 1;
  for (int i = d_ - 1; i >= 0; --i) {
    stride_[i] = s;
    s *= side_[i];
  }
  n_ = s;
}

bool Domain::contains(const Site& x) const {
  if (x.dim != d_) return false;
  for (int i = 0; i < d_; ++i)
    if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
  return true;
}

int64_t Domain::index(const Site& x) const {
  if (!contains(x)) throw DomainError("site " + x.str() + " outside " + describe());
  int64_t v = 0;
  for (int i = 0; i < d_; ++i) v += (x[i] - lo_[i]) * stride_[i];
  return v;
}

Site Domain::site(int64_t v) const {
  if (v < 0 || v >= n_) throw DomainError("vertex index out of range");
  Site s(d_);
  for (int i = 0; i < d_; ++i) {
    s[i] = lo_[i] + v / stride_[i];
    v %= stride_[i];
  }
  return s;
}

Site Domain::wrap(const Site& x) const {
  if (!torus_) return x;
  Site r = x;
  for (int i = 0; i < d_; ++i) {
    r[i] %= side_[i];
    if (r[i] < 0) r[i] += side_[i];
  }
  return r;
}

int64_t Domain::step(int64_t v, int axis, int sign) const {
  int64_t coord = (v / stride_[axis]) % side_[axis];
  int64_t nc = coord + sign;
  if (nc < 0 || nc >= side_[axis]) {
    if (!torus_) return -1;
    nc = (nc + side_[axis]) % side_[axis];
  }
  return v + (nc - coord) * stride_[axis];
}

std::vector<int64_t> Domain::neighbor_indices(int64_t v) const {
  std::vector<int64_t> r;
  r.reserve(2 * d_);
  for (int i = 0; i < d_; ++i)
    for (int s : {-1, 1})
      if (int64_t w = step(v, i, s); w >= 0) r.push_back(w);
  return r;
}

bool Domain::adjacent(int64_t u, int64_t v) const {
  for (int i = 0; i < d_; ++i)
    if (step(u, i, 1) == v || step(u, i, -1) == v) return true;
  return false;
}

bool Domain::is_interior(int64_t v) const {
  if (torus_) return true;
  for (int i = 0; i < d_; ++i) {
    int64_t coord = (v / stride_[i]) % side_[i];
    if (coord == 0 || coord == side_[i] - 1) return false;
  }
  return true;
}

bool Domain::near_boundary(int64_t v, int64_t margin) const {
  if (torus_) return false;
  for (int i = 0; i < d_; ++i) {
    int64_t coord = (v / stride_[i]) % side_[i];
    if (coord < margin || coord > side_[i] - 1 - margin) return true;
  }
  return false;
}

bool Domain::slot_valid(int64_t slot) const {
  if (slot < 0 || slot >= num_slots()) return false;
  return step(slot / d_, static_cast<int>(slot % d_), 1) >= 0;
}

int64_t Domain::slot_of(int64_t u, int64_t v) const {
  for (int i = 0; i < d_; ++i) {
    if (step(u, i, 1) == v) return u * d_ + i;
    if (step(v, i, 1) == u) return v * d_ + i;
  }
  throw DomainError("vertices " + site(u).str() + " and " + site(v).str() + " are not adjacent");
}

std::pair<int64_t, int64_t> Domain::slot_ends(int64_t slot) const {
  int64_t v = slot / d_;
  return {v, step(v, static_cast<int>(slot % d_), 1)};
}

int64_t Domain::num_edges() const {
  if (torus_) return n_ * d_;
  int64_t total = 0;
  for (int i = 0; i < d_; ++i) total += n_ / side_[i] * (side_[i] - 1);
  return total;
}

std::string Domain::describe() const {
  std::ostringstream os;
  if (torus_) {
    os << "torus ";
    for (int i = 0; i < d_; ++i) os << (i ? "x" : "") << side_[i];
  } else {
    os << "box " << lo_.str() << ".." << hi_.str();
  }
  return os.str();
}

std::vector<Site> neighbors(const Site& x, const Domain& dom) {
  int64_t v = dom.index(x);
  std::vector<Site> r;
  for (int64_t w : dom.neighbor_indices(v)) r.push_back(dom.site(w));
  std::sort(r.begin(), r.end());
  return r;
}

std::vector<Site> star_neighbors(const Site& x, const Domain& dom) {
  dom.index(x);
  const int d = dom.dim();
  std::vector<Site> r;
  std::vector<int> off(d, -1);
  while (true) {
    bool zero = true;
    Site y = x;
    for (int i = 0; i < d; ++i) {
      y[i] += off[i];
      zero = zero && off[i] == 0;
    }
    if (!zero) {
      Site w = dom.wrap(y);
      if (dom.contains(w) && w != x) r.push_back(w);
    }
    int i = d - 1;
    while (i >= 0 && off[i] == 1) off[i--] = -1;
    if (i < 0) break;
    ++off[i];
  }
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

DualVertex DualVertex::half(int64_t hx, int64_t hy) {
  if ((hx & 1) == 0 || (hy & 1) == 0) throw DomainError("dual vertex needs half-integer coordinates");
  DualVertex v;
  v.x2 = hx;
  v.y2 = hy;
  return v;
}

std::string DualVertex::str() const {
  auto h = [](int64_t t) { return std::to_string(t) + "/2"; };
  return "(" + h(x2) + "," + h(y2) + ")";
}

DualEdge::DualEdge(const DualVertex& p, const DualVertex& q) {
  int64_t dist = std::llabs(p.x2 - q.x2) + std::llabs(p.y2 - q.y2);
  if (dist != 2) throw DomainError("dual vertices " + p.str() + " and " + q.str() + " not adjacent");
  a = std::min(p, q);
  b = std::max(p, q);
}

DualEdge dual_of(const UEdge& e) {
  if (e.a.dim != 2) throw DomainError("dual lattice is only defined for d = 2");
  if (l1_distance(e.a, e.b) != 1) throw DomainError("edge endpoints are not lattice neighbors");
  const Site& x = e.a;
  if (e.b[0] == x[0] + 1) {
    return {DualVertex::half(2 * x[0] + 1, 2 * x[1] - 1), DualVertex::half(2 * x[0] + 1, 2 * x[1] + 1)};
  }
  return {DualVertex::half(2 * x[0] - 1, 2 * x[1] + 1), DualVertex::half(2 * x[0] + 1, 2 * x[1] + 1)};
}

UEdge primal_of(const DualEdge& f) {
  // A vertical dual edge (same x) bisects a horizontal primal edge and vice versa.
  if (f.a.x2 == f.b.x2) {
    int64_t px = (f.a.x2 - 1) / 2;
    int64_t py = (f.a.y2 + 1) / 2;
    return UEdge(Site{px, py}, Site{px + 1, py});
  }
  int64_t px = (f.a.x2 + 1) / 2;
  int64_t py = (f.a.y2 - 1) / 2;
  return UEdge(Site{px, py}, Site{px, py + 1});
}

}  // namespace nnlab
