#include "nnlab/generators.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <map>
#include <set>

#include "nnlab/nngraph.hpp"

namespace nnlab {

namespace {

int64_t floor_div(int64_t a, int64_t b) {
  int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int64_t mod(int64_t a, int64_t b) { return a - floor_div(a, b) * b; }

uint64_t coord_key(const Site& x) {
  uint64_t h = 0x243f6a8885a308d3ULL;
  for (int i = 0; i < x.dim; ++i) h = SeededRng::mix(h ^ static_cast<uint64_t>(x[i]));
  return h;
}

Site wrap_mod(Site x, int64_t side) {
  for (int i = 0; i < x.dim; ++i) x[i] = mod(x[i], side);
  return x;
}

}  // namespace

OutMap realize(const LatticeRule& rule, const Domain& window) {
  if (window.is_torus()) throw DomainError("realize expects a box window");
  if (window.dim() != rule.dim()) throw DomainError("rule and window dimensions differ");
  OutMap g(window);
  for (int64_t v = 0; v < window.size(); ++v) {
    auto y = rule.out(rule.canonical(window.site(v)));
    if (y && window.contains(*y)) g.set_unchecked(v, window.index(*y));
  }
  return g;
}

double IidRule::weight(const Site& x, int axis) const {
  return rng_.uniform(rng_.bits(coord_key(x), static_cast<uint64_t>(axis)));
}

std::optional<Site> IidRule::out(const Site& x) const {
  Site best;
  double bw = 2.0;
  for (int i = 0; i < d_; ++i) {
    Site up = x + Site::unit(d_, i);
    Site down = x - Site::unit(d_, i);
    double wu = weight(x, i), wd = weight(down, i);
    if (wu == wd || wu == bw || wd == bw) throw StructureError("tied hashed weights", x.str());
    if (wu < bw) {
      bw = wu;
      best = up;
    }
    if (wd < bw) {
      bw = wd;
      best = down;
    }
  }
  return best;
}

ZernerMerklRule::ZernerMerklRule(SeededRng rng, Mode mode, int64_t param)
    : cells_(rng.derive("cells")), mode_(mode), param_(param), shift_(2) {
  if (mode == Mode::Cylinder && param <= 0) throw SpecError("cylinder period must be positive");
  if (mode == Mode::Torus && (param < 6 || param % 2)) throw SpecError("torus side must be even and at least 6");
  uint64_t u = rng.derive("shift").below(0, 4);
  shift_[0] = static_cast<int64_t>(u & 1);
  shift_[1] = static_cast<int64_t>(u >> 1);
}

int ZernerMerklRule::cell_bit(int64_t c1, int64_t c2) const {
  if (mode_ == Mode::Cylinder) {
    int64_t t = floor_div(c1 - c2 + param_, 2 * param_);
    c1 -= t * param_;
    c2 += t * param_;
  } else if (mode_ == Mode::Torus) {
    c1 = mod(c1, param_ / 2);
    c2 = mod(c2, param_ / 2);
  }
  for (const auto& f : forced_)
    if (f[0] == c1 && f[1] == c2) return static_cast<int>(f[2]);
  return static_cast<int>(cells_.bits(static_cast<uint64_t>(c1), static_cast<uint64_t>(c2)) & 1);
}

Site ZernerMerklRule::canonical(const Site& x) const {
  if (mode_ == Mode::Plane) return x;
  if (mode_ == Mode::Torus) return wrap_mod(x, param_);
  const int64_t P = 2 * param_;
  int64_t t = floor_div(x[0] - x[1] + P, 2 * P);
  Site r = x;
  r[0] -= t * P;
  r[1] += t * P;
  return r;
}

std::optional<Site> ZernerMerklRule::out(const Site& x) const {
  const int64_t y1 = x[0] - shift_[0], y2 = x[1] - shift_[1];
  const int64_t c1 = floor_div(y1, 2), c2 = floor_div(y2, 2);
  const int64_t r1 = y1 - 2 * c1, r2 = y2 - 2 * c2;
  int64_t d1 = 0, d2 = 0;
  if (cell_bit(c1, c2)) {
    // 2c -> 2c+e2 -> 2c+2e2, 2c+e1 -> 2c+e1-e2, 2c+e1+e2 -> 2c+e1
    if (r1 == 0) d2 = 1;
    else d2 = -1;
  } else {
    // 2c -> 2c+e1 -> 2c+2e1, 2c+e2 -> 2c+e2-e1, 2c+e1+e2 -> 2c+e2
    if (r2 == 0) d1 = 1;
    else d1 = -1;
  }
  return canonical(Site{x[0] + d1, x[1] + d2});
}

int gen_dyadic_k(const Site& x) {
  uint64_t bits = 0;
  for (int i = 0; i < x.dim; ++i) {
    if (x[i] < 0) throw DomainError("site " + x.str() + " is outside the nonnegative orthant");
    bits |= static_cast<uint64_t>(x[i]);
  }
  if (bits == 0) throw DomainError("k(x) is undefined at the origin");
  return 1 + std::countr_zero(bits);
}

int gen_dyadic_i(const Site& x) {
  const int k = gen_dyadic_k(x);
  for (int i = x.dim - 1; i >= 0; --i)
    if ((static_cast<uint64_t>(x[i]) >> (k - 1)) & 1) return i + 1;
  throw DomainError("no odd coordinate at level k");  // unreachable
}

Site sample_dyadic_shift(int d, int n, const SeededRng& rng) {
  if (n < 1 || n > 60) throw SpecError("dyadic level must lie in [1, 60]");
  Site z(d);
  for (int i = 0; i < d; ++i) z[i] = static_cast<int64_t>(rng.below(static_cast<uint64_t>(i), uint64_t{1} << n));
  return z;
}

DyadicRule::DyadicRule(int d, int n, Site z, bool torus) : d_(d), n_(n), z_(std::move(z)), torus_(torus) {
  if (n < 1 || n > 60) throw SpecError("dyadic level must lie in [1, 60]");
  if (z_.dim != d) throw SpecError("dyadic shift has the wrong dimension");
  if (torus && (int64_t{1} << n) < 3) throw SpecError("dyadic torus needs level at least 2");
  for (int i = 0; i < d; ++i)
    if (z_[i] < 0 || z_[i] >= (int64_t{1} << n)) throw SpecError("dyadic shift outside {0..2^n-1}^d");
}

Site DyadicRule::canonical(const Site& x) const { return torus_ ? wrap_mod(x, int64_t{1} << n_) : x; }

std::optional<Site> DyadicRule::out(const Site& x) const {
  Site y = x + z_;
  if (torus_) y = wrap_mod(y, int64_t{1} << n_);
  bool zero = true;
  for (int i = 0; i < d_; ++i) zero = zero && y[i] == 0;
  Site r = x;
  if (zero) {
    if (!torus_) return std::nullopt;
    r[0] += 1;
  } else {
    r[gen_dyadic_i(y) - 1] -= 1;
  }
  return canonical(r);
}

LayeredRule::LayeredRule(int base_dim, Factory per_layer) : base_dim_(base_dim), factory_(std::move(per_layer)) {}

const LatticeRule& LayeredRule::layer(int64_t h) const {
  for (const auto& [k, r] : cache_)
    if (k == h) return *r;
  cache_.emplace_back(h, factory_(h));
  return *cache_.back().second;
}

Site LayeredRule::canonical(const Site& x) const {
  Site b(base_dim_);
  for (int i = 0; i < base_dim_; ++i) b[i] = x[i];
  b = layer(x[base_dim_]).canonical(b);
  Site r = x;
  for (int i = 0; i < base_dim_; ++i) r[i] = b[i];
  return r;
}

std::optional<Site> LayeredRule::out(const Site& x) const {
  Site b(base_dim_);
  for (int i = 0; i < base_dim_; ++i) b[i] = x[i];
  auto y = layer(x[base_dim_]).out(b);
  if (!y) return std::nullopt;
  Site r = x;
  for (int i = 0; i < base_dim_; ++i) r[i] = (*y)[i];
  return r;
}

FiniteKRule::FiniteKRule(int k, int d, int n, const SeededRng& rng, bool torus)
    : k_(k), d_(d), n_(n), torus_(torus), shift_(d) {
  if (k < 2) throw SpecError("FiniteK needs k >= 2");
  if (d < 3) throw SpecError("FiniteK needs d >= 3");
  SeededRng lr = rng.derive("layer");
  for (int j = 1; j <= k; ++j) layers_.emplace_back(d, n, sample_dyadic_shift(d, n, lr.derive(static_cast<uint64_t>(j))), torus);
  SeededRng sr = rng.derive("shift");
  for (int i = 0; i < d; ++i) shift_[i] = static_cast<int64_t>(sr.below(static_cast<uint64_t>(i), static_cast<uint64_t>(4 * k - 1)));

  // Filler pattern on the cube [-2k, 2k)^d around the origin; every other
  // cube R_x is a translate by a multiple of 4k.
  const int64_t side = 4 * k;
  int64_t cells = 1;
  for (int i = 0; i < d; ++i) cells *= side;
  filler_.assign(cells, -1);
  auto offset_site = [&](int64_t idx) {
    Site s(d);
    for (int i = d - 1; i >= 0; --i) {
      s[i] = idx % side - 2 * k;
      idx /= side;
    }
    return s;
  };
  auto offset_index = [&](const Site& s) {
    int64_t idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * side + (s[i] + 2 * k);
    return idx;
  };
  std::vector<Site> region;
  for (int64_t idx = 0; idx < cells; ++idx) {
    Site s = offset_site(idx);
    if (sublattice_of(s) == 0) region.push_back(s);
  }
  for (const DEdge& e : fill_region(region)) filler_[offset_index(e.from)] = static_cast<int32_t>(offset_index(e.to));
}

int64_t FiniteKRule::torus_side() const { return 4 * k_ * (int64_t{1} << n_); }

Site FiniteKRule::canonical(const Site& x) const { return torus_ ? wrap_mod(x, torus_side()) : x; }

int FiniteKRule::sublattice_of(const Site& p) const {
  for (int j = 1; j <= k_; ++j) {
    int zeros = 0;
    for (int i = 0; i < d_; ++i) zeros += mod(p[i] - 4 * (j - 1), 4 * k_) == 0;
    if (zeros >= d_ - 1) return j;
  }
  return 0;
}

int FiniteKRule::memberships(const Site& p) const {
  int count = 0;
  for (int j = 1; j <= k_; ++j) {
    int zeros = 0;
    for (int i = 0; i < d_; ++i) zeros += mod(p[i] - 4 * (j - 1), 4 * k_) == 0;
    count += zeros >= d_ - 1;
  }
  return count;
}

std::optional<Site> FiniteKRule::out_unshifted(const Site& p) const {
  const int64_t side = 4 * k_;
  const int j = sublattice_of(p);
  if (j == 0) {
    Site base(d_);
    int64_t idx = 0;
    for (int i = 0; i < d_; ++i) {
      base[i] = floor_div(p[i] + 2 * k_, side) * side;
      idx = idx * side + (p[i] - base[i] + 2 * k_);
    }
    int64_t t = filler_[idx];
    if (t < 0) throw StructureError("filler table hole", p.str());
    Site r = base;
    for (int i = d_ - 1; i >= 0; --i) {
      r[i] += t % side - 2 * k_;
      t /= side;
    }
    return canonical(r);
  }
  const DyadicRule& G = layers_[j - 1];
  const int64_t off = 4 * (j - 1);
  Site coarse(d_);
  int axis = -1;
  int64_t ell = 0;
  for (int i = 0; i < d_; ++i) {
    int64_t q = p[i] - off;
    coarse[i] = floor_div(q, side);
    if (int64_t rres = q - coarse[i] * side; rres != 0) {
      axis = i;
      ell = rres;
    }
  }
  coarse = G.canonical(coarse);
  Site r = p;
  if (axis < 0) {
    auto y = G.out(coarse);
    if (!y) return std::nullopt;
    Site delta = *y - coarse;
    for (int i = 0; i < d_; ++i) {
      if (delta[i] > 1) delta[i] = -1;  // torus wrap
      if (delta[i] < -1) delta[i] = 1;
      r[i] += delta[i];
    }
    return canonical(r);
  }
  const Site next = G.canonical(coarse + Site::unit(d_, axis));
  auto gx = G.out(coarse);
  auto gy = G.out(next);
  const bool fwd = gx && *gx == next;
  const bool bwd = gy && *gy == coarse;
  int64_t step;
  if (fwd && bwd) {
    step = ell <= 2 * k_ ? 1 : -1;  // coarse 2-cycle: a miniloop on the middle edge
  } else if (fwd) {
    step = 1;
  } else if (bwd) {
    step = -1;
  } else {
    step = ell <= 2 * k_ ? -1 : 1;
  }
  r[axis] += step;
  return canonical(r);
}

std::optional<Site> FiniteKRule::out(const Site& x) const {
  auto y = out_unshifted(canonical(x - shift_));
  if (!y) return std::nullopt;
  return canonical(*y + shift_);
}

std::vector<Site> TypeCRule::in_neighbors(const Site& x) const {
  std::vector<Site> r;
  const int d = base_->dim();
  for (int i = 0; i < d; ++i)
    for (int s : {-1, 1}) {
      Site y = base_->canonical(x + Site::unit(d, i, s));
      if (auto o = base_->out(y); o && *o == x) r.push_back(y);
    }
  return r;
}

std::optional<Site> TypeCRule::out(const Site& x) const {
  std::vector<Site> ins = in_neighbors(x);
  if (!ins.empty() && std::all_of(ins.begin(), ins.end(), [&](const Site& y) { return in_neighbors(y).empty(); }))
    return *std::min_element(ins.begin(), ins.end());
  return base_->out(x);
}

OutMap gen_zerner_merkl(int64_t L, const SeededRng& rng) {
  if (L % 2 != 0) throw SpecError("Zerner-Merkl torus side must be even");
  if (L < 6) throw SpecError("Zerner-Merkl torus side must be at least 6");
  ZernerMerklRule rule(rng, ZernerMerklRule::Mode::Torus, L);
  Domain dom = Domain::torus({L, L});
  OutMap g(dom);
  for (int64_t v = 0; v < dom.size(); ++v) g.set_unchecked(v, dom.index(*rule.out(dom.site(v))));
  return g;
}

OutMap gen_dyadic_window(int n, const Site& z, const Domain& window) {
  if (window.is_torus()) throw DomainError("dyadic window must be a box");
  DyadicRule rule(window.dim(), n, z);
  bool has_origin = true;
  for (int i = 0; i < window.dim(); ++i) {
    if (window.lo()[i] + z[i] < 0) throw DomainError("dyadic window leaves the nonnegative orthant");
    has_origin = has_origin && window.lo()[i] + z[i] <= 0 && window.hi()[i] + z[i] >= 0;
  }
  if (has_origin) throw DomainError("dyadic window contains the shifted origin");
  return realize(rule, window);
}

OutMap dyadic_base_box(int n, int d) {
  std::vector<int64_t> sides(d, int64_t{1} << n);
  return realize(DyadicRule(d, n, Site(d)), Domain::box_sides(sides));
}

OutMap gen_dyadic_torus(int n, int d, const SeededRng& rng) {
  DyadicRule rule(d, n, sample_dyadic_shift(d, n, rng), true);
  Domain dom = Domain::torus(std::vector<int64_t>(d, int64_t{1} << n));
  OutMap g(dom);
  for (int64_t v = 0; v < dom.size(); ++v) g.set_unchecked(v, dom.index(*rule.out(dom.site(v))));
  return g;
}

OutMap gen_layered(const std::vector<OutMap>& per_layer) {
  if (per_layer.empty()) throw SpecError("layered graph needs at least one layer");
  const Domain& base = per_layer[0].domain();
  const int d = base.dim();
  const int64_t layers = static_cast<int64_t>(per_layer.size());
  Domain dom = [&] {
    std::vector<int64_t> sides;
    for (int i = 0; i < d; ++i) sides.push_back(base.side(i));
    sides.push_back(layers);
    if (base.is_torus()) return Domain::torus(sides);
    Site lo(d + 1), hi(d + 1);
    for (int i = 0; i < d; ++i) {
      lo[i] = base.lo()[i];
      hi[i] = base.hi()[i];
    }
    hi[d] = layers - 1;
    return Domain::box(lo, hi);
  }();
  OutMap g(dom);
  for (int64_t h = 0; h < layers; ++h) {
    if (!(per_layer[h].domain() == base)) throw SpecError("layers disagree on the base domain");
    for (int64_t v = 0; v < base.size(); ++v) {
      int64_t w = per_layer[h].out(v);
      if (w >= 0) g.set_unchecked(v * layers + h, w * layers + h);
    }
  }
  return g;
}

OutMap gen_finite_k(int k, int d, int n, const SeededRng& rng, const Domain& window) {
  if (window.is_torus() || window.dim() != d) throw SpecError("FiniteK window must be a d-dimensional box");
  for (int i = 0; i < d; ++i)
    if (window.side(i) < 4 * k) throw SpecError("FiniteK window must span at least 4k sites per axis");
  return realize(FiniteKRule(k, d, n, rng), window);
}

OutMap gen_finite_k_torus(int k, int d, int n, const SeededRng& rng) {
  FiniteKRule rule(k, d, n, rng, true);
  Domain dom = Domain::torus(std::vector<int64_t>(d, rule.torus_side()));
  OutMap g(dom);
  for (int64_t v = 0; v < dom.size(); ++v) g.set_unchecked(v, dom.index(*rule.out(dom.site(v))));
  return g;
}

OutMap modify_type_c(const OutMap& g) {
  const Domain& dom = g.domain();
  std::vector<int32_t> indeg = g.in_degrees();
  OutMap r = g;
  for (int64_t z = 0; z < g.size(); ++z) {
    int64_t best = -1;
    bool ok = true;
    for (int64_t y : dom.neighbor_indices(z)) {
      if (g.out(y) != z) continue;
      if (indeg[y] != 0) {
        ok = false;
        break;
      }
      if (best < 0 || y < best) best = y;
    }
    if (ok && best >= 0) r.set_unchecked(z, best);
  }
  return r;
}

std::vector<DEdge> fill_region(const std::vector<Site>& region) {
  std::vector<Site> sites = region;
  std::sort(sites.begin(), sites.end());
  sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
  auto find = [&](const Site& s) -> int64_t {
    auto it = std::lower_bound(sites.begin(), sites.end(), s);
    return it != sites.end() && *it == s ? it - sites.begin() : -1;
  };
  std::vector<char> seen(sites.size(), 0);
  std::vector<DEdge> edges;
  for (size_t s = 0; s < sites.size(); ++s) {
    if (seen[s]) continue;
    seen[s] = 1;
    std::deque<size_t> queue{s};
    std::optional<Site> first_child;
    while (!queue.empty()) {
      size_t v = queue.front();
      queue.pop_front();
      const Site& x = sites[v];
      std::vector<Site> nbrs;
      for (int i = 0; i < x.dim; ++i)
        for (int sg : {-1, 1}) nbrs.push_back(x + Site::unit(x.dim, i, sg));
      std::sort(nbrs.begin(), nbrs.end());
      for (const Site& y : nbrs) {
        int64_t u = find(y);
        if (u < 0 || seen[u]) continue;
        seen[u] = 1;
        queue.push_back(static_cast<size_t>(u));
        edges.push_back({y, x});
        if (v == s && !first_child) first_child = y;
      }
    }
    if (!first_child) throw StructureError("filler region has a singleton site-component", sites[s].str());
    edges.push_back({sites[s], *first_child});
  }
  std::sort(edges.begin(), edges.end());
  return edges;
}

int GeneratorSpec::output_dim() const {
  switch (variant) {
    case Variant::ZernerMerkl:
      return 2;
    case Variant::Layered:
      return base->output_dim() + 1;
    case Variant::TypeCModified:
      return base->output_dim();
    default:
      return dim;
  }
}

bool GeneratorSpec::has_infinite_components() const { return variant != Variant::IIDWeights; }

std::string variant_name(GeneratorSpec::Variant v) {
  switch (v) {
    case GeneratorSpec::Variant::IIDWeights: return "IIDWeights";
    case GeneratorSpec::Variant::ZernerMerkl: return "ZernerMerkl";
    case GeneratorSpec::Variant::Dyadic: return "Dyadic";
    case GeneratorSpec::Variant::Layered: return "Layered";
    case GeneratorSpec::Variant::FiniteK: return "FiniteK";
    case GeneratorSpec::Variant::TypeCModified: return "TypeCModified";
  }
  return "?";
}

GeneratorSpec::Variant variant_from_name(const std::string& s) {
  static const std::map<std::string, GeneratorSpec::Variant> names = {
      {"IIDWeights", GeneratorSpec::Variant::IIDWeights}, {"ZernerMerkl", GeneratorSpec::Variant::ZernerMerkl},
      {"Dyadic", GeneratorSpec::Variant::Dyadic},         {"Layered", GeneratorSpec::Variant::Layered},
      {"FiniteK", GeneratorSpec::Variant::FiniteK},       {"TypeCModified", GeneratorSpec::Variant::TypeCModified}};
  auto it = names.find(s);
  if (it == names.end()) throw SpecError("unknown generator variant: " + s);
  return it->second;
}

GeneratorSpec spec_for_model(const std::string& model) {
  GeneratorSpec s;
  using V = GeneratorSpec::Variant;
  if (model == "iid") {
    s.variant = V::IIDWeights;
  } else if (model == "zm") {
    s.variant = V::ZernerMerkl;
  } else if (model == "dyadic") {
    s.variant = V::Dyadic;
  } else if (model == "finitek") {
    s.variant = V::FiniteK;
    s.dim = 3;
  } else if (model == "layered") {
    s.variant = V::Layered;
    s.base = std::make_shared<GeneratorSpec>(spec_for_model("zm"));
  } else if (model == "typec") {
    s.variant = V::TypeCModified;
    s.base = std::make_shared<GeneratorSpec>(spec_for_model("zm"));
  } else {
    try {
      s.variant = variant_from_name(model);
    } catch (const SpecError&) {
      throw SpecError("unknown model: " + model);
    }
    if ((s.variant == V::Layered || s.variant == V::TypeCModified) && !s.base)
      s.base = std::make_shared<GeneratorSpec>(spec_for_model("zm"));
    if (s.variant == V::FiniteK) s.dim = 3;
  }
  return s;
}

std::shared_ptr<const LatticeRule> make_rule(const GeneratorSpec& spec, const SeededRng& rng, RuleHost host) {
  using V = GeneratorSpec::Variant;
  switch (spec.variant) {
    case V::IIDWeights:
      return std::make_shared<IidRule>(spec.dim, rng.derive("iid"));
    case V::ZernerMerkl:
      if (host.zm_period > 0)
        return std::make_shared<ZernerMerklRule>(rng.derive("zm"), ZernerMerklRule::Mode::Cylinder, host.zm_period);
      return std::make_shared<ZernerMerklRule>(rng.derive("zm"));
    case V::Dyadic: {
      Site z = spec.shift ? Site::from(*spec.shift) : sample_dyadic_shift(spec.dim, spec.level, rng.derive("dyadic-shift"));
      return std::make_shared<DyadicRule>(spec.dim, spec.level, z);
    }
    case V::FiniteK:
      return std::make_shared<FiniteKRule>(spec.k, spec.dim, spec.level, rng.derive("finitek"));
    case V::Layered: {
      if (!spec.base) throw SpecError("Layered spec needs a base");
      GeneratorSpec base = *spec.base;
      if (spec.shared) {
        auto r = make_rule(base, rng, host);
        return std::make_shared<LayeredRule>(base.output_dim(), [r](int64_t) { return r; });
      }
      SeededRng lr = rng.derive("layer");
      return std::make_shared<LayeredRule>(base.output_dim(), [base, lr, host](int64_t h) {
        return make_rule(base, lr.derive(static_cast<uint64_t>(h)), host);
      });
    }
    case V::TypeCModified:
      if (!spec.base) throw SpecError("TypeCModified spec needs a base");
      return std::make_shared<TypeCRule>(make_rule(*spec.base, rng, host));
  }
  throw SpecError("unhandled variant");
}

OutMap realize_window(const GeneratorSpec& spec, const Domain& window, const SeededRng& rng) {
  if (window.dim() != spec.output_dim()) throw SpecError("window dimension does not match the generator");
  using V = GeneratorSpec::Variant;
  if (spec.variant == V::Dyadic) {
    Site z = spec.shift ? Site::from(*spec.shift) : sample_dyadic_shift(spec.dim, spec.level, rng.derive("dyadic-shift"));
    return gen_dyadic_window(spec.level, z, window);
  }
  if (spec.variant == V::FiniteK) return gen_finite_k(spec.k, spec.dim, spec.level, rng.derive("finitek"), window);
  return realize(*make_rule(spec, rng), window);
}

OutMap realize_torus(const GeneratorSpec& spec, const std::vector<int64_t>& sides, const SeededRng& rng,
                     WeightField* weights) {
  using V = GeneratorSpec::Variant;
  if (static_cast<int>(sides.size()) != spec.output_dim()) throw SpecError("torus dimension does not match the generator");
  auto all_equal = [&] { return std::all_of(sides.begin(), sides.end(), [&](int64_t s) { return s == sides[0]; }); };
  switch (spec.variant) {
    case V::IIDWeights: {
      WeightField w = sample_iid_uniform(Domain::torus(sides), rng.derive("iid"));
      OutMap g = build_nn_directed(w);
      if (weights) *weights = std::move(w);
      return g;
    }
    case V::ZernerMerkl:
      if (!all_equal()) throw SpecError("Zerner-Merkl torus must be square");
      return gen_zerner_merkl(sides[0], rng.derive("zm"));
    case V::Dyadic: {
      if (!all_equal() || !std::has_single_bit(static_cast<uint64_t>(sides[0])))
        throw SpecError("dyadic torus sides must be one power of two");
      return gen_dyadic_torus(std::countr_zero(static_cast<uint64_t>(sides[0])), spec.dim, rng.derive("dyadic-shift"));
    }
    case V::FiniteK: {
      const int64_t q = sides[0] / (4 * spec.k);
      if (!all_equal() || sides[0] % (4 * spec.k) || !std::has_single_bit(static_cast<uint64_t>(q)))
        throw SpecError("FiniteK torus side must be 4k times a power of two");
      return gen_finite_k_torus(spec.k, spec.dim, std::countr_zero(static_cast<uint64_t>(q)), rng.derive("finitek"));
    }
    case V::Layered: {
      if (!spec.base) throw SpecError("Layered spec needs a base");
      std::vector<int64_t> base_sides(sides.begin(), sides.end() - 1);
      std::vector<OutMap> layers;
      if (spec.shared) {
        OutMap b = realize_torus(*spec.base, base_sides, rng);
        layers.assign(sides.back(), b);
      } else {
        SeededRng lr = rng.derive("layer");
        for (int64_t h = 0; h < sides.back(); ++h)
          layers.push_back(realize_torus(*spec.base, base_sides, lr.derive(static_cast<uint64_t>(h))));
      }
      return gen_layered(layers);
    }
    case V::TypeCModified:
      if (!spec.base) throw SpecError("TypeCModified spec needs a base");
      return modify_type_c(realize_torus(*spec.base, sides, rng));
  }
  throw SpecError("unhandled variant");
}

std::vector<int64_t> torus_sides_for(const GeneratorSpec& spec, int64_t L) {
  using V = GeneratorSpec::Variant;
  switch (spec.variant) {
    case V::IIDWeights:
      return std::vector<int64_t>(spec.dim, std::max<int64_t>(L, 3));
    case V::ZernerMerkl: {
      int64_t s = std::max<int64_t>(L + (L & 1), 6);
      return {s, s};
    }
    case V::Dyadic:
      return std::vector<int64_t>(spec.dim, static_cast<int64_t>(std::bit_ceil(static_cast<uint64_t>(std::max<int64_t>(L, 4)))));
    case V::FiniteK: {
      int64_t q = 4;
      while (4 * spec.k * q < L) q *= 2;
      return std::vector<int64_t>(spec.dim, 4 * spec.k * q);
    }
    case V::Layered: {
      auto s = torus_sides_for(*spec.base, L);
      s.push_back(std::max<int64_t>(spec.layers, 3));
      return s;
    }
    case V::TypeCModified:
      return torus_sides_for(*spec.base, L);
  }
  throw SpecError("unhandled variant");
}

}  // namespace nnlab
