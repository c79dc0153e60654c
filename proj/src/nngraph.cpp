#include "nnlab/nngraph.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace nnlab {

namespace {

struct UnionFind {
  std::vector<int64_t> parent;
  explicit UnionFind(int64_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int64_t find(int64_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  }
  void unite(int64_t a, int64_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Unwrapped lattice displacement of the edge u -> w on a torus.
Site displacement(const Domain& dom, int64_t u, int64_t w) {
  Site a = dom.site(u), b = dom.site(w);
  Site d = b - a;
  for (int i = 0; i < d.dim; ++i) {
    if (d[i] > 1) d[i] -= dom.side(i);
    if (d[i] < -1) d[i] += dom.side(i);
  }
  return d;
}

}  // namespace

OutMap build_nn_directed(const WeightField& w) {
  const Domain& dom = w.domain();
  if (auto [a, b] = w.find_tie(); a >= 0) {
    auto [a0, a1] = dom.slot_ends(a);
    auto [b0, b1] = dom.slot_ends(b);
    throw StructureError("two edges share a weight",
                         dom.site(a0).str() + "-" + dom.site(a1).str() + " and " + dom.site(b0).str() + "-" + dom.site(b1).str());
  }
  OutMap g(dom);
  const int d = dom.dim();
  for (int64_t v = 0; v < dom.size(); ++v) {
    int64_t best = -1;
    double bw = 0;
    for (int i = 0; i < d; ++i) {
      for (int s : {-1, 1}) {
        int64_t u = dom.step(v, i, s);
        if (u < 0) continue;
        int64_t slot = s > 0 ? v * d + i : u * d + i;
        double x = w.at_slot(slot);
        if (best < 0 || x < bw) {
          best = u;
          bw = x;
        }
      }
    }
    if (best >= 0) g.set_unchecked(v, best);
  }
  return g;
}

int32_t ComponentLabeling::infinite_count() const {
  return static_cast<int32_t>(std::count(infinite_proxy.begin(), infinite_proxy.end(), 1));
}

std::vector<std::vector<int64_t>> ComponentLabeling::members() const {
  std::vector<std::vector<int64_t>> m(size.size());
  for (size_t v = 0; v < label.size(); ++v) m[label[v]].push_back(static_cast<int64_t>(v));
  return m;
}

ComponentLabeling undirected_components(const OutMap& g) {
  const Domain& dom = g.domain();
  const int64_t n = g.size();
  UnionFind uf(n);
  for (int64_t v = 0; v < n; ++v)
    if (g.has_out(v)) uf.unite(v, g.out(v));
  ComponentLabeling c;
  c.label.assign(n, -1);
  std::vector<int32_t> id_of_root(n, -1);
  for (int64_t v = 0; v < n; ++v) {
    int64_t r = uf.find(v);
    if (id_of_root[r] < 0) {
      id_of_root[r] = c.count();
      c.size.push_back(0);
      c.boundary_touching.push_back(0);
      c.wrapping.push_back(0);
      c.miniloops.push_back(0);
    }
    int32_t id = id_of_root[r];
    c.label[v] = id;
    ++c.size[id];
    if (dom.near_boundary(v, 2)) c.boundary_touching[id] = 1;
    int64_t w = g.out(v);
    if (w >= 0 && g.out(w) == v && v < w) ++c.miniloops[id];
  }
  if (dom.is_torus()) {
    Orbits orb = orbit_structure(g);
    std::vector<char> done(c.count(), 0);
    for (int64_t v = 0; v < n; ++v) {
      if (orb.kind[v] != Orbits::kLongCycle || done[c.label[v]]) continue;
      done[c.label[v]] = 1;
      Site wind(dom.dim());
      int64_t start = orb.end[v], u = start;
      do {
        wind = wind + displacement(dom, u, g.out(u));
        u = g.out(u);
      } while (u != start);
      if (wind != Site(dom.dim())) c.wrapping[c.label[v]] = 1;
    }
    c.infinite_proxy = c.wrapping;
  } else {
    c.infinite_proxy = c.boundary_touching;
  }
  return c;
}

PathTrace forward_path(const Site& x, const OutMap& g, int64_t step_cap) {
  const Domain& dom = g.domain();
  if (step_cap < 0) step_cap = 4 * dom.size();
  PathTrace t;
  int64_t v = dom.index(x);
  std::unordered_map<int64_t, size_t> pos;
  std::vector<int64_t> seq{v};
  pos[v] = 0;
  t.terminal = PathTrace::Terminal::ExitedDomain;
  for (int64_t steps = 0;; ++steps) {
    if (steps >= step_cap) {
      t.terminal = PathTrace::Terminal::StepCapReached;
      break;
    }
    int64_t w = g.out(v);
    if (w < 0) break;
    seq.push_back(w);
    if (auto it = pos.find(w); it != pos.end()) {
      if (it->second + 2 == seq.size() - 1) {
        t.terminal = PathTrace::Terminal::TwoCycle;
        t.u = dom.site(w);
        t.v = dom.site(v);
        break;
      }
      std::string wit;
      for (size_t i = it->second; i < seq.size(); ++i) wit += (wit.empty() ? "" : " -> ") + dom.site(seq[i]).str();
      throw StructureError("directed cycle of length >= 3", wit);
    }
    pos[w] = seq.size() - 1;
    v = w;
  }
  for (int64_t u : seq) t.vertices.push_back(dom.site(u));
  return t;
}

std::vector<Site> backward_set(const Site& x, const OutMap& g) {
  const Domain& dom = g.domain();
  const int64_t n = g.size();
  std::vector<std::vector<int64_t>> rev(n);
  for (int64_t v = 0; v < n; ++v)
    if (g.has_out(v)) rev[g.out(v)].push_back(v);
  std::vector<char> seen(n, 0);
  std::vector<int64_t> queue{dom.index(x)};
  seen[queue[0]] = 1;
  for (size_t h = 0; h < queue.size(); ++h)
    for (int64_t u : rev[queue[h]])
      if (!seen[u]) {
        seen[u] = 1;
        queue.push_back(u);
      }
  std::vector<Site> r;
  for (int64_t v : queue) r.push_back(dom.site(v));
  std::sort(r.begin(), r.end());
  return r;
}

namespace {

// Out-edge weights along the self-avoiding portion of a trace.
std::vector<double> trace_weights(const PathTrace& t, const WeightField& w, bool include_loop) {
  const Domain& dom = w.domain();
  size_t edges = t.edges();
  if (t.terminal == PathTrace::Terminal::TwoCycle && !include_loop && edges > 0) --edges;
  std::vector<double> r;
  for (size_t i = 0; i < edges; ++i)
    r.push_back(w.weight(dom.index(t.vertices[i]), dom.index(t.vertices[i + 1])));
  return r;
}

}  // namespace

bool check_monotone_decreasing(const PathTrace& trace, const WeightField& w) {
  std::vector<double> ws = trace_weights(trace, w, false);
  for (size_t i = 1; i < ws.size(); ++i)
    if (!(ws[i - 1] > ws[i])) return false;
  return true;
}

std::pair<double, double> infimum_supremum_along(const PathTrace& trace, const WeightField& w) {
  std::vector<double> ws = trace_weights(trace, w, true);
  if (ws.empty()) throw DomainError("trace has no edges");
  auto [lo, hi] = std::minmax_element(ws.begin(), ws.end());
  return {*lo, *hi};
}

std::optional<Site> r_descendant(const Site& x, double r, const OutMap& g, const WeightField& w) {
  PathTrace t = forward_path(x, g);
  const Domain& dom = g.domain();
  size_t m = t.vertices.size();
  if (t.terminal == PathTrace::Terminal::TwoCycle) --m;  // drop the repeated vertex
  std::optional<Site> best;
  for (size_t i = 0; i < m; ++i) {
    int64_t v = dom.index(t.vertices[i]);
    if (!g.has_out(v)) continue;
    if (w.weight(v, g.out(v)) >= r) best = t.vertices[i];
  }
  return best;
}

StructureReport verify_component_structure(const std::vector<int64_t>& component, const OutMap& g) {
  StructureReport rep;
  const Domain& dom = g.domain();
  rep.vertices = static_cast<int64_t>(component.size());
  std::vector<int64_t> sorted = component;
  std::sort(sorted.begin(), sorted.end());
  auto inside = [&](int64_t v) { return std::binary_search(sorted.begin(), sorted.end(), v); };
  std::vector<std::pair<int64_t, int64_t>> und;
  int64_t loop_a = -1, loop_b = -1;
  for (int64_t v : sorted) {
    int64_t w = g.out(v);
    if (w < 0) {
      if (rep.witness.empty()) rep.witness = "no out-edge at " + dom.site(v).str();
      continue;
    }
    if (!inside(w)) {
      if (rep.witness.empty()) rep.witness = "edge leaves component at " + dom.site(v).str();
      continue;
    }
    ++rep.directed_edges;
    und.emplace_back(std::min(v, w), std::max(v, w));
    if (g.out(w) == v && v < w) {
      ++rep.two_cycles;
      loop_a = v;
      loop_b = w;
    }
  }
  std::sort(und.begin(), und.end());
  und.erase(std::unique(und.begin(), und.end()), und.end());
  rep.undirected_edges = static_cast<int64_t>(und.size());
  rep.tree = rep.directed_edges == rep.vertices && rep.undirected_edges == rep.vertices - 1;
  rep.one_miniloop = rep.two_cycles == 1;
  if (rep.one_miniloop) {
    // Every vertex reaches the miniloop within |component| steps.
    rep.oriented = true;
    for (int64_t v : sorted) {
      int64_t u = v;
      int64_t steps = 0;
      while (u >= 0 && u != loop_a && u != loop_b && steps <= rep.vertices) {
        u = g.out(u);
        ++steps;
      }
      if (u != loop_a && u != loop_b) {
        rep.oriented = false;
        if (rep.witness.empty()) rep.witness = "forward path from " + dom.site(v).str() + " misses the miniloop";
        break;
      }
    }
  } else if (rep.witness.empty()) {
    rep.witness = std::to_string(rep.two_cycles) + " miniloops";
  }
  return rep;
}

Orbits orbit_structure(const OutMap& g) {
  const int64_t n = g.size();
  Orbits o;
  o.kind.assign(n, 255);
  o.end.assign(n, -1);
  o.entry.assign(n, -1);
  std::vector<int8_t> state(n, 0);
  std::vector<int64_t> stack;
  for (int64_t s = 0; s < n; ++s) {
    if (state[s]) continue;
    stack.clear();
    int64_t v = s;
    while (v >= 0 && state[v] == 0) {
      state[v] = 1;
      stack.push_back(v);
      v = g.out(v);
    }
    size_t resolved = stack.size();
    if (v < 0) {
      // The path ends at a sink: the last stacked vertex.
      int64_t sink = stack.back();
      o.kind[sink] = Orbits::kSink;
      o.end[sink] = o.entry[sink] = sink;
      resolved = stack.size() - 1;
    } else if (state[v] == 1) {
      auto it = std::find(stack.begin(), stack.end(), v);
      size_t first = static_cast<size_t>(it - stack.begin());
      int64_t lo = *std::min_element(it, stack.end());
      uint8_t kind = stack.size() - first == 2 ? Orbits::kTwoCycle : Orbits::kLongCycle;
      if (kind == Orbits::kLongCycle) ++o.long_cycles;
      for (size_t i = first; i < stack.size(); ++i) {
        o.kind[stack[i]] = kind;
        o.end[stack[i]] = lo;
        o.entry[stack[i]] = stack[i];
      }
      resolved = first;
    }
    for (size_t i = resolved; i-- > 0;) {
      int64_t u = stack[i], w = g.out(u);
      o.kind[u] = o.kind[w];
      o.end[u] = o.end[w];
      o.entry[u] = o.entry[w];
    }
    for (int64_t u : stack) state[u] = 2;
  }
  return o;
}

MonotoneReport check_adjacent_monotone(const OutMap& g, const WeightField& w) {
  MonotoneReport rep;
  const Domain& dom = g.domain();
  for (int64_t x = 0; x < g.size(); ++x) {
    int64_t y = g.out(x);
    if (y < 0) continue;
    int64_t z = g.out(y);
    if (z < 0 || z == x) continue;
    ++rep.pairs_checked;
    if (!(w.weight(x, y) > w.weight(y, z))) {
      if (rep.violations++ == 0)
        rep.witness = dom.site(x).str() + " -> " + dom.site(y).str() + " -> " + dom.site(z).str();
    }
  }
  return rep;
}

}  // namespace nnlab
