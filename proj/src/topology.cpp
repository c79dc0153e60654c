#include "nnlab/topology.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace nnlab {

namespace {

void require_planar(const Domain& window) {
  if (window.dim() != 2 || window.is_torus()) throw DomainError("topology needs a d = 2 box window");
}

struct DirectedDualEdge {
  DualVertex from, to;
  int dx, dy;  // unit direction in lattice units
};

std::vector<DirectedDualEdge> boundary_edges(const Mask& cl, const Domain& window) {
  std::vector<DirectedDualEdge> out;
  for (int64_t v = 0; v < window.size(); ++v) {
    if (!cl[v]) continue;
    Site x = window.site(v);
    for (int64_t w : window.neighbor_indices(v)) {
      if (cl[w]) continue;
      Site y = window.site(w);
      const int nx = static_cast<int>(y[0] - x[0]), ny = static_cast<int>(y[1] - x[1]);
      // Rotating the outward normal by +90 degrees keeps the closure on the left.
      const int tx = -ny, ty = nx;
      const int64_t mx = x[0] + y[0], my = x[1] + y[1];
      out.push_back({DualVertex::half(mx - tx, my - ty), DualVertex::half(mx + tx, my + ty), tx, ty});
    }
  }
  return out;
}

// Exempt when a surrounding site lies outside `window` or within `margin` of its edge.
bool exempt(const DualVertex& p, const Domain& window, int64_t margin) {
  for (int64_t sx : {(p.x2 - 1) / 2, (p.x2 + 1) / 2})
    for (int64_t sy : {(p.y2 - 1) / 2, (p.y2 + 1) / 2}) {
      Site s{sx, sy};
      if (!window.contains(s) || window.near_boundary(window.index(s), margin)) return true;
    }
  return false;
}

std::vector<DualPath> chain(const std::vector<DirectedDualEdge>& edges) {
  std::map<DualVertex, std::vector<size_t>> outgoing;
  std::map<DualVertex, int> indeg;
  for (size_t i = 0; i < edges.size(); ++i) {
    outgoing[edges[i].from].push_back(i);
    ++indeg[edges[i].to];
  }
  std::vector<char> used(edges.size(), 0);
  auto next_edge = [&](const DualVertex& at, int dx, int dy) -> long {
    auto it = outgoing.find(at);
    if (it == outgoing.end()) return -1;
    // Left turn, then straight, then right.
    const int prefs[3][2] = {{-dy, dx}, {dx, dy}, {dy, -dx}};
    for (const auto& p : prefs)
      for (size_t e : it->second)
        if (edges[e].dx == p[0] && edges[e].dy == p[1]) return static_cast<long>(e);
    return -1;
  };
  auto walk = [&](size_t first) {
    DualPath path;
    path.vertices.push_back(edges[first].from);
    size_t e = first;
    while (true) {
      used[e] = 1;
      path.vertices.push_back(edges[e].to);
      long n = next_edge(edges[e].to, edges[e].dx, edges[e].dy);
      if (n < 0) break;
      if (static_cast<size_t>(n) == first) {
        path.closed = true;
        break;
      }
      if (used[n]) break;
      e = static_cast<size_t>(n);
    }
    return path;
  };
  auto first_unused = [&](const DualVertex& v) -> long {
    for (size_t e : outgoing[v])
      if (!used[e]) return static_cast<long>(e);
    return -1;
  };
  std::vector<DualPath> paths;
  // Clipped paths start where out-degree exceeds in-degree.
  for (const auto& [v, outs] : outgoing) {
    const int extra = static_cast<int>(outs.size()) - indeg[v];
    for (int i = 0; i < extra; ++i)
      if (long e = first_unused(v); e >= 0) paths.push_back(walk(static_cast<size_t>(e)));
  }
  for (const auto& [v, outs] : outgoing)
    for (long e; (e = first_unused(v)) >= 0;) paths.push_back(walk(static_cast<size_t>(e)));
  return paths;
}

DegreeReport degrees_of(const Mask& cl, const Domain& local, const Domain& window, int64_t margin) {
  std::map<DualVertex, int> deg;
  for (const auto& e : boundary_edges(cl, local)) {
    ++deg[e.from];
    ++deg[e.to];
  }
  DegreeReport rep;
  for (const auto& [v, k] : deg) {
    ++rep.vertices;
    if (exempt(v, window, margin)) continue;
    ++rep.checked;
    if (k != 2) {
      if (rep.bad++ == 0) rep.witness = "dual vertex " + v.str() + " has degree " + std::to_string(k);
    }
  }
  return rep;
}

}  // namespace

Mask mask_of(const std::vector<Site>& sites, const Domain& window) {
  Mask m(window.size(), 0);
  for (const Site& s : sites) m[window.index(s)] = 1;
  return m;
}

std::vector<Site> sites_of(const Mask& m, const Domain& window) {
  std::vector<Site> r;
  for (int64_t v = 0; v < window.size(); ++v)
    if (m[v]) r.push_back(window.site(v));
  return r;
}

std::vector<DualEdge> DualPath::edges() const {
  std::vector<DualEdge> r;
  for (size_t i = 0; i + 1 < vertices.size(); ++i) r.emplace_back(vertices[i], vertices[i + 1]);
  return r;
}

SiteComponents site_components(const Mask& V, const Domain& window) {
  SiteComponents sc;
  sc.label.assign(window.size(), -1);
  std::vector<int64_t> queue;
  for (int64_t s = 0; s < window.size(); ++s) {
    if (!V[s] || sc.label[s] >= 0) continue;
    const int32_t id = sc.count();
    sc.size.push_back(0);
    sc.touches_boundary.push_back(0);
    queue.assign(1, s);
    sc.label[s] = id;
    for (size_t h = 0; h < queue.size(); ++h) {
      int64_t v = queue[h];
      ++sc.size[id];
      if (window.near_boundary(v, 1)) sc.touches_boundary[id] = 1;
      for (int64_t w : window.neighbor_indices(v))
        if (V[w] && sc.label[w] < 0) {
          sc.label[w] = id;
          queue.push_back(w);
        }
    }
  }
  return sc;
}

Mask closure(const Mask& V, const Domain& window) {
  Mask comp(V.size());
  for (size_t i = 0; i < V.size(); ++i) comp[i] = !V[i];
  SiteComponents sc = site_components(comp, window);
  Mask cl = V;
  for (int64_t v = 0; v < window.size(); ++v)
    if (sc.label[v] >= 0 && !sc.touches_boundary[sc.label[v]]) cl[v] = 1;
  return cl;
}

std::vector<DualPath> dual_boundary(const Mask& V, const Domain& window) {
  require_planar(window);
  return chain(boundary_edges(closure(V, window), window));
}

DegreeReport dual_degrees(const Mask& V, const Domain& window, int64_t margin) {
  require_planar(window);
  return degrees_of(closure(V, window), window, window, margin);
}

std::vector<Site> insert_common_neighbors(const std::vector<Site>& xs, const std::function<bool(const Site&)>& in_closure) {
  std::vector<Site> out;
  for (const Site& x : xs) {
    if (!out.empty() && out.back() == x) continue;
    if (!out.empty() && l1_distance(out.back(), x) == 2 && linf_distance(out.back(), x) == 1) {
      const Site& p = out.back();
      Site a{p[0], x[1]}, b{x[0], p[1]};
      bool ina = in_closure(a), inb = in_closure(b);
      if (ina == inb) throw StructureError("diagonal step without a unique outside neighbor", p.str() + " " + x.str());
      out.push_back(ina ? b : a);
    }
    out.push_back(x);
  }
  return out;
}

std::vector<Site> star_boundary_path(const Mask& V, const Domain& window) {
  require_planar(window);
  Mask cl = closure(V, window);
  auto paths = chain(boundary_edges(cl, window));
  if (paths.size() != 1 || paths[0].closed)
    throw StructureError("boundary is not a single open path", std::to_string(paths.size()) + " pieces");
  std::vector<Site> xs;
  for (const DualEdge& f : paths[0].edges()) {
    UEdge e = primal_of(f);
    xs.push_back(cl[window.index(e.a)] ? e.b : e.a);
  }
  return insert_common_neighbors(xs, [&](const Site& s) { return window.contains(s) && cl[window.index(s)]; });
}

RegionClassification classify_regions(const ComponentLabeling& comps, const Domain& window) {
  require_planar(window);
  RegionClassification rc;
  const int64_t n = window.size();
  rc.tag.assign(n, RegionClassification::Tag::Unassigned);
  rc.region.assign(n, -1);
  for (int32_t c = 0; c < comps.count(); ++c) {
    if (!comps.infinite_proxy[c]) continue;
    Mask m(n, 0);
    for (int64_t v = 0; v < n; ++v) m[v] = comps.label[v] == c;
    Mask cl = closure(m, window);
    const int32_t a = rc.type_a();
    rc.a_component.push_back(c);
    rc.a_size.push_back(0);
    for (int64_t v = 0; v < n; ++v) {
      if (!cl[v]) continue;
      if (rc.tag[v] != RegionClassification::Tag::Unassigned) ++rc.overlaps;
      rc.tag[v] = RegionClassification::Tag::InClosure;
      rc.region[v] = a;
      ++rc.a_size[a];
    }
  }
  Mask X(n, 0);
  for (int64_t v = 0; v < n; ++v) X[v] = rc.tag[v] == RegionClassification::Tag::Unassigned;
  SiteComponents sc = site_components(X, window);
  std::vector<int32_t> id(sc.count());
  for (int32_t k = 0; k < sc.count(); ++k) {
    if (sc.touches_boundary[k]) {
      id[k] = rc.type_b();
      rc.b_size.push_back(sc.size[k]);
    } else {
      id[k] = rc.type_c();
      rc.c_size.push_back(sc.size[k]);
    }
  }
  for (int64_t v = 0; v < n; ++v) {
    if (sc.label[v] < 0) continue;
    const int32_t k = sc.label[v];
    rc.tag[v] = sc.touches_boundary[k] ? RegionClassification::Tag::TypeB : RegionClassification::Tag::TypeC;
    rc.region[v] = id[k];
  }
  std::vector<std::set<int32_t>> ta(rc.type_c()), tb(rc.type_c());
  for (int64_t v = 0; v < n; ++v) {
    if (rc.tag[v] != RegionClassification::Tag::TypeC) continue;
    for (const Site& s : star_neighbors(window.site(v), window)) {
      int64_t w = window.index(s);
      if (rc.tag[w] == RegionClassification::Tag::InClosure) ta[rc.region[v]].insert(rc.region[w]);
      if (rc.tag[w] == RegionClassification::Tag::TypeB) tb[rc.region[v]].insert(rc.region[w]);
    }
  }
  for (int32_t c = 0; c < rc.type_c(); ++c) {
    rc.c_touches_a.emplace_back(ta[c].begin(), ta[c].end());
    rc.c_touches_b.emplace_back(tb[c].begin(), tb[c].end());
    if (ta[c].size() + tb[c].size() >= 3) ++rc.forbidden;
  }
  for (int64_t v = 0; v < n; ++v) rc.unassigned += rc.tag[v] == RegionClassification::Tag::Unassigned;
  return rc;
}

TopologyReport check_topology(const ComponentLabeling& comps, const Domain& window, int64_t margin) {
  require_planar(window);
  TopologyReport rep;
  auto note = [&](const std::string& w) {
    if (rep.witness.empty()) rep.witness = w;
  };
  for (const auto& members : comps.members()) {
    if (members.empty()) continue;
    int64_t lo0 = INT64_MAX, lo1 = INT64_MAX, hi0 = INT64_MIN, hi1 = INT64_MIN;
    for (int64_t v : members) {
      Site s = window.site(v);
      lo0 = std::min(lo0, s[0]);
      hi0 = std::max(hi0, s[0]);
      lo1 = std::min(lo1, s[1]);
      hi1 = std::max(hi1, s[1]);
    }
    // The bounding box grown by one site gives the same closure and boundary
    // as the full window, at a fraction of the cost.
    Domain local = Domain::box(Site{std::max(lo0 - 1, window.lo()[0]), std::max(lo1 - 1, window.lo()[1])},
                               Site{std::min(hi0 + 1, window.hi()[0]), std::min(hi1 + 1, window.hi()[1])});
    Mask all(local.size(), 0);
    for (int64_t v : members) all[local.index(window.site(v))] = 1;
    SiteComponents pieces = site_components(all, local);
    for (int32_t p = 0; p < pieces.count(); ++p) {
      ++rep.pieces;
      Mask V(local.size(), 0);
      bool touches = false;
      for (int64_t v = 0; v < local.size(); ++v) {
        if (pieces.label[v] != p) continue;
        V[v] = 1;
        touches = touches || window.near_boundary(window.index(local.site(v)), 1);
      }
      Mask cl = closure(V, local);
      if (closure(cl, local) != cl) {
        ++rep.idempotence_failures;
        note("closure not idempotent near " + local.site(std::find(V.begin(), V.end(), 1) - V.begin()).str());
      }
      for (int64_t v = 0; v < local.size(); ++v) {
        if (!cl[v] || V[v]) continue;
        for (int64_t w : local.neighbor_indices(v))
          if (!cl[w]) {
            ++rep.neighbor_hole_failures;
            note("closure site " + local.site(v).str() + " borders the complement but is not in V");
            break;
          }
      }
      DegreeReport dr = degrees_of(cl, local, window, margin);
      rep.degree_checked += dr.checked;
      rep.degree_failures += dr.bad;
      if (dr.bad) note(dr.witness);
      if (touches) {
        for (const DualPath& path : chain(boundary_edges(cl, local))) {
          if (!path.closed) continue;
          bool interior = std::none_of(path.vertices.begin(), path.vertices.end(),
                                       [&](const DualVertex& q) { return exempt(q, window, margin); });
          if (interior) {
            ++rep.interior_circuits;
            note("closed boundary circuit through " + path.vertices.front().str() + " of a boundary-touching set");
          }
        }
      }
    }
  }
  RegionClassification rc = classify_regions(comps, window);
  rep.partition_failures = rc.overlaps + rc.unassigned;
  if (rep.partition_failures) note("region tags overlap or leave sites unassigned");
  return rep;
}

}  // namespace nnlab
