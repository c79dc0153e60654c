#pragma once

// Independent oracles and fixtures shared by the unit tests and the
// acceptance binary. Nothing here calls the library routine it checks.

#include <algorithm>
#include <bit>
#include <deque>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "nnlab/generators.hpp"
#include "nnlab/lattice.hpp"
#include "nnlab/nngraph.hpp"
#include "nnlab/outmap.hpp"
#include "nnlab/stats.hpp"
#include "nnlab/weights.hpp"

namespace nnlab::testing {

// Per-vertex argmin by direct scan of the incident edges.
inline OutMap oracle_nn(const WeightField& w) {
  const Domain& dom = w.domain();
  OutMap g(dom);
  for (int64_t v = 0; v < dom.size(); ++v) {
    int64_t best = -1;
    double bw = 0;
    for (int64_t u : dom.neighbor_indices(v)) {
      double x = w.weight(v, u);
      if (best < 0 || x < bw) {
        best = u;
        bw = x;
      }
    }
    if (best >= 0) g.set_unchecked(v, best);
  }
  return g;
}

// #C_x by breadth-first search over reversed edges.
inline int64_t oracle_backward_size(const OutMap& g, int64_t x) {
  std::vector<std::vector<int64_t>> rev(g.size());
  for (int64_t v = 0; v < g.size(); ++v)
    if (g.out(v) >= 0) rev[g.out(v)].push_back(v);
  std::vector<char> seen(g.size(), 0);
  std::deque<int64_t> q{x};
  seen[x] = 1;
  int64_t n = 0;
  while (!q.empty()) {
    int64_t v = q.front();
    q.pop_front();
    ++n;
    for (int64_t u : rev[v])
      if (!seen[u]) {
        seen[u] = 1;
        q.push_back(u);
      }
  }
  return n;
}

// Random out-degree-one digraph on dom without cycles of length >= 3: every
// vertex picks a random neighbor, then each longer cycle is cut by turning
// one of its edges back, which leaves a 2-cycle. On a box, boundary vertices
// lose their out-edge with probability `drop`.
inline OutMap random_admissible(const Domain& dom, std::mt19937_64& eng, double drop = 0.0) {
  OutMap g(dom);
  for (int64_t v = 0; v < dom.size(); ++v) {
    auto nb = dom.neighbor_indices(v);
    if (nb.empty()) continue;
    g.set_unchecked(v, nb[std::uniform_int_distribution<size_t>(0, nb.size() - 1)(eng)]);
  }
  std::vector<int8_t> state(dom.size(), 0);
  std::vector<int64_t> stack;
  for (int64_t s = 0; s < dom.size(); ++s) {
    if (state[s]) continue;
    stack.clear();
    int64_t v = s;
    while (v >= 0 && state[v] == 0) {
      state[v] = 1;
      stack.push_back(v);
      v = g.out(v);
    }
    if (v >= 0 && state[v] == 1) {
      auto it = std::find(stack.begin(), stack.end(), v);
      if (stack.end() - it >= 3) {
        // stack.back() -> v closes the cycle; point v back at its predecessor.
        g.set_unchecked(*it, stack.back());
      }
    }
    for (int64_t u : stack) state[u] = 2;
  }
  if (!dom.is_torus() && drop > 0) {
    std::bernoulli_distribution coin(drop);
    for (int64_t v = 0; v < dom.size(); ++v)
      if (!dom.is_interior(v) && coin(eng)) g.clear(v);
  }
  return g;
}

// Path v0 - v1 - v2 - v3 with weights 0.3, 0.1, 0.4.
inline WeightField four_path() {
  WeightField w(Domain::box_sides({4}));
  w.set_slot(0, 0.3);
  w.set_slot(1, 0.1);
  w.set_slot(2, 0.4);
  return w;
}

// Dyadic base rule x -> x - e_{i(x)} on the nonnegative orthant, written out
// from the definition of k(x) and i(x). The origin has no out-edge.
inline std::optional<Site> oracle_dyadic_out(const Site& x) {
  uint64_t all = 0;
  for (int i = 0; i < x.dim; ++i) all |= static_cast<uint64_t>(x[i]);
  if (all == 0) return std::nullopt;
  const int level = std::countr_zero(all);  // k(x) - 1
  for (int i = x.dim - 1; i >= 0; --i)
    if ((static_cast<uint64_t>(x[i]) >> level) & 1) return x - Site::unit(x.dim, i);
  return std::nullopt;
}

struct DyadicBoxResult {
  int64_t sites = 0;
  int64_t reach_failures = 0;  // left the box or took more than d 2^k steps to reach its corner
  int64_t pairs = 0;
  int64_t pair_failures = 0;   // met later than d 2^k steps along either orbit
  int64_t divisibility_failures = 0;
};

// Exhaustive checks on the box 2^k z + C_k under the dyadic base rule.
inline DyadicBoxResult dyadic_box_check(int d, int k, const Site& z, bool check_pairs) {
  const int64_t side = int64_t{1} << k;
  Domain box = Domain::box(z.scaled(side), z.scaled(side) + Site::from(std::vector<int64_t>(d, side - 1)));
  const int64_t n = box.size(), bound = d * side;
  const int64_t corner = 0;  // 2^k z is the lexicographically smallest site
  std::vector<int64_t> out(n, -1);
  DyadicBoxResult r;
  r.sites = n;
  const int64_t inf = std::numeric_limits<int64_t>::max() / 4;
  std::vector<int64_t> steps(n, inf);
  for (int64_t v = 0; v < n; ++v) {
    Site x = box.site(v);
    auto y = oracle_dyadic_out(x);
    if (y && box.contains(*y)) out[v] = box.index(*y);
    if (v == corner) {
      steps[v] = 0;
    } else if (out[v] >= 0 && out[v] < v) {
      steps[v] = steps[out[v]] == inf ? inf : steps[out[v]] + 1;
    }
    if (steps[v] > bound) ++r.reach_failures;
    for (int j = 1; j <= k && y; ++j) {
      auto loose = [&](const Site& s) {
        int c = 0;
        for (int i = 0; i < d; ++i) c += s[i] % (int64_t{1} << j) != 0;
        return c;
      };
      if (loose(x) <= 1 && loose(*y) > 1) ++r.divisibility_failures;
    }
  }
  if (!check_pairs || r.reach_failures) return r;
  std::vector<int64_t> pos(n), hit(n), meet(n);
  for (int64_t b = 0; b < n; ++b) {
    std::fill(pos.begin(), pos.end(), -1);
    int64_t t = 0;
    for (int64_t v = b;; v = out[v], ++t) {
      pos[v] = t;
      if (v == corner) break;
    }
    for (int64_t a = 0; a < n; ++a) {
      if (pos[a] >= 0) {
        hit[a] = 0;
        meet[a] = a;
      } else {
        hit[a] = hit[out[a]] + 1;
        meet[a] = meet[out[a]];
      }
      ++r.pairs;
      if (hit[a] > bound || pos[meet[a]] > bound) ++r.pair_failures;
    }
  }
  return r;
}

struct FiniteKCheck {
  int64_t sites = 0;
  int64_t residue_failures = 0;  // in two V^(j), or membership disagrees with the residues
  int64_t filler_components = 0;
  int64_t filler_loop_failures = 0;   // a filler component without exactly one 2-cycle
  int64_t filler_width_failures = 0;  // L-infinity diameter above 4k
  int64_t singleton_sites = 0;        // filler sites with no filler site-neighbor in their cube
  int64_t crossing_edges = 0;         // edges between filler and the sublattices
  int64_t segments = 0;
  int64_t segment_failures = 0;       // segment orientation disagrees with G^(j)
  bool pass() const {
    return residue_failures == 0 && filler_loop_failures == 0 && filler_width_failures == 0 && singleton_sites == 0 &&
           crossing_edges == 0 && segment_failures == 0;
  }
};

// Unshifted FiniteK structure: residues on [-r, r)^d, the filler on the cube
// [-2k, 2k)^d, and every stretched segment leaving the coarse nodes in
// [0, nodes)^d of each G^(j).
inline FiniteKCheck finitek_check(const FiniteKRule& rule, int64_t r, int64_t nodes) {
  const int k = rule.k(), d = rule.dim();
  const int64_t side = 4 * k;
  auto md = [](int64_t a, int64_t b) { return ((a % b) + b) % b; };
  FiniteKCheck c;

  Domain window = Domain::box(Site::from(std::vector<int64_t>(d, -r)), Site::from(std::vector<int64_t>(d, r - 1)));
  for (int64_t v = 0; v < window.size(); ++v) {
    Site p = window.site(v);
    ++c.sites;
    int hits = 0, which = 0;
    for (int j = 1; j <= k; ++j) {
      int on = 0;
      for (int i = 0; i < d; ++i) on += md(p[i] - 4 * (j - 1), side) == 0;
      if (on >= d - 1) {
        ++hits;
        which = j;
      }
    }
    if (hits > 1 || rule.memberships(p) != hits || rule.sublattice_of(p) != which) ++c.residue_failures;
  }

  Domain cube = Domain::box(Site::from(std::vector<int64_t>(d, -2 * k)), Site::from(std::vector<int64_t>(d, 2 * k - 1)));
  OutMap filler(cube);
  std::vector<char> is_filler(cube.size(), 0);
  for (int64_t v = 0; v < cube.size(); ++v) is_filler[v] = rule.sublattice_of(cube.site(v)) == 0;
  for (int64_t v = 0; v < cube.size(); ++v) {
    auto y = rule.out_unshifted(cube.site(v));
    if (!y) continue;
    const bool tgt_filler = rule.sublattice_of(*y) == 0;
    if (tgt_filler != static_cast<bool>(is_filler[v])) ++c.crossing_edges;
    if (is_filler[v]) {
      if (!cube.contains(*y)) {
        ++c.filler_width_failures;
        continue;
      }
      filler.set_unchecked(v, cube.index(*y));
    }
  }
  for (int64_t v = 0; v < cube.size(); ++v) {
    if (!is_filler[v]) continue;
    bool lonely = true;
    for (int64_t u : cube.neighbor_indices(v)) lonely = lonely && !is_filler[u];
    c.singleton_sites += lonely;
  }
  ComponentLabeling comps = undirected_components(filler);
  auto members = comps.members();
  for (int32_t id = 0; id < comps.count(); ++id) {
    if (!is_filler[members[id][0]]) continue;
    ++c.filler_components;
    if (comps.miniloops[id] != 1) ++c.filler_loop_failures;
    for (int i = 0; i < d; ++i) {
      int64_t lo = std::numeric_limits<int64_t>::max(), hi = std::numeric_limits<int64_t>::min();
      for (int64_t v : members[id]) {
        lo = std::min(lo, cube.site(v)[i]);
        hi = std::max(hi, cube.site(v)[i]);
      }
      if (hi - lo > side) ++c.filler_width_failures;
    }
  }

  for (int j = 1; j <= k; ++j) {
    const DyadicRule& G = rule.layer(j);
    Domain coarse = Domain::box_sides(std::vector<int64_t>(d, nodes));
    for (int64_t v = 0; v < coarse.size(); ++v) {
      const Site a = coarse.site(v);
      const Site base = a.scaled(side) + Site::from(std::vector<int64_t>(d, 4 * (j - 1)));
      for (int i = 0; i < d; ++i) {
        ++c.segments;
        const Site b = a + Site::unit(d, i);
        const Site e = Site::unit(d, i);
        const bool fwd = G.out(a) == std::optional<Site>(b);
        const bool bwd = G.out(b) == std::optional<Site>(a);
        int64_t bad = 0;
        // The end nodes leave along this segment exactly when G^(j) does.
        bad += (rule.out_unshifted(base) == std::optional<Site>(base + e)) != fwd;
        bad += (rule.out_unshifted(base + e.scaled(side)) == std::optional<Site>(base + e.scaled(side - 1))) != bwd;
        for (int64_t ell = 1; ell < side; ++ell) {
          const Site p = base + e.scaled(ell);
          int64_t want;
          if (fwd && bwd) want = ell <= 2 * k ? 1 : -1;
          else if (fwd) want = 1;
          else if (bwd) want = -1;
          else want = ell <= 2 * k ? -1 : 1;
          bad += rule.out_unshifted(p) != std::optional<Site>(p + e.scaled(want));
        }
        c.segment_failures += bad != 0;
      }
    }
  }
  return c;
}

// Per-vertex in-mass of a transport, by following every forward path.
// Orbits ending in a longer cycle are skipped.
struct OracleTransport {
  std::vector<int64_t> in_mass;
  int64_t sent = 0;
};

inline OracleTransport oracle_transport(const OutMap& g, const WeightField& w, const TransportFunction& m) {
  const Domain& dom = g.domain();
  OracleTransport t;
  t.in_mass.assign(g.size(), 0);
  for (int64_t x = 0; x < g.size(); ++x) {
    PathTrace p;
    try {
      p = forward_path(dom.site(x), g);
    } catch (const StructureError&) {
      continue;
    }
    if (m.kind == TransportFunction::Kind::TwoCycleEndpoint) {
      if (p.terminal != PathTrace::Terminal::TwoCycle) continue;
      ++t.in_mass[dom.index(p.u)];
      ++t.in_mass[dom.index(p.v)];
      t.sent += 2;
    } else if (auto y = r_descendant(dom.site(x), m.r, g, w)) {
      ++t.in_mass[dom.index(*y)];
      ++t.sent;
    }
  }
  return t;
}

}  // namespace nnlab::testing
