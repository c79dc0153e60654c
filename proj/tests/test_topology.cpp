#include <doctest.h>

#include <deque>
#include <map>
#include <random>
#include <set>

#include "nnlab/generators.hpp"
#include "nnlab/nngraph.hpp"
#include "nnlab/stats.hpp"
#include "nnlab/topology.hpp"

using namespace nnlab;

namespace {

// Recursive-free flood fill, one label per site-component.
std::vector<int32_t> flood_labels(const Mask& m, const Domain& w) {
  std::vector<int32_t> lab(w.size(), -1);
  int32_t next = 0;
  for (int64_t s = 0; s < w.size(); ++s) {
    if (!m[s] || lab[s] >= 0) continue;
    std::deque<int64_t> q{s};
    lab[s] = next;
    while (!q.empty()) {
      int64_t v = q.front();
      q.pop_front();
      Site x = w.site(v);
      for (Site y : {x + Site{1, 0}, x - Site{1, 0}, x + Site{0, 1}, x - Site{0, 1}}) {
        if (!w.contains(y)) continue;
        int64_t u = w.index(y);
        if (m[u] && lab[u] < 0) {
          lab[u] = next;
          q.push_back(u);
        }
      }
    }
    ++next;
  }
  return lab;
}

Mask annulus(const Domain& w) {
  Mask m(w.size(), 0);
  for (int64_t v = 0; v < w.size(); ++v) {
    Site x = w.site(v);
    bool ring = x[0] >= 2 && x[0] <= 6 && x[1] >= 2 && x[1] <= 6 && !(x[0] >= 3 && x[0] <= 5 && x[1] >= 3 && x[1] <= 5);
    m[v] = ring;
  }
  return m;
}

std::multiset<DualEdge> undirected(const DualPath& p) {
  std::multiset<DualEdge> s;
  for (const DualEdge& e : p.edges()) s.insert(e);
  return s;
}

}  // namespace

TEST_CASE("site components") {
  Domain w = Domain::box_sides({4, 4});
  CHECK(site_components(mask_of({Site{0, 0}, Site{1, 1}}, w), w).count() == 2);
  CHECK(site_components(mask_of({Site{0, 0}, Site{1, 0}, Site{1, 1}}, w), w).count() == 1);
}

TEST_CASE("site components agree with flood fill") {
  std::mt19937_64 eng(3);
  Domain w = Domain::box_sides({23, 17});
  for (double p : {0.3, 0.55, 0.7}) {
    std::bernoulli_distribution coin(p);
    Mask m(w.size());
    for (auto& c : m) c = coin(eng);
    SiteComponents sc = site_components(m, w);
    auto oracle = flood_labels(m, w);
    std::map<int32_t, int32_t> to_oracle;
    for (int64_t v = 0; v < w.size(); ++v) {
      CHECK((sc.label[v] < 0) == (oracle[v] < 0));
      if (sc.label[v] < 0) continue;
      auto [it, fresh] = to_oracle.emplace(sc.label[v], oracle[v]);
      CHECK(it->second == oracle[v]);
    }
    std::set<int32_t> distinct;
    for (auto& kv : to_oracle) distinct.insert(kv.second);
    CHECK(distinct.size() == to_oracle.size());
    CHECK(static_cast<int32_t>(to_oracle.size()) == sc.count());
  }
}

TEST_CASE("closure fills holes and is idempotent") {
  Domain w = Domain::box_sides({10, 10});
  Mask a = annulus(w);
  Mask c = closure(a, w);
  for (int64_t v = 0; v < w.size(); ++v) {
    Site x = w.site(v);
    bool filled = x[0] >= 2 && x[0] <= 6 && x[1] >= 2 && x[1] <= 6;
    CHECK(static_cast<bool>(c[v]) == filled);
  }
  CHECK(closure(c, w) == c);

  Mask bar = mask_of({Site{3, 3}, Site{4, 3}, Site{5, 3}}, w);
  CHECK(closure(bar, w) == bar);

  Mask comp(w.size());
  for (int64_t v = 0; v < w.size(); ++v) comp[v] = !c[v];
  SiteComponents sc = site_components(comp, w);
  for (int32_t i = 0; i < sc.count(); ++i) CHECK(sc.touches_boundary[i]);
}

TEST_CASE("dual boundary of one and two sites") {
  Domain w = Domain::box(Site{-3, -3}, Site{3, 3});
  auto one = dual_boundary(mask_of({Site{0, 0}}, w), w);
  REQUIRE(one.size() == 1);
  CHECK(one[0].closed);
  CHECK(one[0].edges().size() == 4);
  std::multiset<DualEdge> want{dual_of(UEdge(Site{0, 0}, Site{1, 0})), dual_of(UEdge(Site{0, 0}, Site{-1, 0})),
                               dual_of(UEdge(Site{0, 0}, Site{0, 1})), dual_of(UEdge(Site{0, 0}, Site{0, -1}))};
  CHECK(undirected(one[0]) == want);

  auto two = dual_boundary(mask_of({Site{0, 0}, Site{1, 0}}, w), w);
  REQUIRE(two.size() == 1);
  CHECK(two[0].closed);
  CHECK(two[0].edges().size() == 6);
  CHECK(two[0].vertices.front() == two[0].vertices.back());

  // Closure on the left: walking the circuit turns counterclockwise.
  const auto& vs = one[0].vertices;
  int64_t area2 = 0;
  for (size_t i = 0; i + 1 < vs.size(); ++i) area2 += vs[i].x2 * vs[i + 1].y2 - vs[i + 1].x2 * vs[i].y2;
  CHECK(area2 > 0);
}

TEST_CASE("dual boundary of an annulus follows its closure") {
  Domain w = Domain::box_sides({10, 10});
  auto paths = dual_boundary(annulus(w), w);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].closed);
  CHECK(paths[0].edges().size() == 20);
}

TEST_CASE("dual degrees are two away from the boundary") {
  std::mt19937_64 eng(5);
  Domain w = Domain::box_sides({30, 30});
  std::bernoulli_distribution coin(0.6);
  Mask m(w.size());
  for (auto& c : m) c = coin(eng);
  SiteComponents sc = site_components(m, w);
  for (int32_t id = 0; id < sc.count(); ++id) {
    Mask one(w.size(), 0);
    for (int64_t v = 0; v < w.size(); ++v) one[v] = sc.label[v] == id;
    DegreeReport r = dual_degrees(one, w);
    CHECK_MESSAGE(r.bad == 0, r.witness);
  }
}

TEST_CASE("common neighbor insertion") {
  auto in_closure = [](const Site& s) { return s == Site{0, 1}; };
  auto p = insert_common_neighbors({Site{0, 0}, Site{1, 1}}, in_closure);
  CHECK(p == std::vector<Site>{Site{0, 0}, Site{1, 0}, Site{1, 1}});

  auto q = insert_common_neighbors({Site{0, 0}, Site{0, 0}, Site{1, 0}}, in_closure);
  CHECK(q == std::vector<Site>{Site{0, 0}, Site{1, 0}});
}

TEST_CASE("star boundary of a half plane is the next row") {
  Domain w = Domain::box_sides({8, 8});
  Mask half(w.size(), 0);
  for (int64_t v = 0; v < w.size(); ++v) half[v] = w.site(v)[1] <= 3;
  auto path = star_boundary_path(half, w);
  REQUIRE(path.size() == 8);
  std::set<Site> row(path.begin(), path.end());
  for (int64_t x = 0; x < 8; ++x) CHECK(row.count(Site{x, 4}));
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    Site d = path[i + 1] - path[i];
    CHECK(std::abs(d[0]) + std::abs(d[1]) == 1);
  }
}

TEST_CASE("star boundary along a staircase is site connected") {
  Domain w = Domain::box_sides({12, 12});
  Mask stair(w.size(), 0);
  for (int64_t v = 0; v < w.size(); ++v) stair[v] = w.site(v)[1] <= w.site(v)[0];
  auto path = star_boundary_path(stair, w);
  REQUIRE(path.size() > 1);
  Mask c = closure(stair, w);
  for (const Site& s : path) CHECK_FALSE(c[w.index(s)]);
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    Site d = path[i + 1] - path[i];
    CHECK(std::abs(d[0]) + std::abs(d[1]) == 1);
  }
  CHECK_THROWS_AS(star_boundary_path(mask_of({Site{5, 5}}, w), w), StructureError);
}

TEST_CASE("Zerner-Merkl splits the window into two type-(a) regions") {
  for (uint64_t seed = 0; seed < 3; ++seed) {
    Domain win = Domain::box_sides({64, 64});
    ZernerMerklRule rule(SeededRng(seed), ZernerMerklRule::Mode::Cylinder, 32);
    ComponentLabeling comps = label_window(rule, win, 400000).comps;
    RegionClassification rc = classify_regions(comps, win);
    CHECK(rc.type_a() == 2);
    CHECK(rc.type_b() == 0);
    CHECK(rc.type_c() == 0);
    CHECK(rc.unassigned == 0);
    CHECK(rc.overlaps == 0);
    CHECK(check_topology(comps, win).pass());
  }
}

TEST_CASE("type-(c) regions appear after the modification") {
  int64_t with_c = 0;
  for (uint64_t seed = 0; seed < 3; ++seed) {
    Domain win = Domain::box_sides({64, 64});
    auto rule = make_rule(spec_for_model("typec"), SeededRng(seed), RuleHost{32});
    ComponentLabeling comps = label_window(*rule, win, 400000).comps;
    RegionClassification rc = classify_regions(comps, win);
    CHECK(rc.type_a() == 2);
    with_c += rc.type_c() > 0;
    CHECK(rc.unassigned == 0);
    CHECK(rc.overlaps == 0);
    TopologyReport t = check_topology(comps, win);
    CHECK_MESSAGE(t.pass(), t.witness);
  }
  CHECK(with_c == 3);
}

TEST_CASE("iid regions partition the window") {
  for (uint64_t seed : {1, 2}) {
    Domain win = Domain::box_sides({64, 64});
    ComponentLabeling comps = label_window(IidRule(2, SeededRng(seed)), win, 400000).comps;
    RegionClassification rc = classify_regions(comps, win);
    CHECK(rc.type_a() == 0);
    int64_t total = 0;
    for (auto s : rc.a_size) total += s;
    for (auto s : rc.b_size) total += s;
    for (auto s : rc.c_size) total += s;
    CHECK(total == win.size());
    CHECK(rc.unassigned == 0);
    TopologyReport t = check_topology(comps, win);
    CHECK_MESSAGE(t.pass(), t.witness);

    // The truncated realization marks boundary pieces instead; the partition still holds.
    OutMap g = realize(IidRule(2, SeededRng(seed)), win);
    RegionClassification cut = classify_regions(undirected_components(g), win);
    CHECK(cut.unassigned == 0);
    CHECK(cut.overlaps == 0);
  }
}

TEST_CASE("classification rejects other dimensions") {
  OutMap g(Domain::box_sides({4, 4, 4}));
  CHECK_THROWS(classify_regions(undirected_components(g), g.domain()));
}
