#include "nnlab/weights.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace nnlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string sites_str(const std::vector<Site>& xs) {
  std::string s;
  for (const auto& x : xs) s += (s.empty() ? "" : " -> ") + x.str();
  return s;
}

// Directed cycles of length >= 3 in a functional graph, each listed from its
// smallest vertex.
std::vector<std::vector<int64_t>> long_cycles(const OutMap& g, size_t limit) {
  const int64_t n = g.size();
  std::vector<int8_t> state(n, 0);  // 0 new, 1 on stack, 2 done
  std::vector<std::vector<int64_t>> found;
  std::vector<int64_t> stack;
  for (int64_t s = 0; s < n && found.size() < limit; ++s) {
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
      std::vector<int64_t> cyc(it, stack.end());
      if (cyc.size() >= 3) {
        std::rotate(cyc.begin(), std::min_element(cyc.begin(), cyc.end()), cyc.end());
        found.push_back(std::move(cyc));
      }
    }
    for (int64_t u : stack) state[u] = 2;
  }
  return found;
}

}  // namespace

WeightField::WeightField(Domain dom) : dom_(std::move(dom)), w_(dom_.num_slots(), kNaN) {}

double WeightField::weight(const UEdge& e) const {
  return w_[dom_.slot_of(dom_.index(e.a), dom_.index(e.b))];
}

std::pair<int64_t, int64_t> WeightField::find_tie() const {
  std::vector<int64_t> order;
  for (int64_t s = 0; s < dom_.num_slots(); ++s)
    if (dom_.slot_valid(s)) order.push_back(s);
  std::sort(order.begin(), order.end(), [&](int64_t a, int64_t b) { return w_[a] < w_[b] || (w_[a] == w_[b] && a < b); });
  for (size_t i = 1; i < order.size(); ++i)
    if (w_[order[i]] == w_[order[i - 1]]) return {order[i - 1], order[i]};
  return {-1, -1};
}

void WeightField::write_csv(std::ostream& os) const {
  const int d = dom_.dim();
  for (int i = 0; i < d; ++i) os << 'a' << i << ',';
  for (int i = 0; i < d; ++i) os << 'b' << i << ',';
  os << "weight\n";
  std::vector<std::pair<UEdge, int64_t>> rows;
  for (int64_t s = 0; s < dom_.num_slots(); ++s) {
    if (!dom_.slot_valid(s)) continue;
    auto [u, v] = dom_.slot_ends(s);
    rows.emplace_back(UEdge(dom_.site(u), dom_.site(v)), s);
  }
  std::sort(rows.begin(), rows.end());
  char buf[64];
  for (const auto& [e, s] : rows) {
    for (int i = 0; i < d; ++i) os << e.a[i] << ',';
    for (int i = 0; i < d; ++i) os << e.b[i] << ',';
    std::snprintf(buf, sizeof buf, "%a", w_[s]);
    os << buf << '\n';
  }
}

WeightField WeightField::read_csv(const Domain& dom, std::istream& is) {
  WeightField f(dom);
  const int d = dom.dim();
  std::string line;
  if (!std::getline(is, line)) throw StructureError("empty weight file");
  int64_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (static_cast<int>(cells.size()) != 2 * d + 1)
      throw StructureError("weight row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) + " fields");
    Site a(d), b(d);
    for (int i = 0; i < d; ++i) {
      a[i] = std::stoll(cells[i]);
      b[i] = std::stoll(cells[d + i]);
    }
    f.w_[dom.slot_of(dom.index(a), dom.index(b))] = std::strtod(cells[2 * d].c_str(), nullptr);
  }
  for (int64_t s = 0; s < dom.num_slots(); ++s)
    if (dom.slot_valid(s) && std::isnan(f.w_[s])) throw StructureError("weight file misses an edge");
  return f;
}

bool operator==(const WeightField& a, const WeightField& b) {
  if (!(a.dom_ == b.dom_)) return false;
  for (size_t i = 0; i < a.w_.size(); ++i)
    if (std::bit_cast<uint64_t>(a.w_[i]) != std::bit_cast<uint64_t>(b.w_[i])) return false;
  return true;
}

namespace {

// Fills every valid slot via draw(slot, round) and re-draws tied slots with
// increasing round numbers until all weights are distinct.
template <class Draw>
void fill_distinct(WeightField& f, Draw draw) {
  const Domain& dom = f.domain();
  for (int64_t s = 0; s < dom.num_slots(); ++s)
    if (dom.slot_valid(s)) f.set_slot(s, draw(s, 0));
  for (uint64_t round = 1;; ++round) {
    auto [a, b] = f.find_tie();
    if (a < 0) return;
    f.set_slot(b, draw(b, round));
  }
}

}  // namespace

WeightField sample_iid_uniform(const Domain& dom, const SeededRng& rng) {
  WeightField f(dom);
  SeededRng redraw = rng.derive("redraw");
  fill_distinct(f, [&](int64_t s, uint64_t round) {
    return round == 0 ? rng.uniform(s) : redraw.uniform(redraw.bits(s, round));
  });
  return f;
}

std::vector<int64_t> backward_sizes(const OutMap& g) {
  const int64_t n = g.size();
  std::vector<int32_t> indeg = g.in_degrees();
  std::vector<int64_t> sub(n, 1);
  std::vector<int64_t> queue;
  queue.reserve(n);
  for (int64_t v = 0; v < n; ++v)
    if (indeg[v] == 0) queue.push_back(v);
  for (size_t h = 0; h < queue.size(); ++h) {
    int64_t v = queue[h];
    int64_t w = g.out(v);
    if (w < 0) continue;
    sub[w] += sub[v];
    if (--indeg[w] == 0) queue.push_back(w);
  }
  // Whatever remains lies on a cycle; only 2-cycles are allowed.
  std::vector<int64_t> size = sub;
  for (int64_t v = 0; v < n; ++v) {
    if (indeg[v] == 0) continue;
    int64_t w = g.out(v);
    if (g.out(w) != v) {
      auto cyc = long_cycles(g, 1);
      std::vector<Site> wit;
      for (int64_t u : cyc.empty() ? std::vector<int64_t>{v} : cyc[0]) wit.push_back(g.domain().site(u));
      throw StructureError("directed cycle of length >= 3", sites_str(wit));
    }
    size[v] = sub[v] + sub[w];
  }
  return size;
}

WeightField construct_weights(const OutMap& g, const SeededRng& rng) {
  PreconditionReport rep = verify_theorem3_preconditions(g);
  if (!rep.missing_out.empty())
    throw StructureError("active vertex without out-edge", rep.missing_out.front().str());
  if (!rep.long_cycles.empty())
    throw StructureError("directed cycle of length >= 3", sites_str(rep.long_cycles.front()));

  const Domain& dom = g.domain();
  std::vector<int64_t> size = backward_sizes(g);
  // V(e) per slot, 0 for edges outside g. A 2-cycle writes the same value twice.
  std::vector<int64_t> vol(dom.num_slots(), 0);
  for (int64_t v = 0; v < g.size(); ++v)
    if (g.has_out(v)) vol[dom.slot_of(v, g.out(v))] = size[v];

  WeightField f(dom);
  SeededRng redraw = rng.derive("redraw");
  fill_distinct(f, [&](int64_t s, uint64_t round) {
    double u = round == 0 ? rng.uniform(s) : redraw.uniform(redraw.bits(s, round));
    return vol[s] > 0 ? 1.0 / (static_cast<double>(vol[s]) + u) : 1.0 + u;
  });
  return f;
}

PreconditionReport verify_theorem3_preconditions(const OutMap& g) {
  const Domain& dom = g.domain();
  std::vector<char> active(g.size());
  for (int64_t v = 0; v < g.size(); ++v) active[v] = dom.is_interior(v);
  return verify_theorem3_preconditions(g, active);
}

PreconditionReport verify_theorem3_preconditions(const OutMap& g, const std::vector<char>& active) {
  PreconditionReport rep;
  const Domain& dom = g.domain();
  for (int64_t v = 0; v < g.size(); ++v)
    if (active[v] && !g.has_out(v)) rep.missing_out.push_back(dom.site(v));
  for (const auto& cyc : long_cycles(g, 16)) {
    std::vector<Site> sites;
    for (int64_t v : cyc) sites.push_back(dom.site(v));
    rep.long_cycles.push_back(std::move(sites));
  }
  return rep;
}

}  // namespace nnlab
