#include "nnlab/outmap.hpp"

#include <istream>
#include <ostream>
#include <string>

#include "json.hpp"

namespace nnlab {

OutMap::OutMap(Domain dom) : dom_(std::move(dom)), out_(dom_.size(), -1) {}

std::optional<Site> OutMap::out(const Site& x) const {
  int64_t w = out_[dom_.index(x)];
  if (w < 0) return std::nullopt;
  return dom_.site(w);
}

void OutMap::set(int64_t v, int64_t w) {
  if (!dom_.adjacent(v, w))
    throw StructureError("out-edge joins non-adjacent sites", dom_.site(v).str() + " -> " + dom_.site(w).str());
  out_[v] = w;
}

void OutMap::set(const Site& x, const Site& y) { set(dom_.index(x), dom_.index(dom_.wrap(y))); }

int64_t OutMap::edge_count() const {
  int64_t n = 0;
  for (int64_t w : out_) n += w >= 0;
  return n;
}

std::vector<DEdge> OutMap::edges() const {
  std::vector<DEdge> r;
  for (int64_t v = 0; v < size(); ++v)
    if (out_[v] >= 0) r.push_back({dom_.site(v), dom_.site(out_[v])});
  return r;
}

std::vector<int32_t> OutMap::in_degrees() const {
  std::vector<int32_t> deg(out_.size(), 0);
  for (int64_t w : out_)
    if (w >= 0) ++deg[w];
  return deg;
}

OutMap OutMap::restricted(const Domain& window) const {
  if (dom_.is_torus() || window.is_torus()) throw DomainError("restriction needs box domains");
  OutMap r(window);
  for (int64_t v = 0; v < window.size(); ++v) {
    Site x = window.site(v);
    if (!dom_.contains(x)) throw DomainError("window " + window.describe() + " not inside " + dom_.describe());
    int64_t w = out_[dom_.index(x)];
    if (w < 0) continue;
    Site y = dom_.site(w);
    if (window.contains(y)) r.out_[v] = window.index(y);
  }
  return r;
}

void OutMap::write_jsonl(std::ostream& os) const {
  for (int64_t v = 0; v < size(); ++v) {
    if (out_[v] < 0) continue;
    nlohmann::json j = {{"from", dom_.site(v).to_vector()}, {"to", dom_.site(out_[v]).to_vector()}};
    os << j.dump() << '\n';
  }
}

OutMap OutMap::read_jsonl(const Domain& dom, std::istream& is) {
  OutMap g(dom);
  std::string line;
  int64_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw StructureError("malformed edge on line " + std::to_string(lineno) + ": " + e.what());
    }
    Site x = Site::from(j.at("from").get<std::vector<int64_t>>());
    Site y = Site::from(j.at("to").get<std::vector<int64_t>>());
    int64_t v = dom.index(x);
    if (g.out_[v] >= 0) throw StructureError("vertex has two out-edges", x.str());
    g.set(v, dom.index(y));
  }
  return g;
}

}  // namespace nnlab
