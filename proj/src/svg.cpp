#include "nnlab/svg.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace nnlab {

namespace {

constexpr int kCell = 24;
constexpr const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
                                    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};
constexpr int kColors = sizeof(kPalette) / sizeof(kPalette[0]);

void require_2d(const Domain& dom) {
  if (dom.dim() != 2) throw DomainError("SVG export needs d = 2, got " + std::to_string(dom.dim()));
}

struct Frame {
  const Domain& dom;
  double px(const Site& s) const { return kCell * (static_cast<double>(s[0] - dom.lo()[0]) + 1.0); }
  double py(const Site& s) const { return kCell * (static_cast<double>(dom.hi()[1] - s[1]) + 1.0); }
  int64_t width() const { return kCell * (dom.side(0) + 1); }
  int64_t height() const { return kCell * (dom.side(1) + 1); }
};

std::string coord(const Site& s) { return std::to_string(s[0]) + "," + std::to_string(s[1]); }

void header(std::ostream& os, const Frame& f) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width() << "\" height=\"" << f.height()
     << "\" viewBox=\"0 0 " << f.width() << " " << f.height() << "\">\n";
}

}  // namespace

std::string svg_outmap(const OutMap& g, const ComponentLabeling* comps) {
  const Domain& dom = g.domain();
  require_2d(dom);
  Frame f{dom};
  std::ostringstream os;
  char buf[256];
  header(os, f);
  os << "<defs><marker id=\"head\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"5\" markerHeight=\"5\" "
        "orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#333\"/></marker></defs>\n";
  os << "<g class=\"sites\">\n";
  for (int64_t v = 0; v < dom.size(); ++v) {
    Site s = dom.site(v);
    const char* color = comps ? kPalette[comps->label[v] % kColors] : "#888";
    std::snprintf(buf, sizeof buf, "<circle cx=\"%g\" cy=\"%g\" r=\"3\" fill=\"%s\"/>\n", f.px(s), f.py(s), color);
    os << buf;
  }
  os << "</g>\n<g class=\"edges\" stroke=\"#333\" stroke-width=\"1.5\">\n";
  for (int64_t v = 0; v < dom.size(); ++v) {
    if (!g.has_out(v)) continue;
    Site a = dom.site(v), b = dom.site(g.out(v));
    // Torus wrap edges are drawn as a short stub toward the wrap direction.
    double x1 = f.px(a), y1 = f.py(a), x2 = f.px(b), y2 = f.py(b);
    if (std::abs(x2 - x1) + std::abs(y2 - y1) > kCell) {
      x2 = x1 + (x2 > x1 ? -0.5 : x2 < x1 ? 0.5 : 0.0) * kCell;
      y2 = y1 + (y2 > y1 ? -0.5 : y2 < y1 ? 0.5 : 0.0) * kCell;
    } else {
      x2 = x1 + 0.8 * (x2 - x1);
      y2 = y1 + 0.8 * (y2 - y1);
    }
    std::snprintf(buf, sizeof buf,
                  "<line class=\"edge\" data-from=\"%s\" data-to=\"%s\" x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" "
                  "marker-end=\"url(#head)\"/>\n",
                  coord(a).c_str(), coord(b).c_str(), x1, y1, x2, y2);
    os << buf;
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

std::string svg_regions(const RegionClassification& rc, const Domain& window) {
  require_2d(window);
  Frame f{window};
  std::ostringstream os;
  char buf[256];
  header(os, f);
  os << "<defs>"
        "<pattern id=\"hatch-b\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\"><path d=\"M0,6 L6,0\" "
        "stroke=\"#555\" stroke-width=\"1\"/></pattern>"
        "<pattern id=\"hatch-c\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\"><path d=\"M0,0 L6,6\" "
        "stroke=\"#a33\" stroke-width=\"1\"/></pattern></defs>\n";
  using Tag = RegionClassification::Tag;
  for (int64_t v = 0; v < window.size(); ++v) {
    Site s = window.site(v);
    std::string fill;
    const char* cls = "unassigned";
    switch (rc.tag[v]) {
      case Tag::InClosure:
        fill = kPalette[rc.a_component[rc.region[v]] % kColors];
        cls = "a";
        break;
      case Tag::TypeB:
        fill = "url(#hatch-b)";
        cls = "b";
        break;
      case Tag::TypeC:
        fill = "url(#hatch-c)";
        cls = "c";
        break;
      case Tag::Unassigned:
        fill = "#fff";
        break;
    }
    std::snprintf(buf, sizeof buf,
                  "<rect class=\"%s\" data-site=\"%s\" x=\"%g\" y=\"%g\" width=\"%d\" height=\"%d\" fill=\"%s\"/>\n", cls,
                  coord(s).c_str(), f.px(s) - kCell / 2.0, f.py(s) - kCell / 2.0, kCell, kCell, fill.c_str());
    os << buf;
  }
  os << "</svg>\n";
  return os.str();
}

void write_regions_csv(std::ostream& os, const RegionClassification& rc, const Domain& window) {
  require_2d(window);
  static const char* names[] = {"unassigned", "a", "b", "c"};
  os << "x,y,tag,region\n";
  for (int64_t v = 0; v < window.size(); ++v) {
    Site s = window.site(v);
    os << s[0] << ',' << s[1] << ',' << names[static_cast<int>(rc.tag[v])] << ',' << rc.region[v] << '\n';
  }
}

}  // namespace nnlab
