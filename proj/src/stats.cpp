#include "nnlab/stats.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <random>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "nnlab/io.hpp"

namespace nnlab {

namespace {

struct PackedKey {
  uint64_t a, b;
  bool operator==(const PackedKey&) const = default;
};

struct PackedKeyHash {
  size_t operator()(const PackedKey& k) const noexcept { return SeededRng::mix(k.a ^ SeededRng::mix(k.b)); }
};

// Class ids for window sites (dense) and for trail sites outside it (hashed).
class SiteLabels {
 public:
  explicit SiteLabels(const Domain& window) : window_(window), dense_(window.size(), -1) {}

  int32_t get(const Site& x) const {
    if (window_.contains(x)) return dense_[window_.index(x)];
    if (auto k = pack(x)) {
      auto it = packed_.find(*k);
      return it == packed_.end() ? -1 : it->second;
    }
    auto it = wide_.find(x);
    return it == wide_.end() ? -1 : it->second;
  }

  void put(const Site& x, int32_t c) {
    if (window_.contains(x)) {
      dense_[window_.index(x)] = c;
    } else if (auto k = pack(x)) {
      packed_[*k] = c;
    } else {
      wide_[x] = c;
    }
  }

  int32_t dense(int64_t v) const { return dense_[v]; }
  int64_t outside() const { return static_cast<int64_t>(packed_.size() + wide_.size()); }

 private:
  std::optional<PackedKey> pack(const Site& x) const {
    if (x.dim > 4) return std::nullopt;
    uint64_t w[2] = {0, 0};
    for (int i = 0; i < x.dim; ++i) {
      int64_t rel = x[i] - window_.lo()[i];
      if (rel < std::numeric_limits<int32_t>::min() || rel > std::numeric_limits<int32_t>::max()) return std::nullopt;
      w[i / 2] |= static_cast<uint64_t>(static_cast<uint32_t>(static_cast<int32_t>(rel))) << (32 * (i % 2));
    }
    return PackedKey{w[0], w[1]};
  }

  const Domain& window_;
  std::vector<int32_t> dense_;
  std::unordered_map<PackedKey, int32_t, PackedKeyHash> packed_;
  std::unordered_map<Site, int32_t, SiteHash> wide_;
};

struct ClassForest {
  std::vector<int32_t> parent;
  std::vector<char> infinite;
  std::vector<int32_t> loops;
  int32_t make() {
    parent.push_back(static_cast<int32_t>(parent.size()));
    infinite.push_back(0);
    loops.push_back(0);
    return parent.back();
  }
  int32_t find(int32_t c) {
    while (parent[c] != c) c = parent[c] = parent[parent[c]];
    return c;
  }
  void unite(int32_t a, int32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[b] = a;
    infinite[a] |= infinite[b];
    loops[a] += loops[b];
  }
};

}  // namespace

WindowLabeling label_window(const LatticeRule& rule, const Domain& window, int64_t cap) {
  if (window.is_torus()) throw DomainError("label_window expects a box window");
  WindowLabeling out;
  SiteLabels labels(window);
  ClassForest forest;
  for (int64_t v = 0; v < window.size(); ++v) {
    if (labels.dense(v) >= 0) continue;
    const int32_t c = forest.make();
    Site x = rule.canonical(window.site(v));
    labels.put(x, c);
    std::optional<Site> prev;
    for (int64_t steps = 0;; ++steps) {
      if (steps >= cap) {
        forest.infinite[c] = 1;
        ++out.capped_walks;
        break;
      }
      auto y = rule.out(x);
      ++out.steps;
      if (!y) break;  // sink
      const int32_t ly = labels.get(*y);
      if (ly == c) {
        if (prev && *prev == *y) {
          ++forest.loops[c];
        } else {
          ++out.long_cycles;
        }
        break;
      }
      if (ly >= 0) {
        forest.unite(c, ly);
        break;
      }
      labels.put(*y, c);
      prev = x;
      x = *y;
    }
  }
  out.trail_sites = labels.outside();

  ComponentLabeling& cl = out.comps;
  cl.label.assign(window.size(), -1);
  std::unordered_map<int32_t, int32_t> dense_id;
  for (int64_t v = 0; v < window.size(); ++v) {
    const int32_t root = forest.find(labels.dense(v));
    auto [it, fresh] = dense_id.emplace(root, cl.count());
    if (fresh) {
      cl.size.push_back(0);
      cl.boundary_touching.push_back(0);
      cl.wrapping.push_back(0);
      cl.infinite_proxy.push_back(forest.infinite[root]);
      cl.miniloops.push_back(forest.loops[root]);
    }
    const int32_t id = it->second;
    cl.label[v] = id;
    ++cl.size[id];
    if (window.near_boundary(v, 2)) cl.boundary_touching[id] = 1;
  }
  return out;
}

int64_t backward_size_capped(const LatticeRule& rule, const Site& x, int64_t cap) {
  const int d = rule.dim();
  Site start = rule.canonical(x);
  std::unordered_set<Site, SiteHash> seen{start};
  std::deque<Site> queue{start};
  while (!queue.empty()) {
    Site v = queue.front();
    queue.pop_front();
    for (int i = 0; i < d; ++i)
      for (int s : {-1, 1}) {
        Site u = rule.canonical(v + Site::unit(d, i, s));
        if (seen.count(u)) continue;
        auto o = rule.out(u);
        if (!o || *o != v) continue;
        seen.insert(u);
        if (static_cast<int64_t>(seen.size()) > cap) return cap + 1;
        queue.push_back(u);
      }
  }
  return static_cast<int64_t>(seen.size());
}

namespace {

// Evaluates f along out-orbits so that f(out(v)) is known before f(v).
// Vertices on a terminal cycle or at a sink are seeded by `terminal`.
template <class T, class Terminal, class Step>
std::vector<T> along_orbits(const OutMap& g, const Orbits& orb, Terminal terminal, Step step) {
  const int64_t n = g.size();
  std::vector<T> val(n);
  std::vector<char> done(n, 0);
  for (int64_t v = 0; v < n; ++v) {
    const int64_t w = g.out(v);
    const bool on_cycle = w >= 0 && orb.entry[v] == v && orb.kind[v] != Orbits::kSink;
    if (w < 0 || on_cycle) {
      val[v] = terminal(v);
      done[v] = 1;
    }
  }
  std::vector<int64_t> stack;
  for (int64_t s = 0; s < n; ++s) {
    if (done[s]) continue;
    stack.clear();
    for (int64_t v = s; !done[v]; v = g.out(v)) stack.push_back(v);
    for (size_t i = stack.size(); i-- > 0;) {
      val[stack[i]] = step(stack[i], val[g.out(stack[i])]);
      done[stack[i]] = 1;
    }
  }
  return val;
}

}  // namespace

TransportResult transport_balance(const OutMap& g, const WeightField& w, const TransportFunction& m) {
  const Domain& dom = g.domain();
  if (!dom.is_torus()) throw DomainError("transport balance needs a torus");
  const int64_t n = g.size();
  TransportResult res;
  Orbits orb = orbit_structure(g);
  std::vector<int64_t> in_mass(n, 0);

  if (m.kind == TransportFunction::Kind::TwoCycleEndpoint) {
    // Sources: every vertex whose orbit ends in a 2-cycle sends one unit to each endpoint.
    for (int64_t x = 0; x < n; ++x) {
      int64_t mass = orb.kind[x] == Orbits::kTwoCycle ? 2 : 0;
      if (orb.kind[x] == Orbits::kLongCycle) ++res.skipped;
      res.by_source += mass;
      res.max_out_mass = std::max(res.max_out_mass, mass);
    }
    // Targets: a 2-cycle endpoint receives one unit from each vertex of its component.
    ComponentLabeling comps = undirected_components(g);
    for (int64_t y = 0; y < n; ++y) {
      const int64_t z = g.out(y);
      if (z >= 0 && g.out(z) == y) in_mass[y] = comps.size[comps.label[y]];
    }
  } else {
    const double r = m.r;
    auto wout = [&](int64_t v) { return w.weight(v, g.out(v)); };
    auto on_two_cycle = [&](int64_t v) { return orb.kind[v] == Orbits::kTwoCycle && orb.entry[v] == v; };
    // Sources: last(x) is the r-descendant, resolved from the end of the orbit backwards.
    std::vector<int64_t> last = along_orbits<int64_t>(
        g, orb,
        [&](int64_t v) -> int64_t {
          if (on_two_cycle(v) && wout(v) >= r) return g.out(v);
          return -1;
        },
        [&](int64_t v, int64_t next) -> int64_t {
          if (next >= 0) return next;
          return wout(v) >= r ? v : -1;
        });
    for (int64_t x = 0; x < n; ++x) {
      if (orb.kind[x] == Orbits::kLongCycle) {
        ++res.skipped;
        continue;
      }
      int64_t mass = last[x] >= 0 ? 1 : 0;
      res.by_source += mass;
      res.max_out_mass = std::max(res.max_out_mass, mass);
    }
    // Targets: y collects its whole backward tree when its out-edge is the last
    // one of weight >= r on its own orbit; a 2-cycle endpoint collects the tree
    // hanging off its partner.
    std::vector<double> tail_max = along_orbits<double>(
        g, orb,
        [&](int64_t v) { return g.out(v) >= 0 ? wout(v) : -std::numeric_limits<double>::infinity(); },
        [&](int64_t v, double next) { return std::max(wout(v), next); });
    std::vector<int32_t> indeg = g.in_degrees();
    std::vector<int64_t> sub(n, 1);
    std::vector<int64_t> queue;
    for (int64_t v = 0; v < n; ++v)
      if (indeg[v] == 0) queue.push_back(v);
    for (size_t h = 0; h < queue.size(); ++h) {
      const int64_t v = queue[h], u = g.out(v);
      if (u < 0) continue;
      sub[u] += sub[v];
      if (--indeg[u] == 0) queue.push_back(u);
    }
    for (int64_t y = 0; y < n; ++y) {
      if (orb.kind[y] == Orbits::kLongCycle || g.out(y) < 0) continue;
      if (on_two_cycle(y)) {
        const int64_t p = g.out(y);
        if (wout(y) >= r) in_mass[y] = sub[p];
      } else if (wout(y) >= r && !(tail_max[g.out(y)] >= r)) {
        in_mass[y] = sub[y];
      }
    }
  }
  for (int64_t y = 0; y < n; ++y) {
    res.by_target += in_mass[y];
    res.max_in_mass = std::max(res.max_in_mass, in_mass[y]);
    ++res.in_mass_histogram[in_mass[y]];
  }
  return res;
}

double default_r(const OutMap& g, const WeightField& w) {
  std::vector<double> ws;
  std::vector<char> seen(g.size(), 0);
  for (int64_t v = 0; v >= 0 && g.out(v) >= 0 && !seen[v]; v = g.out(v)) {
    seen[v] = 1;
    ws.push_back(w.weight(v, g.out(v)));
  }
  if (ws.empty()) return 0.5;
  std::sort(ws.begin(), ws.end());
  return ws[ws.size() / 2];
}

unsigned worker_count(unsigned requested) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("NN_LAB_THREADS")) {
    long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

void parallel_for(int64_t n, unsigned threads, const std::function<void(int64_t)>& body) {
  threads = std::min<unsigned>(worker_count(threads), static_cast<unsigned>(std::max<int64_t>(n, 1)));
  if (threads <= 1) {
    for (int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int64_t i; (i = next++) < n && !failed;) {
        try {
          body(i);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

CurveEstimate connection_probability_curve(const std::vector<uint64_t>& seeds, const CurveOptions& opt) {
  const int64_t L = opt.L, B = opt.block;
  if (L % B != 0) throw SpecError("block size must divide the torus side");
  const int nn = opt.nmax + 1;
  const int64_t per_side = L / B;
  const int64_t blocks_per_seed = per_side * per_side;
  // hits[seed][block][n]
  std::vector<std::vector<int64_t>> hits(seeds.size());
  parallel_for(static_cast<int64_t>(seeds.size()), opt.threads, [&](int64_t s) {
    Domain dom = Domain::torus({L, L});
    OutMap g = build_nn_directed(sample_iid_uniform(dom, SeededRng(seeds[s]).derive("iid")));
    ComponentLabeling comps = undirected_components(g);
    std::vector<int64_t> h(blocks_per_seed * nn, 0);
    for (int64_t a = 0; a < L; ++a)
      for (int64_t b = 0; b < L; ++b) {
        const int64_t blk = (a / B) * per_side + (b / B);
        const int32_t lab = comps.label[a * L + b];
        for (int n = 0; n < nn; ++n) h[blk * nn + n] += comps.label[((a + n) % L) * L + b] == lab;
      }
    hits[s] = std::move(h);
  });

  std::vector<const int64_t*> blocks;
  for (const auto& h : hits)
    for (int64_t k = 0; k < blocks_per_seed; ++k) blocks.push_back(h.data() + k * nn);
  const int64_t nb = static_cast<int64_t>(blocks.size());
  const double per_block = static_cast<double>(B * B);

  auto estimate = [&](const std::vector<int64_t>& pick, std::vector<double>& p) {
    std::vector<double> tot(nn, 0.0);
    for (int64_t k : pick)
      for (int n = 0; n < nn; ++n) tot[n] += static_cast<double>(blocks[k][n]);
    p.assign(nn, 0.0);
    for (int n = 0; n < nn; ++n) p[n] = tot[n] / (per_block * static_cast<double>(pick.size()));
  };
  auto derived = [&](const std::vector<double>& p, std::vector<double>& out) {
    out.clear();
    for (int n = 0; n + 1 < nn; ++n) out.push_back(p[n + 1] / p[n]);                       // ratio
    for (int n = 0; n + 1 < nn; ++n) out.push_back(p[n] - p[n + 1]);                       // p gap
    for (int n = 0; n + 2 < nn; ++n) out.push_back(p[n + 1] / p[n] - p[n + 2] / p[n + 1]);  // ratio gap
  };

  std::vector<int64_t> all(nb);
  for (int64_t k = 0; k < nb; ++k) all[k] = k;
  std::vector<double> p_hat, d_hat;
  estimate(all, p_hat);
  derived(p_hat, d_hat);

  std::vector<std::vector<double>> p_boot(nn), d_boot(d_hat.size());
  std::mt19937_64 eng(0x5eedb007);
  std::uniform_int_distribution<int64_t> pick_block(0, nb - 1);
  std::vector<int64_t> pick(nb);
  std::vector<double> p, d;
  for (int r = 0; r < opt.resamples; ++r) {
    for (auto& k : pick) k = pick_block(eng);
    estimate(pick, p);
    derived(p, d);
    for (int n = 0; n < nn; ++n) p_boot[n].push_back(p[n]);
    for (size_t i = 0; i < d.size(); ++i) d_boot[i].push_back(d[i]);
  }
  const double alpha = (1.0 - opt.level) / 2.0;
  auto interval = [&](std::vector<double>& xs) {
    std::sort(xs.begin(), xs.end());
    auto at = [&](double q) {
      size_t i = static_cast<size_t>(std::floor(q * static_cast<double>(xs.size() - 1)));
      return xs[std::min(i, xs.size() - 1)];
    };
    return std::pair{at(alpha), at(1.0 - alpha)};
  };

  CurveEstimate est;
  est.samples = static_cast<int64_t>(seeds.size()) * L * L;
  est.blocks = nb;
  for (int n = 0; n < nn; ++n) {
    auto [lo, hi] = interval(p_boot[n]);
    est.p.push_back({n, p_hat[n], lo, hi});
  }
  size_t i = 0;
  for (int n = 0; n + 1 < nn; ++n, ++i) {
    auto [lo, hi] = interval(d_boot[i]);
    est.ratio.push_back({n, d_hat[i], lo, hi});
  }
  for (int n = 0; n + 1 < nn; ++n, ++i) {
    auto [lo, hi] = interval(d_boot[i]);
    est.p_gap.push_back({n, d_hat[i], lo, hi});
  }
  for (int n = 0; n + 2 < nn; ++n, ++i) {
    auto [lo, hi] = interval(d_boot[i]);
    est.ratio_gap.push_back({n, d_hat[i], lo, hi});
  }
  return est;
}

double wilson_upper(int64_t k, int64_t n, double level) {
  if (n <= 0) return 1.0;
  // One-sided normal quantile by bisection on erfc; avoids a stats dependency.
  const double tail = 1.0 - level;
  double lo = 0.0, hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(mid / std::sqrt(2.0)) > tail ? lo : hi) = mid;
  }
  const double z = 0.5 * (lo + hi);
  const double nn = static_cast<double>(n), ph = static_cast<double>(k) / nn, z2 = z * z;
  const double centre = ph + z2 / (2 * nn);
  const double spread = z * std::sqrt(ph * (1 - ph) / nn + z2 / (4 * nn * nn));
  return std::min(1.0, (centre + spread) / (1 + z2 / nn));
}

TailEstimate backward_tail(const std::function<int64_t(int64_t)>& size_of, int64_t samples,
                           const std::vector<int64_t>& lambdas, double level, unsigned threads) {
  std::vector<int64_t> sizes(samples);
  parallel_for(samples, threads, [&](int64_t i) { sizes[i] = size_of(i); });
  TailEstimate t;
  t.lambdas = lambdas;
  t.samples = samples;
  for (int64_t lam : lambdas) {
    int64_t k = std::count_if(sizes.begin(), sizes.end(), [&](int64_t s) { return s > lam; });
    t.exceed.push_back(k);
    t.fraction.push_back(samples ? static_cast<double>(k) / static_cast<double>(samples) : 0.0);
    t.upper.push_back(wilson_upper(k, samples, level));
  }
  return t;
}

std::string CensusHost::describe() const {
  if (window) return window->describe();
  if (torus) return Domain::torus(*torus).describe();
  return "none";
}

namespace {

bool mentions_zm(const GeneratorSpec& s) {
  if (s.variant == GeneratorSpec::Variant::ZernerMerkl) return true;
  return s.base && mentions_zm(*s.base);
}

// Deterministic low-discrepancy sample of window sites.
std::vector<int64_t> sample_sites(const Domain& dom, int count) {
  static const double alpha[kMaxDim] = {0.7548776662466927, 0.5698402909980532, 0.4301597090019468, 0.3247179572447460,
                                        0.2451223337533073, 0.1850781059358212, 0.1397141014284567, 0.1054740183094320};
  std::vector<int64_t> out;
  for (int i = 1; i <= count; ++i) {
    Site s(dom.dim());
    for (int a = 0; a < dom.dim(); ++a) {
      double f = std::fmod(0.5 + alpha[a] * i, 1.0);
      s[a] = dom.lo()[a] + static_cast<int64_t>(f * static_cast<double>(dom.side(a)));
    }
    out.push_back(dom.index(s));
  }
  return out;
}

void histogram(CensusRecord& rec, const std::vector<int64_t>& sizes) {
  for (int64_t s : sizes) ++rec.size_histogram[s > 0 ? 63 - __builtin_clzll(static_cast<unsigned long long>(s)) : 0];
}

}  // namespace

CensusRecord census_one(const GeneratorSpec& spec, const CensusHost& host, uint64_t seed, const CensusOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  CensusRecord rec;
  rec.spec_hash = spec_hash(spec);
  rec.code_version = kCodeVersion;
  rec.seed = seed;
  rec.host = host.describe();
  SeededRng rng(seed);

  if (host.window) {
    const Domain& win = *host.window;
    RuleHost rh;
    if (mentions_zm(spec)) rh.zm_period = (std::max(win.side(0), win.side(1)) + 1) / 2;
    auto rule = make_rule(spec, rng, rh);
    WindowLabeling wl = label_window(*rule, win, opt.cap);
    const ComponentLabeling& c = wl.comps;
    rec.components = c.count();
    rec.infinite = c.infinite_count();
    rec.boundary_touching = std::count(c.boundary_touching.begin(), c.boundary_touching.end(), 1);
    rec.long_cycles = wl.long_cycles;
    histogram(rec, c.size);
    for (int32_t k = 0; k < c.count(); ++k) rec.miniloops += c.miniloops[k];
    for (int64_t v : sample_sites(win, opt.sampled_sites)) {
      int64_t b = backward_size_capped(*rule, win.site(v), opt.backward_cap);
      if (b > opt.backward_cap) rec.max_backward_capped = true;
      rec.max_backward = std::max(rec.max_backward, std::min(b, opt.backward_cap));
    }
    if (opt.structure) {
      OutMap g = realize(*rule, win);
      ComponentLabeling full = undirected_components(g);
      auto members = full.members();
      int64_t pass = 0;
      for (int32_t k = 0; k < full.count(); ++k) {
        if (full.boundary_touching[k]) continue;
        ++rec.structure_checked;
        pass += verify_component_structure(members[k], g).pass();
      }
      rec.structure_pass_rate = rec.structure_checked ? static_cast<double>(pass) / rec.structure_checked : 1.0;
    }
  } else if (host.torus) {
    OutMap g = realize_torus(spec, *host.torus, rng);
    ComponentLabeling c = undirected_components(g);
    Orbits orb = orbit_structure(g);
    rec.components = c.count();
    rec.infinite = c.infinite_count();
    rec.wrapping = std::count(c.wrapping.begin(), c.wrapping.end(), 1);
    rec.long_cycles = orb.long_cycles;
    histogram(rec, c.size);
    for (int32_t k = 0; k < c.count(); ++k) rec.miniloops += c.miniloops[k];
    const Domain& dom = g.domain();
    std::vector<int64_t> sizes;
    if (orb.long_cycles == 0) sizes = backward_sizes(g);
    for (int64_t v : sample_sites(dom, opt.sampled_sites)) {
      int64_t b = sizes.empty() ? static_cast<int64_t>(backward_set(dom.site(v), g).size()) : sizes[v];
      rec.max_backward = std::max(rec.max_backward, b);
    }
    if (opt.structure) {
      auto members = c.members();
      int64_t pass = 0;
      for (int32_t k = 0; k < c.count(); ++k) {
        if (c.wrapping[k]) continue;
        bool long_orbit = orb.kind[members[k][0]] == Orbits::kLongCycle;
        if (long_orbit) continue;
        ++rec.structure_checked;
        pass += verify_component_structure(members[k], g).pass();
      }
      rec.structure_pass_rate = rec.structure_checked ? static_cast<double>(pass) / rec.structure_checked : 1.0;
    }
  } else {
    throw SpecError("census needs a window or a torus");
  }
  if (opt.timing) rec.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::vector<CensusRecord> component_census(const GeneratorSpec& spec, const CensusHost& host,
                                           const std::vector<uint64_t>& seeds, const CensusOptions& opt) {
  std::vector<CensusRecord> out(seeds.size());
  parallel_for(static_cast<int64_t>(seeds.size()), opt.threads,
               [&](int64_t i) { out[i] = census_one(spec, host, seeds[i], opt); });
  return out;
}

}  // namespace nnlab
