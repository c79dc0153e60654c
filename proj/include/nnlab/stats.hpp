#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nnlab/generators.hpp"
#include "nnlab/nngraph.hpp"

namespace nnlab {

// Components meeting a box window, found by walking every window site forward
// under `rule` until it joins an earlier walk, closes a 2-cycle, hits a sink,
// or runs `cap` steps. Walks that hit the cap mark their class infinite.
struct WindowLabeling {
  ComponentLabeling comps;
  int64_t long_cycles = 0;
  int64_t capped_walks = 0;
  int64_t steps = 0;
  int64_t trail_sites = 0;  // sites visited outside the window
};

WindowLabeling label_window(const LatticeRule& rule, const Domain& window, int64_t cap);

// #C_x under `rule`, found by reverse search; stops once more than `cap`
// vertices are found and then returns cap + 1.
int64_t backward_size_capped(const LatticeRule& rule, const Site& x, int64_t cap);

struct TransportFunction {
  enum class Kind { TwoCycleEndpoint, RDescendant };
  Kind kind = Kind::TwoCycleEndpoint;
  double r = 0.0;
};

struct TransportResult {
  int64_t by_source = 0;
  int64_t by_target = 0;
  int64_t max_out_mass = 0;
  int64_t max_in_mass = 0;
  int64_t skipped = 0;  // vertices whose orbit ends in a longer cycle carry no mass
  std::map<int64_t, int64_t> in_mass_histogram;
};

// Sums each transport once over sources and once over targets, by separate
// computations. Torus only.
TransportResult transport_balance(const OutMap& g, const WeightField& w, const TransportFunction& m);

// Median out-edge weight along the forward path of vertex 0.
double default_r(const OutMap& g, const WeightField& w);

struct CurvePoint {
  int n = 0;
  double value = 0, lo = 0, hi = 0;
};

struct CurveEstimate {
  std::vector<CurvePoint> p;        // n = 0..nmax
  std::vector<CurvePoint> ratio;    // r(n) = p(n+1)/p(n), n = 0..nmax-1
  std::vector<CurvePoint> p_gap;    // p(n) - p(n+1)
  std::vector<CurvePoint> ratio_gap;  // r(n) - r(n+1)
  int64_t samples = 0;               // translates averaged over
  int64_t blocks = 0;
};

struct CurveOptions {
  int64_t L = 512;
  int nmax = 5;
  int64_t block = 32;
  int resamples = 1000;
  double level = 0.99;
  unsigned threads = 0;  // 0: default pool size
};

// Torus-averaged probability that x and x + n e_1 share a component of N for
// i.i.d. weights in d = 2; intervals from a block bootstrap over spatial blocks.
CurveEstimate connection_probability_curve(const std::vector<uint64_t>& seeds, const CurveOptions& opt);

struct TailEstimate {
  std::vector<int64_t> lambdas;
  std::vector<int64_t> exceed;  // samples with #C > lambda
  std::vector<double> fraction;
  std::vector<double> upper;  // one-sided Wilson upper bound
  int64_t samples = 0;
};

double wilson_upper(int64_t k, int64_t n, double level);

// One backward-set size per sample; `size_of(i)` returns #C (capped) for sample i.
TailEstimate backward_tail(const std::function<int64_t(int64_t)>& size_of, int64_t samples,
                           const std::vector<int64_t>& lambdas, double level = 0.99, unsigned threads = 0);

struct CensusHost {
  std::optional<Domain> window;          // box census
  std::optional<std::vector<int64_t>> torus;  // torus census
  std::string describe() const;
};

struct CensusOptions {
  int64_t cap = 400000;
  int64_t backward_cap = 10000;
  int sampled_sites = 16;
  bool structure = true;
  bool timing = false;
  unsigned threads = 0;
};

struct CensusRecord {
  std::string spec_hash;
  std::string code_version;
  uint64_t seed = 0;
  std::string host;
  int64_t components = 0;
  int64_t infinite = 0;  // boundary-spanning (box) or wrapping (torus)
  int64_t boundary_touching = 0;
  int64_t wrapping = 0;
  std::map<int64_t, int64_t> size_histogram;  // floor(log2 size) -> count
  int64_t miniloops = 0;
  int64_t long_cycles = 0;
  int64_t max_backward = 0;
  bool max_backward_capped = false;
  int64_t structure_checked = 0;
  double structure_pass_rate = 1.0;
  std::optional<double> runtime_s;
};

CensusRecord census_one(const GeneratorSpec& spec, const CensusHost& host, uint64_t seed, const CensusOptions& opt);
std::vector<CensusRecord> component_census(const GeneratorSpec& spec, const CensusHost& host,
                                           const std::vector<uint64_t>& seeds, const CensusOptions& opt);

// Thread count honoring NN_LAB_THREADS.
unsigned worker_count(unsigned requested = 0);
// Runs body(i) for i in [0, n) on a small pool; body must write to slot i only.
void parallel_for(int64_t n, unsigned threads, const std::function<void(int64_t)>& body);

}  // namespace nnlab
