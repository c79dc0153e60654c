#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "nnlab/lattice.hpp"
#include "nnlab/outmap.hpp"
#include "nnlab/rng.hpp"
#include "nnlab/weights.hpp"

namespace nnlab {

// An out-edge rule on all of Z^d (or a quotient of it). Randomness is a pure
// function of coordinates, so a rule can be evaluated anywhere, in any order.
// Sites passed in and returned are canonical representatives.
class LatticeRule {
 public:
  virtual ~LatticeRule() = default;
  virtual int dim() const = 0;
  virtual std::optional<Site> out(const Site& x) const = 0;
  virtual Site canonical(const Site& x) const { return x; }
};

// Out-edges of `rule` restricted to a box window.
OutMap realize(const LatticeRule& rule, const Domain& window);

// i.i.d. uniform edge weights hashed from coordinates, nearest-neighbor rule.
class IidRule : public LatticeRule {
 public:
  IidRule(int d, SeededRng rng) : d_(d), rng_(rng) {}
  int dim() const override { return d_; }
  std::optional<Site> out(const Site& x) const override;
  double weight(const Site& x, int axis) const;  // edge {x, x + e_axis}

 private:
  int d_;
  SeededRng rng_;
};

// Bernoulli coarse-cell construction in d = 2, shifted by U in {0,e1,e2,e1+e2}.
// Plane mode: all of Z^2. Cylinder mode: the quotient by the translation
// (2M,-2M), so both infinite components stay finite in memory. Torus mode: side L.
class ZernerMerklRule : public LatticeRule {
 public:
  enum class Mode { Plane, Cylinder, Torus };
  ZernerMerklRule(SeededRng rng, Mode mode = Mode::Plane, int64_t param = 0);
  int dim() const override { return 2; }
  std::optional<Site> out(const Site& x) const override;
  Site canonical(const Site& x) const override;

  int cell_bit(int64_t c1, int64_t c2) const;  // B for coarse cell (c1,c2)
  Site shift() const { return shift_; }
  void force(int64_t c1, int64_t c2, int bit) { forced_.push_back({c1, c2, bit}); }
  void set_shift(const Site& u) { shift_ = u; }

 private:
  SeededRng cells_;
  Mode mode_;
  int64_t param_;  // Cylinder: coarse period M. Torus: side L.
  Site shift_;
  std::vector<std::array<int64_t, 3>> forced_;
};

// Dyadic construction. Plane mode: out(x) = (x+Z) - e_{i(x+Z)} - Z with x+Z in
// the nonnegative orthant; the image of the origin is a sink. Torus mode:
// side 2^n, coordinates mod 2^n, and the origin points to e_1 to close a 2-cycle.
class DyadicRule : public LatticeRule {
 public:
  DyadicRule(int d, int n, Site z, bool torus = false);
  int dim() const override { return d_; }
  std::optional<Site> out(const Site& x) const override;
  Site canonical(const Site& x) const override;
  const Site& shift() const { return z_; }
  int level() const { return n_; }
  bool torus() const { return torus_; }

 private:
  int d_, n_;
  Site z_;
  bool torus_;
};

int gen_dyadic_k(const Site& x);
int gen_dyadic_i(const Site& x);  // 1-based axis

// Draws Z uniformly from {0, ..., 2^n - 1}^d.
Site sample_dyadic_shift(int d, int n, const SeededRng& rng);

// One copy of a d-dimensional rule per hyperplane {x_{d+1} = h}; no vertical edges.
class LayeredRule : public LatticeRule {
 public:
  using Factory = std::function<std::shared_ptr<const LatticeRule>(int64_t layer)>;
  LayeredRule(int base_dim, Factory per_layer);
  int dim() const override { return base_dim_ + 1; }
  std::optional<Site> out(const Site& x) const override;
  Site canonical(const Site& x) const override;

 private:
  const LatticeRule& layer(int64_t h) const;
  int base_dim_;
  Factory factory_;
  mutable std::vector<std::pair<int64_t, std::shared_ptr<const LatticeRule>>> cache_;
};

// k independent dyadic graphs stretched by 4k onto disjoint sublattices, with
// spanning-tree filler in between, shifted by S in [0,4k-1)^d.
class FiniteKRule : public LatticeRule {
 public:
  FiniteKRule(int k, int d, int n, const SeededRng& rng, bool torus = false);
  int dim() const override { return d_; }
  std::optional<Site> out(const Site& x) const override;
  Site canonical(const Site& x) const override;

  int k() const { return k_; }
  int64_t period() const { return 4 * k_; }
  const Site& shift() const { return shift_; }
  void set_shift(const Site& s) { shift_ = s; }
  const DyadicRule& layer(int j) const { return layers_[j - 1]; }
  int64_t torus_side() const;

  // Pre-shift membership: j in 1..k for V^(j), 0 for filler. memberships()
  // counts how many V^(j) contain p (must be <= 1).
  int sublattice_of(const Site& p) const;
  int memberships(const Site& p) const;
  // Pre-shift out-edge.
  std::optional<Site> out_unshifted(const Site& p) const;

 private:
  int k_, d_, n_;
  bool torus_;
  std::vector<DyadicRule> layers_;
  Site shift_;
  std::vector<int32_t> filler_;  // per offset in [-2k,2k)^d: target offset index, or -1 inside V
};

// Remark-style rewiring: a vertex whose in-neighbors are all leaves points to
// the smallest of them.
class TypeCRule : public LatticeRule {
 public:
  explicit TypeCRule(std::shared_ptr<const LatticeRule> base) : base_(std::move(base)) {}
  int dim() const override { return base_->dim(); }
  std::optional<Site> out(const Site& x) const override;
  Site canonical(const Site& x) const override { return base_->canonical(x); }

 private:
  std::vector<Site> in_neighbors(const Site& x) const;
  std::shared_ptr<const LatticeRule> base_;
};

// Finite-domain entry points.
OutMap gen_zerner_merkl(int64_t L, const SeededRng& rng);
OutMap gen_dyadic_window(int n, const Site& z, const Domain& window);
// G_0 itself on the box [0, 2^n)^d: the origin is a sink.
OutMap dyadic_base_box(int n, int d);
OutMap gen_dyadic_torus(int n, int d, const SeededRng& rng);
OutMap gen_layered(const std::vector<OutMap>& per_layer);
OutMap gen_finite_k(int k, int d, int n, const SeededRng& rng, const Domain& window);
OutMap gen_finite_k_torus(int k, int d, int n, const SeededRng& rng);
OutMap modify_type_c(const OutMap& g);

// Spanning-tree filler: per site-component, a BFS tree from the smallest site
// oriented toward it, plus an edge from the root to its smallest child.
std::vector<DEdge> fill_region(const std::vector<Site>& region);

struct GeneratorSpec {
  enum class Variant { IIDWeights, ZernerMerkl, Dyadic, Layered, FiniteK, TypeCModified };
  Variant variant = Variant::IIDWeights;
  int dim = 2;        // IIDWeights, Dyadic, FiniteK
  int level = 40;     // Dyadic, FiniteK
  std::optional<std::vector<int64_t>> shift;  // Dyadic: explicit Z
  int k = 2;          // FiniteK
  int layers = 3;     // Layered
  bool shared = true; // Layered: one base sample for every layer
  std::shared_ptr<GeneratorSpec> base;  // Layered, TypeCModified
  std::optional<uint64_t> seed;

  int output_dim() const;
  bool has_infinite_components() const;
};

std::string variant_name(GeneratorSpec::Variant v);
GeneratorSpec::Variant variant_from_name(const std::string& s);
// Convenience: "iid", "zm", "dyadic", "layered", "finitek", "typec".
GeneratorSpec spec_for_model(const std::string& model);

// Host options for rule construction. A positive zm_period turns Zerner-Merkl
// (also inside Layered/TypeC) into the cylinder with that coarse period.
struct RuleHost {
  int64_t zm_period = 0;
};

std::shared_ptr<const LatticeRule> make_rule(const GeneratorSpec& spec, const SeededRng& rng, RuleHost host = {});
OutMap realize_window(const GeneratorSpec& spec, const Domain& window, const SeededRng& rng);
// Torus realization. For IIDWeights the sampled weights are stored in *weights.
OutMap realize_torus(const GeneratorSpec& spec, const std::vector<int64_t>& sides, const SeededRng& rng,
                     WeightField* weights = nullptr);
// Torus sides a spec needs for a requested linear size (rounded as required).
std::vector<int64_t> torus_sides_for(const GeneratorSpec& spec, int64_t L);

}  // namespace nnlab
