// Copyright 2026 The PoissonMaps Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Randomness plumbing between group regions, point configurations, and
// uniform dyadic values: rank codecs (region <-> index <-> unit value),
// the point-order encoder, harvest of fitted-shell points to uniforms,
// population maps (forward and bijective), the kept/deleted count coupling,
// and subset unranking.

#ifndef POISSONMAPS_CODECS_HPP_
#define POISSONMAPS_CODECS_HPP_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "poissonmaps/bits.hpp"
#include "poissonmaps/markers.hpp"
#include "poissonmaps/pointproc.hpp"
#include "poissonmaps/region.hpp"

namespace pmap {

// --- rank codec --------------------------------------------------------------

// Quantizes a finite-measure region into an indexed grid of points: ranks
// [0, count) map to distinct region points and back. On qp2 the grid is the
// full set of representable points (rank/unrank are mutually exact); euclid2
// boxes and coprod intervals use a midpoint dyadic grid with `grid_bits`
// fraction bits per axis, and euclid2 word shells use midpoint polar
// coordinates with `grid_bits` bits per polar axis. rank() floors arbitrary
// region points onto the grid; unrank(rank(p)) == p exactly for grid points.
//
// Supported regions: any finite-measure region on qp2/coprod; boxes, unions
// of disjoint boxes, balls, and shells on euclid2. Anything else fails
// ("domain"), as does any affine region ("backend").
class RankCodec {
 public:
  RankCodec(const GroupCtx& ctx, const Region& k, i64 grid_bits);

  const bigint& count() const { return count_; }
  GroupPoint unrank(const bigint& rank) const;
  bigint rank(const GroupPoint& p) const;  // p must lie in the region

  // Unit-value views of the rank line. to_unit takes the top w bits of
  // rank/count; from_unit inverts it for on-grid points (and clamps the
  // final partial cell). For count <= 2^w the pair is exactly inverse.
  UFrac to_unit(const GroupPoint& p, i64 w) const;
  GroupPoint from_unit(const UFrac& u) const;

 private:
  struct Patch {
    // Shared: count of grid points and cumulative offset on the rank line.
    bigint count, offset;
    // Box / interval patch (euclid2 boxes, coprod intervals).
    Dyadic x0, y0;
    bigint nx, ny;
    u64 mask = 0;
    // qp2 coset patch.
    bigint coset_id;
  };

  enum class Kind { qp_grid, box_grid, polar } kind_ = Kind::box_grid;
  GroupCtx ctx_;
  i64 grid_bits_ = 0;
  bigint count_;
  std::vector<Patch> patches_;
  // qp grid: coset level and free digit count per coset.
  int level_ = 0;
  i64 free_digits_ = 0;
  // polar: center and the exact squared radii of the annulus (r0, r1].
  GroupPoint center_;
  bigint r0sq_, r1sq_;
};

// --- bit splitting -----------------------------------------------------------

// Countable de-interleave: coordinate i takes the bits at positions with
// exactly i-1 trailing zero bits in their index (iterated halving), so a
// W-bit value yields about log2(W) nonempty coordinates of geometrically
// shrinking width. The fixed-arity round-robin variant is UFrac::split.
std::vector<UFrac> split_all(const UFrac& x);

// --- point encoder -----------------------------------------------------------

// Injective-at-w-bits order key: each canonical coordinate becomes a bit
// stream (zigzag Elias-gamma integer prefix, then fraction bits; qp2 digit
// and coprod mask streams are used directly) and the streams are
// interleaved round-robin to w bits. Deterministic; used for ordering
// landmark-shifted points, never for geometry.
UFrac point_encoder(const GroupCtx& ctx, const GroupPoint& p, i64 w);

// Indices of `pts` sorted by encoder value. Two distinct points agreeing on
// all w bits are a collision ("degenerate"); identical points are
// "coincident".
std::vector<size_t> order_by_encoder(const GroupCtx& ctx,
                                     const std::vector<GroupPoint>& pts,
                                     i64 w);

// --- empty probability and population ---------------------------------------

// e^{-beta * haar(k)} floored to w bits. The region's measure must be exact
// and finite ("uncertified" otherwise).
UFrac empty_prob(const GroupCtx& ctx, const Region& k, const Dyadic& beta,
                 i64 w);

// How the bijective population map disposes of the insertion-order surplus
// (the log2(n!) bits that distinguish the emission order of the n decoded
// points from their canonical sorted order):
//   widen    residual modulus grows to in-modulus * n!; always exact.
//   bounded  the surplus is folded inside the fixed residual modulus;
//            fails ("budget") when n! exceeds it.
enum class SurplusPolicy { widen, bounded };

// Carrier-level population: consumes a uniform residue (value, modulus) and
// deterministically emits a point configuration on k whose law over uniform
// input is Poisson(beta) restricted to k. The bijective variant also
// returns the leftover carrier; `residual_modulus` is its target modulus
// (under `widen` the returned modulus is residual_modulus * n!).
PointConfiguration populate_carrier(const GroupCtx& ctx, const Region& k,
                                    const Radix& u, const Dyadic& beta,
                                    i64 grid_bits);
std::pair<PointConfiguration, Radix> populate_bij_carrier(
    const GroupCtx& ctx, const Region& k, const Radix& u, const Dyadic& beta,
    const bigint& residual_modulus, SurplusPolicy policy, i64 grid_bits);
// Exact inverse: rebuilds the input carrier of modulus `input_modulus` from
// the configuration and the leftover carrier. Configuration points must lie
// on the codec grid and the count must be reachable ("degenerate" when the
// count has no preimage under the quantized count law).
Radix depopulate_bij_carrier(const GroupCtx& ctx, const Region& k,
                             const PointConfiguration& config,
                             const Radix& residual, const Dyadic& beta,
                             const bigint& input_modulus, SurplusPolicy policy,
                             i64 grid_bits);

// Unit-value wrappers. populate is the forward (factor) variant: empty iff
// u <= p_{k,0} at u's width, count by inverse conditional-Poisson CDF,
// locations by rank-codec decode. populate_bij additionally returns the
// residual uniform; its width is u.width() + bits(n!) (widen policy), and
// depopulate_bij(populate_bij(u)) == u exactly on every backend.
PointConfiguration populate(const GroupCtx& ctx, const Region& k,
                            const UFrac& u, const Dyadic& beta);
std::pair<PointConfiguration, UFrac> populate_bij(const GroupCtx& ctx,
                                                  const Region& k,
                                                  const UFrac& u,
                                                  const Dyadic& beta);
UFrac depopulate_bij(const GroupCtx& ctx, const Region& k,
                     const PointConfiguration& config, const UFrac& residual,
                     const Dyadic& beta);

// --- harvest -----------------------------------------------------------------

enum class HarvestMode {
  one_shell,  // harvestable classes only (factor / isomorphism maps)
  splitting,  // harvestable and two-shell classes (split maps)
};

// Per-class uniforms from fitted-shell points: class index -> w-bit value.
// A 1-shell yields the codec value of the landmark-shifted fitted point on
// the identity-centered fitted shell; a 2-shell yields the mod-1 sum of
// both points' values (order-free). Recounts from c and fails ("domain") if
// any selected class's shell count disagrees with its kind.
std::map<size_t, UFrac> harvest_to_uniform(const GroupCtx& ctx,
                                           const MarkerCatalog& catalog,
                                           const PointConfiguration& c, i64 w,
                                           HarvestMode mode);

// --- coupling ----------------------------------------------------------------

// Joint law q(x, y) of (kept, deleted) counts with Poisson(r*gamma) and
// Poisson((1-r)*gamma) marginals, Poisson(gamma) diagonal sums, and the
// exact conditionals q(. | x+y=1) = (1,0), q(. | x+y=2) = (0,2). Entries
// cover the triangle 0 <= x+y <= M; mass beyond M follows the independent
// product, with total variation at most tail_bound.
struct CouplingTable {
  double r = 0.5;
  double gamma = 0.0;
  int m = 64;
  double tail_bound = 0.0;
  std::vector<double> q;  // triangle-packed: q[s(s+1)/2 + x] = q(x, s-x)

  double at(int x, int y) const;
  double row_marginal(int x) const;   // sum over y of q(x, .)
  double col_marginal(int y) const;   // sum over x of q(., y)
  double diag_sum(int s) const;       // sum over x+y = s
  // Largest violation of the marginal/diagonal/zero constraints.
  double max_violation() const;
};

// Linear-program feasibility over the truncated support (smallest feasible
// corner block first), independent-product completion outside the block.
// Fails "domain" when infeasible at (r, gamma, m) or when the Poisson(gamma)
// tail beyond m exceeds the TV budget.
CouplingTable build_coupling(double r, double gamma, int m = 64);
bool coupling_feasible(double r, double gamma, int m = 64);

// Kept count given x + y = n: inverse CDF of the conditional row for
// n <= m, of Binomial(n, r) beyond. sample_kept(t, 1, .) == 1 and
// sample_kept(t, 2, .) == 0 for every u.
int sample_kept(const CouplingTable& t, int n, const UFrac& u);

// Feasibility threshold C_r: bisection of coupling_feasible over gamma at
// fixed m, bit-reproducible. Fails "domain" when no feasible gamma exists
// below the search cap (raise m).
double find_threshold(double r, int m = 64);

std::string coupling_to_text(const CouplingTable& t);
CouplingTable coupling_from_text(const std::string& text);

// --- subset unranking --------------------------------------------------------

// Uniform j-subset of {1..k} by unranking floor(u * C(k, j)); ascending.
std::vector<int> subset_select(int j, int k, const UFrac& u);

bigint binomial(i64 n, i64 k);

}  // namespace pmap

#endif  // POISSONMAPS_CODECS_HPP_
