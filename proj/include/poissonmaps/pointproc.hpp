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

#ifndef POISSONMAPS_POINTPROC_HPP_
#define POISSONMAPS_POINTPROC_HPP_

#include <functional>
#include <string>
#include <vector>

#include "poissonmaps/dyadic.hpp"
#include "poissonmaps/geometry.hpp"
#include "poissonmaps/group.hpp"
#include "poissonmaps/mpfloat.hpp"
#include "poissonmaps/region.hpp"
#include "poissonmaps/rng.hpp"

namespace pmap {

// Simple point configuration on a carrier window: points are sorted by
// cmp(), duplicate-free, and all inside the window. intensity_hint is an
// annotation carried through serialization; no algorithm consults it.
struct PointConfiguration {
  Backend backend = Backend::euclid2;
  std::vector<GroupPoint> points;
  Region window;
  Dyadic intensity_hint;
};

// Sorts into canonical order and validates: coincident points and points
// outside the window are errors, never repaired.
PointConfiguration make_config(const GroupCtx& ctx,
                               std::vector<GroupPoint> points, Region window,
                               Dyadic intensity_hint);

// Text form: a fixed header (format tag, backend, window expression,
// intensity, point count) followed by one point per line. Round trips
// bit-exactly through config_from_text.
std::string config_to_text(const PointConfiguration& c);
PointConfiguration config_from_text(const GroupCtx& ctx,
                                    const std::string& text);

// N ~ Poisson(mean), drawn by inverting the CDF against a lazily extended
// uniform bit stream. `mean` must bracket one fixed value with width
// vanishing as prec grows; if the walk is still undecided at the precision
// cap (a bracket that refuses to shrink, or a probability-zero tie) the
// draw fails with "uncertified" rather than bias the count.
u64 poisson_count(const std::function<MpIv(mpfr_prec_t)>& mean, Rng& rng);

// Poisson point process with intensity alpha * Haar on r. Count and
// locations come from child streams keyed off one draw from rng, so
// successive calls on the same generator are independent. Requires a
// refinable measure bracket (exact Haar value, or an affine box); regions
// with only a fixed-error certificate are refused.
PointConfiguration sample_poisson(const GroupCtx& ctx, const Region& r,
                                  const Dyadic& alpha, Rng& rng);

// Points of c inside r, on the carrier meet(window, r).
PointConfiguration restrict_config(const GroupCtx& ctx,
                                   const PointConfiguration& c,
                                   const Region& r);

// Union of configurations whose carriers are certified disjoint. Throws
// "overlap" when no disjointness certificate is found at cert_depth and
// "coincident" when the same point appears in both. The intensity hint
// survives only when both sides agree.
PointConfiguration superpose(const GroupCtx& ctx, const PointConfiguration& a,
                             const PointConfiguration& b, int cert_depth = 11);

// Left translation of every point and of the window.
PointConfiguration act(const GroupCtx& ctx, const GroupPoint& g,
                       const PointConfiguration& c);

// Disjointness certificate behind superpose: exact coset / interval algebra
// on qp2 and coprod, and on euclid2/affine a syntactic complement test,
// exact primitive separations, then a quadtree search. False means "no
// certificate found", not "they overlap": carriers that touch on a shared
// boundary are refused even though the overlap has measure zero.
bool certify_disjoint(const GroupCtx& ctx, const Region& a, const Region& b,
                      int depth);

// --- planted configurations -------------------------------------------------

// Marker payload planted at a center: the fitted shell holds exactly one
// point (harvestable), two (two_shell), or k (k_shell).
enum class PlantKind : u8 { harvestable, two_shell, k_shell };

struct PlantCenter {
  GroupPoint g;
  PlantKind kind = PlantKind::harvestable;
  int k = 1;
};

int fitted_count(const PlantCenter& c);

struct PlantSpec {
  std::vector<PlantCenter> centers;
  MarkerGeometry geom;
  Dyadic alpha;
  int cert_depth = 12;
  u64 max_dense_tries = 4096;  // rejection budget per center
  u64 max_retries = 64;        // post-check resamples (ambient or center)
};

struct PlantResult {
  PointConfiguration config;
  std::vector<GroupPoint> landmarks;  // one per center, inside B(g, 1)
  u64 dense_tries = 0;
  double dense_acceptance = 0.0;  // centers accepted / dense_tries
  u64 ambient_resamples = 0;
  u64 center_resamples = 0;
};

// Exact conditional Poisson(alpha * Haar) draw given one marker event per
// center g: the dense shell A(g, d1, d2) is Poisson conditioned on the
// density event at g (every target of A(g, d1 + 1, d2 - 1) has a dense point
// within distance 1, certified at cert_depth), the empty shell A(g, d2, e2)
// holds nothing,
// B(g, 3) holds exactly the landmark, uniform on B(g, 1), the fitted shell
// around the landmark holds exactly fitted_count i.i.d. uniform points, the
// rest of B(g, e2) is unconditioned Poisson, and the ambient complement is
// Poisson conditioned on spawning no extra seed class (checked by a seed
// scan; a failed check resamples the ambient only). Centers must be more
// than 2 * e2 + 2 apart in the word metric and sit e2 + 2 inside the window.
PlantResult plant(const GroupCtx& ctx, const PlantSpec& spec,
                  const Region& window, Rng& rng);

}  // namespace pmap

#endif  // POISSONMAPS_POINTPROC_HPP_
