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

#ifndef POISSONMAPS_GRIDCERT_HPP_
#define POISSONMAPS_GRIDCERT_HPP_

#include <vector>

#include "poissonmaps/region.hpp"

namespace pmap {

// Certified quadtree engine for euclid2 regions. Every test is exact dyadic
// interval arithmetic: verdicts are proofs, refinement only shrinks the
// undecided remainder.

enum class Tri : u8 { In, Out, Mixed };

// Conservative three-valued test of box vs region. In means box subset of
// region; Out means disjoint up to the box closure boundary; Mixed is
// "not certified either way".
Tri classify_box(const GroupCtx& ctx, const Region& r, const Box2& box);

// Squared distance extremes from point p to the closed box.
DyadicSq box_min_dist_sq(const Box2& box, const GroupPoint& p);
DyadicSq box_max_dist_sq(const Box2& box, const GroupPoint& p);

struct MeasureBounds {
  Dyadic lo, hi;
};

// Certified [lo, hi] for the area of r intersected with hull.
MeasureBounds certify_measure(const GroupCtx& ctx, const Region& r,
                              const Box2& hull, int max_depth);

enum class CoverVerdict : u8 { Covered, Uncovered, Unknown };

// Decides whether every point of r (within hull) lies within Euclidean
// distance `radius` of some site. Uncovered comes with a certified witness
// box fully inside r and beyond `radius` from every site.
CoverVerdict certify_covered(const GroupCtx& ctx, const Region& r,
                             const std::vector<GroupPoint>& sites, i64 radius,
                             const Box2& hull, int max_depth);

}  // namespace pmap

#endif  // POISSONMAPS_GRIDCERT_HPP_
