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
// Seed predicates and the certified seed-location scan. Both the planted
// sampler and marker detection evaluate the same predicates, so the event a
// plant conditions on is exactly the event detection certifies.

#ifndef POISSONMAPS_SEEDS_HPP_
#define POISSONMAPS_SEEDS_HPP_

#include <map>
#include <vector>

#include "poissonmaps/geometry.hpp"
#include "poissonmaps/gridcert.hpp"
#include "poissonmaps/group.hpp"
#include "poissonmaps/region.hpp"

namespace pmap {

// d_S(center, p) in (a, b]. Exact on every backend; a point in a different
// H-coset (qp2) or a different mask (coprod) is at infinite word distance and
// lies in no shell.
bool in_word_shell(const GroupCtx& ctx, const GroupPoint& center,
                   const GroupPoint& p, i64 a, i64 b);

// Exists p with d_S(center, p) in (a, b].
bool shell_has_point(const GroupCtx& ctx, const GroupPoint& center, i64 a,
                     i64 b, const std::vector<GroupPoint>& pts);

// Every word ball of radius 1 contained in A(center, d1, d2) meets pts.
// Exact on qp2/coprod; certified (possibly Mixed) on euclid2.
Tri dense_covered_at(const GroupCtx& ctx, const GroupPoint& center,
                     const MarkerGeometry& geom,
                     const std::vector<GroupPoint>& pts, int depth);

// euclid2 only: covering of the expanded center range (d1, d2] instead of
// (d1 + 1, d2 - 1]. By the triangle inequality this implies dense_covered_at
// for every location within distance 1 of `center`. The event is rare at
// realistic intensities (targets near the shell boundary have only half a
// disc of admissible points), so it serves as a robustness probe, not as a
// sampling condition.
Tri dense_covered_margin(const GroupCtx& ctx, const GroupPoint& center,
                         const MarkerGeometry& geom,
                         const std::vector<GroupPoint>& pts, int depth);

// Both seed conditions at one location: dense shell covered, empty shell
// empty.
Tri seed_at(const GroupCtx& ctx, const GroupPoint& loc,
            const MarkerGeometry& geom, const std::vector<GroupPoint>& pts,
            int depth);

// Certified Ball(center, r) subset of `region`, for window-shaped regions
// (balls, boxes, coset unions, and unions/intersections of those). False
// means "not certified", not "disjoint".
bool ball_in_region(const GroupCtx& ctx, const Region& region,
                    const GroupPoint& center, i64 r);

// Locations whose `margin`-ball certifiably fits in the window. Conservative:
// a union erodes kid by kid, so frame slivers may be lost.
Region erode_window(const GroupCtx& ctx, const Region& window, i64 margin);

// Spatial prefilter. Double-precision hashing only ever narrows the
// candidate list; every verdict downstream is re-established exactly.
struct PointIndex {
  std::vector<GroupPoint> pts;
  double cell = 16.0;
  std::map<std::pair<i64, i64>, std::vector<u32>> grid;  // euclid2 only

  static PointIndex build(const GroupCtx& ctx, std::vector<GroupPoint> pts);
  // Indices of all points possibly within distance [r_lo, r_hi] of the
  // closed box (slop-expanded).
  std::vector<u32> gather(double x0, double x1, double y0, double y1,
                          double r_lo, double r_hi) const;
};

// One connected cluster of (potential) seed locations.
struct SeedClassCover {
  // euclid2: certified superset of the class; shrinks under refinement.
  std::vector<Box2> boxes;
  // euclid2: at least one location certified to satisfy both conditions.
  std::vector<GroupPoint> witnesses;
  // qp2: exact level-0 coset residues of the class.
  std::vector<bigint> cosets;
  // coprod: exact band.
  u64 mask = 0;
  IvSet band;
};

struct SeedScan {
  Backend backend = Backend::euclid2;
  std::vector<SeedClassCover> classes;
  PointIndex index;
  Region window;  // scanned window; new witnesses must keep e2 inside it
};

// Enumerates all seed locations h with Ball(h, e2) inside `window`, grouped
// into d_S < 2 connected classes. euclid2 covers are certified supersets and
// every returned class carries a confirming witness; an unconfirmable
// survivor cluster is an error. qp2/coprod results are exact.
SeedScan seed_scan(const GroupCtx& ctx, const std::vector<GroupPoint>& pts,
                   const MarkerGeometry& geom, const Region& window,
                   int depth);

// Core membership of q for class `cls` of the scan: +1 certified inside the
// class core (the intersection of radius-3 balls over class members), -1
// certified outside, 0 undecided at the depth cap. euclid2 refines the cover
// in place as needed; qp2/coprod are exact.
int core_membership(const GroupCtx& ctx, SeedScan& scan, size_t cls,
                    const MarkerGeometry& geom, const GroupPoint& q,
                    int extra_depth);

// Conservative lower bound certificate: true when every pair of locations
// drawn from the two class covers is certifiably at word distance > bound.
bool classes_beyond(const GroupCtx& ctx, const SeedClassCover& a,
                    const SeedClassCover& b, i64 bound);

// Certified class diameter strictly below `bound` (word metric).
bool class_diameter_below(const GroupCtx& ctx, const SeedClassCover& cls,
                          i64 bound);

}  // namespace pmap

#endif  // POISSONMAPS_SEEDS_HPP_
