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

#ifndef POISSONMAPS_REGION_HPP_
#define POISSONMAPS_REGION_HPP_

#include <map>
#include <utility>
#include <vector>

#include "poissonmaps/common.hpp"
#include "poissonmaps/dyadic.hpp"
#include "poissonmaps/group.hpp"
#include "poissonmaps/mpfloat.hpp"
#include "poissonmaps/rng.hpp"

namespace pmap {

// Symbolic measurable set. Balls and shells are word-metric sets (closed;
// Shell(c,a,b) = { a < d_S(c,.) <= b }). Boxes are half-open per coordinate,
// [lo, hi), so grids of boxes partition exactly. CosetUnion(level, reps) on
// qp2 is the union of reps + 2^level Z_2; on coprod it is the union of the
// full H-cosets {mask(rep)} x R.
struct Region {
  enum class Kind : u8 {
    Empty,
    All,
    Ball,
    Shell,
    Box,
    CosetUnion,
    Complement,
    Union,
    Intersection
  };

  Kind kind = Kind::Empty;
  GroupPoint center;  // Ball, Shell
  i64 ra = 0;         // Shell inner radius
  i64 rb = 0;         // Ball radius / Shell outer radius
  GroupPoint lo, hi;  // Box corners
  int level = 0;      // CosetUnion subgroup level (qp2)
  std::vector<GroupPoint> reps;
  std::vector<Region> kids;

  static Region empty() { return Region(); }
  static Region all() {
    Region r;
    r.kind = Kind::All;
    return r;
  }
  static Region ball(GroupPoint c, i64 radius) {
    require(radius >= 0, "domain", "ball radius must be nonnegative");
    Region r;
    r.kind = Kind::Ball;
    r.center = std::move(c);
    r.rb = radius;
    return r;
  }
  static Region shell(GroupPoint c, i64 a, i64 b) {
    require(0 <= a && a < b, "domain", "shell needs 0 <= a < b");
    Region r;
    r.kind = Kind::Shell;
    r.center = std::move(c);
    r.ra = a;
    r.rb = b;
    return r;
  }
  static Region box(GroupPoint corner_lo, GroupPoint corner_hi) {
    check_same_backend(corner_lo, corner_hi);
    Region r;
    r.kind = Kind::Box;
    r.lo = std::move(corner_lo);
    r.hi = std::move(corner_hi);
    return r;
  }
  static Region coset_union(int level, std::vector<GroupPoint> reps) {
    Region r;
    r.kind = Kind::CosetUnion;
    r.level = level;
    r.reps = std::move(reps);
    return r;
  }
  static Region complement(Region a) {
    Region r;
    r.kind = Kind::Complement;
    r.kids.push_back(std::move(a));
    return r;
  }
  static Region join(std::vector<Region> kids) {
    Region r;
    r.kind = Kind::Union;
    r.kids = std::move(kids);
    return r;
  }
  static Region meet(std::vector<Region> kids) {
    Region r;
    r.kind = Kind::Intersection;
    r.kids = std::move(kids);
    return r;
  }
  static Region difference(Region a, Region b) {
    std::vector<Region> ks;
    ks.push_back(std::move(a));
    ks.push_back(complement(std::move(b)));
    return meet(std::move(ks));
  }
};

// Haar measure value: rat + pi_mult * pi, correct to within +-err. Exact
// results (err = 0) keep the pi multiple symbolic so downstream codecs can
// round it at any precision in a chosen direction.
struct Measure {
  Dyadic rat;
  bigint pi_mult = 0;
  Dyadic err;

  bool is_exact() const { return err.is_zero(); }
  Measure& operator+=(const Measure& o) {
    rat += o.rat;
    pi_mult += o.pi_mult;
    err += o.err;
    return *this;
  }
  double to_double() const {
    double pi = 3.14159265358979323846;
    return rat.to_double() + Dyadic(pi_mult, 0).to_double() * pi;
  }
};

// Rounds rat + pi_mult * pi in the requested direction at precision `prec`.
Mp measure_mp(const Measure& m, mpfr_prec_t prec, mpfr_rnd_t rnd);

// Bracket of the Haar measure at the requested working precision. For exact
// measures (and affine boxes, recomputed per call) the bracket width shrinks
// as prec grows; quadtree-certified measures keep their fixed error band.
MpIv measure_iv(const GroupCtx& ctx, const Region& r, mpfr_prec_t prec);

// Bracketed s-expression form, e.g. [shell e2(0x1p0,0x0p0) 6 10]; exact
// round trip through region_from_text.
std::string region_to_text(const Region& r);
Region region_from_text(const GroupCtx& ctx, const std::string& text);

bool region_contains(const GroupCtx& ctx, const Region& r,
                     const GroupPoint& p);

Region translate_region(const GroupCtx& ctx, const GroupPoint& g,
                        const Region& r);

// Exact for qp2/coprod always, and for euclid2 primitives plus unions with
// certified-null pairwise overlap; other euclid2 combinations fall back to
// quadtree certification at `cert_depth`. Throws "uncertified" when no finite
// bound can be established (e.g. unbounded sets).
Measure haar_measure(const GroupCtx& ctx, const Region& r, int cert_depth = 9);

// Axis-aligned hull of a bounded euclid2 (or affine/coprod real-coordinate)
// region; throws for unbounded expressions.
struct Box2 {
  Dyadic x0, x1, y0, y1;
};
Box2 bounding_box(const GroupCtx& ctx, const Region& r);

GroupPoint sample_uniform(const GroupCtx& ctx, const Region& r, Rng& rng);

// --- exact decompositions -------------------------------------------------

// qp2: identifiers of the 2^level Z_2 cosets making up the region. `level`
// must be at least the finest level appearing in the expression.
std::vector<bigint> qp_decompose(const GroupCtx& ctx, const Region& r,
                                 int level);
int qp_finest_level(const Region& r);

// Finite unions of half-open dyadic intervals, kept sorted and disjoint.
struct IvSet {
  std::vector<std::pair<Dyadic, Dyadic>> iv;

  static IvSet of(Dyadic a, Dyadic b);
  Dyadic length() const;
  bool contains(const Dyadic& t) const;
};
IvSet iv_union(const IvSet& a, const IvSet& b);
IvSet iv_intersect(const IvSet& a, const IvSet& b);
IvSet iv_diff(const IvSet& a, const IvSet& b);

// coprod: per-H-coset interval sets. Throws when the region has infinite
// measure (a complement or full coset escaping every bounded leaf).
std::map<u64, IvSet> coprod_decompose(const GroupCtx& ctx, const Region& r);

}  // namespace pmap

#endif  // POISSONMAPS_REGION_HPP_
