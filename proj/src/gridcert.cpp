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

#include "poissonmaps/gridcert.hpp"

#include <algorithm>

namespace pmap {

namespace {

// Minimal and maximal |t - [a, b]| per axis, as exact dyadics.
Dyadic axis_min(const Dyadic& t, const Dyadic& a, const Dyadic& b) {
  if (t < a) return a - t;
  if (b < t) return t - b;
  return Dyadic();
}

Dyadic axis_max(const Dyadic& t, const Dyadic& a, const Dyadic& b) {
  Dyadic l = t - a;
  if (l.sign() < 0) l = -l;
  Dyadic r = t - b;
  if (r.sign() < 0) r = -r;
  return std::max(l, r);
}

DyadicSq to_sq(const Dyadic& dx, const Dyadic& dy) {
  return DyadicSq::norm2(dx, dy);
}

}  // namespace

DyadicSq box_min_dist_sq(const Box2& box, const GroupPoint& p) {
  return to_sq(axis_min(p.x, box.x0, box.x1), axis_min(p.y, box.y0, box.y1));
}

DyadicSq box_max_dist_sq(const Box2& box, const GroupPoint& p) {
  return to_sq(axis_max(p.x, box.x0, box.x1), axis_max(p.y, box.y0, box.y1));
}

Tri classify_box(const GroupCtx& ctx, const Region& r, const Box2& box) {
  switch (r.kind) {
    case Region::Kind::Empty:
      return Tri::Out;
    case Region::Kind::All:
      return Tri::In;
    case Region::Kind::Ball: {
      if (box_max_dist_sq(box, r.center).cmp_int_sq(r.rb) <= 0)
        return Tri::In;
      if (box_min_dist_sq(box, r.center).cmp_int_sq(r.rb) > 0) return Tri::Out;
      return Tri::Mixed;
    }
    case Region::Kind::Shell: {
      DyadicSq mn = box_min_dist_sq(box, r.center);
      DyadicSq mx = box_max_dist_sq(box, r.center);
      bool in_outer = mx.cmp_int_sq(r.rb) <= 0;
      bool out_outer = mn.cmp_int_sq(r.rb) > 0;
      bool in_hole = mx.cmp_int_sq(r.ra) <= 0;
      bool out_hole = mn.cmp_int_sq(r.ra) > 0;
      if (in_outer && out_hole) return Tri::In;
      if (out_outer || in_hole) return Tri::Out;
      return Tri::Mixed;
    }
    case Region::Kind::Box: {
      // Region boxes are half-open, so a degenerate query sliver resting on
      // the upper face holds no region points; Out must win over In there.
      bool out = box.x1 <= r.lo.x || box.x0 >= r.hi.x || box.y1 <= r.lo.y ||
                 box.y0 >= r.hi.y;
      if (out) return Tri::Out;
      bool in = box.x0 >= r.lo.x && box.x1 <= r.hi.x && box.y0 >= r.lo.y &&
                box.y1 <= r.hi.y;
      if (in) return Tri::In;
      return Tri::Mixed;
    }
    case Region::Kind::CosetUnion:
      fail("backend", "coset unions undefined on the euclid2 backend");
    case Region::Kind::Complement: {
      Tri t = classify_box(ctx, r.kids[0], box);
      if (t == Tri::In) return Tri::Out;
      if (t == Tri::Out) return Tri::In;
      return Tri::Mixed;
    }
    case Region::Kind::Union: {
      bool all_out = true;
      for (const Region& k : r.kids) {
        Tri t = classify_box(ctx, k, box);
        if (t == Tri::In) return Tri::In;
        if (t != Tri::Out) all_out = false;
      }
      return all_out ? Tri::Out : Tri::Mixed;
    }
    case Region::Kind::Intersection: {
      bool all_in = true;
      for (const Region& k : r.kids) {
        Tri t = classify_box(ctx, k, box);
        if (t == Tri::Out) return Tri::Out;
        if (t != Tri::In) all_in = false;
      }
      return all_in ? Tri::In : Tri::Mixed;
    }
  }
  fail("backend", "bad region kind");
}

namespace {

Dyadic box_area2(const Box2& b) {
  Dyadic w = b.x1 - b.x0;
  Dyadic h = b.y1 - b.y0;
  if (w.sign() <= 0 || h.sign() <= 0) return Dyadic();
  return w * h;
}

void split4(const Box2& b, Box2 out[4]) {
  Dyadic xm = (b.x0 + b.x1).ldexp(-1);
  Dyadic ym = (b.y0 + b.y1).ldexp(-1);
  out[0] = Box2{b.x0, xm, b.y0, ym};
  out[1] = Box2{xm, b.x1, b.y0, ym};
  out[2] = Box2{b.x0, xm, ym, b.y1};
  out[3] = Box2{xm, b.x1, ym, b.y1};
}

void measure_rec(const GroupCtx& ctx, const Region& r, const Box2& box,
                 int depth, Dyadic& lo, Dyadic& slack) {
  Dyadic area = box_area2(box);
  if (area.is_zero()) return;
  Tri t = classify_box(ctx, r, box);
  if (t == Tri::Out) return;
  if (t == Tri::In) {
    lo += area;
    return;
  }
  if (depth == 0) {
    slack += area;
    return;
  }
  Box2 kids[4];
  split4(box, kids);
  for (const Box2& k : kids) measure_rec(ctx, r, k, depth - 1, lo, slack);
}

CoverVerdict cover_rec(const GroupCtx& ctx, const Region& r,
                       const std::vector<GroupPoint>& sites,
                       const std::vector<u32>& cand, i64 radius,
                       const Box2& box, int depth) {
  if (box_area2(box).is_zero()) return CoverVerdict::Covered;
  Tri t = classify_box(ctx, r, box);
  if (t == Tri::Out) return CoverVerdict::Covered;
  for (u32 i : cand)
    if (box_max_dist_sq(box, sites[i]).cmp_int_sq(radius) <= 0)
      return CoverVerdict::Covered;
  if (cand.empty() && t == Tri::In) return CoverVerdict::Uncovered;
  if (depth == 0) return CoverVerdict::Unknown;
  Box2 kids[4];
  split4(box, kids);
  bool unknown = false;
  for (const Box2& k : kids) {
    std::vector<u32> sub;
    for (u32 i : cand)
      if (box_min_dist_sq(k, sites[i]).cmp_int_sq(radius) <= 0)
        sub.push_back(i);
    CoverVerdict v = cover_rec(ctx, r, sites, sub, radius, k, depth - 1);
    if (v == CoverVerdict::Uncovered) return CoverVerdict::Uncovered;
    if (v == CoverVerdict::Unknown) unknown = true;
  }
  return unknown ? CoverVerdict::Unknown : CoverVerdict::Covered;
}

}  // namespace

MeasureBounds certify_measure(const GroupCtx& ctx, const Region& r,
                              const Box2& hull, int max_depth) {
  require(ctx.backend == Backend::euclid2, "backend",
          "grid certification is a euclid2 engine");
  Dyadic lo, slack;
  measure_rec(ctx, r, hull, max_depth, lo, slack);
  return {lo, lo + slack};
}

CoverVerdict certify_covered(const GroupCtx& ctx, const Region& r,
                             const std::vector<GroupPoint>& sites, i64 radius,
                             const Box2& hull, int max_depth) {
  require(ctx.backend == Backend::euclid2, "backend",
          "grid certification is a euclid2 engine");
  std::vector<u32> cand;
  for (u32 i = 0; i < sites.size(); ++i)
    if (box_min_dist_sq(hull, sites[i]).cmp_int_sq(radius) <= 0)
      cand.push_back(i);
  return cover_rec(ctx, r, sites, cand, radius, hull, max_depth);
}

}  // namespace pmap
