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

#include "poissonmaps/seeds.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>

namespace pmap {

namespace {

Dyadic dy_abs(const Dyadic& d) { return d.sign() < 0 ? Dyadic() - d : d; }

int cyc128(int k) {
  k &= kQpIndex - 1;
  return std::min(k, kQpIndex - k);
}

// Closed 1-D interval sweep: every c in (lo, hi] within distance 1 of some
// offset. Exact dyadic comparisons.
bool segment_covered(const std::vector<Dyadic>& offsets, const Dyadic& lo,
                     const Dyadic& hi) {
  std::vector<std::pair<Dyadic, Dyadic>> iv;
  iv.reserve(offsets.size());
  for (const Dyadic& y : offsets) iv.emplace_back(y - Dyadic(1), y + Dyadic(1));
  std::sort(iv.begin(), iv.end());
  Dyadic reach = lo;
  for (const auto& [s, e] : iv) {
    if (!(reach < hi)) return true;
    if (reach < s) return false;
    if (reach < e) reach = e;
  }
  return !(reach < hi);
}

// Occupancy bitmap of the 128 cyclic positions of pts inside the H-coset of
// `center`; nullopt entries of qp_cyclic_offset (other cosets) are skipped.
std::array<bool, 128> qp_occupancy(const GroupCtx& ctx,
                                   const GroupPoint& center,
                                   const std::vector<GroupPoint>& pts) {
  std::array<bool, 128> occ{};
  bigint mod_h = bigint(1) << static_cast<unsigned>(ctx.qp_vmax - kQpHLog);
  bigint chc = center.qp % mod_h;
  for (const GroupPoint& p : pts) {
    if (p.qp % mod_h != chc) continue;
    bigint diff = (p.qp - center.qp) % ctx.qp_modulus();
    if (diff.sign() < 0) diff += ctx.qp_modulus();
    bigint idx = (diff >> static_cast<unsigned>(ctx.qp_vmax - kQpHLog)) &
                 bigint(kQpIndex - 1);
    occ[idx.convert_to<unsigned>()] = true;
  }
  return occ;
}

Tri qp_dense_at_index(const std::array<bool, 128>& occ, int k,
                      const MarkerGeometry& geom) {
  for (int r = 0; r < kQpIndex; ++r) {
    bool fits = cyc128(r - 1) > geom.d1 && cyc128(r - 1) <= geom.d2 &&
                cyc128(r) > geom.d1 && cyc128(r) <= geom.d2 &&
                cyc128(r + 1) > geom.d1 && cyc128(r + 1) <= geom.d2;
    if (!fits) continue;
    bool hit = occ[(k + r - 1) & 127] || occ[(k + r) & 127] ||
               occ[(k + r + 1) & 127];
    if (!hit) return Tri::Out;
  }
  return Tri::In;
}

Tri euclid_dense(const GroupCtx& ctx, const GroupPoint& center, i64 inner,
                 i64 outer, const std::vector<GroupPoint>& pts, int depth) {
  require(inner < outer, "domain", "dense shell collapsed");
  Region shell = Region::shell(center, inner, outer);
  Dyadic pad(outer + 1);
  Box2 hull{center.x - pad, center.x + pad, center.y - pad, center.y + pad};
  switch (certify_covered(ctx, shell, pts, 1, hull, depth)) {
    case CoverVerdict::Covered:
      return Tri::In;
    case CoverVerdict::Uncovered:
      return Tri::Out;
    case CoverVerdict::Unknown:
      return Tri::Mixed;
  }
  fail("backend", "bad cover verdict");
}

}  // namespace

bool in_word_shell(const GroupCtx& ctx, const GroupPoint& center,
                   const GroupPoint& p, i64 a, i64 b) {
  switch (ctx.backend) {
    case Backend::euclid2: {
      DyadicSq d = dist_sq(center, p);
      return d.cmp_int_sq(a) > 0 && d.cmp_int_sq(b) <= 0;
    }
    case Backend::qp2: {
      std::optional<int> k = qp_cyclic_offset(ctx, center, p);
      if (!k) return false;
      int d = cyc128(*k);
      return d > a && d <= b;
    }
    case Backend::coprod: {
      if (center.mask != p.mask) return false;
      Dyadic d = dy_abs(p.x - center.x);
      return Dyadic(a) < d && d <= Dyadic(b);
    }
    default:
      fail("backend", "word shells undefined on this backend");
  }
}

bool shell_has_point(const GroupCtx& ctx, const GroupPoint& center, i64 a,
                     i64 b, const std::vector<GroupPoint>& pts) {
  for (const GroupPoint& p : pts)
    if (in_word_shell(ctx, center, p, a, b)) return true;
  return false;
}

Tri dense_covered_at(const GroupCtx& ctx, const GroupPoint& center,
                     const MarkerGeometry& geom,
                     const std::vector<GroupPoint>& pts, int depth) {
  switch (ctx.backend) {
    case Backend::euclid2:
      return euclid_dense(ctx, center, geom.d1 + 1, geom.d2 - 1, pts, depth);
    case Backend::qp2: {
      std::array<bool, 128> occ = qp_occupancy(ctx, center, pts);
      return qp_dense_at_index(occ, 0, geom);
    }
    case Backend::coprod: {
      std::vector<Dyadic> offs;
      for (const GroupPoint& p : pts)
        if (p.mask == center.mask) offs.push_back(p.x - center.x);
      // Offsets are taken relative to center, so both sides test against
      // symmetric ranges around zero.
      bool right =
          segment_covered(offs, Dyadic(geom.d1 + 1), Dyadic(geom.d2 - 1));
      std::vector<Dyadic> neg;
      neg.reserve(offs.size());
      for (const Dyadic& y : offs) neg.push_back(Dyadic() - y);
      bool left = segment_covered(neg, Dyadic(geom.d1 + 1), Dyadic(geom.d2 - 1));
      return right && left ? Tri::In : Tri::Out;
    }
    default:
      fail("backend", "dense shells undefined on this backend");
  }
}

Tri dense_covered_margin(const GroupCtx& ctx, const GroupPoint& center,
                         const MarkerGeometry& geom,
                         const std::vector<GroupPoint>& pts, int depth) {
  if (ctx.backend != Backend::euclid2)
    return dense_covered_at(ctx, center, geom, pts, depth);
  return euclid_dense(ctx, center, geom.d1, geom.d2, pts, depth);
}

Tri seed_at(const GroupCtx& ctx, const GroupPoint& loc,
            const MarkerGeometry& geom, const std::vector<GroupPoint>& pts,
            int depth) {
  if (shell_has_point(ctx, loc, geom.d2, geom.e2, pts)) return Tri::Out;
  return dense_covered_at(ctx, loc, geom, pts, depth);
}

// --- window containment and erosion -----------------------------------------

bool ball_in_region(const GroupCtx& ctx, const Region& region,
                    const GroupPoint& center, i64 r) {
  switch (region.kind) {
    case Region::Kind::Empty:
      return false;
    case Region::Kind::All:
      return true;
    case Region::Kind::Ball: {
      check_same_backend(region.center, center);
      i64 slack = region.rb - r;
      switch (ctx.backend) {
        case Backend::euclid2:
          return slack >= 0 &&
                 dist_sq(region.center, center).cmp_int_sq(slack) <= 0;
        case Backend::qp2: {
          std::optional<int> k = qp_cyclic_offset(ctx, region.center, center);
          if (!k) return false;
          return region.rb >= kQpDiamH || (slack >= 0 && *k <= slack);
        }
        case Backend::coprod:
          return center.mask == region.center.mask && slack >= 0 &&
                 dy_abs(center.x - region.center.x) <= Dyadic(slack);
        default:
          return false;
      }
    }
    case Region::Kind::Box: {
      if (ctx.backend == Backend::euclid2) {
        Dyadic rad(r);
        return region.lo.x <= center.x - rad && center.x + rad < region.hi.x &&
               region.lo.y <= center.y - rad && center.y + rad < region.hi.y;
      }
      if (ctx.backend == Backend::coprod) {
        Dyadic rad(r);
        return center.mask == region.lo.mask &&
               region.lo.x <= center.x - rad && center.x + rad < region.hi.x;
      }
      return false;
    }
    case Region::Kind::CosetUnion: {
      if (ctx.backend == Backend::qp2) {
        if (region.level > -kQpHLog) return false;  // finer than word balls
        for (const GroupPoint& rep : region.reps)
          if (qp_coset_id(ctx, rep, region.level) ==
              qp_coset_id(ctx, center, region.level))
            return true;
        return false;
      }
      if (ctx.backend == Backend::coprod) {
        for (const GroupPoint& rep : region.reps)
          if (rep.mask == center.mask) return true;
        return false;
      }
      return false;
    }
    case Region::Kind::Union: {
      for (const Region& k : region.kids)
        if (ball_in_region(ctx, k, center, r)) return true;
      return false;
    }
    case Region::Kind::Intersection: {
      for (const Region& k : region.kids)
        if (!ball_in_region(ctx, k, center, r)) return false;
      return !region.kids.empty();
    }
    default:
      return false;
  }
}

Region erode_window(const GroupCtx& ctx, const Region& window, i64 margin) {
  switch (window.kind) {
    case Region::Kind::Empty:
      return Region::empty();
    case Region::Kind::All:
      return Region::all();
    case Region::Kind::Ball: {
      if (ctx.backend == Backend::qp2 && window.rb >= kQpDiamH) return window;
      if (window.rb - margin < 0) return Region::empty();
      if (window.rb - margin == 0 && ctx.backend == Backend::euclid2)
        return Region::empty();
      return Region::ball(window.center, window.rb - margin);
    }
    case Region::Kind::Box: {
      Dyadic m(margin);
      if (ctx.backend == Backend::euclid2) {
        if (!(window.lo.x + m < window.hi.x - m) ||
            !(window.lo.y + m < window.hi.y - m))
          return Region::empty();
        return Region::box(make_euclid(window.lo.x + m, window.lo.y + m),
                           make_euclid(window.hi.x - m, window.hi.y - m));
      }
      if (ctx.backend == Backend::coprod) {
        if (!(window.lo.x + m < window.hi.x - m)) return Region::empty();
        return Region::box(make_coprod(window.lo.mask, window.lo.x + m),
                           make_coprod(window.hi.mask, window.hi.x - m));
      }
      fail("backend", "cannot erode this window kind");
    }
    case Region::Kind::CosetUnion: {
      if (ctx.backend == Backend::qp2) {
        require(window.level <= -kQpHLog, "uncertified",
                "cannot erode a window finer than H-cosets");
        return window;  // word balls never leave their H-coset
      }
      if (ctx.backend == Backend::coprod) return window;
      fail("backend", "cannot erode this window kind");
    }
    case Region::Kind::Union: {
      // Union of part erosions: a subset of the true erosion (locations
      // whose ball spans two parts without fitting in either are dropped).
      std::vector<Region> kids;
      for (const Region& k : window.kids) {
        Region e = erode_window(ctx, k, margin);
        if (e.kind != Region::Kind::Empty) kids.push_back(std::move(e));
      }
      if (kids.empty()) return Region::empty();
      if (kids.size() == 1) return kids[0];
      return Region::join(std::move(kids));
    }
    case Region::Kind::Intersection: {
      // Exact: a ball sits inside a meet iff it sits inside every part.
      std::vector<Region> kids;
      for (const Region& k : window.kids) {
        Region e = erode_window(ctx, k, margin);
        if (e.kind == Region::Kind::Empty) return Region::empty();
        kids.push_back(std::move(e));
      }
      if (kids.size() == 1) return kids[0];
      return Region::meet(std::move(kids));
    }
    default:
      fail("uncertified", "cannot erode this window kind");
  }
}

// --- spatial prefilter -------------------------------------------------------

PointIndex PointIndex::build(const GroupCtx& ctx, std::vector<GroupPoint> pts) {
  PointIndex ix;
  ix.pts = std::move(pts);
  if (ctx.backend == Backend::euclid2) {
    for (u32 i = 0; i < ix.pts.size(); ++i) {
      i64 cx = static_cast<i64>(std::floor(ix.pts[i].x.to_double() / ix.cell));
      i64 cy = static_cast<i64>(std::floor(ix.pts[i].y.to_double() / ix.cell));
      ix.grid[{cx, cy}].push_back(i);
    }
  }
  return ix;
}

std::vector<u32> PointIndex::gather(double x0, double x1, double y0, double y1,
                                    double r_lo, double r_hi) const {
  std::vector<u32> out;
  if (grid.empty()) {
    out.resize(pts.size());
    std::iota(out.begin(), out.end(), 0);
    return out;
  }
  double slop = cell * 1.4242135623730951 + 1.0;
  i64 cx0 = static_cast<i64>(std::floor((x0 - r_hi - slop) / cell));
  i64 cx1 = static_cast<i64>(std::floor((x1 + r_hi + slop) / cell));
  i64 cy0 = static_cast<i64>(std::floor((y0 - r_hi - slop) / cell));
  i64 cy1 = static_cast<i64>(std::floor((y1 + r_hi + slop) / cell));
  auto axis_gap = [](double a0, double a1, double b0, double b1) {
    if (b1 < a0) return a0 - b1;
    if (a1 < b0) return b0 - a1;
    return 0.0;
  };
  for (i64 cx = cx0; cx <= cx1; ++cx)
    for (i64 cy = cy0; cy <= cy1; ++cy) {
      auto it = grid.find({cx, cy});
      if (it == grid.end()) continue;
      double bx0 = static_cast<double>(cx) * cell, bx1 = bx0 + cell;
      double by0 = static_cast<double>(cy) * cell, by1 = by0 + cell;
      double gx = axis_gap(x0, x1, bx0, bx1);
      double gy = axis_gap(y0, y1, by0, by1);
      double mind = std::sqrt(gx * gx + gy * gy);
      double span_x = std::max(x1, bx1) - std::min(x0, bx0);
      double span_y = std::max(y1, by1) - std::min(y0, by0);
      double maxd = std::sqrt(span_x * span_x + span_y * span_y);
      if (maxd + slop < r_lo || mind - slop > r_hi) continue;
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  return out;
}

// --- euclid2 scan ------------------------------------------------------------

namespace {

void split_box(const Box2& b, std::vector<Box2>& out) {
  Dyadic mx = (b.x0 + b.x1).ldexp(-1);
  Dyadic my = (b.y0 + b.y1).ldexp(-1);
  out.push_back(Box2{b.x0, mx, b.y0, my});
  out.push_back(Box2{mx, b.x1, b.y0, my});
  out.push_back(Box2{b.x0, mx, my, b.y1});
  out.push_back(Box2{mx, b.x1, my, b.y1});
}

Dyadic box_side(const Box2& b) {
  Dyadic w = b.x1 - b.x0;
  Dyadic h = b.y1 - b.y0;
  return w < h ? h : w;
}

struct EuclidScanner {
  const GroupCtx& ctx;
  const PointIndex& ix;
  const MarkerGeometry& geom;
  int cert_depth;

  // Sound pruning: true only with a proof that no location in the box is a
  // seed. Three disproofs, each valid for every h in the box at once:
  //  - sparsity: no point within d2, so the dense shell cannot be covered;
  //  - empty-shell witness: one point's (d2, e2] shell swallows the box;
  //  - dense disproof: a center c with (d1 + 1, d2 - 1] distance from the
  //    whole box whose unit ball holds no point.
  bool killed(const Box2& b) const {
    double x0 = b.x0.to_double(), x1 = b.x1.to_double();
    double y0 = b.y0.to_double(), y1 = b.y1.to_double();
    std::vector<u32> close =
        ix.gather(x0, x1, y0, y1, 0, static_cast<double>(geom.d2));
    bool any_near = false;
    for (u32 i : close)
      if (box_min_dist_sq(b, ix.pts[i]).cmp_int_sq(geom.d2) <= 0) {
        any_near = true;
        break;
      }
    if (!any_near) return true;
    std::vector<u32> cand =
        ix.gather(x0, x1, y0, y1, static_cast<double>(geom.d2) - 2.0,
                  static_cast<double>(geom.e2) + 2.0);
    double cxm = (x0 + x1) / 2, cym = (y0 + y1) / 2;
    double mid = static_cast<double>(geom.d2 + geom.e2) / 2;
    size_t keep = std::min<size_t>(cand.size(), 128);
    auto score = [&](u32 i) {
      double dx = ix.pts[i].x.to_double() - cxm;
      double dy = ix.pts[i].y.to_double() - cym;
      return std::fabs(std::sqrt(dx * dx + dy * dy) - mid);
    };
    std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(),
                      [&](u32 a, u32 c) {
                        double sa = score(a), sc = score(c);
                        return sa != sc ? sa < sc : a < c;
                      });
    for (size_t t = 0; t < keep; ++t) {
      u32 i = cand[t];
      if (box_min_dist_sq(b, ix.pts[i]).cmp_int_sq(geom.d2) > 0 &&
          box_max_dist_sq(b, ix.pts[i]).cmp_int_sq(geom.e2) <= 0)
        return true;
    }
    return dense_disproof(b, cxm, cym);
  }

  bool dense_disproof(const Box2& b, double cxm, double cym) const {
    // Only boxes small enough that one test center works uniformly.
    if (Dyadic(1) < box_side(b)) return false;
    i64 mid = (geom.d1 + geom.d2) / 2;
    for (int k = 0; k < 24; ++k) {
      double ang = static_cast<double>(k) * 0.2617993877991494;
      i64 ux = std::llround(std::cos(ang) * 4096.0);
      i64 uy = std::llround(std::sin(ang) * 4096.0);
      GroupPoint c =
          make_euclid((b.x0 + b.x1).ldexp(-1) + Dyadic(ux * mid).ldexp(-12),
                      (b.y0 + b.y1).ldexp(-1) + Dyadic(uy * mid).ldexp(-12));
      if (!(box_min_dist_sq(b, c).cmp_int_sq(geom.d1 + 1) > 0)) continue;
      if (!(box_max_dist_sq(b, c).cmp_int_sq(geom.d2 - 1) <= 0)) continue;
      double cx = cxm + static_cast<double>(ux * mid) / 4096.0;
      double cy = cym + static_cast<double>(uy * mid) / 4096.0;
      std::vector<u32> occ = ix.gather(cx, cx, cy, cy, 0, 1.0);
      bool vacant = true;
      for (u32 i : occ)
        if (dist_sq(c, ix.pts[i]).cmp_int_sq(1) <= 0) {
          vacant = false;
          break;
        }
      if (vacant) return true;
    }
    return false;
  }

  std::vector<GroupPoint> local_pts(const GroupPoint& c) const {
    double x = c.x.to_double(), y = c.y.to_double();
    std::vector<u32> idxs =
        ix.gather(x, x, y, y, 0, static_cast<double>(geom.e2) + 2.0);
    std::vector<GroupPoint> out;
    out.reserve(idxs.size());
    for (u32 i : idxs) out.push_back(ix.pts[i]);
    return out;
  }
};

// Squared gap between two closed boxes as a DyadicSq.
DyadicSq box_gap_sq(const Box2& a, const Box2& b) {
  auto gap = [](const Dyadic& a0, const Dyadic& a1, const Dyadic& b0,
                const Dyadic& b1) {
    if (b1 < a0) return a0 - b1;
    if (a1 < b0) return b0 - a1;
    return Dyadic();
  };
  return DyadicSq::norm2(gap(a.x0, a.x1, b.x0, b.x1),
                         gap(a.y0, a.y1, b.y0, b.y1));
}

// Squared span (max pairwise distance) of two closed boxes.
DyadicSq box_span_sq(const Box2& a, const Box2& b) {
  auto span = [](const Dyadic& a0, const Dyadic& a1, const Dyadic& b0,
                 const Dyadic& b1) {
    Dyadic lo = a0 < b0 ? a0 : b0;
    Dyadic hi = a1 < b1 ? b1 : a1;
    return hi - lo;
  };
  return DyadicSq::norm2(span(a.x0, a.x1, b.x0, b.x1),
                         span(a.y0, a.y1, b.y0, b.y1));
}

SeedScan scan_euclid(const GroupCtx& ctx, PointIndex ix,
                     const MarkerGeometry& geom, const Region& window,
                     int depth) {
  EuclidScanner sc{ctx, ix, geom, depth};
  Region domain = erode_window(ctx, window, geom.e2);
  SeedScan out;
  out.backend = Backend::euclid2;
  if (domain.kind == Region::Kind::Empty) {
    out.index = std::move(ix);
    return out;
  }

  std::vector<Box2> live;
  {
    std::vector<std::pair<Box2, int>> stack;
    Box2 hull = bounding_box(ctx, domain);
    if (hull.x0 < hull.x1 && hull.y0 < hull.y1)
      stack.push_back({hull, depth + 16});
    Dyadic res_goal = Dyadic(1).ldexp(-2);
    while (!stack.empty()) {
      auto [b, d] = stack.back();
      stack.pop_back();
      if (classify_box(ctx, domain, b) == Tri::Out) continue;
      if (sc.killed(b)) continue;
      if (!(res_goal < box_side(b)) || d == 0) {
        live.push_back(b);
        require(live.size() < 65536, "uncertified",
                "seed scan cover exceeds the survivor budget");
        continue;
      }
      std::vector<Box2> kids;
      split_box(b, kids);
      for (Box2& k : kids) stack.push_back({std::move(k), d - 1});
    }
  }

  // d_S < 2 components over the survivors.
  std::vector<size_t> parent(live.size());
  std::iota(parent.begin(), parent.end(), size_t{0});
  auto find = [&](size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (size_t i = 0; i < live.size(); ++i)
    for (size_t j = i + 1; j < live.size(); ++j)
      if (box_gap_sq(live[i], live[j]).cmp_int_sq(2) < 0) {
        size_t a = find(i), b = find(j);
        if (a != b) parent[a] = b;
      }
  std::map<size_t, std::vector<Box2>> comps;
  for (size_t i = 0; i < live.size(); ++i)
    comps[find(i)].push_back(live[i]);

  for (auto& [root, boxes] : comps) {
    SeedClassCover cls;
    cls.boxes = std::move(boxes);
    bool confirmed = false;
    for (int round = 0; round < 14 && !confirmed; ++round) {
      // Try central candidate locations with the exact point test.
      double mx = 0, my = 0;
      for (const Box2& b : cls.boxes) {
        mx += (b.x0.to_double() + b.x1.to_double()) / 2;
        my += (b.y0.to_double() + b.y1.to_double()) / 2;
      }
      mx /= static_cast<double>(cls.boxes.size());
      my /= static_cast<double>(cls.boxes.size());
      std::vector<size_t> order(cls.boxes.size());
      std::iota(order.begin(), order.end(), size_t{0});
      std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        auto score = [&](size_t i) {
          double dx = (cls.boxes[i].x0.to_double() +
                       cls.boxes[i].x1.to_double()) /
                          2 -
                      mx;
          double dy = (cls.boxes[i].y0.to_double() +
                       cls.boxes[i].y1.to_double()) /
                          2 -
                      my;
          return dx * dx + dy * dy;
        };
        double sa = score(a), sb = score(b);
        return sa != sb ? sa < sb : a < b;
      });
      int tried = 0;
      for (size_t i : order) {
        if (++tried > 12) break;
        GroupPoint cand =
            make_euclid((cls.boxes[i].x0 + cls.boxes[i].x1).ldexp(-1),
                        (cls.boxes[i].y0 + cls.boxes[i].y1).ldexp(-1));
        // Only window-interior candidates: the verdict reads the point set
        // out to e2, which the window must cover.
        if (!ball_in_region(ctx, window, cand, geom.e2)) continue;
        if (seed_at(ctx, cand, geom, sc.local_pts(cand), depth) == Tri::In) {
          cls.witnesses.push_back(cand);
          confirmed = true;
          break;
        }
      }
      if (confirmed) break;
      // Shrink the cover toward the true class and retry.
      std::vector<Box2> next;
      for (const Box2& b : cls.boxes) {
        std::vector<Box2> kids;
        split_box(b, kids);
        for (Box2& k : kids)
          if (!sc.killed(k)) next.push_back(std::move(k));
      }
      cls.boxes = std::move(next);
      if (cls.boxes.empty()) break;  // disproved: no seed in this cluster
      require(cls.boxes.size() < 65536, "uncertified",
              "seed cover refinement exceeds the survivor budget");
    }
    if (cls.boxes.empty()) continue;
    require(confirmed, "uncertified",
            "unresolved seed candidate cluster at the refinement cap");
    out.classes.push_back(std::move(cls));
  }
  out.index = std::move(ix);
  return out;
}

// --- qp2 scan ----------------------------------------------------------------

SeedScan scan_qp2(const GroupCtx& ctx, PointIndex ix,
                  const MarkerGeometry& geom, const Region& window) {
  SeedScan out;
  out.backend = Backend::qp2;
  if (qp_finest_level(window) > -kQpHLog) {
    out.index = std::move(ix);
    return out;  // no full H-coset fits: no candidates
  }
  std::vector<bigint> hbases = qp_decompose(ctx, window, -kQpHLog);
  unsigned shift = static_cast<unsigned>(ctx.qp_vmax - kQpHLog);
  for (const bigint& base : hbases) {
    GroupPoint rep = make_qp2(ctx, base);
    std::array<bool, 128> occ = qp_occupancy(ctx, rep, ix.pts);
    std::array<bool, 128> seed{};
    bool any = false;
    for (int k = 0; k < kQpIndex; ++k) {
      bool empty_ok = true;
      for (int r = 0; r < kQpIndex && empty_ok; ++r)
        if (cyc128(r) > geom.d2 && cyc128(r) <= geom.e2 && occ[(k + r) & 127])
          empty_ok = false;
      if (!empty_ok) continue;
      if (qp_dense_at_index(occ, k, geom) == Tri::In) {
        seed[k] = true;
        any = true;
      }
    }
    if (!any) continue;
    // Cyclic components under adjacency cyc <= 1.
    std::array<int, 128> comp;
    comp.fill(-1);
    int ncomp = 0;
    for (int k = 0; k < kQpIndex; ++k) {
      if (!seed[k] || comp[k] >= 0) continue;
      std::vector<int> todo{k};
      comp[k] = ncomp;
      while (!todo.empty()) {
        int c = todo.back();
        todo.pop_back();
        for (int n : {(c + 1) & 127, (c + 127) & 127})
          if (seed[n] && comp[n] < 0) {
            comp[n] = ncomp;
            todo.push_back(n);
          }
      }
      ++ncomp;
    }
    for (int c = 0; c < ncomp; ++c) {
      SeedClassCover cls;
      for (int k = 0; k < kQpIndex; ++k)
        if (comp[k] == c)
          cls.cosets.push_back((base + (bigint(k) << shift)) %
                               ctx.qp_modulus());
      out.classes.push_back(std::move(cls));
    }
  }
  out.index = std::move(ix);
  return out;
}

// --- coprod scan ---------------------------------------------------------------

SeedScan scan_coprod(const GroupCtx& ctx, PointIndex ix,
                     const MarkerGeometry& geom, const Region& window) {
  SeedScan out;
  out.backend = Backend::coprod;
  std::map<u64, IvSet> win = coprod_decompose(ctx, window);
  std::map<u64, std::vector<Dyadic>> per_mask;
  for (const GroupPoint& p : ix.pts) per_mask[p.mask].push_back(p.x);
  Dyadic d2(geom.d2), e2(geom.e2);
  Dyadic c_lo(geom.d1 + 1), c_hi(geom.d2 - 1);
  for (const auto& [mask, wiv] : win) {
    IvSet domain;
    for (const auto& [a, b] : wiv.iv) {
      Dyadic lo = a + e2, hi = b - e2;
      if (lo < hi) domain = iv_union(domain, IvSet::of(lo, hi));
    }
    if (domain.iv.empty()) continue;
    const std::vector<Dyadic>* xs = nullptr;
    auto it = per_mask.find(mask);
    static const std::vector<Dyadic> kNone;
    xs = it == per_mask.end() ? &kNone : &it->second;
    // Uncovered unit-ball centers within reach of the domain.
    IvSet crange;
    for (const auto& [a, b] : domain.iv)
      crange = iv_union(crange, IvSet::of(a - c_hi, b + c_hi));
    IvSet covered;
    for (const Dyadic& y : *xs)
      covered = iv_union(covered, IvSet::of(y - Dyadic(1), y + Dyadic(1)));
    IvSet uncovered = iv_diff(crange, covered);
    IvSet fail;
    for (const auto& [a, b] : uncovered.iv) {
      fail = iv_union(fail, IvSet::of(a - c_hi, b - c_lo));
      fail = iv_union(fail, IvSet::of(a + c_lo, b + c_hi));
    }
    for (const Dyadic& y : *xs) {
      fail = iv_union(fail, IvSet::of(y - e2, y - d2));
      fail = iv_union(fail, IvSet::of(y + d2, y + e2));
    }
    IvSet seeds = iv_diff(domain, fail);
    // Split into classes at gaps of 2 or more.
    std::vector<std::pair<Dyadic, Dyadic>> cur;
    auto flush = [&]() {
      if (cur.empty()) return;
      SeedClassCover cls;
      cls.mask = mask;
      cls.band.iv = std::move(cur);
      cur.clear();
      out.classes.push_back(std::move(cls));
    };
    for (const auto& seg : seeds.iv) {
      if (!cur.empty() && !(seg.first - cur.back().second < Dyadic(2)))
        flush();
      cur.push_back(seg);
    }
    flush();
  }
  out.index = std::move(ix);
  return out;
}

}  // namespace

SeedScan seed_scan(const GroupCtx& ctx, const std::vector<GroupPoint>& pts,
                   const MarkerGeometry& geom, const Region& window,
                   int depth) {
  std::vector<std::string> bad = validate_marker_geometry(ctx, geom);
  require(bad.empty(), "domain",
          "invalid marker geometry: " + (bad.empty() ? "" : bad[0]));
  PointIndex ix = PointIndex::build(ctx, pts);
  SeedScan out;
  switch (ctx.backend) {
    case Backend::euclid2:
      out = scan_euclid(ctx, std::move(ix), geom, window, depth);
      break;
    case Backend::qp2:
      out = scan_qp2(ctx, std::move(ix), geom, window);
      break;
    case Backend::coprod:
      out = scan_coprod(ctx, std::move(ix), geom, window);
      break;
    default:
      fail("backend", "seed scan undefined on this backend");
  }
  out.window = window;
  return out;
}

int core_membership(const GroupCtx& ctx, SeedScan& scan, size_t cls_idx,
                    const MarkerGeometry& geom, const GroupPoint& q,
                    int extra_depth) {
  require(cls_idx < scan.classes.size(), "domain", "class index out of range");
  SeedClassCover& cls = scan.classes[cls_idx];
  i64 core_r = kCoreRadius;
  switch (scan.backend) {
    case Backend::qp2: {
      // q is in the core iff its coset is within cyc 3 of every class coset.
      unsigned shift = static_cast<unsigned>(ctx.qp_vmax - kQpHLog);
      bigint mod_h = bigint(1) << shift;
      require(!cls.cosets.empty(), "domain", "empty qp2 class");
      if (q.qp % mod_h != cls.cosets[0] % mod_h) return -1;
      bigint qk = (qp_coset_id(ctx, q, 0) >> shift) & bigint(127);
      int qi = qk.convert_to<int>();
      for (const bigint& c : cls.cosets) {
        bigint ck = (c >> shift) & bigint(127);
        if (cyc128(qi - ck.convert_to<int>()) > core_r) return -1;
      }
      return 1;
    }
    case Backend::coprod: {
      if (q.mask != cls.mask || cls.band.iv.empty()) return -1;
      Dyadic lo = cls.band.iv.front().first;
      Dyadic hi = cls.band.iv.back().second;
      Dyadic r(core_r);
      return (hi - r <= q.x && q.x <= lo + r) ? 1 : -1;
    }
    case Backend::euclid2:
      break;
    default:
      fail("backend", "core membership undefined on this backend");
  }
  require(!cls.boxes.empty(), "domain", "empty euclid2 class cover");
  EuclidScanner sc{ctx, scan.index, geom, extra_depth};
  for (int round = 0;; ++round) {
    // A witness is a certified class member: beyond 3 of one means outside.
    for (const GroupPoint& w : cls.witnesses)
      if (dist_sq(w, q).cmp_int_sq(core_r) > 0) return -1;
    bool all_in = true, all_out = true;
    for (const Box2& b : cls.boxes) {
      if (box_max_dist_sq(b, q).cmp_int_sq(core_r) > 0) all_in = false;
      if (box_min_dist_sq(b, q).cmp_int_sq(core_r) <= 0) all_out = false;
      if (!all_in && !all_out) break;
    }
    if (all_in) return 1;
    if (all_out) return -1;
    if (round >= extra_depth) return 0;
    // Hunt for a class member far from q among the most distant cover
    // boxes; one beyond 3 settles the verdict next round.
    std::vector<size_t> order(cls.boxes.size());
    std::iota(order.begin(), order.end(), size_t{0});
    double qx = q.x.to_double(), qy = q.y.to_double();
    auto far_score = [&](size_t i) {
      double dx = (cls.boxes[i].x0.to_double() + cls.boxes[i].x1.to_double()) /
                      2 -
                  qx;
      double dy = (cls.boxes[i].y0.to_double() + cls.boxes[i].y1.to_double()) /
                      2 -
                  qy;
      return dx * dx + dy * dy;
    };
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      double sa = far_score(a), sb = far_score(b);
      return sa != sb ? sa > sb : a < b;
    });
    int hunted = 0;
    for (size_t i : order) {
      if (++hunted > 8) break;
      GroupPoint cand =
          make_euclid((cls.boxes[i].x0 + cls.boxes[i].x1).ldexp(-1),
                      (cls.boxes[i].y0 + cls.boxes[i].y1).ldexp(-1));
      if (!ball_in_region(ctx, scan.window, cand, geom.e2)) continue;
      if (seed_at(ctx, cand, geom, sc.local_pts(cand), extra_depth) ==
          Tri::In)
        cls.witnesses.push_back(cand);
    }
    std::vector<Box2> next;
    for (const Box2& b : cls.boxes) {
      std::vector<Box2> kids;
      split_box(b, kids);
      for (Box2& k : kids)
        if (!sc.killed(k)) next.push_back(std::move(k));
    }
    require(!next.empty(), "uncertified",
            "class cover vanished under refinement");
    require(next.size() < 65536, "uncertified",
            "seed cover refinement exceeds the survivor budget");
    cls.boxes = std::move(next);
  }
}

bool classes_beyond(const GroupCtx& ctx, const SeedClassCover& a,
                    const SeedClassCover& b, i64 bound) {
  switch (ctx.backend) {
    case Backend::euclid2: {
      for (const Box2& x : a.boxes)
        for (const Box2& y : b.boxes)
          if (!(box_gap_sq(x, y).cmp_int_sq(bound) > 0)) return false;
      return true;
    }
    case Backend::qp2: {
      unsigned shift = static_cast<unsigned>(ctx.qp_vmax - kQpHLog);
      bigint mod_h = bigint(1) << shift;
      if (a.cosets.empty() || b.cosets.empty()) return true;
      if (a.cosets[0] % mod_h != b.cosets[0] % mod_h) return true;
      if (bound >= kQpDiamH) return false;
      for (const bigint& x : a.cosets)
        for (const bigint& y : b.cosets) {
          int dx = (((x - y) >> shift) & bigint(127)).convert_to<int>();
          if (cyc128(dx) <= bound) return false;
        }
      return true;
    }
    case Backend::coprod: {
      if (a.mask != b.mask) return true;
      if (a.band.iv.empty() || b.band.iv.empty()) return true;
      Dyadic gap1 = b.band.iv.front().first - a.band.iv.back().second;
      Dyadic gap2 = a.band.iv.front().first - b.band.iv.back().second;
      Dyadic g = gap1 < gap2 ? gap2 : gap1;
      return Dyadic(bound) < g;
    }
    default:
      fail("backend", "class separation undefined on this backend");
  }
}

bool class_diameter_below(const GroupCtx& ctx, const SeedClassCover& cls,
                          i64 bound) {
  switch (ctx.backend) {
    case Backend::euclid2: {
      for (size_t i = 0; i < cls.boxes.size(); ++i)
        for (size_t j = i; j < cls.boxes.size(); ++j)
          if (!(box_span_sq(cls.boxes[i], cls.boxes[j]).cmp_int_sq(bound) < 0))
            return false;
      return true;
    }
    case Backend::qp2: {
      unsigned shift = static_cast<unsigned>(ctx.qp_vmax - kQpHLog);
      for (const bigint& x : cls.cosets)
        for (const bigint& y : cls.cosets) {
          int dx = (((x - y) >> shift) & bigint(127)).convert_to<int>();
          if (cyc128(dx) >= bound) return false;
        }
      return true;
    }
    case Backend::coprod: {
      if (cls.band.iv.empty()) return true;
      Dyadic span = cls.band.iv.back().second - cls.band.iv.front().first;
      return span < Dyadic(bound);
    }
    default:
      fail("backend", "class diameter undefined on this backend");
  }
}

}  // namespace pmap
