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

#include "poissonmaps/region.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <utility>

#include "poissonmaps/gridcert.hpp"

namespace pmap {

namespace {

bool member_ball(const GroupCtx& ctx, const GroupPoint& c, i64 r,
                 const GroupPoint& p) {
  check_same_backend(c, p);
  switch (c.backend) {
    case Backend::euclid2:
      return dist_sq(c, p).cmp_int_sq(r) <= 0;
    case Backend::qp2: {
      std::optional<int> k = qp_cyclic_offset(ctx, c, p);
      if (!k) return false;
      return std::min<i64>(*k, kQpIndex - *k) <= r;
    }
    case Backend::coprod: {
      if (c.mask != p.mask) return false;
      Dyadic d = p.x - c.x;
      if (d.sign() < 0) d = -d;
      return d <= Dyadic(r);
    }
    case Backend::affine:
      fail("backend", "word balls undefined on the affine backend");
  }
  fail("backend", "bad backend enum");
}

}  // namespace

bool region_contains(const GroupCtx& ctx, const Region& r,
                     const GroupPoint& p) {
  switch (r.kind) {
    case Region::Kind::Empty:
      return false;
    case Region::Kind::All:
      return true;
    case Region::Kind::Ball:
      return member_ball(ctx, r.center, r.rb, p);
    case Region::Kind::Shell:
      return member_ball(ctx, r.center, r.rb, p) &&
             !member_ball(ctx, r.center, r.ra, p);
    case Region::Kind::Box: {
      check_same_backend(r.lo, p);
      if (p.backend == Backend::qp2)
        fail("backend", "boxes undefined on the qp2 backend");
      if (p.backend == Backend::coprod) {
        require(r.lo.mask == r.hi.mask, "domain",
                "coprod box corners must share a coset");
        if (p.mask != r.lo.mask) return false;
        return r.lo.x <= p.x && p.x < r.hi.x;
      }
      return r.lo.x <= p.x && p.x < r.hi.x && r.lo.y <= p.y && p.y < r.hi.y;
    }
    case Region::Kind::CosetUnion: {
      if (p.backend == Backend::coprod) {
        for (const GroupPoint& g : r.reps)
          if (g.mask == p.mask) return true;
        return false;
      }
      require(p.backend == Backend::qp2, "backend",
              "coset unions are qp2/coprod regions");
      bigint id = qp_coset_id(ctx, p, r.level);
      for (const GroupPoint& g : r.reps)
        if (qp_coset_id(ctx, g, r.level) == id) return true;
      return false;
    }
    case Region::Kind::Complement:
      return !region_contains(ctx, r.kids[0], p);
    case Region::Kind::Union:
      for (const Region& k : r.kids)
        if (region_contains(ctx, k, p)) return true;
      return false;
    case Region::Kind::Intersection:
      for (const Region& k : r.kids)
        if (!region_contains(ctx, k, p)) return false;
      return true;
  }
  fail("backend", "bad region kind");
}

Region translate_region(const GroupCtx& ctx, const GroupPoint& g,
                        const Region& r) {
  Region out = r;
  switch (r.kind) {
    case Region::Kind::Empty:
    case Region::Kind::All:
      return out;
    case Region::Kind::Ball:
    case Region::Kind::Shell:
      out.center = translate(ctx, g, r.center);
      return out;
    case Region::Kind::Box:
      out.lo = translate(ctx, g, r.lo);
      out.hi = translate(ctx, g, r.hi);
      if (g.backend == Backend::affine) {
        // Left translation maps [a1,a2]x[b1,b2] to [aa1,aa2]x[ab1+b,ab2+b];
        // corners stay corners because the scale is positive.
      }
      return out;
    case Region::Kind::CosetUnion:
      for (GroupPoint& rep : out.reps) rep = translate(ctx, g, rep);
      return out;
    case Region::Kind::Complement:
    case Region::Kind::Union:
    case Region::Kind::Intersection:
      for (Region& k : out.kids) k = translate_region(ctx, g, k);
      return out;
  }
  fail("backend", "bad region kind");
}

// --- interval sets ----------------------------------------------------------

IvSet IvSet::of(Dyadic a, Dyadic b) {
  IvSet s;
  if (a < b) s.iv.emplace_back(std::move(a), std::move(b));
  return s;
}

Dyadic IvSet::length() const {
  Dyadic t;
  for (const auto& [a, b] : iv) t += b - a;
  return t;
}

bool IvSet::contains(const Dyadic& t) const {
  for (const auto& [a, b] : iv)
    if (a <= t && t < b) return true;
  return false;
}

namespace {
void push_iv(std::vector<std::pair<Dyadic, Dyadic>>& out, Dyadic a, Dyadic b) {
  if (!(a < b)) return;
  if (!out.empty() && a <= out.back().second) {
    if (out.back().second < b) out.back().second = std::move(b);
    return;
  }
  out.emplace_back(std::move(a), std::move(b));
}
}  // namespace

IvSet iv_union(const IvSet& a, const IvSet& b) {
  IvSet out;
  size_t i = 0, j = 0;
  while (i < a.iv.size() || j < b.iv.size()) {
    bool take_a = j >= b.iv.size() ||
                  (i < a.iv.size() && a.iv[i].first <= b.iv[j].first);
    const auto& p = take_a ? a.iv[i++] : b.iv[j++];
    push_iv(out.iv, p.first, p.second);
  }
  return out;
}

IvSet iv_intersect(const IvSet& a, const IvSet& b) {
  IvSet out;
  size_t i = 0, j = 0;
  while (i < a.iv.size() && j < b.iv.size()) {
    Dyadic lo = std::max(a.iv[i].first, b.iv[j].first);
    Dyadic hi = std::min(a.iv[i].second, b.iv[j].second);
    if (lo < hi) out.iv.emplace_back(lo, hi);
    if (a.iv[i].second < b.iv[j].second)
      ++i;
    else
      ++j;
  }
  return out;
}

IvSet iv_diff(const IvSet& a, const IvSet& b) {
  IvSet out;
  for (const auto& [a0, a1] : a.iv) {
    Dyadic cur = a0;
    for (const auto& [b0, b1] : b.iv) {
      if (b1 <= cur) continue;
      if (b0 >= a1) break;
      if (cur < b0) push_iv(out.iv, cur, std::min(a1, b0));
      cur = std::max(cur, b1);
      if (!(cur < a1)) break;
    }
    if (cur < a1) push_iv(out.iv, cur, a1);
  }
  return out;
}

// --- qp2 coset decomposition ------------------------------------------------

namespace {

struct CoSet {
  bool co = false;  // true: complement of ids
  std::set<bigint> ids;
};

std::set<bigint> set_union2(const std::set<bigint>& a,
                            const std::set<bigint>& b) {
  std::set<bigint> r = a;
  r.insert(b.begin(), b.end());
  return r;
}

std::set<bigint> set_intersect2(const std::set<bigint>& a,
                                const std::set<bigint>& b) {
  std::set<bigint> r;
  for (const bigint& x : a)
    if (b.count(x)) r.insert(x);
  return r;
}

std::set<bigint> set_diff2(const std::set<bigint>& a,
                           const std::set<bigint>& b) {
  std::set<bigint> r;
  for (const bigint& x : a)
    if (!b.count(x)) r.insert(x);
  return r;
}

CoSet co_union(const CoSet& a, const CoSet& b) {
  if (!a.co && !b.co) return {false, set_union2(a.ids, b.ids)};
  if (a.co && !b.co) return {true, set_diff2(a.ids, b.ids)};
  if (!a.co && b.co) return {true, set_diff2(b.ids, a.ids)};
  return {true, set_intersect2(a.ids, b.ids)};
}

CoSet co_intersect(const CoSet& a, const CoSet& b) {
  if (!a.co && !b.co) return {false, set_intersect2(a.ids, b.ids)};
  if (a.co && !b.co) return {false, set_diff2(b.ids, a.ids)};
  if (!a.co && b.co) return {false, set_diff2(a.ids, b.ids)};
  return {true, set_union2(a.ids, b.ids)};
}

// K_0-coset ids (residues mod 2^vmax) of the word ball / shell around c:
// the set is a union of whole Z_2-cosets at cyclic offsets k from c.
std::set<bigint> qp_annulus_ids(const GroupCtx& ctx, const GroupPoint& c,
                                i64 a, i64 b) {
  unsigned unit = static_cast<unsigned>(ctx.qp_vmax - kQpHLog);
  bigint id0 = qp_coset_id(ctx, c, 0);
  bigint base = id0 & ((bigint(1) << unit) - 1);
  int kc = static_cast<int>(((id0 - base) >> unit).convert_to<unsigned>());
  std::set<bigint> ids;
  for (int j = 0; j < kQpIndex; ++j) {
    i64 cyc = std::min(j, kQpIndex - j);
    if (cyc > a && cyc <= b) {
      int k = (kc + j) & (kQpIndex - 1);
      ids.insert(base + (bigint(k) << unit));
    }
  }
  return ids;
}

std::set<bigint> expand_ids(const GroupCtx& ctx, const std::set<bigint>& ids,
                            int from_level, int to_level) {
  if (from_level == to_level) return ids;
  require(from_level < to_level, "domain", "cannot coarsen coset ids");
  std::set<bigint> out;
  unsigned base_bits = static_cast<unsigned>(ctx.qp_vmax + from_level);
  for (const bigint& id : ids)
    for (bigint m = 0; m < (bigint(1) << (to_level - from_level)); ++m)
      out.insert(id + (m << base_bits));
  return out;
}

CoSet qp_eval(const GroupCtx& ctx, const Region& r, int level) {
  switch (r.kind) {
    case Region::Kind::Empty:
      return {false, {}};
    case Region::Kind::All:
      return {true, {}};
    case Region::Kind::Ball:
      return {false, expand_ids(ctx, qp_annulus_ids(ctx, r.center, -1, r.rb),
                                0, level)};
    case Region::Kind::Shell:
      return {false, expand_ids(ctx,
                                qp_annulus_ids(ctx, r.center, r.ra, r.rb), 0,
                                level)};
    case Region::Kind::CosetUnion: {
      require(r.level <= level, "domain",
              "coset union finer than requested level");
      std::set<bigint> ids;
      for (const GroupPoint& g : r.reps)
        ids.insert(qp_coset_id(ctx, g, r.level));
      return {false, expand_ids(ctx, ids, r.level, level)};
    }
    case Region::Kind::Box:
      fail("backend", "boxes undefined on the qp2 backend");
    case Region::Kind::Complement: {
      CoSet k = qp_eval(ctx, r.kids[0], level);
      k.co = !k.co;
      return k;
    }
    case Region::Kind::Union: {
      CoSet acc{false, {}};
      for (const Region& k : r.kids)
        acc = co_union(acc, qp_eval(ctx, k, level));
      return acc;
    }
    case Region::Kind::Intersection: {
      CoSet acc{true, {}};
      for (const Region& k : r.kids)
        acc = co_intersect(acc, qp_eval(ctx, k, level));
      return acc;
    }
  }
  fail("backend", "bad region kind");
}

}  // namespace

int qp_finest_level(const Region& r) {
  switch (r.kind) {
    case Region::Kind::Ball:
    case Region::Kind::Shell:
      return 0;
    case Region::Kind::CosetUnion:
      return r.level;
    case Region::Kind::Complement:
    case Region::Kind::Union:
    case Region::Kind::Intersection: {
      int lvl = -(1 << 20);
      for (const Region& k : r.kids) lvl = std::max(lvl, qp_finest_level(k));
      return lvl;
    }
    default:
      return -(1 << 20);
  }
}

std::vector<bigint> qp_decompose(const GroupCtx& ctx, const Region& r,
                                 int level) {
  require(level >= -ctx.qp_vmax, "domain", "coset level below -vmax");
  CoSet s = qp_eval(ctx, r, level);
  require(!s.co, "uncertified", "qp2 region has infinite measure");
  return {s.ids.begin(), s.ids.end()};
}

// --- coprod decomposition ---------------------------------------------------

namespace {

struct CoIv {
  bool co = false;  // true: R minus s
  IvSet s;
};

struct CoprodSet {
  bool other_full = false;  // value at masks absent from `per`
  std::map<u64, CoIv> per;
};

CoIv coiv_union(const CoIv& a, const CoIv& b) {
  if (!a.co && !b.co) return {false, iv_union(a.s, b.s)};
  if (a.co && !b.co) return {true, iv_diff(a.s, b.s)};
  if (!a.co && b.co) return {true, iv_diff(b.s, a.s)};
  return {true, iv_intersect(a.s, b.s)};
}

CoIv coiv_intersect(const CoIv& a, const CoIv& b) {
  if (!a.co && !b.co) return {false, iv_intersect(a.s, b.s)};
  if (a.co && !b.co) return {false, iv_diff(b.s, a.s)};
  if (!a.co && b.co) return {false, iv_diff(a.s, b.s)};
  return {true, iv_union(a.s, b.s)};
}

CoprodSet cs_combine(const CoprodSet& a, const CoprodSet& b,
                     CoIv (*op)(const CoIv&, const CoIv&)) {
  CoprodSet out;
  CoIv da{a.other_full, {}}, db{b.other_full, {}};
  out.other_full = op(da, db).co;
  std::set<u64> keys;
  for (const auto& [k, v] : a.per) keys.insert(k);
  for (const auto& [k, v] : b.per) keys.insert(k);
  for (u64 k : keys) {
    auto ia = a.per.find(k);
    auto ib = b.per.find(k);
    out.per[k] = op(ia == a.per.end() ? da : ia->second,
                    ib == b.per.end() ? db : ib->second);
  }
  return out;
}

CoprodSet coprod_eval(const GroupCtx& ctx, const Region& r) {
  switch (r.kind) {
    case Region::Kind::Empty:
      return {};
    case Region::Kind::All: {
      CoprodSet s;
      s.other_full = true;
      return s;
    }
    case Region::Kind::Ball: {
      CoprodSet s;
      s.per[r.center.mask] = {
          false, IvSet::of(r.center.x - Dyadic(r.rb), r.center.x + Dyadic(r.rb))};
      return s;
    }
    case Region::Kind::Shell: {
      CoprodSet s;
      IvSet left = IvSet::of(r.center.x - Dyadic(r.rb), r.center.x - Dyadic(r.ra));
      IvSet right = IvSet::of(r.center.x + Dyadic(r.ra), r.center.x + Dyadic(r.rb));
      s.per[r.center.mask] = {false, iv_union(left, right)};
      return s;
    }
    case Region::Kind::Box: {
      require(r.lo.mask == r.hi.mask, "domain",
              "coprod box corners must share a coset");
      CoprodSet s;
      s.per[r.lo.mask] = {false, IvSet::of(r.lo.x, r.hi.x)};
      return s;
    }
    case Region::Kind::CosetUnion: {
      CoprodSet s;
      for (const GroupPoint& g : r.reps) s.per[g.mask] = {true, {}};
      return s;
    }
    case Region::Kind::Complement: {
      CoprodSet s = coprod_eval(ctx, r.kids[0]);
      s.other_full = !s.other_full;
      for (auto& [k, v] : s.per) v.co = !v.co;
      return s;
    }
    case Region::Kind::Union: {
      CoprodSet acc;
      for (const Region& k : r.kids)
        acc = cs_combine(acc, coprod_eval(ctx, k), coiv_union);
      return acc;
    }
    case Region::Kind::Intersection: {
      CoprodSet acc;
      acc.other_full = true;
      for (const Region& k : r.kids)
        acc = cs_combine(acc, coprod_eval(ctx, k), coiv_intersect);
      return acc;
    }
  }
  fail("backend", "bad region kind");
}

}  // namespace

std::map<u64, IvSet> coprod_decompose(const GroupCtx& ctx, const Region& r) {
  CoprodSet s = coprod_eval(ctx, r);
  require(!s.other_full, "uncertified", "coprod region has infinite measure");
  std::map<u64, IvSet> out;
  for (auto& [k, v] : s.per) {
    require(!v.co, "uncertified", "coprod region has infinite measure");
    if (!v.s.iv.empty()) out[k] = std::move(v.s);
  }
  return out;
}

// --- bounding boxes ----------------------------------------------------------

namespace {

std::optional<Box2> bb_of(const GroupCtx& ctx, const Region& r) {
  switch (r.kind) {
    case Region::Kind::Empty:
      return Box2{Dyadic(), Dyadic(), Dyadic(), Dyadic()};
    case Region::Kind::All:
      return std::nullopt;
    case Region::Kind::Ball:
    case Region::Kind::Shell: {
      if (r.center.backend == Backend::affine)
        fail("backend", "word balls undefined on the affine backend");
      Dyadic rad{r.rb};
      return Box2{r.center.x - rad, r.center.x + rad, r.center.y - rad,
                  r.center.y + rad};
    }
    case Region::Kind::Box:
      return Box2{r.lo.x, r.hi.x, r.lo.y, r.hi.y};
    case Region::Kind::CosetUnion:
      return std::nullopt;  // full cosets are unbounded in the real factor
    case Region::Kind::Complement:
      return std::nullopt;
    case Region::Kind::Union: {
      std::optional<Box2> acc;
      for (const Region& k : r.kids) {
        std::optional<Box2> b = bb_of(ctx, k);
        if (!b) return std::nullopt;
        if (!acc) {
          acc = b;
        } else {
          acc->x0 = std::min(acc->x0, b->x0);
          acc->x1 = std::max(acc->x1, b->x1);
          acc->y0 = std::min(acc->y0, b->y0);
          acc->y1 = std::max(acc->y1, b->y1);
        }
      }
      return acc ? acc : std::optional<Box2>(Box2{Dyadic(), Dyadic(), Dyadic(),
                                                  Dyadic()});
    }
    case Region::Kind::Intersection: {
      std::optional<Box2> acc;
      for (const Region& k : r.kids) {
        std::optional<Box2> b = bb_of(ctx, k);
        if (!b) continue;
        if (!acc) {
          acc = b;
        } else {
          acc->x0 = std::max(acc->x0, b->x0);
          acc->x1 = std::min(acc->x1, b->x1);
          acc->y0 = std::max(acc->y0, b->y0);
          acc->y1 = std::min(acc->y1, b->y1);
        }
      }
      return acc;
    }
  }
  fail("backend", "bad region kind");
}

}  // namespace

Box2 bounding_box(const GroupCtx& ctx, const Region& r) {
  std::optional<Box2> b = bb_of(ctx, r);
  require(b.has_value(), "uncertified", "region has no finite bounding box");
  if (b->x1 < b->x0) b->x1 = b->x0;
  if (b->y1 < b->y0) b->y1 = b->y0;
  return *b;
}

// --- measure ------------------------------------------------------------------

Mp measure_mp(const Measure& m, mpfr_prec_t prec, mpfr_rnd_t rnd) {
  require(m.pi_mult.sign() >= 0 && m.rat.sign() >= 0, "domain",
          "measure_mp expects a nonnegative measure");
  mpfr_prec_t wide = prec + 16;
  mpfr_prec_t fit = wide;
  if (!m.rat.is_zero()) {
    bigint a = abs(m.rat.mant());
    fit = std::max<mpfr_prec_t>(fit, static_cast<mpfr_prec_t>(msb(a) + 2));
  }
  if (!m.pi_mult.is_zero()) {
    bigint a = abs(m.pi_mult);
    fit = std::max<mpfr_prec_t>(fit, static_cast<mpfr_prec_t>(msb(a) + 2));
  }
  Mp rat = Mp::exact(m.rat, fit);
  Mp mult = Mp::exact(Dyadic(m.pi_mult, 0), fit);
  Mp pi = Mp::pi(wide, rnd);
  Mp t = Mp::mul(pi, mult, wide, rnd);
  return Mp::add(t, rat, prec, rnd);
}

namespace {

Dyadic box_area(const Box2& b) {
  Dyadic w = b.x1 - b.x0;
  Dyadic h = b.y1 - b.y0;
  if (w.sign() <= 0 || h.sign() <= 0) return Dyadic();
  return w * h;
}

struct EnclosingDisc {
  GroupPoint center;
  i64 inner;  // open inner radius (shell hole), 0 for balls
  i64 outer;
};

// Outer disc (and inner hole for shells) of a euclid2 primitive, if it is
// one of Ball/Shell/Box; boxes are wrapped in a disc around their center.
std::optional<EnclosingDisc> enclosing_disc(const Region& r) {
  switch (r.kind) {
    case Region::Kind::Ball:
      return EnclosingDisc{r.center, 0, r.rb};
    case Region::Kind::Shell:
      return EnclosingDisc{r.center, r.ra, r.rb};
    default:
      return std::nullopt;
  }
}

bool certified_null_overlap(const GroupCtx& ctx, const Region& a,
                            const Region& b) {
  std::optional<EnclosingDisc> da = enclosing_disc(a);
  std::optional<EnclosingDisc> db = enclosing_disc(b);
  if (da && db) {
    if (da->center == db->center) {
      // Concentric: integer radius ranges (inner, outer] must not overlap.
      return da->outer <= db->inner || db->outer <= da->inner;
    }
    DyadicSq d = dist_sq(da->center, db->center);
    // Separated outer discs.
    if (d.cmp_int_sq(da->outer + db->outer) >= 0) return true;
    // One outer disc inside the other's hole.
    if (da->inner >= db->outer + word_distance(ctx, da->center, db->center))
      return true;
    if (db->inner >= da->outer + word_distance(ctx, da->center, db->center))
      return true;
    return false;
  }
  if (a.kind == Region::Kind::Box && b.kind == Region::Kind::Box) {
    return a.hi.x <= b.lo.x || b.hi.x <= a.lo.x || a.hi.y <= b.lo.y ||
           b.hi.y <= a.lo.y;
  }
  const Region* box = a.kind == Region::Kind::Box ? &a : &b;
  const Region* disc_r = a.kind == Region::Kind::Box ? &b : &a;
  std::optional<EnclosingDisc> d = enclosing_disc(*disc_r);
  if (box->kind == Region::Kind::Box && d) {
    Box2 bx{box->lo.x, box->hi.x, box->lo.y, box->hi.y};
    if (box_min_dist_sq(bx, d->center).cmp_int_sq(d->outer) > 0) return true;
    if (d->inner > 0 &&
        box_max_dist_sq(bx, d->center).cmp_int_sq(d->inner) <= 0)
      return true;
  }
  return false;
}

bool flatten_union(const Region& r, std::vector<const Region*>& leaves) {
  if (r.kind == Region::Kind::Union) {
    for (const Region& k : r.kids)
      if (!flatten_union(k, leaves)) return false;
    return true;
  }
  if (r.kind == Region::Kind::Ball || r.kind == Region::Kind::Shell ||
      r.kind == Region::Kind::Box || r.kind == Region::Kind::Empty) {
    leaves.push_back(&r);
    return true;
  }
  return false;
}

std::optional<Measure> euclid_exact_measure(const GroupCtx& ctx,
                                            const Region& r) {
  switch (r.kind) {
    case Region::Kind::Empty:
      return Measure{};
    case Region::Kind::Ball: {
      Measure m;
      m.pi_mult = bigint(r.rb) * r.rb;
      return m;
    }
    case Region::Kind::Shell: {
      Measure m;
      m.pi_mult = bigint(r.rb) * r.rb - bigint(r.ra) * r.ra;
      return m;
    }
    case Region::Kind::Box: {
      Measure m;
      m.rat = box_area(Box2{r.lo.x, r.hi.x, r.lo.y, r.hi.y});
      return m;
    }
    case Region::Kind::Union: {
      std::vector<const Region*> leaves;
      if (!flatten_union(r, leaves)) return std::nullopt;
      for (size_t i = 0; i < leaves.size(); ++i)
        for (size_t j = i + 1; j < leaves.size(); ++j) {
          if (leaves[i]->kind == Region::Kind::Empty ||
              leaves[j]->kind == Region::Kind::Empty)
            continue;
          if (!certified_null_overlap(ctx, *leaves[i], *leaves[j]))
            return std::nullopt;
        }
      Measure m;
      for (const Region* leaf : leaves) {
        std::optional<Measure> lm = euclid_exact_measure(ctx, *leaf);
        if (!lm) return std::nullopt;
        m += *lm;
      }
      return m;
    }
    default:
      return std::nullopt;
  }
}

MpIv affine_box_iv(const Region& r, mpfr_prec_t p) {
  require(r.lo.x.sign() > 0 && r.hi.x.sign() > 0, "domain",
          "affine box must have positive scale range");
  Mp a1 = Mp::exact(r.lo.x, p);
  Mp a2 = Mp::exact(r.hi.x, p);
  Mp one = Mp::from_int(1, p);
  // (1/a1 - 1/a2)(b2 - b1), bracketed by directed rounding.
  Mp lo = Mp::mul(Mp::sub(Mp::div(one, a1, p, MPFR_RNDD),
                          Mp::div(one, a2, p, MPFR_RNDU), p, MPFR_RNDD),
                  Mp::exact(r.hi.y - r.lo.y, p), p, MPFR_RNDD);
  Mp hi = Mp::mul(Mp::sub(Mp::div(one, a1, p, MPFR_RNDU),
                          Mp::div(one, a2, p, MPFR_RNDD), p, MPFR_RNDU),
                  Mp::exact(r.hi.y - r.lo.y, p), p, MPFR_RNDU);
  return MpIv::of(std::move(lo), std::move(hi));
}

Measure affine_box_measure(const Region& r) {
  MpIv iv = affine_box_iv(r, 192);
  Dyadic dlo = iv.lo.to_dyadic();
  Dyadic dhi = iv.hi.to_dyadic();
  if (dlo.sign() < 0) dlo = Dyadic();
  Measure m;
  m.rat = (dlo + dhi).ldexp(-1);
  m.err = (dhi - dlo).ldexp(-1);
  return m;
}

Measure affine_measure(const GroupCtx& ctx, const Region& r) {
  switch (r.kind) {
    case Region::Kind::Empty:
      return Measure{};
    case Region::Kind::Box:
      return affine_box_measure(r);
    case Region::Kind::Union: {
      // Disjointness via interval logic on either coordinate.
      for (size_t i = 0; i < r.kids.size(); ++i)
        for (size_t j = i + 1; j < r.kids.size(); ++j) {
          const Region& a = r.kids[i];
          const Region& b = r.kids[j];
          require(a.kind == Region::Kind::Box && b.kind == Region::Kind::Box,
                  "uncertified", "affine measure supports box unions only");
          bool dis = a.hi.x <= b.lo.x || b.hi.x <= a.lo.x ||
                     a.hi.y <= b.lo.y || b.hi.y <= a.lo.y;
          require(dis, "uncertified",
                  "affine union measure needs disjoint boxes");
        }
      Measure m;
      for (const Region& k : r.kids) m += affine_measure(ctx, k);
      return m;
    }
    default:
      fail("uncertified", "affine measure supports boxes and disjoint unions");
  }
}

}  // namespace

Measure haar_measure(const GroupCtx& ctx, const Region& r, int cert_depth) {
  switch (ctx.backend) {
    case Backend::qp2: {
      int lvl = qp_finest_level(r);
      if (lvl < -ctx.qp_vmax) lvl = 0;  // no coset-bearing leaves
      std::vector<bigint> ids = qp_decompose(ctx, r, lvl);
      Measure m;
      m.rat = Dyadic(bigint(ids.size()), -lvl);
      return m;
    }
    case Backend::coprod: {
      std::map<u64, IvSet> d = coprod_decompose(ctx, r);
      Measure m;
      for (const auto& [mask, s] : d) m.rat += s.length();
      return m;
    }
    case Backend::affine:
      return affine_measure(ctx, r);
    case Backend::euclid2: {
      if (std::optional<Measure> m = euclid_exact_measure(ctx, r)) return *m;
      Box2 hull = bounding_box(ctx, r);
      MeasureBounds b = certify_measure(ctx, r, hull, cert_depth);
      Measure m;
      m.rat = (b.lo + b.hi).ldexp(-1);
      m.err = (b.hi - b.lo).ldexp(-1);
      return m;
    }
  }
  fail("backend", "bad backend enum");
}

// --- uniform sampling -----------------------------------------------------------

namespace {

GroupPoint sample_euclid(const GroupCtx& ctx, const Region& r, Rng& rng) {
  Box2 bb = bounding_box(ctx, r);
  Dyadic w = bb.x1 - bb.x0;
  Dyadic h = bb.y1 - bb.y0;
  require(w.sign() > 0 && h.sign() > 0, "degenerate",
          "region bounding box has zero area");
  for (int iter = 0; iter < (1 << 22); ++iter) {
    Dyadic x = bb.x0 + w * rng.next_bits(ctx.wbits).value();
    Dyadic y = bb.y0 + h * rng.next_bits(ctx.wbits).value();
    GroupPoint p = make_euclid(x, y);
    if (region_contains(ctx, r, p)) return p;
  }
  fail("degenerate", "rejection sampling failed; region measure too small");
}

GroupPoint sample_qp2(const GroupCtx& ctx, const Region& r, Rng& rng) {
  int lvl = qp_finest_level(r);
  if (lvl < -ctx.qp_vmax) lvl = 0;
  std::vector<bigint> ids = qp_decompose(ctx, r, lvl);
  require(!ids.empty(), "degenerate", "cannot sample an empty qp2 region");
  bigint idx = rng.next_below(bigint(ids.size()));
  const bigint& id = ids[idx.convert_to<size_t>()];
  i64 digits = static_cast<i64>(ctx.wbits) - lvl + 1;
  bigint high = rng.next_bits(digits).num();
  return make_qp2(ctx, id + (high << static_cast<unsigned>(ctx.qp_vmax + lvl)));
}

GroupPoint sample_coprod(const GroupCtx& ctx, const Region& r, Rng& rng) {
  std::map<u64, IvSet> d = coprod_decompose(ctx, r);
  struct Piece {
    u64 mask;
    Dyadic a, len;
  };
  std::vector<Piece> pieces;
  i64 emin = 0;
  for (const auto& [mask, s] : d)
    for (const auto& [a, b] : s.iv) {
      Dyadic len = b - a;
      pieces.push_back({mask, a, len});
      emin = std::min(emin, len.exp());
    }
  require(!pieces.empty(), "degenerate", "cannot sample an empty region");
  std::vector<bigint> weights;
  bigint total = 0;
  for (const Piece& p : pieces) {
    bigint w = p.len.mant() << static_cast<unsigned>(p.len.exp() - emin);
    weights.push_back(w);
    total += w;
  }
  for (int iter = 0; iter < 64; ++iter) {
    bigint pick = rng.next_below(total);
    size_t s = 0;
    bigint acc = 0;
    while (acc + weights[s] <= pick) acc += weights[s++];
    bigint rem = pick - acc;
    bigint fine = rng.next_bits(ctx.wbits).num();
    Dyadic off((rem << static_cast<unsigned>(ctx.wbits)) | fine,
               emin - ctx.wbits);
    GroupPoint p = make_coprod(pieces[s].mask, pieces[s].a + off);
    // Interval decompositions agree with the region up to measure-zero
    // endpoint conventions; the exact membership test settles those.
    if (region_contains(ctx, r, p)) return p;
  }
  fail("degenerate", "rejection sampling failed on coprod region");
}

GroupPoint sample_affine(const GroupCtx& ctx, const Region& r, Rng& rng) {
  require(r.kind == Region::Kind::Box, "backend",
          "affine sampling supports boxes only");
  Dyadic u1 = rng.next_bits(ctx.wbits).value();
  Dyadic u2 = rng.next_bits(ctx.wbits).value();
  Dyadic b = r.lo.y + (r.hi.y - r.lo.y) * u2;
  mpfr_prec_t p = 192;
  Mp one = Mp::from_int(1, p);
  Mp c1 = Mp::div(one, Mp::exact(r.lo.x, p), p, MPFR_RNDN);
  Mp c2 = Mp::div(one, Mp::exact(r.hi.x, p), p, MPFR_RNDN);
  // Inverse CDF of the a-marginal under left Haar a^-2 da.
  Mp t = Mp::sub(c1, Mp::mul(Mp::exact(u1, p), Mp::sub(c1, c2, p, MPFR_RNDN),
                             p, MPFR_RNDN),
                 p, MPFR_RNDN);
  Mp a = Mp::div(one, t, p, MPFR_RNDN);
  Dyadic aq(a.to_dyadic().ldexp(ctx.wbits).floor(), -ctx.wbits);
  if (aq < r.lo.x) aq = r.lo.x;
  if (!(aq < r.hi.x)) aq = r.hi.x - Dyadic(1).ldexp(-ctx.wbits);
  return make_affine(aq, b);
}

}  // namespace

GroupPoint sample_uniform(const GroupCtx& ctx, const Region& r, Rng& rng) {
  Measure m = haar_measure(ctx, r);
  require(!(m.pi_mult.is_zero() && (m.rat + m.err).is_zero()), "degenerate",
          "cannot sample a measure-zero region");
  switch (ctx.backend) {
    case Backend::euclid2: return sample_euclid(ctx, r, rng);
    case Backend::qp2: return sample_qp2(ctx, r, rng);
    case Backend::coprod: return sample_coprod(ctx, r, rng);
    case Backend::affine: return sample_affine(ctx, r, rng);
  }
  fail("backend", "bad backend enum");
}

MpIv measure_iv(const GroupCtx& ctx, const Region& r, mpfr_prec_t prec) {
  if (ctx.backend == Backend::affine && r.kind == Region::Kind::Box)
    return affine_box_iv(r, prec);
  Measure m = haar_measure(ctx, r);
  Dyadic lo_rat = m.rat - m.err;
  if (lo_rat.sign() < 0) lo_rat = Dyadic();
  return MpIv::of(measure_mp(Measure{lo_rat, m.pi_mult, Dyadic()}, prec,
                             MPFR_RNDD),
                  measure_mp(Measure{m.rat + m.err, m.pi_mult, Dyadic()}, prec,
                             MPFR_RNDU));
}

// --- text form --------------------------------------------------------------

namespace {

void region_text_rec(const Region& r, std::string& out) {
  auto num = [&](i64 v) { out += ' ' + std::to_string(v); };
  switch (r.kind) {
    case Region::Kind::Empty:
      out += "[empty]";
      return;
    case Region::Kind::All:
      out += "[all]";
      return;
    case Region::Kind::Ball:
      out += "[ball " + point_to_text(r.center);
      num(r.rb);
      out += ']';
      return;
    case Region::Kind::Shell:
      out += "[shell " + point_to_text(r.center);
      num(r.ra);
      num(r.rb);
      out += ']';
      return;
    case Region::Kind::Box:
      out += "[box " + point_to_text(r.lo) + ' ' + point_to_text(r.hi) + ']';
      return;
    case Region::Kind::CosetUnion:
      out += "[cosets";
      num(r.level);
      for (const GroupPoint& g : r.reps) out += ' ' + point_to_text(g);
      out += ']';
      return;
    case Region::Kind::Complement:
      out += "[not ";
      region_text_rec(r.kids[0], out);
      out += ']';
      return;
    case Region::Kind::Union:
    case Region::Kind::Intersection:
      out += r.kind == Region::Kind::Union ? "[or" : "[and";
      for (const Region& k : r.kids) {
        out += ' ';
        region_text_rec(k, out);
      }
      out += ']';
      return;
  }
  fail("parse", "bad region kind");
}

struct RegionTokens {
  std::vector<std::string> toks;
  size_t at = 0;

  const std::string& peek() const {
    require(at < toks.size(), "parse", "truncated region expression");
    return toks[at];
  }
  std::string next() {
    require(at < toks.size(), "parse", "truncated region expression");
    return toks[at++];
  }
  i64 next_int() {
    std::string t = next();
    try {
      return std::stoll(t);
    } catch (const std::exception&) {
      fail("parse", "expected integer in region expression, got '" + t + "'");
    }
  }
};

Region region_parse(const GroupCtx& ctx, RegionTokens& ts) {
  require(ts.next() == "[", "parse", "region expression must open with [");
  std::string head = ts.next();
  Region out;
  if (head == "empty") {
    out = Region::empty();
  } else if (head == "all") {
    out = Region::all();
  } else if (head == "ball") {
    GroupPoint c = point_from_text(ctx, ts.next());
    i64 rb = ts.next_int();
    out = Region::ball(std::move(c), rb);
  } else if (head == "shell") {
    GroupPoint c = point_from_text(ctx, ts.next());
    i64 ra = ts.next_int();
    i64 rb = ts.next_int();
    out = Region::shell(std::move(c), ra, rb);
  } else if (head == "box") {
    GroupPoint lo = point_from_text(ctx, ts.next());
    GroupPoint hi = point_from_text(ctx, ts.next());
    out = Region::box(std::move(lo), std::move(hi));
  } else if (head == "cosets") {
    int level = static_cast<int>(ts.next_int());
    std::vector<GroupPoint> reps;
    while (ts.peek() != "]") reps.push_back(point_from_text(ctx, ts.next()));
    out = Region::coset_union(level, std::move(reps));
  } else if (head == "not") {
    out = Region::complement(region_parse(ctx, ts));
  } else if (head == "or" || head == "and") {
    std::vector<Region> kids;
    while (ts.peek() == "[") kids.push_back(region_parse(ctx, ts));
    out = head == "or" ? Region::join(std::move(kids))
                       : Region::meet(std::move(kids));
  } else {
    fail("parse", "unknown region head '" + head + "'");
  }
  require(ts.next() == "]", "parse", "region expression must close with ]");
  return out;
}

}  // namespace

std::string region_to_text(const Region& r) {
  std::string out;
  region_text_rec(r, out);
  return out;
}

Region region_from_text(const GroupCtx& ctx, const std::string& text) {
  RegionTokens ts;
  std::string cur;
  for (char c : text) {
    if (c == '[' || c == ']') {
      if (!cur.empty()) ts.toks.push_back(std::exchange(cur, {}));
      ts.toks.push_back(std::string(1, c));
    } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) ts.toks.push_back(std::exchange(cur, {}));
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) ts.toks.push_back(std::move(cur));
  Region r = region_parse(ctx, ts);
  require(ts.at == ts.toks.size(), "parse",
          "trailing tokens after region expression");
  return r;
}

}  // namespace pmap
