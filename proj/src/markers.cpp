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

#include "poissonmaps/markers.hpp"

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

namespace pmap {

namespace {

int cyc(int k) {
  k &= kQpIndex - 1;
  return std::min(k, kQpIndex - k);
}

// d_S(a, b) <= r, exact; false across H-cosets (qp2) or masks (coprod).
bool word_leq(const GroupCtx& ctx, const GroupPoint& a, const GroupPoint& b,
              i64 r) {
  switch (ctx.backend) {
    case Backend::euclid2:
      return dist_sq(a, b).cmp_int_sq(r) <= 0;
    case Backend::qp2: {
      std::optional<int> k = qp_cyclic_offset(ctx, a, b);
      return k && cyc(*k) <= r;
    }
    case Backend::coprod: {
      if (a.mask != b.mask) return false;
      Dyadic d = a.x - b.x;
      if (d.sign() < 0) d = -d;
      return d <= Dyadic(r);
    }
    default:
      fail("backend", "word metric undefined on this backend");
  }
}

// The intersection of radius-kCoreRadius balls over the class: exact on
// qp2/coprod, a certified superset (balls around witnesses) on euclid2.
Region core_region(const GroupCtx& ctx, const SeedClassCover& cls) {
  switch (ctx.backend) {
    case Backend::euclid2: {
      require(!cls.witnesses.empty(), "internal",
              "euclid2 class without a witness");
      std::vector<Region> balls;
      for (const GroupPoint& w : cls.witnesses)
        balls.push_back(Region::ball(w, kCoreRadius));
      if (balls.size() == 1) return std::move(balls[0]);
      return Region::meet(std::move(balls));
    }
    case Backend::qp2: {
      unsigned shift = static_cast<unsigned>(ctx.qp_vmax - kQpHLog);
      require(!cls.cosets.empty(), "internal", "qp2 class without cosets");
      bigint base = cls.cosets.front() % (bigint(1) << shift);
      std::vector<int> ks;
      for (const bigint& c : cls.cosets)
        ks.push_back(((c >> shift) & bigint(kQpIndex - 1)).convert_to<int>());
      std::vector<GroupPoint> reps;
      for (int k = 0; k < kQpIndex; ++k) {
        bool in = true;
        for (int kc : ks)
          if (cyc(k - kc) > kCoreRadius) {
            in = false;
            break;
          }
        if (in) reps.push_back(make_qp2(ctx, base + (bigint(k) << shift)));
      }
      return Region::coset_union(0, std::move(reps));
    }
    case Backend::coprod: {
      require(!cls.band.iv.empty(), "internal", "coprod class without a band");
      GroupPoint lo = make_coprod(cls.mask, cls.band.iv.front().first);
      GroupPoint hi = make_coprod(cls.mask, cls.band.iv.back().second);
      std::vector<Region> pair;
      pair.push_back(Region::ball(hi, kCoreRadius));
      pair.push_back(Region::ball(lo, kCoreRadius));
      return Region::meet(std::move(pair));
    }
    default:
      fail("backend", "marker detection undefined on this backend");
  }
}

Region joined(std::vector<Region> parts) {
  if (parts.empty()) return Region::empty();
  if (parts.size() == 1) return std::move(parts[0]);
  return Region::join(std::move(parts));
}

}  // namespace

MarkerCatalog detect(const GroupCtx& ctx, const PointConfiguration& c,
                     const MarkerGeometry& geom, int depth) {
  require(c.backend == ctx.backend, "backend",
          "configuration backend mismatch");
  MarkerCatalog out;
  out.backend = ctx.backend;
  out.geom = geom;
  out.window = c.window;
  SeedScan scan = seed_scan(ctx, c.points, geom, c.window, depth);
  std::vector<Region> bumper, fstar, f2star;
  for (size_t i = 0; i < scan.classes.size(); ++i) {
    std::vector<GroupPoint> members;
    int undecided = 0;
    for (const GroupPoint& p : c.points) {
      // The core sits inside B(witness, kCoreRadius), so points beyond that
      // of one witness need no certification work.
      if (ctx.backend == Backend::euclid2 &&
          dist_sq(p, scan.classes[i].witnesses.front())
                  .cmp_int_sq(kCoreRadius) > 0)
        continue;
      int m = core_membership(ctx, scan, i, geom, p, depth);
      if (m > 0) members.push_back(p);
      if (m == 0) ++undecided;
    }
    // An undecided point is tolerable only once non-uniqueness is already
    // settled; otherwise it could flip the landmark verdict.
    require(members.size() >= 2 || undecided == 0, "uncertified",
            "core membership undecided at the refinement cap");
    for (size_t a = 0; a < members.size(); ++a)
      for (size_t b = a + 1; b < members.size(); ++b)
        require(word_leq(ctx, members[a], members[b], kCoreRadius), "internal",
                "core diameter exceeds the core radius");
    MarkerClass mc;
    mc.cover = scan.classes[i];  // after refinement by the membership queries
    mc.core = core_region(ctx, mc.cover);
    if (members.size() == 1) {
      const GroupPoint& l = members.front();
      mc.landmark = l;
      mc.fitted = Region::shell(l, geom.f1 - 1, geom.f2);
      for (const GroupPoint& p : c.points)
        if (in_word_shell(ctx, l, p, geom.f1 - 1, geom.f2)) ++mc.fitted_count;
      mc.harvestable = mc.fitted_count == 1;
      mc.two_shell = mc.fitted_count == 2;
      bumper.push_back(Region::shell(l, 4, geom.f2 + 1));
      if (mc.harvestable) fstar.push_back(mc.fitted);
      if (mc.two_shell) f2star.push_back(mc.fitted);
    }
    out.classes.push_back(std::move(mc));
  }
  out.bumper_union = joined(std::move(bumper));
  out.f_star = joined(std::move(fstar));
  out.f_2star = joined(std::move(f2star));
  return out;
}

SeparationReport verify_separation(const GroupCtx& ctx,
                                   const MarkerCatalog& catalog) {
  SeparationReport rep;
  auto note = [&rep](std::string s) {
    rep.ok = false;
    rep.breaches.push_back(std::move(s));
  };
  i64 bound = catalog.geom.d2 + catalog.geom.e2 - 2;
  for (size_t i = 0; i < catalog.classes.size(); ++i) {
    const SeedClassCover& a = catalog.classes[i].cover;
    if (!class_diameter_below(ctx, a, kClassSep))
      note("class " + std::to_string(i) +
           ": diameter not certified below " + std::to_string(kClassSep));
    for (size_t j = i + 1; j < catalog.classes.size(); ++j) {
      const SeedClassCover& b = catalog.classes[j].cover;
      std::string pair =
          "classes " + std::to_string(i) + "," + std::to_string(j);
      if (ctx.backend == Backend::qp2 && !a.cosets.empty() &&
          !b.cosets.empty()) {
        unsigned shift = static_cast<unsigned>(ctx.qp_vmax - kQpHLog);
        bigint mod_h = bigint(1) << shift;
        if (a.cosets.front() % mod_h == b.cosets.front() % mod_h) {
          note(pair + ": distinct classes share an H-coset");
          continue;
        }
      }
      if (!classes_beyond(ctx, a, b, bound))
        note(pair + ": not certified beyond word distance " +
             std::to_string(bound));
    }
  }
  return rep;
}

bool bumper_stability_check(const GroupCtx& ctx, const PointConfiguration& c,
                            const PointConfiguration& c2,
                            const MarkerCatalog& catalog, int depth) {
  require(c.backend == ctx.backend && c2.backend == ctx.backend, "backend",
          "configuration backend mismatch");
  require(region_to_text(c.window) == region_to_text(c2.window), "domain",
          "stability check needs a shared carrier");
  auto inside_bumper = [&](const GroupPoint& p) {
    require(region_contains(ctx, catalog.bumper_union, p), "domain",
            "configurations differ outside the bumper union");
  };
  size_t i = 0, j = 0;
  while (i < c.points.size() || j < c2.points.size()) {
    if (i == c.points.size()) {
      inside_bumper(c2.points[j++]);
    } else if (j == c2.points.size()) {
      inside_bumper(c.points[i++]);
    } else {
      int d = cmp(c.points[i], c2.points[j]);
      if (d == 0) {
        ++i;
        ++j;
      } else if (d < 0) {
        inside_bumper(c.points[i++]);
      } else {
        inside_bumper(c2.points[j++]);
      }
    }
  }
  MarkerCatalog redo = detect(ctx, c2, catalog.geom, depth);
  std::vector<GroupPoint> la, lb;
  for (const MarkerClass& m : catalog.classes)
    if (m.landmark) la.push_back(*m.landmark);
  for (const MarkerClass& m : redo.classes)
    if (m.landmark) lb.push_back(*m.landmark);
  auto by_cmp = [](const GroupPoint& a, const GroupPoint& b) {
    return cmp(a, b) < 0;
  };
  std::sort(la.begin(), la.end(), by_cmp);
  std::sort(lb.begin(), lb.end(), by_cmp);
  if (la.size() != lb.size()) return false;
  for (size_t k = 0; k < la.size(); ++k)
    if (cmp(la[k], lb[k]) != 0) return false;
  return true;
}

std::string catalog_to_text(const MarkerCatalog& catalog) {
  std::string out = "catalog backend=";
  out += backend_name(catalog.backend);
  out += " classes=" + std::to_string(catalog.classes.size()) + "\n";
  for (size_t i = 0; i < catalog.classes.size(); ++i) {
    const MarkerClass& m = catalog.classes[i];
    out += "class " + std::to_string(i) + " landmark=" +
           (m.landmark ? point_to_text(*m.landmark) : std::string("none")) +
           " fitted=" + std::to_string(m.fitted_count) + " harvestable=" +
           (m.harvestable ? "1" : "0") + " two_shell=" +
           (m.two_shell ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace pmap
