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

#include "poissonmaps/pointproc.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <utility>

#include "poissonmaps/gridcert.hpp"
#include "poissonmaps/seeds.hpp"

namespace pmap {

PointConfiguration make_config(const GroupCtx& ctx,
                               std::vector<GroupPoint> points, Region window,
                               Dyadic intensity_hint) {
  for (const GroupPoint& p : points)
    require(p.backend == ctx.backend, "backend",
            "configuration point backend mismatch");
  std::sort(points.begin(), points.end(),
            [](const GroupPoint& a, const GroupPoint& b) {
              return cmp(a, b) < 0;
            });
  for (size_t i = 1; i < points.size(); ++i)
    require(cmp(points[i - 1], points[i]) != 0, "coincident",
            "coincident points in configuration: " +
                point_to_text(points[i]));
  for (const GroupPoint& p : points)
    require(region_contains(ctx, window, p), "domain",
            "point outside the carrier window: " + point_to_text(p));
  PointConfiguration c;
  c.backend = ctx.backend;
  c.points = std::move(points);
  c.window = std::move(window);
  c.intensity_hint = std::move(intensity_hint);
  return c;
}

std::string config_to_text(const PointConfiguration& c) {
  std::string out = "pmap-config v1\n";
  out += "backend ";
  out += backend_name(c.backend);
  out += "\nwindow " + region_to_text(c.window);
  out += "\nintensity " + c.intensity_hint.to_text();
  out += "\npoints " + std::to_string(c.points.size()) + "\n";
  for (const GroupPoint& p : c.points) out += point_to_text(p) + "\n";
  return out;
}

PointConfiguration config_from_text(const GroupCtx& ctx,
                                    const std::string& text) {
  std::istringstream in(text);
  std::string line;
  auto next = [&](const char* what) -> const std::string& {
    require(static_cast<bool>(std::getline(in, line)), "parse",
            std::string("config text: missing ") + what);
    return line;
  };
  auto field = [&](const char* key) {
    const std::string& l = next(key);
    std::string prefix = std::string(key) + ' ';
    require(l.rfind(prefix, 0) == 0, "parse",
            std::string("config text: expected '") + key + "' line");
    return l.substr(prefix.size());
  };
  require(next("format tag") == "pmap-config v1", "parse",
          "config text: unknown format tag");
  require(backend_from_name(field("backend")) == ctx.backend, "backend",
          "config text: backend mismatch");
  Region window = region_from_text(ctx, field("window"));
  Dyadic intensity = Dyadic::from_text(field("intensity"));
  size_t n = std::stoull(field("points"));
  std::vector<GroupPoint> pts;
  pts.reserve(n);
  for (size_t i = 0; i < n; ++i)
    pts.push_back(point_from_text(ctx, next("point")));
  while (std::getline(in, line))
    require(line.empty(), "parse", "config text: trailing content");
  return make_config(ctx, std::move(pts), std::move(window),
                     std::move(intensity));
}

// --- Poisson sampling ---------------------------------------------------

u64 poisson_count(const std::function<MpIv(mpfr_prec_t)>& mean, Rng& rng) {
  // U in [un / 2^ub, (un + 1) / 2^ub]; fresh bits only narrow the bracket,
  // so one fixed uniform value is compared against every CDF refinement.
  bigint un = 0;
  i64 ub = 0;
  constexpr mpfr_prec_t kMaxPrec = 1 << 14;
  for (mpfr_prec_t prec = 96; prec <= kMaxPrec; prec *= 2) {
    MpIv m = mean(prec);
    require(m.lo.sign() >= 0, "domain", "poisson mean must be nonnegative");
    // F_k = e^-m * sum_{i<=k} m^i / i!, as a bracket.
    MpIv term = MpIv::exp_of(MpIv::neg(m, prec), prec);
    MpIv f = term;
    u64 k = 0;
    for (;;) {
      if (f.cmp(Dyadic(un + 1, -ub)) > 0) return k;  // U < F_k certainly
      if (f.cmp(Dyadic(un, -ub)) < 0) {
        // F_k < U certainly: advance the walk.
        ++k;
        require(k >> 40 == 0, "uncertified", "poisson count walk diverged");
        term = MpIv::div_ui(MpIv::mul_pos(term, m, prec),
                            static_cast<unsigned long>(k), prec);
        f = MpIv::add(f, term, prec);
        continue;
      }
      if (ub >= static_cast<i64>(prec)) break;  // CDF bracket is the blocker
      un = (un << 1) | static_cast<int>(rng.next_u64() >> 63);
      ++ub;
    }
  }
  fail("uncertified",
       "poisson count undecided at the precision cap; the mean bracket "
       "does not refine");
}

PointConfiguration sample_poisson(const GroupCtx& ctx, const Region& r,
                                  const Dyadic& alpha, Rng& rng) {
  require(alpha.sign() > 0, "domain", "poisson intensity must be positive");
  // Fail fast when the carrier only has a fixed-error certificate: the
  // count inversion below could never resolve against it.
  if (!(ctx.backend == Backend::affine && r.kind == Region::Kind::Box)) {
    Measure m = haar_measure(ctx, r);
    require(m.is_exact(), "uncertified",
            "poisson sampling needs an exact Haar measure for the carrier");
  }
  auto mean = [&](mpfr_prec_t prec) {
    return MpIv::mul_pos(MpIv::exact(alpha, prec), measure_iv(ctx, r, prec),
                         prec);
  };
  Rng base = rng.child(rng.next_u64());
  Rng cnt = base.child(streamtag::kCount);
  Rng loc = base.child(streamtag::kLocation);
  u64 n = poisson_count(mean, cnt);
  std::vector<GroupPoint> pts;
  pts.reserve(n);
  for (u64 i = 0; i < n; ++i) pts.push_back(sample_uniform(ctx, r, loc));
  return make_config(ctx, std::move(pts), r, alpha);
}

// --- configuration algebra ------------------------------------------------

PointConfiguration restrict_config(const GroupCtx& ctx,
                                   const PointConfiguration& c,
                                   const Region& r) {
  std::vector<GroupPoint> kept;
  for (const GroupPoint& p : c.points)
    if (region_contains(ctx, r, p)) kept.push_back(p);
  std::vector<Region> ks;
  ks.push_back(c.window);
  ks.push_back(r);
  return make_config(ctx, std::move(kept), Region::meet(std::move(ks)),
                     c.intensity_hint);
}

namespace {

bool region_same(const Region& a, const Region& b) {
  if (a.kind != b.kind || a.kids.size() != b.kids.size() ||
      a.reps.size() != b.reps.size())
    return false;
  switch (a.kind) {
    case Region::Kind::Ball:
    case Region::Kind::Shell:
      if (!(a.center == b.center) || a.ra != b.ra || a.rb != b.rb)
        return false;
      break;
    case Region::Kind::Box:
      if (!(a.lo == b.lo) || !(a.hi == b.hi)) return false;
      break;
    case Region::Kind::CosetUnion:
      if (a.level != b.level) return false;
      for (size_t i = 0; i < a.reps.size(); ++i)
        if (!(a.reps[i] == b.reps[i])) return false;
      break;
    default:
      break;
  }
  for (size_t i = 0; i < a.kids.size(); ++i)
    if (!region_same(a.kids[i], b.kids[i])) return false;
  return true;
}

void meet_factors(const Region& r, std::vector<const Region*>& out) {
  if (r.kind == Region::Kind::Intersection) {
    for (const Region& k : r.kids) meet_factors(k, out);
    return;
  }
  out.push_back(&r);
}

// X and Y are disjoint whenever one carries a meet factor and the other its
// syntactic complement. This is what makes restrict(c, A) / restrict(c, A^c)
// carriers certifiable even though they touch along the boundary of A.
bool complement_factor_disjoint(const Region& a, const Region& b) {
  std::vector<const Region*> fa, fb;
  meet_factors(a, fa);
  meet_factors(b, fb);
  for (const Region* f : fa)
    for (const Region* g : fb) {
      if (f->kind == Region::Kind::Complement &&
          region_same(f->kids[0], *g))
        return true;
      if (g->kind == Region::Kind::Complement &&
          region_same(g->kids[0], *f))
        return true;
    }
  return false;
}

std::optional<Box2> try_bounding_box(const GroupCtx& ctx, const Region& r) {
  try {
    return bounding_box(ctx, r);
  } catch (const Error& e) {
    if (e.kind() == "uncertified") return std::nullopt;
    throw;
  }
}

bool quad_disjoint(const GroupCtx& ctx, const Region& a, const Region& b,
                   const Box2& box, int depth) {
  if (classify_box(ctx, a, box) == Tri::Out) return true;
  if (classify_box(ctx, b, box) == Tri::Out) return true;
  if (depth <= 0) return false;
  Dyadic w = box.x1 - box.x0;
  Dyadic h = box.y1 - box.y0;
  if (w.is_zero() && h.is_zero()) return false;
  Box2 lo = box;
  Box2 hi = box;
  if (h < w) {
    Dyadic m = (box.x0 + box.x1).ldexp(-1);
    lo.x1 = m;
    hi.x0 = m;
  } else {
    Dyadic m = (box.y0 + box.y1).ldexp(-1);
    lo.y1 = m;
    hi.y0 = m;
  }
  return quad_disjoint(ctx, a, b, lo, depth - 1) &&
         quad_disjoint(ctx, a, b, hi, depth - 1);
}

}  // namespace

bool certify_disjoint(const GroupCtx& ctx, const Region& a, const Region& b,
                      int depth) {
  if (a.kind == Region::Kind::Empty || b.kind == Region::Kind::Empty)
    return true;
  if (complement_factor_disjoint(a, b)) return true;
  std::vector<Region> pair;
  pair.push_back(a);
  pair.push_back(b);
  Region both = Region::meet(std::move(pair));
  if (ctx.backend == Backend::qp2) {
    int lvl = std::max(qp_finest_level(a), qp_finest_level(b));
    lvl = std::max(lvl, -ctx.qp_vmax);
    try {
      return qp_decompose(ctx, both, lvl).empty();
    } catch (const Error& e) {
      if (e.kind() == "uncertified") return false;  // infinite, so nonempty
      throw;
    }
  }
  if (ctx.backend == Backend::coprod) {
    try {
      return coprod_decompose(ctx, both).empty();
    } catch (const Error& e) {
      if (e.kind() == "uncertified") return false;
      throw;
    }
  }
  bool word_pair = (a.kind == Region::Kind::Ball ||
                    a.kind == Region::Kind::Shell) &&
                   (b.kind == Region::Kind::Ball ||
                    b.kind == Region::Kind::Shell);
  if (word_pair && dist_sq(a.center, b.center).cmp_int_sq(a.rb + b.rb) > 0)
    return true;
  std::optional<Box2> ba = try_bounding_box(ctx, a);
  std::optional<Box2> bb = try_bounding_box(ctx, b);
  if (!ba && !bb) return false;
  Box2 hull;
  if (ba && bb) {
    hull.x0 = std::max(ba->x0, bb->x0);
    hull.x1 = std::min(ba->x1, bb->x1);
    hull.y0 = std::max(ba->y0, bb->y0);
    hull.y1 = std::min(ba->y1, bb->y1);
    if (hull.x1 < hull.x0 || hull.y1 < hull.y0) return true;
  } else {
    hull = ba ? *ba : *bb;
  }
  return quad_disjoint(ctx, a, b, hull, depth);
}

PointConfiguration superpose(const GroupCtx& ctx, const PointConfiguration& a,
                             const PointConfiguration& b, int cert_depth) {
  require(a.backend == ctx.backend && b.backend == ctx.backend, "backend",
          "superpose backend mismatch");
  require(certify_disjoint(ctx, a.window, b.window, cert_depth), "overlap",
          "superpose carriers are not certified disjoint");
  std::vector<GroupPoint> pts = a.points;
  pts.insert(pts.end(), b.points.begin(), b.points.end());
  std::vector<Region> ks;
  ks.push_back(a.window);
  ks.push_back(b.window);
  Dyadic intensity =
      a.intensity_hint == b.intensity_hint ? a.intensity_hint : Dyadic();
  return make_config(ctx, std::move(pts), Region::join(std::move(ks)),
                     std::move(intensity));
}

PointConfiguration act(const GroupCtx& ctx, const GroupPoint& g,
                       const PointConfiguration& c) {
  require(g.backend == ctx.backend && c.backend == ctx.backend, "backend",
          "act backend mismatch");
  std::vector<GroupPoint> pts;
  pts.reserve(c.points.size());
  for (const GroupPoint& p : c.points) pts.push_back(translate(ctx, g, p));
  return make_config(ctx, std::move(pts), translate_region(ctx, g, c.window),
                     c.intensity_hint);
}

// --- planted configurations -------------------------------------------------

int fitted_count(const PlantCenter& c) {
  switch (c.kind) {
    case PlantKind::harvestable:
      return 1;
    case PlantKind::two_shell:
      return 2;
    case PlantKind::k_shell:
      require(c.k >= 0, "domain", "k_shell fitted count must be nonnegative");
      return c.k;
  }
  fail("domain", "bad plant kind");
}

namespace {

// Word distance certifiably greater than `bound`; cross-coset pairs are at
// infinite distance.
bool separated_beyond(const GroupCtx& ctx, const GroupPoint& a,
                      const GroupPoint& b, i64 bound) {
  switch (ctx.backend) {
    case Backend::euclid2:
      return dist_sq(a, b).cmp_int_sq(bound) > 0;
    case Backend::qp2: {
      std::optional<int> k = qp_cyclic_offset(ctx, a, b);
      if (!k) return true;
      return std::min<i64>(*k, kQpIndex - *k) > bound;
    }
    case Backend::coprod: {
      if (a.mask != b.mask) return true;
      Dyadic d = b.x - a.x;
      if (d.sign() < 0) d = -d;
      return d > Dyadic(bound);
    }
    case Backend::affine:
      fail("backend", "plant undefined on the affine backend");
  }
  fail("backend", "bad backend enum");
}

struct CenterDraw {
  std::vector<GroupPoint> pts;
  GroupPoint landmark;
  u64 dense_tries = 0;
};

CenterDraw draw_center(const GroupCtx& ctx, const PlantSpec& spec,
                       const PlantCenter& c, Rng root) {
  const MarkerGeometry& g = spec.geom;
  CenterDraw out;
  // Dense shell: Poisson conditioned (by rejection) on certified covering.
  Region dense = Region::shell(c.g, g.d1, g.d2);
  Rng dr = root.child(streamtag::kMarkerDense);
  PointConfiguration draw;
  for (u64 t = 0;; ++t) {
    require(t < spec.max_dense_tries, "budget",
            "dense covering acceptance below the configured floor (" +
                std::to_string(t) + " rejected draws); raise alpha or "
                "max_dense_tries");
    Rng try_rng = dr.child(t);
    draw = sample_poisson(ctx, dense, spec.alpha, try_rng);
    ++out.dense_tries;
    if (dense_covered_at(ctx, c.g, g, draw.points, spec.cert_depth) == Tri::In)
      break;
  }
  out.pts = std::move(draw.points);
  // Landmark: the unique core point, uniform on B(g, 1). The rest of
  // B(g, 3) stays empty, so the class core holds exactly this point.
  Rng lr = root.child(streamtag::kMarkerCore);
  out.landmark = sample_uniform(ctx, Region::ball(c.g, 1), lr);
  out.pts.push_back(out.landmark);
  // Fitted shell around the landmark: exactly fitted_count uniform points.
  // The word shell {f1 <= d_S <= f2} is the half-open band (f1 - 1, f2].
  Rng fr = root.child(streamtag::kMarkerFitted);
  Region fitted = Region::shell(out.landmark, g.f1 - 1, g.f2);
  for (int i = 0; i < fitted_count(c); ++i)
    out.pts.push_back(sample_uniform(ctx, fitted, fr));
  // Inner ambient A(g, 3, d1): unconditioned Poisson away from the fitted
  // shell (conditioning on the fitted count is exactly "drop and replace").
  Rng ir = root.child(streamtag::kOutside);
  PointConfiguration inner = sample_poisson(
      ctx, Region::shell(c.g, kCoreRadius, g.d1), spec.alpha, ir);
  for (const GroupPoint& p : inner.points)
    if (!region_contains(ctx, fitted, p)) out.pts.push_back(p);
  return out;
}

// On the discrete qp2 lattice adjacent indices can clear both seed
// conditions while skipping one in between, splitting the marker into two
// classes; continuum covering rules that out on euclid2/coprod. Gate the
// zone draw on a local scan so every accepted center yields one class.
bool center_classes_ok(const GroupCtx& ctx, const PlantSpec& spec,
                       const PlantCenter& c, const CenterDraw& d) {
  if (ctx.backend != Backend::qp2) return true;
  // The scan window must be the whole H-coset of the center: word balls are
  // not scannable windows, and the coset is what the marker can reach anyway.
  SeedScan s = seed_scan(ctx, d.pts, spec.geom,
                         Region::coset_union(-kQpHLog, {c.g}), spec.cert_depth);
  if (s.classes.size() != 1) return false;
  return core_membership(ctx, s, 0, spec.geom, c.g, 4) == 1;
}

// A scan class is accounted to a center when it certifiably sits within the
// class separation bound of it. Planted classes live inside B(g, 1); stray
// ambient classes are far beyond e2 of every center.
bool class_near_center(const GroupCtx& ctx, SeedScan& scan, size_t cls,
                       const MarkerGeometry& geom, const GroupPoint& g) {
  const SeedClassCover& cover = scan.classes[cls];
  switch (ctx.backend) {
    case Backend::euclid2: {
      for (const GroupPoint& w : cover.witnesses)
        if (dist_sq(w, g).cmp_int_sq(kClassSep) <= 0) return true;
      return false;
    }
    case Backend::qp2:
      return core_membership(ctx, scan, cls, geom, g, 0) == 1;
    case Backend::coprod: {
      if (cover.mask != g.mask || cover.band.iv.empty()) return false;
      Dyadic slack{kClassSep};
      return cover.band.iv.front().first >= g.x - slack &&
             cover.band.iv.back().second <= g.x + slack;
    }
    default:
      fail("backend", "plant undefined on the affine backend");
  }
}

}  // namespace

PlantResult plant(const GroupCtx& ctx, const PlantSpec& spec,
                  const Region& window, Rng& rng) {
  require(spec.alpha.sign() > 0, "domain", "plant intensity must be positive");
  std::vector<std::string> errs = validate_marker_geometry(ctx, spec.geom);
  if (!errs.empty()) fail("domain", "plant geometry: " + errs.front());
  const MarkerGeometry& g = spec.geom;
  for (const PlantCenter& c : spec.centers) {
    require(c.g.backend == ctx.backend, "backend",
            "plant center backend mismatch");
    fitted_count(c);
    require(ball_in_region(ctx, window, c.g, g.e2 + 2), "domain",
            "plant center must sit e2 + 2 inside the window");
  }
  for (size_t i = 0; i < spec.centers.size(); ++i)
    for (size_t j = i + 1; j < spec.centers.size(); ++j)
      require(separated_beyond(ctx, spec.centers[i].g, spec.centers[j].g,
                               2 * g.e2 + 2),
              "domain", "plant centers closer than 2*e2 + 2");

  Rng base = rng.child(rng.next_u64());
  PlantResult out;

  std::vector<GroupPoint> fixed;
  for (size_t i = 0; i < spec.centers.size(); ++i) {
    Rng croot = base.child(i + 1);
    bool ok = false;
    for (u64 a = 0; a < spec.max_retries && !ok; ++a) {
      CenterDraw d = draw_center(ctx, spec, spec.centers[i], croot.child(a));
      out.dense_tries += d.dense_tries;
      if (!center_classes_ok(ctx, spec, spec.centers[i], d)) {
        ++out.center_resamples;
        continue;
      }
      fixed.insert(fixed.end(), d.pts.begin(), d.pts.end());
      out.landmarks.push_back(d.landmark);
      ok = true;
    }
    require(ok, "budget", "plant center draw kept splitting into multiple "
                          "classes; resample budget exhausted");
  }

  // Ambient: Poisson on the window restricted off the center e2-balls,
  // conditioned (by rejection of the ambient draw alone) on spawning no
  // extra seed class.
  Rng ar = base.child(0);
  for (u64 r = 0;; ++r) {
    require(r <= spec.max_retries, "budget",
            "ambient resample budget exhausted: the ambient draw keeps "
            "spawning stray seed classes");
    Rng arr = ar.child(r);
    PointConfiguration amb = sample_poisson(ctx, window, spec.alpha, arr);
    std::vector<GroupPoint> all = fixed;
    for (const GroupPoint& p : amb.points) {
      bool dropped = false;
      for (const PlantCenter& c : spec.centers)
        if (region_contains(ctx, Region::ball(c.g, g.e2), p)) {
          dropped = true;
          break;
        }
      if (!dropped) all.push_back(p);
    }
    PointConfiguration cfg = make_config(ctx, std::move(all), window,
                                         spec.alpha);
    SeedScan scan = seed_scan(ctx, cfg.points, g, window, spec.cert_depth);
    std::vector<int> hits(spec.centers.size(), 0);
    bool stray = false;
    for (size_t cls = 0; cls < scan.classes.size() && !stray; ++cls) {
      bool matched = false;
      for (size_t i = 0; i < spec.centers.size() && !matched; ++i)
        if (class_near_center(ctx, scan, cls, g, spec.centers[i].g)) {
          ++hits[i];
          matched = true;
        }
      stray = !matched;
    }
    if (stray) {
      ++out.ambient_resamples;
      continue;
    }
    for (size_t i = 0; i < hits.size(); ++i)
      require(hits[i] == 1, "internal",
              "planted center produced " + std::to_string(hits[i]) +
                  " seed classes");
    out.config = std::move(cfg);
    break;
  }
  out.dense_acceptance =
      out.dense_tries == 0
          ? 0.0
          : static_cast<double>(spec.centers.size()) /
                static_cast<double>(out.dense_tries);
  return out;
}

}  // namespace pmap
