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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "poissonmaps/rng.hpp"
#include "poissonmaps/seeds.hpp"

using namespace pmap;

namespace {

Dyadic dy(i64 m, i64 e = 0) { return Dyadic(m).ldexp(e); }

// Half-integer grid ring: every (i/2, j/2) with i^2 + j^2 in [lo4, hi4]
// (so radii in [sqrt(lo4)/2, sqrt(hi4)/2]), shifted to `center`.
void add_ring(std::vector<GroupPoint>& pts, const GroupPoint& center, i64 lo4,
              i64 hi4) {
  i64 imax = 0;
  while (imax * imax < hi4) ++imax;
  for (i64 i = -imax; i <= imax; ++i)
    for (i64 j = -imax; j <= imax; ++j) {
      i64 s = i * i + j * j;
      if (s < lo4 || s > hi4) continue;
      pts.push_back(
          make_euclid(center.x + dy(i, -1), center.y + dy(j, -1)));
    }
}

// A by-hand marker-like blob at `center`: landmark point, a few fitted-shell
// points, and a dense ring with radii in about [16.61, 19.40]. The empty
// shell (20, 60] is left empty by construction.
std::vector<GroupPoint> blob_config(const GroupPoint& center) {
  std::vector<GroupPoint> pts;
  pts.push_back(center);
  pts.push_back(make_euclid(center.x + dy(7), center.y));
  pts.push_back(make_euclid(center.x + dy(5), center.y - dy(5)));
  pts.push_back(make_euclid(center.x - dy(8), center.y + dy(3)));
  add_ring(pts, center, 1103, 1505);
  return pts;
}

void add_far_ambient(std::vector<GroupPoint>& pts, const GroupPoint& center) {
  pts.push_back(make_euclid(center.x + dy(61), center.y));
  pts.push_back(make_euclid(center.x, center.y - dy(70)));
  pts.push_back(make_euclid(center.x + dy(45), center.y + dy(50)));
}

}  // namespace

TEST_CASE("shell_has_point is exact per backend") {
  GroupCtx ec{Backend::euclid2};
  GroupPoint o = make_euclid(Dyadic(), Dyadic());
  std::vector<GroupPoint> pts{make_euclid(dy(3), dy(4))};
  CHECK(shell_has_point(ec, o, 4, 5, pts));
  CHECK_FALSE(shell_has_point(ec, o, 5, 10, pts));
  CHECK_FALSE(shell_has_point(ec, o, 2, 4, pts));
  std::vector<GroupPoint> half{make_euclid(dy(7, -1), Dyadic())};  // 3.5
  CHECK(shell_has_point(ec, o, 3, 4, half));
  CHECK_FALSE(shell_has_point(ec, o, 4, 6, half));

  GroupCtx qc{Backend::qp2};
  GroupPoint c0 = make_qp2(qc, bigint(77));
  unsigned u = 9;  // index unit: 2^(qp_vmax - 7)
  std::vector<GroupPoint> qpts{make_qp2(qc, bigint(77) + (bigint(30) << u))};
  CHECK(shell_has_point(qc, c0, 20, 64, qpts));
  CHECK_FALSE(shell_has_point(qc, c0, 30, 64, qpts));
  std::vector<GroupPoint> wrap{make_qp2(qc, bigint(77) + (bigint(100) << u))};
  CHECK(shell_has_point(qc, c0, 27, 29, wrap));  // cyc(100) = 28
  std::vector<GroupPoint> off{make_qp2(qc, bigint(78))};  // other lattice
  CHECK_FALSE(shell_has_point(qc, c0, 0, 64, off));

  GroupCtx cc{Backend::coprod};
  GroupPoint m5 = make_coprod(5, Dyadic());
  std::vector<GroupPoint> cpts{make_coprod(5, dy(11, -1))};  // 5.5
  CHECK(shell_has_point(cc, m5, 5, 6, cpts));
  CHECK_FALSE(shell_has_point(cc, m5, 6, 9, cpts));
  std::vector<GroupPoint> xmask{make_coprod(9, dy(11, -1))};
  CHECK_FALSE(shell_has_point(cc, m5, 5, 6, xmask));
}

TEST_CASE("dense covering and the margin variant on euclid2") {
  GroupCtx ctx{Backend::euclid2};
  MarkerGeometry geom;
  GroupPoint o = make_euclid(Dyadic(), Dyadic());

  // A wide ring (radii within about [16.26, 19.75]) covers the expanded
  // margin range (16, 20], which then implies coverage of the plain range
  // at every offset up to distance 1.
  std::vector<GroupPoint> wide;
  add_ring(wide, o, 1057, 1560);
  CHECK(dense_covered_margin(ctx, o, geom, wide, 12) == Tri::In);
  CHECK(dense_covered_at(ctx, make_euclid(dy(1), Dyadic()), geom, wide, 12) ==
        Tri::In);

  // The narrower blob ring covers the plain range at small offsets.
  std::vector<GroupPoint> pts = blob_config(o);
  for (auto [hx, hy] : {std::pair<Dyadic, Dyadic>{dy(1, -1), Dyadic()},
                        {Dyadic(), dy(-9, -4)},
                        {dy(11, -4), dy(11, -4)}}) {
    GroupPoint h = make_euclid(hx, hy);
    CHECK(dense_covered_at(ctx, h, geom, pts, 12) == Tri::In);
  }
  GroupPoint far = make_euclid(dy(30), Dyadic());
  CHECK(dense_covered_at(ctx, far, geom, pts, 12) == Tri::Out);

  // A thinner ring (radii within about [17.10, 18.89]) still covers the
  // (17, 19] centers but not the expanded (16, 20] range.
  std::vector<GroupPoint> thin;
  add_ring(thin, o, 1170, 1428);
  CHECK(dense_covered_at(ctx, o, geom, thin, 12) == Tri::In);
  CHECK(dense_covered_margin(ctx, o, geom, thin, 12) == Tri::Out);
}

TEST_CASE("seed_at combines the dense and empty conditions") {
  GroupCtx ctx{Backend::euclid2};
  MarkerGeometry geom;
  GroupPoint o = make_euclid(Dyadic(), Dyadic());
  std::vector<GroupPoint> pts = blob_config(o);

  CHECK(seed_at(ctx, o, geom, pts, 12) == Tri::In);
  CHECK(seed_at(ctx, make_euclid(dy(1, -1), Dyadic()), geom, pts, 12) ==
        Tri::In);
  // At offset 0.9 the outermost ring point crosses distance 20.
  CHECK(seed_at(ctx, make_euclid(dy(-9, -4), dy(9, -4)), geom, pts, 12) ==
        Tri::Out);
  CHECK(seed_at(ctx, make_euclid(dy(30), Dyadic()), geom, pts, 12) ==
        Tri::Out);

  // One point in the empty shell disqualifies the location.
  std::vector<GroupPoint> spoiled = pts;
  spoiled.push_back(make_euclid(dy(40), Dyadic()));
  CHECK(seed_at(ctx, o, geom, spoiled, 12) == Tri::Out);
}

TEST_CASE("window erosion and certified ball containment") {
  GroupCtx ctx{Backend::euclid2};
  GroupPoint o = make_euclid(Dyadic(), Dyadic());
  Region w = Region::ball(o, 100);
  Region e = erode_window(ctx, w, 60);
  REQUIRE(e.kind == Region::Kind::Ball);
  CHECK(e.rb == 40);
  CHECK(ball_in_region(ctx, w, make_euclid(dy(10), dy(10)), 25));
  CHECK_FALSE(ball_in_region(ctx, w, make_euclid(dy(55), dy(55)), 25));
  CHECK(erode_window(ctx, Region::ball(o, 59), 60).kind ==
        Region::Kind::Empty);

  Region box = Region::box(make_euclid(dy(-50), dy(-50)),
                           make_euclid(dy(50), dy(50)));
  Region eb = erode_window(ctx, box, 20);
  REQUIRE(eb.kind == Region::Kind::Box);
  CHECK(eb.lo.x == dy(-30));
  CHECK(eb.hi.y == dy(30));
  CHECK(ball_in_region(ctx, box, o, 49));
  CHECK_FALSE(ball_in_region(ctx, box, o, 50));  // half-open far corner
  CHECK(ball_in_region(ctx, Region::join({w, box}), make_euclid(dy(55), {}),
                       25));

  GroupCtx qc{Backend::qp2};
  GroupPoint q0 = make_qp2(qc, bigint(3));
  Region cu = Region::coset_union(-7, {q0});
  CHECK(erode_window(qc, cu, 64).kind == Region::Kind::CosetUnion);
  CHECK(ball_in_region(qc, cu, make_qp2(qc, bigint(3) + (bigint(50) << 9)),
                       64));
  CHECK_FALSE(ball_in_region(qc, cu, make_qp2(qc, bigint(4)), 1));
}

TEST_CASE("point index gather returns a superset of the exact annulus") {
  GroupCtx ctx{Backend::euclid2};
  Rng rng(20260814, 1);
  std::vector<GroupPoint> pts;
  for (int i = 0; i < 400; ++i) {
    double x = (rng.next_double() - 0.5) * 160.0;
    double y = (rng.next_double() - 0.5) * 160.0;
    pts.push_back(make_euclid(dy(static_cast<i64>(x * 64), -6),
                              dy(static_cast<i64>(y * 64), -6)));
  }
  PointIndex ix = PointIndex::build(ctx, pts);
  for (int t = 0; t < 50; ++t) {
    double bx = (rng.next_double() - 0.5) * 140.0;
    double by = (rng.next_double() - 0.5) * 140.0;
    double r_lo = rng.next_double() * 30.0;
    double r_hi = r_lo + rng.next_double() * 30.0;
    std::vector<u32> got = ix.gather(bx, bx + 2.0, by, by + 2.0, r_lo, r_hi);
    std::vector<bool> in_got(pts.size(), false);
    for (u32 i : got) in_got[i] = true;
    for (u32 i = 0; i < pts.size(); ++i) {
      double px = pts[i].x.to_double(), py = pts[i].y.to_double();
      double dx = px < bx ? bx - px : (px > bx + 2.0 ? px - bx - 2.0 : 0.0);
      double dy2 = py < by ? by - py : (py > by + 2.0 ? py - by - 2.0 : 0.0);
      double d = std::sqrt(dx * dx + dy2 * dy2);
      if (d >= r_lo && d <= r_hi) CHECK(in_got[i]);
    }
  }
}

TEST_CASE("euclid2 scan certifies a planted class") {
  GroupCtx ctx{Backend::euclid2};
  MarkerGeometry geom;
  GroupPoint o = make_euclid(Dyadic(), Dyadic());
  std::vector<GroupPoint> pts = blob_config(o);
  add_far_ambient(pts, o);
  Region window = Region::ball(o, 128);

  SeedScan scan = seed_scan(ctx, pts, geom, window, 12);
  REQUIRE(scan.classes.size() == 1);
  REQUIRE_FALSE(scan.classes[0].witnesses.empty());
  GroupPoint w = scan.classes[0].witnesses[0];
  CHECK(dist_sq(w, o).cmp_int_sq(2) < 0);
  CHECK(class_diameter_below(ctx, scan.classes[0], 4));
  CHECK_FALSE(class_diameter_below(ctx, scan.classes[0], 1));

  CHECK(core_membership(ctx, scan, 0, geom, o, 8) == 1);
  CHECK(core_membership(ctx, scan, 0, geom, make_euclid(dy(4), {}), 8) == -1);
  CHECK(core_membership(ctx, scan, 0, geom, make_euclid({}, dy(2)), 8) == 1);
  // 2.8 + (class reach about 0.6) is beyond 3: settled by witness hunting.
  CHECK(core_membership(ctx, scan, 0, geom, make_euclid({}, dy(14, -2)), 8) ==
        -1);
}

TEST_CASE("euclid2 scan negatives and window limits") {
  GroupCtx ctx{Backend::euclid2};
  MarkerGeometry geom;
  GroupPoint o = make_euclid(Dyadic(), Dyadic());

  SUBCASE("empty configuration") {
    SeedScan s = seed_scan(ctx, {}, geom, Region::ball(o, 128), 12);
    CHECK(s.classes.empty());
  }
  SUBCASE("empty-shell violator erases the class") {
    std::vector<GroupPoint> pts = blob_config(o);
    add_far_ambient(pts, o);
    pts.push_back(make_euclid(dy(40), Dyadic()));
    SeedScan s = seed_scan(ctx, pts, geom, Region::ball(o, 128), 12);
    CHECK(s.classes.empty());
  }
  SUBCASE("sparse noise has no seeds") {
    Rng rng(77, 2);
    std::vector<GroupPoint> pts;
    for (int i = 0; i < 300; ++i) {
      double x = (rng.next_double() - 0.5) * 70.0;
      double y = (rng.next_double() - 0.5) * 70.0;
      pts.push_back(make_euclid(dy(static_cast<i64>(x * 64), -6),
                                dy(static_cast<i64>(y * 64), -6)));
    }
    SeedScan s = seed_scan(ctx, pts, geom, Region::ball(o, 100), 12);
    CHECK(s.classes.empty());
  }
  SUBCASE("unit grid everywhere is dense but never empty-shell clean") {
    std::vector<GroupPoint> pts;
    for (i64 i = -70; i <= 70; ++i)
      for (i64 j = -70; j <= 70; ++j)
        pts.push_back(make_euclid(dy(i), dy(j)));
    SeedScan s = seed_scan(ctx, pts, geom, Region::ball(o, 130), 12);
    CHECK(s.classes.empty());
  }
  SUBCASE("shells must fit inside the window") {
    std::vector<GroupPoint> pts = blob_config(o);
    SeedScan tight = seed_scan(ctx, pts, geom, Region::ball(o, 50), 12);
    CHECK(tight.classes.empty());
    SeedScan fits = seed_scan(ctx, pts, geom, Region::ball(o, 61), 12);
    CHECK(fits.classes.size() == 1);
  }
}

TEST_CASE("qp2 scan is exact over coset occupancy") {
  GroupCtx ctx{Backend::qp2};
  MarkerGeometry geom = default_geometry(Backend::qp2);
  unsigned u = 9;
  bigint c0(77);
  auto at_index = [&](bigint base, int k, i64 hi) {
    return make_qp2(ctx, base + (bigint(k) << u) + (bigint(hi) << 16));
  };
  // Occupancy {18, 19, 110, 111} makes indices 0 and 1 the only seeds.
  std::vector<GroupPoint> pts{at_index(c0, 18, 0), at_index(c0, 19, 3),
                              at_index(c0, 110, 1), at_index(c0, 111, 0),
                              at_index(c0, 5, 2)};
  Region window = Region::coset_union(-7, {make_qp2(ctx, c0)});
  SeedScan scan = seed_scan(ctx, pts, geom, window, 8);
  REQUIRE(scan.classes.size() == 1);
  REQUIRE(scan.classes[0].cosets.size() == 2);
  CHECK(scan.classes[0].cosets[0] == c0);
  CHECK(scan.classes[0].cosets[1] == c0 + (bigint(1) << u));

  CHECK(core_membership(ctx, scan, 0, geom, at_index(c0, 2, 0), 4) == 1);
  CHECK(core_membership(ctx, scan, 0, geom, at_index(c0, 0, 999), 4) == 1);
  CHECK(core_membership(ctx, scan, 0, geom, at_index(c0, 5, 0), 4) == -1);
  CHECK(core_membership(ctx, scan, 0, geom, make_qp2(ctx, c0 + 1), 4) == -1);
  CHECK(class_diameter_below(ctx, scan.classes[0], 2));

  SUBCASE("windows finer than an H-coset have no candidates") {
    SeedScan none =
        seed_scan(ctx, pts, geom, Region::ball(make_qp2(ctx, c0), 30), 8);
    CHECK(none.classes.empty());
  }
  SUBCASE("a second lattice is a separate, far class") {
    bigint c1 = c0 + 3;
    std::vector<GroupPoint> both = pts;
    for (int k : {18, 19, 110, 111}) both.push_back(at_index(c1, k, 0));
    Region w2 =
        Region::coset_union(-7, {make_qp2(ctx, c0), make_qp2(ctx, c1)});
    SeedScan two = seed_scan(ctx, both, geom, w2, 8);
    REQUIRE(two.classes.size() == 2);
    CHECK(classes_beyond(ctx, two.classes[0], two.classes[1], 1000));
  }
  SUBCASE("empty-shell occupancy erases the seed") {
    std::vector<GroupPoint> spoiled = pts;
    spoiled.push_back(at_index(c0, 40, 0));  // cyc 40 in (20, 64]
    SeedScan none = seed_scan(ctx, spoiled, geom, window, 8);
    CHECK(none.classes.empty());
  }
}

TEST_CASE("coprod scan produces exact bands") {
  GroupCtx ctx{Backend::coprod};
  MarkerGeometry geom;
  auto seed_pts = [&](u64 mask, const Dyadic& at) {
    std::vector<GroupPoint> out;
    for (i64 k = 0; k < 6; ++k) {
      Dyadic r = dy(67 + 2 * k, -2);  // 16.75 .. 19.25 step 0.5
      out.push_back(make_coprod(mask, at + r));
      out.push_back(make_coprod(mask, at - r));
    }
    return out;
  };
  std::vector<GroupPoint> pts = seed_pts(5, Dyadic());
  std::vector<GroupPoint> second = seed_pts(5, dy(200));
  pts.insert(pts.end(), second.begin(), second.end());
  pts.push_back(make_coprod(5, dy(61)));
  pts.push_back(make_coprod(5, dy(139)));  // 61 left of the second blob
  pts.push_back(make_coprod(9, dy(40)));   // other mask: never counted
  Region w5 = Region::box(make_coprod(5, dy(-130)), make_coprod(5, dy(330)));
  Region w9 = Region::box(make_coprod(9, dy(-130)), make_coprod(9, dy(330)));
  Region window = Region::join({w5, w9});

  SeedScan scan = seed_scan(ctx, pts, geom, window, 8);
  REQUIRE(scan.classes.size() == 2);
  for (const SeedClassCover& cls : scan.classes) CHECK(cls.mask == 5);
  const SeedClassCover& a = scan.classes[0];
  CHECK(a.band.contains(dy(1, -1)));
  CHECK(a.band.contains(dy(-1, -1)));
  CHECK_FALSE(a.band.contains(dy(1)));
  CHECK(class_diameter_below(ctx, a, 2));
  CHECK_FALSE(class_diameter_below(ctx, a, 1));
  CHECK(classes_beyond(ctx, a, scan.classes[1], 100));
  CHECK_FALSE(classes_beyond(ctx, a, scan.classes[1], 199));

  CHECK(core_membership(ctx, scan, 0, geom, make_coprod(5, dy(2)), 4) == 1);
  CHECK(core_membership(ctx, scan, 0, geom, make_coprod(5, dy(5, -1)), 4) ==
        -1);
  CHECK(core_membership(ctx, scan, 0, geom, make_coprod(9, Dyadic()), 4) ==
        -1);

  SUBCASE("empty-shell occupancy erases a band") {
    std::vector<GroupPoint> spoiled = pts;
    spoiled.push_back(make_coprod(5, dy(40)));
    SeedScan s = seed_scan(ctx, spoiled, geom, window, 8);
    REQUIRE(s.classes.size() == 1);  // only the blob at 200 survives
    CHECK(s.classes[0].band.contains(dy(200)));
  }
}
