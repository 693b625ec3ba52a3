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
#include <queue>
#include <set>
#include <vector>

#include "doctest.h"
#include "poissonmaps/geometry.hpp"
#include "poissonmaps/gridcert.hpp"
#include "poissonmaps/group.hpp"
#include "poissonmaps/region.hpp"
#include "poissonmaps/rng.hpp"

using namespace pmap;

namespace {

GroupCtx ectx() { return GroupCtx{Backend::euclid2}; }
GroupCtx qctx() { return GroupCtx{Backend::qp2}; }
GroupCtx cctx() { return GroupCtx{Backend::coprod}; }
GroupCtx actx() { return GroupCtx{Backend::affine}; }

Dyadic dy(i64 num, i64 exp = 0) { return Dyadic(bigint(num), exp); }

GroupPoint rnd_euclid(Rng& rng, i64 span) {
  Dyadic x = Dyadic(rng.next_bits(16).num() - (bigint(1) << 15), -10) *
             Dyadic(span);
  Dyadic y = Dyadic(rng.next_bits(16).num() - (bigint(1) << 15), -10) *
             Dyadic(span);
  return make_euclid(x.ldexp(-5), y.ldexp(-5));
}

// Breadth-first word-ball growth in H/Z_2 = Z/128 with generator steps +-1;
// the independent oracle for the qp2 word metric.
std::vector<int> bfs_cyclic_distances() {
  std::vector<int> dist(kQpIndex, -1);
  std::queue<int> q;
  dist[0] = 0;
  q.push(0);
  while (!q.empty()) {
    int k = q.front();
    q.pop();
    for (int step : {1, kQpIndex - 1}) {
      int n = (k + step) & (kQpIndex - 1);
      if (dist[n] < 0) {
        dist[n] = dist[k] + 1;
        q.push(n);
      }
    }
  }
  return dist;
}

}  // namespace

TEST_CASE("euclid2 word distance is the ceiling of the Euclidean norm") {
  GroupCtx ctx = ectx();
  GroupPoint o = identity(ctx);
  CHECK(word_distance(ctx, o, o) == 0);
  // |(1.5, 2)| = 2.5 rounds up to 3.
  CHECK(word_distance(ctx, o, make_euclid(dy(3, -1), dy(2))) == 3);
  // |(3, 4)| = 5 exactly: no rounding.
  CHECK(word_distance(ctx, o, make_euclid(dy(3), dy(4))) == 5);
  // Any overshoot pushes the ceiling to 6.
  GroupPoint just_past = make_euclid(dy(3), dy(4) + dy(1, -40));
  CHECK(word_distance(ctx, o, just_past) == 6);
  CHECK(word_distance(ctx, o, make_euclid(dy(1, -40), Dyadic())) == 1);
}

TEST_CASE("qp2 word distance matches breadth-first search over Z/128") {
  GroupCtx ctx = qctx();
  std::vector<int> oracle = bfs_cyclic_distances();
  GroupPoint o = identity(ctx);
  for (int k = 0; k < kQpIndex; ++k) {
    GroupPoint p = make_qp2_value(ctx, Dyadic(bigint(k), -kQpHLog));
    if (k == 0) {
      CHECK(word_distance(ctx, o, p) == 0);
    } else {
      CHECK(word_distance(ctx, o, p) == oracle[k]);
    }
  }
  // Spec'd spot values: one generator step, and the antipode 2^-1.
  CHECK(word_distance(ctx, o, make_qp2_value(ctx, Dyadic(bigint(1), -7))) == 1);
  CHECK(word_distance(ctx, o, make_qp2_value(ctx, Dyadic(bigint(1), -1))) ==
        64);
  // Distinct points of a common Z_2-coset are at pseudo-distance 0.
  GroupPoint z = make_qp2_value(ctx, Dyadic(bigint(5), 0));
  CHECK(word_distance(ctx, o, z) == 0);
  // Outside H the word metric is undefined.
  GroupPoint deep = make_qp2_value(ctx, Dyadic(bigint(1), -9));
  CHECK_THROWS_AS((void)word_distance(ctx, o, deep), Error);
}

TEST_CASE("qp2 word balls certify S^60 != S^61 and diameter 64") {
  std::vector<int> oracle = bfs_cyclic_distances();
  auto ball_count = [&](int n) {
    int c = 0;
    for (int k = 0; k < kQpIndex; ++k)
      if (oracle[k] <= n) ++c;
    return c;
  };
  CHECK(ball_count(60) == 121);
  CHECK(ball_count(61) == 123);
  CHECK(ball_count(60) != ball_count(61));
  int diam = 0;
  for (int k = 0; k < kQpIndex; ++k) diam = std::max(diam, oracle[k]);
  CHECK(diam == kQpDiamH);
  // Word balls keep growing up to the diameter and then stop.
  CHECK(ball_count(63) != ball_count(64));
  CHECK(ball_count(64) == kQpIndex);
}

TEST_CASE("qp2 coset distance is an ultrametric on H-cosets") {
  GroupCtx ctx = qctx();
  GroupPoint o = identity(ctx);
  CHECK(coset_distance(ctx, o, make_qp2_value(ctx, Dyadic(bigint(3), -7))) ==
        0);
  CHECK(coset_distance(ctx, o, make_qp2_value(ctx, Dyadic(bigint(1), -9))) ==
        2);
  CHECK(coset_distance(ctx, o, make_qp2_value(ctx, Dyadic(bigint(1), -16))) ==
        9);
  std::vector<GroupPoint> pts;
  for (i64 e = -14; e <= 2; ++e)
    for (i64 m : {1, 3}) pts.push_back(make_qp2_value(ctx, Dyadic(bigint(m), e)));
  pts.push_back(o);
  for (const GroupPoint& a : pts)
    for (const GroupPoint& b : pts)
      for (const GroupPoint& c : pts) {
        i64 ac = coset_distance(ctx, a, c);
        i64 ab = coset_distance(ctx, a, b);
        i64 bc = coset_distance(ctx, b, c);
        CHECK(ac <= std::max(ab, bc));
      }
  for (const GroupPoint& a : pts)
    for (const GroupPoint& b : pts) {
      CHECK(coset_distance(ctx, a, b) == coset_distance(ctx, b, a));
      bool same = coset_distance(ctx, a, b) == 0;
      CHECK(same == qp_cyclic_offset(ctx, a, b).has_value());
    }
}

TEST_CASE("translation is an exact left action with exact inverses") {
  Rng rng(2026, stream_of("group-laws"));
  GroupCtx ctx = ectx();
  for (int i = 0; i < 50; ++i) {
    GroupPoint g = rnd_euclid(rng, 9);
    GroupPoint h = rnd_euclid(rng, 9);
    GroupPoint x = rnd_euclid(rng, 9);
    GroupPoint lhs = translate(ctx, translate(ctx, g, h), x);
    GroupPoint rhs = translate(ctx, g, translate(ctx, h, x));
    CHECK(lhs == rhs);
    CHECK(translate(ctx, identity(ctx), x) == x);
    CHECK(translate(ctx, inverse(ctx, g), translate(ctx, g, x)) == x);
  }
  GroupCtx qc = qctx();
  Rng qrng(2026, stream_of("group-laws-qp"));
  for (int i = 0; i < 50; ++i) {
    GroupPoint g = make_qp2(qc, qrng.next_bits(70).num());
    GroupPoint h = make_qp2(qc, qrng.next_bits(70).num());
    GroupPoint x = make_qp2(qc, qrng.next_bits(70).num());
    CHECK(translate(qc, translate(qc, g, h), x) ==
          translate(qc, g, translate(qc, h, x)));
    CHECK(translate(qc, inverse(qc, g), translate(qc, g, x)) == x);
  }
  GroupCtx cc = cctx();
  GroupPoint a = make_coprod(0b1011, dy(7, -2));
  GroupPoint b = make_coprod(0b0110, dy(-3, -1));
  CHECK(translate(cc, a, b) ==
        make_coprod(0b1101, dy(7, -2) + dy(-3, -1)));
  CHECK(translate(cc, inverse(cc, a), translate(cc, a, b)) == b);
}

TEST_CASE("affine backend composes, inverts powers of two, and reports Delta") {
  GroupCtx ctx = actx();
  GroupPoint g = make_affine(dy(2), dy(3));
  GroupPoint h = make_affine(dy(1, -1), dy(5));
  // (2,3)(1/2,5) maps x to 2((1/2)x + 5) + 3 = x + 13.
  GroupPoint gh = translate(ctx, g, h);
  CHECK(gh == make_affine(dy(1), dy(13)));
  CHECK(modular_delta(g) == dy(2));
  GroupPoint ginv = inverse(ctx, g);
  CHECK(translate(ctx, ginv, g) == identity(ctx));
  CHECK(translate(ctx, g, ginv) == identity(ctx));
  CHECK_THROWS_AS((void)inverse(ctx, make_affine(dy(3), dy(0))), Error);
  CHECK_THROWS_AS((void)word_distance(ctx, g, h), Error);
}

TEST_CASE("word metrics are left-invariant") {
  Rng rng(7, stream_of("invariance"));
  GroupCtx ctx = ectx();
  for (int i = 0; i < 40; ++i) {
    GroupPoint g = rnd_euclid(rng, 20);
    GroupPoint x = rnd_euclid(rng, 20);
    GroupPoint y = rnd_euclid(rng, 20);
    CHECK(word_distance(ctx, translate(ctx, g, x), translate(ctx, g, y)) ==
          word_distance(ctx, x, y));
  }
  GroupCtx qc = qctx();
  Rng qrng(7, stream_of("invariance-qp"));
  for (int i = 0; i < 40; ++i) {
    GroupPoint g = make_qp2(qc, qrng.next_bits(70).num());
    GroupPoint x = make_qp2(qc, qrng.next_bits(70).num());
    // y in the same H-coset as x.
    bigint k = qrng.next_below(128);
    GroupPoint y = translate(
        qc, x, make_qp2_value(qc, Dyadic(k, -kQpHLog) + Dyadic(qrng.next_bits(8).num(), 0)));
    CHECK(word_distance(qc, translate(qc, g, x), translate(qc, g, y)) ==
          word_distance(qc, x, y));
    CHECK(coset_distance(qc, translate(qc, g, x), translate(qc, g, y)) ==
          coset_distance(qc, x, y));
  }
  GroupCtx cc = cctx();
  Rng crng(7, stream_of("invariance-cp"));
  for (int i = 0; i < 40; ++i) {
    GroupPoint g = make_coprod(crng.next_u64() & 0xFF,
                               Dyadic(crng.next_bits(10).num(), -4));
    GroupPoint x = make_coprod(5, Dyadic(crng.next_bits(10).num(), -4));
    GroupPoint y = make_coprod(5, Dyadic(crng.next_bits(10).num(), -4));
    CHECK(word_distance(cc, translate(cc, g, x), translate(cc, g, y)) ==
          word_distance(cc, x, y));
  }
}

TEST_CASE("point serialization round trips exactly") {
  GroupCtx qc = qctx();
  std::vector<GroupPoint> pts = {
      make_euclid(dy(-7, -3), dy(9, 2)),
      identity(ectx()),
      make_qp2(qc, bigint("123456789012345678901234567890")),
      make_coprod(0xDEAD, dy(-13, -5)),
      make_affine(dy(3, -1), dy(-2, 4)),
  };
  for (const GroupPoint& p : pts) {
    GroupCtx ctx{p.backend};
    GroupPoint q = point_from_text(ctx, point_to_text(p));
    CHECK(q == p);
  }
}

TEST_CASE("haar measure of primitives is exact") {
  GroupCtx ctx = ectx();
  GroupPoint o = identity(ctx);
  Measure unit = haar_measure(ctx, Region::ball(o, 1));
  CHECK(unit.pi_mult == 1);
  CHECK(unit.rat.is_zero());
  CHECK(unit.is_exact());
  Measure shell = haar_measure(ctx, Region::shell(o, 6, 10));
  CHECK(shell.pi_mult == 64);
  CHECK(shell.is_exact());
  Measure box = haar_measure(
      ctx, Region::box(make_euclid(dy(-1), dy(0)), make_euclid(dy(3, -1), dy(2))));
  CHECK(box.rat == dy(5));  // width 2.5, height 2
  CHECK(box.pi_mult.is_zero());

  GroupCtx qc = qctx();
  GroupPoint qo = identity(qc);
  CHECK(haar_measure(qc, Region::ball(qo, 0)).rat == dy(1));
  CHECK(haar_measure(qc, Region::coset_union(-kQpHLog, {qo})).rat == dy(128));
  CHECK(haar_measure(qc, Region::ball(qo, 1)).rat == dy(3));
  CHECK(haar_measure(qc, Region::shell(qo, 16, 20)).rat == dy(8));
  CHECK(haar_measure(qc, Region::shell(qo, 20, 64)).rat == dy(87));
  CHECK(haar_measure(qc, Region::ball(qo, 64)).rat == dy(128));

  GroupCtx cc = cctx();
  GroupPoint co = make_coprod(9, dy(4));
  CHECK(haar_measure(cc, Region::ball(co, 3)).rat == dy(6));
  CHECK(haar_measure(cc, Region::shell(co, 6, 10)).rat == dy(8));
  CHECK_THROWS_AS((void)haar_measure(cc, Region::coset_union(0, {co})), Error);

  GroupCtx ac = actx();
  Measure am = haar_measure(
      ac, Region::box(make_affine(dy(1), dy(0)), make_affine(dy(2), dy(1))));
  CHECK(std::abs(am.to_double() - 0.5) <= am.err.to_double() + 1e-30);
  CHECK(am.err.to_double() < 1e-40);
}

TEST_CASE("haar measure is translation invariant") {
  GroupCtx ctx = ectx();
  Rng rng(11, stream_of("measure-shift"));
  for (int i = 0; i < 10; ++i) {
    GroupPoint g = rnd_euclid(rng, 30);
    Region r = Region::shell(rnd_euclid(rng, 10), 2, 7);
    Measure a = haar_measure(ctx, r);
    Measure b = haar_measure(ctx, translate_region(ctx, g, r));
    CHECK(a.pi_mult == b.pi_mult);
    CHECK(a.rat == b.rat);
  }
  GroupCtx qc = qctx();
  Rng qrng(11, stream_of("measure-shift-qp"));
  for (int i = 0; i < 10; ++i) {
    GroupPoint g = make_qp2(qc, qrng.next_bits(70).num());
    GroupPoint c = make_qp2(qc, qrng.next_bits(70).num());
    Region r = Region::shell(c, 3, 9);
    CHECK(haar_measure(qc, translate_region(qc, g, r)).rat ==
          haar_measure(qc, r).rat);
  }
}

TEST_CASE("disjoint unions sum exactly; concentric pieces reassemble") {
  GroupCtx ctx = ectx();
  GroupPoint o = identity(ctx);
  Region parts = Region::join({Region::ball(o, 6), Region::shell(o, 6, 10)});
  Measure m = haar_measure(ctx, parts);
  CHECK(m.pi_mult == 100);
  CHECK(m.is_exact());
  Region apart = Region::join(
      {Region::ball(o, 2), Region::ball(make_euclid(dy(10), dy(0)), 2)});
  CHECK(haar_measure(ctx, apart).pi_mult == 8);
  // Far-apart shell plus box.
  Region mix = Region::join(
      {Region::shell(o, 1, 3),
       Region::box(make_euclid(dy(50), dy(50)), make_euclid(dy(52), dy(51)))});
  Measure mm = haar_measure(ctx, mix);
  CHECK(mm.pi_mult == 8);
  CHECK(mm.rat == dy(2));
}

TEST_CASE("grid certification brackets areas and tightens with depth") {
  GroupCtx ctx = ectx();
  GroupPoint o = identity(ctx);
  Region ball3 = Region::ball(o, 3);
  Box2 hull{dy(-4), dy(4), dy(-4), dy(4)};
  double truth = 9.0 * 3.14159265358979323846;
  MeasureBounds shallow = certify_measure(ctx, ball3, hull, 4);
  MeasureBounds deep = certify_measure(ctx, ball3, hull, 9);
  CHECK(shallow.lo.to_double() <= truth);
  CHECK(truth <= shallow.hi.to_double());
  CHECK(deep.lo.to_double() <= truth);
  CHECK(truth <= deep.hi.to_double());
  CHECK(deep.hi.to_double() - deep.lo.to_double() <
        shallow.hi.to_double() - shallow.lo.to_double());
  CHECK(deep.hi.to_double() - deep.lo.to_double() < 0.6);

  Region annulus = Region::difference(Region::ball(o, 3), Region::ball(o, 1));
  Measure m = haar_measure(ctx, annulus, 8);
  double want = 8.0 * 3.14159265358979323846;
  CHECK(std::abs(m.to_double() - want) <= m.err.to_double());
  CHECK(m.err.to_double() < 0.5);
}

TEST_CASE("box classification is conservative and exact on boundaries") {
  GroupCtx ctx = ectx();
  GroupPoint o = identity(ctx);
  Region ball5 = Region::ball(o, 5);
  CHECK(classify_box(ctx, ball5, Box2{dy(-1), dy(1), dy(-1), dy(1)}) ==
        Tri::In);
  CHECK(classify_box(ctx, ball5, Box2{dy(6), dy(7), dy(0), dy(1)}) ==
        Tri::Out);
  CHECK(classify_box(ctx, ball5, Box2{dy(4), dy(6), dy(0), dy(1)}) ==
        Tri::Mixed);
  // A box whose far corner sits exactly on the circle of radius 5: (3,4).
  CHECK(classify_box(ctx, ball5, Box2{dy(0), dy(3), dy(0), dy(4)}) == Tri::In);
}

TEST_CASE("coverage certification proves and refutes") {
  GroupCtx ctx = ectx();
  GroupPoint o = identity(ctx);
  Region shell = Region::shell(o, 2, 5);
  Box2 hull{dy(-6), dy(6), dy(-6), dy(6)};
  std::vector<GroupPoint> grid;
  for (i64 x = -6; x <= 6; ++x)
    for (i64 y = -6; y <= 6; ++y) grid.push_back(make_euclid(dy(x), dy(y)));
  CHECK(certify_covered(ctx, shell, grid, 1, hull, 7) ==
        CoverVerdict::Covered);
  std::vector<GroupPoint> lone = {make_euclid(dy(20), dy(20))};
  CHECK(certify_covered(ctx, shell, lone, 1, hull, 7) ==
        CoverVerdict::Uncovered);
  CHECK(certify_covered(ctx, shell, {}, 1, hull, 7) ==
        CoverVerdict::Uncovered);
  // Radius 9 lets even the lone site cover the whole shell.
  CHECK(certify_covered(ctx, shell, grid, 2, hull, 7) ==
        CoverVerdict::Covered);
}

TEST_CASE("membership: half-open boxes, closed balls, exact shell bounds") {
  GroupCtx ctx = ectx();
  GroupPoint o = identity(ctx);
  Region box = Region::box(make_euclid(dy(0), dy(0)), make_euclid(dy(1), dy(1)));
  CHECK(region_contains(ctx, box, make_euclid(dy(0), dy(0))));
  CHECK(!region_contains(ctx, box, make_euclid(dy(1), dy(0))));
  CHECK(!region_contains(ctx, box, make_euclid(dy(0), dy(1))));
  Region shell = Region::shell(o, 6, 10);
  CHECK(!region_contains(ctx, shell, make_euclid(dy(6), dy(0))));
  CHECK(region_contains(ctx, shell, make_euclid(dy(10), dy(0))));
  CHECK(region_contains(ctx, shell, make_euclid(dy(6) + dy(1, -30), dy(0))));
  CHECK(region_contains(ctx, Region::ball(o, 6), make_euclid(dy(6), dy(0))));
  // Translation consistency: p in r iff gp in gr.
  Rng rng(3, stream_of("member-shift"));
  for (int i = 0; i < 30; ++i) {
    GroupPoint g = rnd_euclid(rng, 8);
    GroupPoint p = rnd_euclid(rng, 12);
    bool before = region_contains(ctx, shell, p);
    bool after = region_contains(ctx, translate_region(ctx, g, shell),
                                 translate(ctx, g, p));
    CHECK(before == after);
  }
}

TEST_CASE("qp2 decomposition enumerates cosets exactly") {
  GroupCtx ctx = qctx();
  GroupPoint o = identity(ctx);
  CHECK(qp_decompose(ctx, Region::shell(o, 16, 20), 0).size() == 8);
  CHECK(qp_decompose(ctx, Region::coset_union(-kQpHLog, {o}), 0).size() ==
        128);
  Region diff = Region::difference(Region::coset_union(-kQpHLog, {o}),
                                   Region::ball(o, 10));
  CHECK(qp_decompose(ctx, diff, 0).size() == 128 - 21);
  CHECK_THROWS_AS(
      (void)qp_decompose(ctx, Region::complement(Region::ball(o, 1)), 0),
      Error);
  for (const bigint& id : qp_decompose(ctx, Region::ball(o, 2), 0)) {
    GroupPoint p = make_qp2(ctx, id);
    CHECK(region_contains(ctx, Region::ball(o, 2), p));
  }
}

TEST_CASE("interval sets: union, intersection, difference") {
  IvSet a = iv_union(IvSet::of(dy(0), dy(2)), IvSet::of(dy(3), dy(5)));
  IvSet b = IvSet::of(dy(1), dy(4));
  CHECK(a.length() == dy(4));
  CHECK(iv_union(a, b).length() == dy(5));
  CHECK(iv_intersect(a, b).length() == dy(2));
  CHECK(iv_diff(a, b).length() == dy(2));
  CHECK(iv_diff(b, a).length() == dy(1));
  IvSet touching = iv_union(IvSet::of(dy(0), dy(1)), IvSet::of(dy(1), dy(2)));
  CHECK(touching.iv.size() == 1);
  CHECK(touching.length() == dy(2));
  CHECK(a.contains(dy(3)));
  CHECK(!a.contains(dy(2)));
}

TEST_CASE("uniform sampling: support, determinism, moments") {
  GroupCtx ctx = ectx();
  GroupPoint o = identity(ctx);
  Region shell = Region::shell(o, 6, 10);
  Rng r1(99, stream_of("sample"));
  Rng r2(99, stream_of("sample"));
  GroupPoint first = sample_uniform(ctx, shell, r1);
  CHECK(first == sample_uniform(ctx, shell, r2));
  Rng rng(99, stream_of("sample-support"));
  for (int i = 0; i < 2000; ++i) {
    GroupPoint p = sample_uniform(ctx, shell, rng);
    i64 d = word_distance(ctx, o, p);
    CHECK(d >= 7);  // integer word distance in (6, 10]
    CHECK(d <= 10);
  }
  // Mean squared radius of the uniform unit disc is 1/2.
  Rng mrng(99, stream_of("sample-disc"));
  Region disc = Region::ball(o, 1);
  double acc = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    GroupPoint p = sample_uniform(ctx, disc, mrng);
    acc += Dyadic(p.x * p.x + p.y * p.y).to_double();
  }
  double mean = acc / n;
  double sigma = std::sqrt(1.0 / 12.0 / n);
  CHECK(std::abs(mean - 0.5) < 3 * sigma);
  CHECK_THROWS_AS((void)sample_uniform(ctx, Region::ball(o, 0), r1), Error);
}

TEST_CASE("qp2 sampling fills digits uniformly") {
  GroupCtx ctx = qctx();
  GroupPoint o = identity(ctx);
  Region zcoset = Region::coset_union(0, {o});
  Rng rng(4242, stream_of("sample-qp"));
  const int n = 4000;
  int ones[4] = {0, 0, 0, 0};
  for (int i = 0; i < n; ++i) {
    GroupPoint p = sample_uniform(ctx, zcoset, rng);
    CHECK(region_contains(ctx, zcoset, p));
    for (int j = 0; j < 4; ++j) {
      bigint bit = (p.qp >> static_cast<unsigned>(ctx.qp_vmax + j)) & 1;
      ones[j] += bit.convert_to<int>();
    }
  }
  for (int j = 0; j < 4; ++j) {
    double frac = static_cast<double>(ones[j]) / n;
    CHECK(std::abs(frac - 0.5) < 3 * std::sqrt(0.25 / n));
  }
  // Ball sampling stays in the ball's cosets.
  Region ball = Region::ball(make_qp2_value(ctx, Dyadic(bigint(3), -7)), 2);
  for (int i = 0; i < 200; ++i) {
    GroupPoint p = sample_uniform(ctx, ball, rng);
    CHECK(region_contains(ctx, ball, p));
  }
}

TEST_CASE("coprod sampling respects masks and intervals") {
  GroupCtx ctx = cctx();
  GroupPoint c = make_coprod(5, dy(3));
  Region ball = Region::ball(c, 2);
  Rng rng(17, stream_of("sample-cp"));
  for (int i = 0; i < 500; ++i) {
    GroupPoint p = sample_uniform(ctx, ball, rng);
    CHECK(p.mask == 5);
    CHECK(region_contains(ctx, ball, p));
  }
  Region shell = Region::shell(c, 1, 3);
  int left = 0, total = 0;
  for (int i = 0; i < 4000; ++i) {
    GroupPoint p = sample_uniform(ctx, shell, rng);
    CHECK(region_contains(ctx, shell, p));
    ++total;
    if (p.x < c.x) ++left;
  }
  double frac = static_cast<double>(left) / total;
  CHECK(std::abs(frac - 0.5) < 3 * std::sqrt(0.25 / total));
}

TEST_CASE("affine sampling follows the left Haar a-marginal") {
  GroupCtx ctx = actx();
  Region box = Region::box(make_affine(dy(1), dy(0)), make_affine(dy(2), dy(1)));
  Rng rng(31, stream_of("sample-af"));
  int below = 0;
  const int n = 20000;
  double bacc = 0;
  for (int i = 0; i < n; ++i) {
    GroupPoint p = sample_uniform(ctx, box, rng);
    CHECK(dy(1) <= p.x);
    CHECK(p.x < dy(2));
    // P(a <= 3/2) = (1 - 2/3) / (1 - 1/2) = 2/3 under a^-2 da.
    if (p.x <= dy(3, -1)) ++below;
    bacc += p.y.to_double();
  }
  double frac = static_cast<double>(below) / n;
  CHECK(std::abs(frac - 2.0 / 3.0) < 3 * std::sqrt(2.0 / 9.0 / n));
  CHECK(std::abs(bacc / n - 0.5) < 3 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("marker geometry constraints C1-C4 and the qp2 diameter bound") {
  GroupCtx ctx = ectx();
  CHECK(validate_marker_geometry(ctx, default_geometry(Backend::euclid2))
            .empty());
  MarkerGeometry bad = default_geometry(Backend::euclid2);
  bad.e2 = 50;  // 50 - 20 = 30 <= 32 = 2*d1
  std::vector<std::string> v = validate_marker_geometry(ctx, bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0].substr(0, 2) == "C4");
  MarkerGeometry b1{4, 10, 16, 20, 60};
  CHECK(validate_marker_geometry(ctx, b1).at(0).substr(0, 2) == "C1");
  MarkerGeometry b2{6, 12, 16, 20, 60};
  CHECK(validate_marker_geometry(ctx, b2).at(0).substr(0, 2) == "C2");
  MarkerGeometry b3{6, 10, 16, 19, 60};
  CHECK(validate_marker_geometry(ctx, b3).at(0).substr(0, 2) == "C3");
  GroupCtx qc = qctx();
  CHECK(validate_marker_geometry(qc, default_geometry(Backend::qp2)).empty());
  MarkerGeometry wide = default_geometry(Backend::qp2);
  wide.e2 = 70;
  CHECK(!validate_marker_geometry(qc, wide).empty());
  // C5 with an absurd threshold fails, with a tiny threshold passes.
  SplitCheck hard{1.0, 1000.0};
  CHECK(!validate_marker_geometry(ctx, default_geometry(Backend::euclid2),
                                  hard)
             .empty());
  SplitCheck easy{1.0, 1.0};
  CHECK(validate_marker_geometry(ctx, default_geometry(Backend::euclid2), easy)
            .empty());
}

TEST_CASE("coprod decomposition handles unions, differences, cosets") {
  GroupCtx ctx = cctx();
  GroupPoint c = make_coprod(2, dy(0));
  Region r = Region::difference(Region::ball(c, 5), Region::ball(c, 2));
  std::map<u64, IvSet> d = coprod_decompose(ctx, r);
  REQUIRE(d.size() == 1);
  CHECK(d[2].length() == dy(6));
  Region mix = Region::join(
      {Region::ball(c, 1), Region::ball(make_coprod(9, dy(0)), 2)});
  d = coprod_decompose(ctx, mix);
  CHECK(d.size() == 2);
  CHECK(d[2].length() == dy(2));
  CHECK(d[9].length() == dy(4));
  Region window = Region::box(make_coprod(2, dy(-10)), make_coprod(2, dy(10)));
  Region clipped = Region::meet({Region::coset_union(0, {c}), window});
  CHECK(coprod_decompose(ctx, clipped)[2].length() == dy(20));
}
