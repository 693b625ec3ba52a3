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

#ifndef POISSONMAPS_GROUP_HPP_
#define POISSONMAPS_GROUP_HPP_

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <utility>

#include "poissonmaps/common.hpp"
#include "poissonmaps/dyadic.hpp"

namespace pmap {

// Four group backends:
//   euclid2  G = R^2, generating set S = closed Euclidean unit disc.
//   qp2      G = the union of the chain 2^(-7-n) Z_2 inside Q_2, with
//            H = 2^(-7) Z_2 the compactly generated base subgroup.
//   coprod   G = (coproduct of Z/2 over N) x R, H = {0} x R.
//   affine   G = { x -> a x + b : a > 0 }, a minimal nonunimodular demo.
enum class Backend : u8 { euclid2 = 0, qp2 = 1, coprod = 2, affine = 3 };

inline const char* backend_name(Backend b) {
  switch (b) {
    case Backend::euclid2: return "euclid2";
    case Backend::qp2: return "qp2";
    case Backend::coprod: return "coprod";
    case Backend::affine: return "affine";
  }
  return "?";
}

inline Backend backend_from_name(const std::string& s) {
  if (s == "euclid2") return Backend::euclid2;
  if (s == "qp2") return Backend::qp2;
  if (s == "coprod") return Backend::coprod;
  if (s == "affine") return Backend::affine;
  fail("parse", "unknown backend: " + s);
}

// H = 2^(-7) Z_2 and H / Z_2 is cyclic of order 128; the word metric of
// S = {0, +-2^(-7)} union Z_2 descends to the cyclic distance on Z/128.
inline constexpr int kQpHLog = 7;
inline constexpr int kQpIndex = 1 << kQpHLog;
inline constexpr int kQpDiamH = kQpIndex / 2;

// Backend parameters shared by every operation. qp2 elements are stored as
// residues r in [0, 2^(qp_vmax + wbits + 1)) standing for the truncation of
// r * 2^(-qp_vmax) to digits at valuations in [-qp_vmax, wbits].
struct GroupCtx {
  Backend backend = Backend::euclid2;
  int wbits = 64;
  int qp_vmax = 16;
  int coprod_support = 16;

  i64 qp_digits() const { return static_cast<i64>(qp_vmax) + wbits + 1; }
  bigint qp_modulus() const {
    return bigint(1) << static_cast<unsigned>(qp_digits());
  }
};

// Tagged union over the four coordinate layouts. Unused fields stay at their
// defaults so comparison and serialization can be uniform.
//   euclid2: (x, y)   qp2: qp residue   coprod: (mask, x)   affine: (x=a, y=b)
struct GroupPoint {
  Backend backend = Backend::euclid2;
  Dyadic x, y;
  bigint qp = 0;
  u64 mask = 0;
};

inline GroupPoint make_euclid(Dyadic px, Dyadic py) {
  GroupPoint p;
  p.backend = Backend::euclid2;
  p.x = std::move(px);
  p.y = std::move(py);
  return p;
}

inline GroupPoint make_qp2(const GroupCtx& ctx, bigint residue) {
  GroupPoint p;
  p.backend = Backend::qp2;
  bigint m = ctx.qp_modulus();
  residue %= m;
  if (residue.sign() < 0) residue += m;
  p.qp = std::move(residue);
  return p;
}

// Builds the qp2 element with value v, which must be a dyadic rational whose
// denominator does not exceed 2^qp_vmax.
inline GroupPoint make_qp2_value(const GroupCtx& ctx, const Dyadic& v) {
  if (v.is_zero()) return make_qp2(ctx, bigint(0));
  i64 shift = v.exp() + ctx.qp_vmax;
  require(shift >= 0, "domain",
          "qp2 value finer than 2^-vmax: " + v.to_text());
  return make_qp2(ctx, v.mant() << static_cast<unsigned>(shift));
}

inline GroupPoint make_coprod(u64 mask, Dyadic t) {
  GroupPoint p;
  p.backend = Backend::coprod;
  p.mask = mask;
  p.x = std::move(t);
  return p;
}

inline GroupPoint make_affine(Dyadic a, Dyadic b) {
  require(a.sign() > 0, "domain", "affine scale must be positive");
  GroupPoint p;
  p.backend = Backend::affine;
  p.x = std::move(a);
  p.y = std::move(b);
  return p;
}

inline GroupPoint identity(const GroupCtx& ctx) {
  switch (ctx.backend) {
    case Backend::euclid2: return make_euclid(Dyadic(), Dyadic());
    case Backend::qp2: return make_qp2(ctx, bigint(0));
    case Backend::coprod: return make_coprod(0, Dyadic());
    case Backend::affine: return make_affine(Dyadic(1), Dyadic());
  }
  fail("backend", "bad backend enum");
}

inline void check_same_backend(const GroupPoint& a, const GroupPoint& b) {
  require(a.backend == b.backend, "backend", "backend mismatch");
}

// Total order used for canonical point sorting; compares exact coordinates.
inline int cmp(const GroupPoint& a, const GroupPoint& b) {
  if (a.backend != b.backend)
    return static_cast<int>(a.backend) < static_cast<int>(b.backend) ? -1 : 1;
  auto ord = [](std::strong_ordering o) {
    return o < 0 ? -1 : (o > 0 ? 1 : 0);
  };
  switch (a.backend) {
    case Backend::euclid2:
    case Backend::affine: {
      if (int c = ord(a.x <=> b.x)) return c;
      return ord(a.y <=> b.y);
    }
    case Backend::qp2:
      return a.qp < b.qp ? -1 : (a.qp == b.qp ? 0 : 1);
    case Backend::coprod: {
      if (a.mask != b.mask) return a.mask < b.mask ? -1 : 1;
      return ord(a.x <=> b.x);
    }
  }
  return 0;
}

inline bool operator==(const GroupPoint& a, const GroupPoint& b) {
  return a.backend == b.backend && cmp(a, b) == 0;
}

// Left multiplication g * p. All backends except affine are abelian.
inline GroupPoint translate(const GroupCtx& ctx, const GroupPoint& g,
                            const GroupPoint& p) {
  check_same_backend(g, p);
  switch (g.backend) {
    case Backend::euclid2: return make_euclid(g.x + p.x, g.y + p.y);
    case Backend::qp2: return make_qp2(ctx, g.qp + p.qp);
    case Backend::coprod: return make_coprod(g.mask ^ p.mask, g.x + p.x);
    case Backend::affine:
      // (a, b)(a', b') acts as x -> a(a'x + b') + b.
      return make_affine(g.x * p.x, g.x * p.y + g.y);
  }
  fail("backend", "bad backend enum");
}

inline GroupPoint right_translate(const GroupCtx& ctx, const GroupPoint& p,
                                  const GroupPoint& g) {
  if (p.backend == Backend::affine) return translate(ctx, p, g);
  return translate(ctx, g, p);
}

inline GroupPoint inverse(const GroupCtx& ctx, const GroupPoint& p) {
  switch (p.backend) {
    case Backend::euclid2: return make_euclid(-p.x, -p.y);
    case Backend::qp2: return make_qp2(ctx, -p.qp);
    case Backend::coprod: return make_coprod(p.mask, -p.x);
    case Backend::affine: {
      // Exact only when the scale is a power of two; the demo never needs
      // more: division in dyadic arithmetic would not terminate otherwise.
      require(p.x.mant() == 1, "domain",
              "affine inverse requires a power-of-two scale");
      Dyadic ainv = Dyadic(1).ldexp(-p.x.exp());
      return make_affine(ainv, -(ainv * p.y));
    }
  }
  fail("backend", "bad backend enum");
}

inline GroupPoint gdiff(const GroupCtx& ctx, const GroupPoint& a,
                        const GroupPoint& b) {
  return translate(ctx, inverse(ctx, a), b);
}

// Smallest n >= 0 with s <= n^2, i.e. the ceiling of sqrt(s), computed
// exactly from a floating guess plus integer-square comparisons.
inline i64 ceil_sqrt(const DyadicSq& s) {
  if (s.mant.is_zero()) return 0;
  double guess = std::sqrt(std::max(0.0, Dyadic(s.mant, s.exp).to_double()));
  i64 n = static_cast<i64>(guess);
  if (n < 0) n = 0;
  while (s.cmp_int_sq(n) > 0) ++n;
  while (n > 0 && s.cmp_int_sq(n - 1) <= 0) --n;
  return n;
}

inline DyadicSq dist_sq(const GroupPoint& a, const GroupPoint& b) {
  check_same_backend(a, b);
  require(a.backend == Backend::euclid2, "backend",
          "dist_sq is a euclid2 operation");
  return DyadicSq::norm2(b.x - a.x, b.y - a.y);
}

// Cyclic index k in [0, 128) with b - a congruent to k * 2^(-7) mod Z_2, or
// nullopt when the difference leaves H = 2^(-7) Z_2.
inline std::optional<int> qp_cyclic_offset(const GroupCtx& ctx,
                                           const GroupPoint& a,
                                           const GroupPoint& b) {
  require(a.backend == Backend::qp2 && b.backend == Backend::qp2, "backend",
          "qp_cyclic_offset is a qp2 operation");
  require(ctx.qp_vmax >= kQpHLog, "domain", "qp_vmax must be at least 7");
  bigint m = ctx.qp_modulus();
  bigint d = (b.qp - a.qp) % m;
  if (d.sign() < 0) d += m;
  unsigned unit = static_cast<unsigned>(ctx.qp_vmax - kQpHLog);
  bigint low = d & ((bigint(1) << unit) - 1);
  if (!low.is_zero()) return std::nullopt;
  bigint k = (d >> unit) & (kQpIndex - 1);
  return static_cast<int>(k.convert_to<unsigned>());
}

// Identifier of the coset p + 2^level Z_2 (digits at valuations below
// `level`); level must be >= -qp_vmax.
inline bigint qp_coset_id(const GroupCtx& ctx, const GroupPoint& p,
                          int level) {
  require(p.backend == Backend::qp2, "backend", "qp_coset_id needs qp2");
  i64 bits = static_cast<i64>(ctx.qp_vmax) + level;
  require(bits >= 0 && bits <= ctx.qp_digits(), "domain",
          "coset level outside representable digits");
  return p.qp & ((bigint(1) << static_cast<unsigned>(bits)) - 1);
}

// Word metric d_S. euclid2: ceil of the Euclidean norm. qp2: the cyclic
// distance min(k, 128 - k) on H-coset offsets (a pseudo-metric constant on
// Z_2-cosets, which is the granularity every construction works at).
// coprod: ceil of |dx| within a common H-coset.
inline i64 word_distance(const GroupCtx& ctx, const GroupPoint& a,
                         const GroupPoint& b) {
  check_same_backend(a, b);
  switch (a.backend) {
    case Backend::euclid2:
      return ceil_sqrt(dist_sq(a, b));
    case Backend::qp2: {
      std::optional<int> k = qp_cyclic_offset(ctx, a, b);
      require(k.has_value(), "domain", "qp2 pair not in a common H-coset");
      return std::min<i64>(*k, kQpIndex - *k);
    }
    case Backend::coprod: {
      require(a.mask == b.mask, "domain",
              "coprod pair not in a common H-coset");
      Dyadic d = b.x - a.x;
      if (d.sign() < 0) d = -d;
      return d.ceil().convert_to<i64>();
    }
    case Backend::affine:
      fail("backend", "word metric undefined on the affine backend");
  }
  fail("backend", "bad backend enum");
}

// Ultrametric coset distance on qp2: min { n >= 0 : b - a in 2^(-7-n) Z_2 }.
inline i64 coset_distance(const GroupCtx& ctx, const GroupPoint& a,
                          const GroupPoint& b) {
  require(a.backend == Backend::qp2 && b.backend == Backend::qp2, "backend",
          "coset_distance is a qp2 operation");
  bigint m = ctx.qp_modulus();
  bigint d = (b.qp - a.qp) % m;
  if (d.sign() < 0) d += m;
  if (d.is_zero()) return 0;
  i64 val = static_cast<i64>(lsb(d)) - ctx.qp_vmax;
  return std::max<i64>(0, -val - kQpHLog);
}

// Modular function of the affine group under left Haar a^(-2) da db:
// right translation by g scales Haar by Delta(g) = a(g).
inline Dyadic modular_delta(const GroupPoint& g) {
  require(g.backend == Backend::affine, "backend",
          "modular_delta is an affine operation");
  return g.x;
}

inline std::string point_to_text(const GroupPoint& p) {
  switch (p.backend) {
    case Backend::euclid2:
      return "e2(" + p.x.to_text() + "," + p.y.to_text() + ")";
    case Backend::qp2: {
      std::string hex;
      bigint m = p.qp;
      if (m.is_zero()) hex = "0";
      while (!m.is_zero()) {
        static const char* digits = "0123456789abcdef";
        bigint low = m & 0xF;
        hex.push_back(digits[low.convert_to<unsigned>()]);
        m >>= 4;
      }
      return "qp(" + std::string(hex.rbegin(), hex.rend()) + ")";
    }
    case Backend::coprod: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%llx",
                    static_cast<unsigned long long>(p.mask));
      return "cp(" + std::string(buf) + "," + p.x.to_text() + ")";
    }
    case Backend::affine:
      return "af(" + p.x.to_text() + "," + p.y.to_text() + ")";
  }
  fail("backend", "bad backend enum");
}

inline GroupPoint point_from_text(const GroupCtx& ctx, const std::string& s) {
  auto body = [&](size_t taglen) {
    require(s.size() > taglen + 1 && s[taglen] == '(' && s.back() == ')',
            "parse", "bad point literal: " + s);
    return s.substr(taglen + 1, s.size() - taglen - 2);
  };
  auto split2 = [&](const std::string& inner) {
    size_t c = inner.find(',');
    require(c != std::string::npos, "parse", "bad point literal: " + s);
    return std::pair<std::string, std::string>(inner.substr(0, c),
                                               inner.substr(c + 1));
  };
  if (s.rfind("e2", 0) == 0) {
    auto [a, b] = split2(body(2));
    return make_euclid(Dyadic::from_text(a), Dyadic::from_text(b));
  }
  if (s.rfind("qp", 0) == 0) {
    std::string inner = body(2);
    bigint m = 0;
    for (char c : inner) {
      int d = c >= '0' && c <= '9'   ? c - '0'
              : c >= 'a' && c <= 'f' ? c - 'a' + 10
                                     : -1;
      require(d >= 0, "parse", "bad hex digit in point literal: " + s);
      m = (m << 4) | d;
    }
    return make_qp2(ctx, std::move(m));
  }
  if (s.rfind("cp", 0) == 0) {
    auto [a, b] = split2(body(2));
    u64 mask = 0;
    for (char c : a) {
      int d = c >= '0' && c <= '9'   ? c - '0'
              : c >= 'a' && c <= 'f' ? c - 'a' + 10
                                     : -1;
      require(d >= 0, "parse", "bad hex digit in point literal: " + s);
      mask = (mask << 4) | static_cast<u64>(d);
    }
    return make_coprod(mask, Dyadic::from_text(b));
  }
  if (s.rfind("af", 0) == 0) {
    auto [a, b] = split2(body(2));
    return make_affine(Dyadic::from_text(a), Dyadic::from_text(b));
  }
  fail("parse", "unknown point literal: " + s);
}

}  // namespace pmap

#endif  // POISSONMAPS_GROUP_HPP_
