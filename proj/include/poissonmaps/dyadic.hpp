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

#ifndef POISSONMAPS_DYADIC_HPP_
#define POISSONMAPS_DYADIC_HPP_

#include <cmath>
#include <compare>
#include <string>

#include "poissonmaps/common.hpp"

namespace pmap {

// Exact dyadic rational m * 2^e (m odd or zero; e = 0 when m = 0).
// Group translations, metric comparisons, and codec bookkeeping all run on
// this type so that no coordinate is ever rounded implicitly. Width is
// unbounded: deep mantissas produced by the bijective codecs are legal values.
class Dyadic {
 public:
  Dyadic() : mant_(0), exp_(0) {}
  explicit Dyadic(i64 n) : mant_(n), exp_(0) { normalize(); }
  Dyadic(bigint mant, i64 exp) : mant_(std::move(mant)), exp_(exp) {
    normalize();
  }

  static Dyadic zero() { return Dyadic(); }
  static Dyadic one() { return Dyadic(1); }
  // value = num / 2^bits
  static Dyadic fraction(bigint num, i64 bits) {
    return Dyadic(std::move(num), -bits);
  }

  const bigint& mant() const { return mant_; }
  i64 exp() const { return exp_; }
  bool is_zero() const { return mant_.is_zero(); }
  int sign() const { return mant_.sign(); }

  // 2-adic valuation; only defined for nonzero values.
  i64 val2() const {
    require(!is_zero(), "domain", "valuation of zero");
    return exp_;
  }

  Dyadic operator-() const { return Dyadic(-mant_, exp_); }

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    i64 e = std::min(a.exp_, b.exp_);
    bigint m = (a.mant_ << static_cast<unsigned>(a.exp_ - e)) +
               (b.mant_ << static_cast<unsigned>(b.exp_ - e));
    return Dyadic(std::move(m), e);
  }
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b) {
    if (a.is_zero() || b.is_zero()) return Dyadic();
    return Dyadic(a.mant_ * b.mant_, a.exp_ + b.exp_);
  }

  Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }
  Dyadic& operator-=(const Dyadic& o) { return *this = *this - o; }

  // Multiplication by 2^k.
  Dyadic ldexp(i64 k) const {
    if (is_zero()) return Dyadic();
    return Dyadic(mant_, exp_ + k);
  }

  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
    int sa = a.sign(), sb = b.sign();
    if (sa != sb) return sa <=> sb;
    if (sa == 0) return std::strong_ordering::equal;
    // Same nonzero sign: compare shifted mantissas exactly.
    i64 e = std::min(a.exp_, b.exp_);
    bigint ma = a.mant_ << static_cast<unsigned>(a.exp_ - e);
    bigint mb = b.mant_ << static_cast<unsigned>(b.exp_ - e);
    return ma < mb    ? std::strong_ordering::less
           : ma == mb ? std::strong_ordering::equal
                      : std::strong_ordering::greater;
  }
  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.mant_ == b.mant_ && (a.is_zero() || a.exp_ == b.exp_);
  }

  // Largest integer <= value. Shifts run on magnitudes so the result does
  // not depend on the bignum's negative-shift convention.
  bigint floor() const {
    if (exp_ >= 0) return mant_ << static_cast<unsigned>(exp_);
    bigint a = abs(mant_);
    bigint q = a >> static_cast<unsigned>(-exp_);
    if (sign() >= 0) return q;
    bool exact = (q << static_cast<unsigned>(-exp_)) == a;
    if (!exact) ++q;
    return -q;
  }
  bigint ceil() const { return -((-*this).floor()); }

  // Nonnegative residue value mod 2^k, as a dyadic in [0, 2^k).
  Dyadic mod_pow2(i64 k) const {
    Dyadic f = ldexp(-k);
    Dyadic frac = f - Dyadic(f.floor(), 0);
    return frac.ldexp(k);
  }

  double to_double() const {
    if (is_zero()) return 0.0;
    bigint a = abs(mant_);
    // Round via the top 62 mantissa bits; enough for every diagnostic use.
    i64 bits = static_cast<i64>(msb(a)) + 1;
    i64 drop = bits - 62;
    if (drop <= 0)
      return std::ldexp(static_cast<double>(mant_.convert_to<i64>()),
                        static_cast<int>(exp_));
    bigint top = a >> static_cast<unsigned>(drop);
    double v = std::ldexp(static_cast<double>(top.convert_to<i64>()),
                          static_cast<int>(exp_ + drop));
    return sign() < 0 ? -v : v;
  }

  // Canonical text form: [-]0x<hex mantissa>p<decimal exponent>. Exact.
  std::string to_text() const {
    if (is_zero()) return "0x0p0";
    std::string hex;
    bigint m = abs(mant_);
    while (!m.is_zero()) {
      static const char* digits = "0123456789abcdef";
      bigint low = m & 0xF;
      hex.push_back(digits[low.convert_to<unsigned>()]);
      m >>= 4;
    }
    std::string out = sign() < 0 ? "-0x" : "0x";
    out.append(hex.rbegin(), hex.rend());
    out += 'p';
    out += std::to_string(exp_);
    return out;
  }

  static Dyadic from_text(const std::string& s) {
    size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) neg = s[i++] == '-';
    require(i + 1 < s.size() && s[i] == '0' && s[i + 1] == 'x',
            "parse", "dyadic literal must start with 0x: " + s);
    i += 2;
    bigint m = 0;
    size_t start = i;
    for (; i < s.size() && s[i] != 'p'; ++i) {
      char c = s[i];
      int d = c >= '0' && c <= '9'   ? c - '0'
              : c >= 'a' && c <= 'f' ? c - 'a' + 10
                                     : -1;
      require(d >= 0, "parse", "bad hex digit in dyadic literal: " + s);
      m = (m << 4) | d;
    }
    require(i > start && i < s.size() && s[i] == 'p', "parse",
            "dyadic literal missing exponent: " + s);
    i64 e = 0;
    bool eneg = false;
    ++i;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) eneg = s[i++] == '-';
    size_t estart = i;
    for (; i < s.size(); ++i) {
      require(s[i] >= '0' && s[i] <= '9', "parse",
              "bad exponent in dyadic literal: " + s);
      e = e * 10 + (s[i] - '0');
    }
    require(i > estart, "parse", "dyadic literal missing exponent: " + s);
    if (eneg) e = -e;
    if (neg) m = -m;
    return Dyadic(std::move(m), e);
  }

 private:
  void normalize() {
    if (mant_.is_zero()) {
      exp_ = 0;
      return;
    }
    bigint a = abs(mant_);
    unsigned tz = lsb(a);
    if (tz > 0) {
      mant_ >>= tz;
      exp_ += tz;
    }
  }

  bigint mant_;
  i64 exp_;
};

// Exact squared Euclidean norm helper for metric comparisons:
// returns (dx^2 + dy^2) as (mantissa, exponent) with exponent even-aligned
// comparisons done by the callers. Provided as a plain struct to avoid
// accidental lossy conversions.
struct DyadicSq {
  bigint mant;  // nonnegative
  i64 exp;      // value = mant * 2^exp

  static DyadicSq norm2(const Dyadic& dx, const Dyadic& dy) {
    Dyadic s = dx * dx + dy * dy;
    if (s.is_zero()) return {bigint(0), 0};
    return {s.mant(), s.exp()};
  }

  // Compare value against integer n^2 exactly.
  std::strong_ordering cmp_int_sq(i64 n) const {
    bigint rhs = bigint(n) * n;
    bigint lhs = mant;
    i64 e = exp;
    if (e >= 0)
      lhs <<= static_cast<unsigned>(e);
    else
      rhs <<= static_cast<unsigned>(-e);
    return lhs < rhs    ? std::strong_ordering::less
           : lhs == rhs ? std::strong_ordering::equal
                        : std::strong_ordering::greater;
  }
};

}  // namespace pmap

#endif  // POISSONMAPS_DYADIC_HPP_
