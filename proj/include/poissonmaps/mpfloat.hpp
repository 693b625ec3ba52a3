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

#ifndef POISSONMAPS_MPFLOAT_HPP_
#define POISSONMAPS_MPFLOAT_HPP_

#include <gmp.h>
#include <mpfr.h>

#include <utility>

#include "poissonmaps/common.hpp"
#include "poissonmaps/dyadic.hpp"

namespace pmap {

// RAII wrapper over mpfr_t with the rounding mode explicit at every call
// site. Two distinct uses, both needing control a generic float type hides:
//  * codecs evaluate transcendental maps at a pinned precision with
//    round-to-nearest, making the quantized map itself the specification;
//  * exact samplers bracket quantities with RNDD/RNDU pairs and escalate
//    precision until a comparison is decisive.
class Mp {
 public:
  explicit Mp(mpfr_prec_t prec = 128) {
    mpfr_init2(x_, prec);
    mpfr_set_zero(x_, 1);
  }
  Mp(const Mp& o) {
    mpfr_init2(x_, mpfr_get_prec(o.x_));
    mpfr_set(x_, o.x_, MPFR_RNDN);
  }
  Mp(Mp&& o) noexcept {
    mpfr_init2(x_, 2);
    mpfr_swap(x_, o.x_);
  }
  Mp& operator=(const Mp& o) {
    if (this != &o) {
      mpfr_set_prec(x_, mpfr_get_prec(o.x_));
      mpfr_set(x_, o.x_, MPFR_RNDN);
    }
    return *this;
  }
  Mp& operator=(Mp&& o) noexcept {
    mpfr_swap(x_, o.x_);
    return *this;
  }
  ~Mp() { mpfr_clear(x_); }

  mpfr_ptr raw() { return x_; }
  mpfr_srcptr raw() const { return x_; }
  mpfr_prec_t prec() const { return mpfr_get_prec(x_); }

  // Exact embedding of a dyadic (fails if prec is too small to hold it).
  static Mp exact(const Dyadic& d, mpfr_prec_t prec) {
    Mp r(prec);
    if (d.is_zero()) return r;
    bigint a = abs(d.mant());
    mpfr_prec_t need = static_cast<mpfr_prec_t>(msb(a)) + 1;
    require(need <= prec, "precision", "dyadic does not fit requested precision");
    set_bigint(r.x_, d.mant());
    mpfr_mul_2si(r.x_, r.x_, static_cast<long>(d.exp()), MPFR_RNDN);
    return r;
  }
  static Mp from_int(long v, mpfr_prec_t prec) {
    Mp r(prec);
    mpfr_set_si(r.x_, v, MPFR_RNDN);
    return r;
  }

  // Every mpfr value is an exact dyadic rational; read it back losslessly.
  Dyadic to_dyadic() const {
    require(mpfr_number_p(x_), "domain", "mpfr value is not finite");
    if (mpfr_zero_p(x_)) return Dyadic();
    mpz_t z;
    mpz_init(z);
    mpfr_exp_t e = mpfr_get_z_2exp(z, x_);
    bigint m;
    bigint_from_mpz(m, z);
    mpz_clear(z);
    return Dyadic(std::move(m), static_cast<i64>(e));
  }

  static Mp add(const Mp& a, const Mp& b, mpfr_prec_t p, mpfr_rnd_t r) {
    Mp o(p);
    mpfr_add(o.x_, a.x_, b.x_, r);
    return o;
  }
  static Mp sub(const Mp& a, const Mp& b, mpfr_prec_t p, mpfr_rnd_t r) {
    Mp o(p);
    mpfr_sub(o.x_, a.x_, b.x_, r);
    return o;
  }
  static Mp mul(const Mp& a, const Mp& b, mpfr_prec_t p, mpfr_rnd_t r) {
    Mp o(p);
    mpfr_mul(o.x_, a.x_, b.x_, r);
    return o;
  }
  static Mp div(const Mp& a, const Mp& b, mpfr_prec_t p, mpfr_rnd_t r) {
    Mp o(p);
    mpfr_div(o.x_, a.x_, b.x_, r);
    return o;
  }
  static Mp div_ui(const Mp& a, unsigned long b, mpfr_prec_t p, mpfr_rnd_t r) {
    Mp o(p);
    mpfr_div_ui(o.x_, a.x_, b, r);
    return o;
  }
  static Mp neg(const Mp& a, mpfr_prec_t p, mpfr_rnd_t r) {
    Mp o(p);
    mpfr_neg(o.x_, a.x_, r);
    return o;
  }
  static Mp exp(const Mp& a, mpfr_prec_t p, mpfr_rnd_t r) {
    Mp o(p);
    mpfr_exp(o.x_, a.x_, r);
    return o;
  }
  static Mp log(const Mp& a, mpfr_prec_t p, mpfr_rnd_t r) {
    Mp o(p);
    mpfr_log(o.x_, a.x_, r);
    return o;
  }
  static Mp sqrt(const Mp& a, mpfr_prec_t p, mpfr_rnd_t r) {
    Mp o(p);
    mpfr_sqrt(o.x_, a.x_, r);
    return o;
  }
  static Mp pi(mpfr_prec_t p, mpfr_rnd_t r) {
    Mp o(p);
    mpfr_const_pi(o.x_, r);
    return o;
  }
  static Mp sin(const Mp& a, mpfr_prec_t p, mpfr_rnd_t r) {
    Mp o(p);
    mpfr_sin(o.x_, a.x_, r);
    return o;
  }
  static Mp cos(const Mp& a, mpfr_prec_t p, mpfr_rnd_t r) {
    Mp o(p);
    mpfr_cos(o.x_, a.x_, r);
    return o;
  }
  // atan2(y, x) in (-pi, pi].
  static Mp atan2(const Mp& y, const Mp& x, mpfr_prec_t p, mpfr_rnd_t r) {
    Mp o(p);
    mpfr_atan2(o.x_, y.x_, x.x_, r);
    return o;
  }

  int cmp(const Mp& o) const { return mpfr_cmp(x_, o.x_); }
  int sign() const { return mpfr_sgn(x_); }
  bool is_zero() const { return mpfr_zero_p(x_) != 0; }
  double to_double() const { return mpfr_get_d(x_, MPFR_RNDN); }

 private:
  static void set_bigint(mpfr_ptr dst, const bigint& m) {
    bigint a = abs(m);
    mpz_t z;
    mpz_init(z);
    mpz_set_str(z, a.str(0, std::ios_base::hex).c_str(), 16);
    if (m.sign() < 0) mpz_neg(z, z);
    mpfr_set_z(dst, z, MPFR_RNDN);
    mpz_clear(z);
  }
  static void bigint_from_mpz(bigint& dst, const mpz_t z) {
    char* s = mpz_get_str(nullptr, 16, z);
    dst = bigint(std::string(s[0] == '-' ? "-0x" : "0x") +
                 (s[0] == '-' ? s + 1 : s));
    void (*freefunc)(void*, size_t);
    mp_get_memory_functions(nullptr, nullptr, &freefunc);
    freefunc(s, 0);
  }

  mpfr_t x_;
};

// Closed interval [lo, hi] with outward directed rounding. Positivity
// helpers assume nonnegative operands, which is all the samplers need.
struct MpIv {
  Mp lo, hi;

  static MpIv exact(const Dyadic& d, mpfr_prec_t p) {
    return MpIv{Mp::exact(d, p), Mp::exact(d, p)};
  }
  static MpIv of(Mp l, Mp h) { return MpIv{std::move(l), std::move(h)}; }
  static MpIv add(const MpIv& a, const MpIv& b, mpfr_prec_t p) {
    return MpIv{Mp::add(a.lo, b.lo, p, MPFR_RNDD),
                Mp::add(a.hi, b.hi, p, MPFR_RNDU)};
  }
  static MpIv sub(const MpIv& a, const MpIv& b, mpfr_prec_t p) {
    return MpIv{Mp::sub(a.lo, b.hi, p, MPFR_RNDD),
                Mp::sub(a.hi, b.lo, p, MPFR_RNDU)};
  }
  static MpIv mul_pos(const MpIv& a, const MpIv& b, mpfr_prec_t p) {
    return MpIv{Mp::mul(a.lo, b.lo, p, MPFR_RNDD),
                Mp::mul(a.hi, b.hi, p, MPFR_RNDU)};
  }
  static MpIv div_pos(const MpIv& a, const MpIv& b, mpfr_prec_t p) {
    return MpIv{Mp::div(a.lo, b.hi, p, MPFR_RNDD),
                Mp::div(a.hi, b.lo, p, MPFR_RNDU)};
  }
  static MpIv div_ui(const MpIv& a, unsigned long b, mpfr_prec_t p) {
    return MpIv{Mp::div_ui(a.lo, b, p, MPFR_RNDD),
                Mp::div_ui(a.hi, b, p, MPFR_RNDU)};
  }
  static MpIv exp_of(const MpIv& a, mpfr_prec_t p) {
    return MpIv{Mp::exp(a.lo, p, MPFR_RNDD), Mp::exp(a.hi, p, MPFR_RNDU)};
  }
  static MpIv neg(const MpIv& a, mpfr_prec_t p) {
    return MpIv{Mp::neg(a.hi, p, MPFR_RNDD), Mp::neg(a.lo, p, MPFR_RNDU)};
  }

  // -1 when hi < d, +1 when lo > d, 0 when d is inside (undecided).
  int cmp(const Dyadic& d) const {
    Dyadic l = lo.to_dyadic();
    if (l > d) return 1;
    Dyadic h = hi.to_dyadic();
    if (h < d) return -1;
    return 0;
  }
  double width() const {
    return hi.to_double() - lo.to_double();
  }
};

}  // namespace pmap

#endif  // POISSONMAPS_MPFLOAT_HPP_
