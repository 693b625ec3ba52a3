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

#ifndef POISSONMAPS_RNG_HPP_
#define POISSONMAPS_RNG_HPP_

#include <string>

#include "poissonmaps/bits.hpp"
#include "poissonmaps/common.hpp"

namespace pmap {

// SplitMix-style counter generator. Fully documented so results are
// reproducible from the README alone:
//   mix64(x): x ^= x>>33; x *= 0xff51afd7ed558ccd;
//             x ^= x>>33; x *= 0xc4ceb9fe1a85ec53; x ^= x>>33
//   key(seed, stream) = mix64(seed + PHI*(stream+1)),  PHI = 0x9e3779b97f4a7c15
//   output i (0-based)  = mix64(key + PHI*(i+1))
// Child streams re-key with the parent key as seed, so any tree of draws is
// reproducible from (seed, path of stream tags) alone and independent draws
// never share a counter.
class Rng {
 public:
  static constexpr u64 kPhi = 0x9e3779b97f4a7c15ULL;

  static u64 mix64(u64 x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ULL;
    x ^= x >> 33;
    return x;
  }

  Rng(u64 seed, u64 stream) : key_(mix64(seed + kPhi * (stream + 1))), i_(0) {}

  // Independent derived generator; tag identifies the purpose of the branch.
  Rng child(u64 tag) const { return Rng(key_, tag); }

  u64 next_u64() { return mix64(key_ + kPhi * (++i_)); }

  // w fresh random bits as a fraction in [0,1).
  UFrac next_bits(i64 w) {
    require(w >= 0, "domain", "next_bits width");
    bigint n = 0;
    i64 got = 0;
    while (got + 64 <= w) {
      n = (n << 64) | bigint(next_u64());
      got += 64;
    }
    if (got < w) {
      i64 rem = w - got;
      n = (n << static_cast<unsigned>(rem)) |
          bigint(next_u64() >> (64 - rem));
    }
    return UFrac(std::move(n), w);
  }

  // Exact uniform integer in [0, n) by rejection on ceil(log2 n) bits.
  bigint next_below(const bigint& n) {
    require(n >= 1, "domain", "next_below modulus");
    if (n == 1) return 0;
    bigint top = n - 1;
    i64 w = static_cast<i64>(msb(top)) + 1;
    for (;;) {
      bigint v = next_bits(w).num();
      if (v < n) return v;
    }
  }

  // Bernoulli(p) for exact dyadic p in [0,1]: draws exactly the bits needed.
  bool next_bernoulli(const Dyadic& p) {
    require(p.sign() >= 0 && p <= Dyadic(1), "domain",
            "bernoulli parameter out of [0,1]");
    if (p.is_zero()) return false;
    if (p == Dyadic(1)) return true;
    i64 w = -p.exp();
    require(w > 0, "domain", "bernoulli parameter must be dyadic in (0,1)");
    bigint threshold = p.ldexp(w).floor();  // p * 2^w, exact
    return next_bits(w).num() < threshold;
  }

  // Diagnostics only; never used inside codecs.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  u64 key() const { return key_; }

 private:
  u64 key_;
  u64 i_;
};

// Stable stream tags. Every sampling site keys its own child so adding a new
// consumer never perturbs existing streams.
namespace streamtag {
constexpr u64 kCount = 1;
constexpr u64 kLocation = 2;
constexpr u64 kMarkerCore = 3;
constexpr u64 kMarkerFitted = 4;
constexpr u64 kMarkerDense = 5;
constexpr u64 kOutside = 6;
constexpr u64 kRetry = 7;
constexpr u64 kCoupling = 8;
constexpr u64 kSplit = 9;
constexpr u64 kHarness = 10;
constexpr u64 kLabel = 11;
}  // namespace streamtag

// FNV-1a over a label, for deriving stream tags from strings.
inline u64 stream_of(const std::string& label) {
  u64 h = 1469598103934665603ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace pmap

#endif  // POISSONMAPS_RNG_HPP_
