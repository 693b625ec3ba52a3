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

#ifndef POISSONMAPS_BITS_HPP_
#define POISSONMAPS_BITS_HPP_

#include <string>
#include <utility>
#include <vector>

#include "poissonmaps/common.hpp"
#include "poissonmaps/dyadic.hpp"

namespace pmap {

// A binary fraction 0.b1 b2 ... bW with an explicit width W >= 0.
// Width is part of the value: 0.10 and 0.1 compare equal as reals but are
// different carriers of randomness. All codec streams are UFrac values.
class UFrac {
 public:
  UFrac() : num_(0), width_(0) {}
  UFrac(bigint num, i64 width) : num_(std::move(num)), width_(width) {
    require(width_ >= 0, "domain", "negative UFrac width");
    require(num_.sign() >= 0, "domain", "negative UFrac numerator");
    require(num_ < (bigint(1) << static_cast<unsigned>(width_)), "domain",
            "UFrac numerator out of range");
  }

  const bigint& num() const { return num_; }
  i64 width() const { return width_; }
  bool is_zero() const { return num_.is_zero(); }

  // value as exact dyadic in [0,1)
  Dyadic value() const { return Dyadic::fraction(num_, width_); }

  // 1-based bit position after the point; i in [1, width].
  int bit(i64 i) const {
    require(i >= 1 && i <= width_, "domain", "UFrac bit index out of range");
    return static_cast<int>((num_ >> static_cast<unsigned>(width_ - i)) & 1);
  }

  // Addition / subtraction mod 1 after aligning to the wider width.
  friend UFrac mod1_add(const UFrac& a, const UFrac& b) {
    i64 w = std::max(a.width_, b.width_);
    bigint n = (a.num_ << static_cast<unsigned>(w - a.width_)) +
               (b.num_ << static_cast<unsigned>(w - b.width_));
    bigint m = bigint(1) << static_cast<unsigned>(w);
    if (n >= m) n -= m;
    return UFrac(std::move(n), w);
  }
  friend UFrac mod1_sub(const UFrac& a, const UFrac& b) {
    i64 w = std::max(a.width_, b.width_);
    bigint n = (a.num_ << static_cast<unsigned>(w - a.width_)) -
               (b.num_ << static_cast<unsigned>(w - b.width_));
    if (n.sign() < 0) n += bigint(1) << static_cast<unsigned>(w);
    return UFrac(std::move(n), w);
  }

  // Round-robin bit distribution: 1-based bit i goes to stream (i-1) mod n.
  // split(0.1011, 2) = (0.11, 0.01).
  std::vector<UFrac> split(int n) const {
    require(n >= 1, "domain", "split stream count must be >= 1");
    std::vector<bigint> nums(n, bigint(0));
    std::vector<i64> widths(n, 0);
    for (i64 i = 1; i <= width_; ++i) {
      int k = static_cast<int>((i - 1) % n);
      nums[k] = (nums[k] << 1) | bit(i);
      ++widths[k];
    }
    std::vector<UFrac> out;
    out.reserve(n);
    for (int k = 0; k < n; ++k)
      out.emplace_back(std::move(nums[k]), widths[k]);
    return out;
  }

  // Exact inverse of split: stream widths must differ by at most one and be
  // weakly decreasing, as split produces.
  static UFrac merge(const std::vector<UFrac>& parts) {
    int n = static_cast<int>(parts.size());
    require(n >= 1, "domain", "merge needs at least one stream");
    i64 total = 0;
    for (const auto& p : parts) total += p.width_;
    bigint num = 0;
    std::vector<i64> used(n, 0);
    for (i64 i = 1; i <= total; ++i) {
      int k = static_cast<int>((i - 1) % n);
      require(used[k] < parts[k].width_, "domain",
              "merge stream widths inconsistent with round-robin layout");
      num = (num << 1) | parts[k].bit(++used[k]);
    }
    for (int k = 0; k < n; ++k)
      require(used[k] == parts[k].width_, "domain",
              "merge stream widths inconsistent with round-robin layout");
    return UFrac(std::move(num), total);
  }

  // Bits of `a` followed by bits of `b`.
  friend UFrac concat(const UFrac& a, const UFrac& b) {
    return UFrac((a.num_ << static_cast<unsigned>(b.width_)) + b.num_,
                 a.width_ + b.width_);
  }
  // First w bits / remaining bits.
  std::pair<UFrac, UFrac> split_at(i64 w) const {
    require(w >= 0 && w <= width_, "domain", "split_at width out of range");
    bigint head = num_ >> static_cast<unsigned>(width_ - w);
    bigint tail = num_ - (head << static_cast<unsigned>(width_ - w));
    return {UFrac(std::move(head), w), UFrac(std::move(tail), width_ - w)};
  }

  friend bool operator==(const UFrac& a, const UFrac& b) {
    return a.width_ == b.width_ && a.num_ == b.num_;
  }

  // Canonical text: "u<width>:<hex numerator, no padding>".
  std::string to_text() const {
    return "u" + std::to_string(width_) + ":" + hex_digits(num_);
  }
  static UFrac from_text(const std::string& s) {
    require(!s.empty() && s[0] == 'u', "parse", "UFrac literal: " + s);
    size_t colon = s.find(':');
    require(colon != std::string::npos, "parse", "UFrac literal: " + s);
    i64 w = 0;
    for (size_t i = 1; i < colon; ++i) {
      require(s[i] >= '0' && s[i] <= '9', "parse", "UFrac literal: " + s);
      w = w * 10 + (s[i] - '0');
    }
    bigint n = 0;
    for (size_t i = colon + 1; i < s.size(); ++i) {
      char c = s[i];
      int d = c >= '0' && c <= '9'   ? c - '0'
              : c >= 'a' && c <= 'f' ? c - 'a' + 10
                                     : -1;
      require(d >= 0, "parse", "UFrac literal: " + s);
      n = (n << 4) | d;
    }
    return UFrac(std::move(n), w);
  }

  static std::string hex_digits(bigint m) {
    require(m.sign() >= 0, "domain", "hex_digits needs nonnegative input");
    if (m.is_zero()) return "0";
    std::string hex;
    while (!m.is_zero()) {
      static const char* digits = "0123456789abcdef";
      bigint low = m & 0xF;
      hex.push_back(digits[low.convert_to<unsigned>()]);
      m >>= 4;
    }
    return std::string(hex.rbegin(), hex.rend());
  }

 private:
  bigint num_;
  i64 width_;
};

// A uniform integer carrier: value V in [0, M), modulus M >= 1. Codec state
// flows through this type; every operation is an exact bijection on the
// stated domains so that encode/decode compose to the identity bit for bit.
class Radix {
 public:
  Radix() : v_(0), m_(1) {}
  Radix(bigint v, bigint m) : v_(std::move(v)), m_(std::move(m)) {
    require(m_ >= 1, "domain", "Radix modulus must be >= 1");
    require(v_.sign() >= 0 && v_ < m_, "domain", "Radix value out of range");
  }
  static Radix from_ufrac(const UFrac& u) {
    return Radix(u.num(), bigint(1) << static_cast<unsigned>(u.width()));
  }

  const bigint& value() const { return v_; }
  const bigint& modulus() const { return m_; }
  bool is_trivial() const { return m_ == 1; }

  // If this carrier has modulus exactly 2^w, read it back as a fraction.
  UFrac to_ufrac() const {
    require(!m_.is_zero(), "domain", "empty Radix");
    bigint a = m_;
    unsigned w = lsb(a);
    require((bigint(1) << w) == m_, "domain",
            "Radix modulus is not a power of two");
    return UFrac(v_, static_cast<i64>(w));
  }

  // Pop a uniform residue mod n off the low end. Requires n | M.
  // (V = q*n + r) <-> (q uniform on [0,M/n), r uniform on [0,n), independent.
  bigint take_mod(const bigint& n) {
    require(n >= 1, "domain", "take_mod modulus must be >= 1");
    require(m_ % n == 0, "domain", "take_mod requires divisibility");
    bigint r = v_ % n;
    v_ /= n;
    m_ /= n;
    return r;
  }
  // Exact inverse of take_mod.
  void put_mod(const bigint& r, const bigint& n) {
    require(n >= 1 && r.sign() >= 0 && r < n, "domain",
            "put_mod residue out of range");
    v_ = v_ * n + r;
    m_ *= n;
  }

  // Pop / push w low bits as a UFrac stream.
  UFrac take_bits(i64 w) {
    require(w >= 0, "domain", "take_bits width");
    return UFrac(take_mod(bigint(1) << static_cast<unsigned>(w)), w);
  }
  void put_bits(const UFrac& u) {
    put_mod(u.num(), bigint(1) << static_cast<unsigned>(u.width()));
  }

  // Injective rescale to a larger modulus N >= M: V' = floor(V*N/M).
  // Not measure preserving (the image may miss residues); used only where the
  // round trip matters and the distribution slack is budgeted elsewhere.
  void scale_up(const bigint& n) {
    require(n >= m_, "domain", "scale_up target must be >= current modulus");
    v_ = (v_ * n) / m_;
    m_ = n;
  }
  // Exact inverse of scale_up from original modulus m: V = ceil(V'*m/N).
  void scale_down(const bigint& m) {
    require(m >= 1 && m <= m_, "domain",
            "scale_down target must be in [1, modulus]");
    v_ = (v_ * m + m_ - 1) / m_;
    m_ = m;
  }

  friend bool operator==(const Radix& a, const Radix& b) {
    return a.v_ == b.v_ && a.m_ == b.m_;
  }

  std::string to_text() const {
    return "r" + UFrac::hex_digits(v_) + "/" + UFrac::hex_digits(m_);
  }

 private:
  bigint v_;
  bigint m_;
};

// Count-CDF pairing: an exact bijection between [0, sum(c)) and the disjoint
// union over sectors s of [0, c_s). Encodes "which count" plus "residual
// randomness within that count" as one uniform carrier.
struct WeightedSector {
  // V in [0, sum(c)) -> (sector, residual in [0, c_sector)).
  static std::pair<size_t, bigint> open(const bigint& v,
                                        const std::vector<bigint>& c) {
    bigint acc = 0;
    for (size_t s = 0; s < c.size(); ++s) {
      require(c[s].sign() >= 0, "domain", "negative sector weight");
      if (v < acc + c[s]) return {s, v - acc};
      acc += c[s];
    }
    fail("domain", "WeightedSector value exceeds total weight");
  }
  // Inverse of open.
  static bigint close(size_t sector, const bigint& residual,
                      const std::vector<bigint>& c) {
    require(sector < c.size(), "domain", "sector index out of range");
    require(residual.sign() >= 0 && residual < c[sector], "domain",
            "sector residual out of range");
    bigint acc = 0;
    for (size_t s = 0; s < sector; ++s) acc += c[s];
    return acc + residual;
  }
  static bigint total(const std::vector<bigint>& c) {
    bigint t = 0;
    for (const auto& w : c) t += w;
    return t;
  }
};

// Lehmer-code permutation rank in [0, n!). perm maps slot -> element index.
inline bigint perm_rank(const std::vector<size_t>& perm) {
  size_t n = perm.size();
  bigint rank = 0;
  for (size_t i = 0; i < n; ++i) {
    size_t smaller = 0;
    for (size_t j = i + 1; j < n; ++j)
      if (perm[j] < perm[i]) ++smaller;
    rank = rank * (n - i) + smaller;
  }
  return rank;
}

inline std::vector<size_t> perm_unrank(bigint rank, size_t n) {
  std::vector<bigint> digits(n, bigint(0));
  for (size_t i = n; i >= 1; --i) {
    digits[i - 1] = rank % (n - i + 1);
    rank /= (n - i + 1);
  }
  std::vector<size_t> pool(n);
  for (size_t i = 0; i < n; ++i) pool[i] = i;
  std::vector<size_t> perm(n);
  for (size_t i = 0; i < n; ++i) {
    size_t d = digits[i].convert_to<size_t>();
    perm[i] = pool[d];
    pool.erase(pool.begin() + static_cast<long>(d));
  }
  return perm;
}

inline bigint factorial(size_t n) {
  bigint f = 1;
  for (size_t i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace pmap

#endif  // POISSONMAPS_BITS_HPP_
