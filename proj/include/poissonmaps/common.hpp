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

#ifndef POISSONMAPS_COMMON_HPP_
#define POISSONMAPS_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace pmap {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i32 = std::int32_t;
using i64 = std::int64_t;
using bigint = boost::multiprecision::cpp_int;

// All precondition violations, representation problems, and certification
// failures surface as Error. `kind` is a stable machine-readable slug; the
// same slugs are exposed through the C API error codes.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

[[noreturn]] inline void fail(const std::string& kind, const std::string& msg) {
  throw Error(kind, msg);
}

inline void require(bool ok, const std::string& kind, const std::string& msg) {
  if (!ok) fail(kind, msg);
}

}  // namespace pmap

#endif  // POISSONMAPS_COMMON_HPP_
