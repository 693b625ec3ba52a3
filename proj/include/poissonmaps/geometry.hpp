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

#ifndef POISSONMAPS_GEOMETRY_HPP_
#define POISSONMAPS_GEOMETRY_HPP_

#include <optional>
#include <string>
#include <vector>

#include "poissonmaps/region.hpp"

namespace pmap {

// Radii (in word-metric units) of the marker construction: fitted shell
// (f1, f2], dense shell (d1, d2], empty shell (d2, e2]. The constraints
// C1-C4 keep detection, class separation, and bumper stability sound; C5 is
// the extra demand of split maps (enough fitted-shell mass for the coupling).
struct MarkerGeometry {
  i64 f1 = 6;
  i64 f2 = 10;
  i64 d1 = 16;
  i64 d2 = 20;
  i64 e2 = 60;
};

inline constexpr i64 kCoreRadius = 3;
inline constexpr i64 kClassSep = 2;

inline MarkerGeometry default_geometry(Backend b) {
  MarkerGeometry g;
  if (b == Backend::qp2) g.e2 = kQpDiamH;
  return g;
}

// Split-map feasibility data for C5: the fitted-shell point count is
// Poisson(alpha * haar(fitted shell)) and must exceed the coupling threshold
// c_r for the deletion ratio r.
struct SplitCheck {
  double alpha = 1.0;
  double c_r = 0.0;
};

inline std::vector<std::string> validate_marker_geometry(
    const GroupCtx& ctx, const MarkerGeometry& g,
    const std::optional<SplitCheck>& split = std::nullopt) {
  std::vector<std::string> out;
  auto num = [](i64 v) { return std::to_string(v); };
  if (g.f1 < 6 || g.f2 < g.f1)
    out.push_back("C1: need f1 >= 6 and f2 >= f1, got f1 = " + num(g.f1) +
                  ", f2 = " + num(g.f2));
  if (g.d1 < g.f2 + 6)
    out.push_back("C2: need d1 >= f2 + 6, got d1 = " + num(g.d1) +
                  ", f2 + 6 = " + num(g.f2 + 6));
  if (g.d2 < g.d1 + 4)
    out.push_back("C3: need d2 >= d1 + 4, got d2 = " + num(g.d2) +
                  ", d1 + 4 = " + num(g.d1 + 4));
  if (!(g.e2 - g.d2 > 2 * g.d1))
    out.push_back("C4: need e2 - d2 > 2*d1, got e2 - d2 = " +
                  num(g.e2 - g.d2) + ", 2*d1 = " + num(2 * g.d1));
  if (ctx.backend == Backend::qp2 && g.e2 > kQpDiamH)
    out.push_back("qp2: e2 = " + num(g.e2) + " exceeds diam H = " +
                  num(kQpDiamH));
  if (split) {
    // Fitted shells are word shells {f1 <= d_S <= f2}, the band (f1 - 1, f2].
    Measure m =
        haar_measure(ctx, Region::shell(identity(ctx), g.f1 - 1, g.f2));
    double mass = split->alpha * m.to_double();
    if (!(mass > split->c_r))
      out.push_back("C5: need alpha*haar(fitted shell) > C_r, got " +
                    std::to_string(mass) + " vs C_r = " +
                    std::to_string(split->c_r));
  }
  return out;
}

}  // namespace pmap

#endif  // POISSONMAPS_GEOMETRY_HPP_
