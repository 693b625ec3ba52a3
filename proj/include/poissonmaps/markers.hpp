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
//
// Marker detection: seed classes, cores, landmarks, fitted shells, and
// harvestability, derived from a configuration alone. Detection evaluates
// the same seed predicates the planted sampler conditions on, so a plant's
// advertised marker is exactly what detect reports.

#ifndef POISSONMAPS_MARKERS_HPP_
#define POISSONMAPS_MARKERS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "poissonmaps/geometry.hpp"
#include "poissonmaps/pointproc.hpp"
#include "poissonmaps/region.hpp"
#include "poissonmaps/seeds.hpp"

namespace pmap {

// One detected seed class and the marker data it carries.
struct MarkerClass {
  // Seed locations: certified superset with a confirming witness on euclid2,
  // exact on qp2/coprod.
  SeedClassCover cover;
  // Intersection of radius-3 balls over the class. Exact on qp2/coprod; on
  // euclid2 a certified superset (balls around witnesses) kept for reports,
  // with membership queries answered by core_membership instead.
  Region core;
  // The unique configuration point certified inside the core, when exactly
  // one exists.
  std::optional<GroupPoint> landmark;
  // Word shell {f1 <= d_S(landmark, .) <= f2}; Empty without a landmark.
  Region fitted;
  u64 fitted_count = 0;
  bool harvestable = false;  // landmark present and fitted_count == 1
  bool two_shell = false;    // landmark present and fitted_count == 2
};

struct MarkerCatalog {
  Backend backend = Backend::euclid2;
  MarkerGeometry geom;
  Region window;  // the scanned window (the configuration's carrier)
  std::vector<MarkerClass> classes;
  // Union of word shells {5 <= d_S(landmark, .) <= f2 + 1} over landmarked
  // classes: the zone whose contents never influence detection results.
  Region bumper_union;
  Region f_star;   // union of fitted shells over harvestable classes
  Region f_2star;  // union of fitted shells over two-shell classes
};

// Scans c's carrier for seed classes (locations whose e2-ball the carrier
// covers) and derives per-class marker data. A configuration point whose
// core membership stays undecided at the refinement cap is an error
// ("uncertified"), never a guess; a certified core of word diameter above
// kCoreRadius is reported as an invariant breach ("internal").
MarkerCatalog detect(const GroupCtx& ctx, const PointConfiguration& c,
                     const MarkerGeometry& geom, int depth = 12);

struct SeparationReport {
  bool ok = true;
  std::vector<std::string> breaches;
};

// Separation law over a catalog: distinct classes certified beyond word
// distance d2 + e2 - 2, every class of certified diameter below kClassSep,
// and on qp2 at most one class per H-coset. Returns breaches, never throws.
SeparationReport verify_separation(const GroupCtx& ctx,
                                   const MarkerCatalog& catalog);

// Exact stability regression: c and c2 must agree outside
// catalog.bumper_union and share the carrier ("domain" otherwise); true iff
// detection on c2 reproduces the catalog's landmarks (and therefore its
// fitted shells) exactly. Fitted counts are free to differ.
bool bumper_stability_check(const GroupCtx& ctx, const PointConfiguration& c,
                            const PointConfiguration& c2,
                            const MarkerCatalog& catalog, int depth = 12);

// Deterministic one-line-per-class text report for the verify suites.
std::string catalog_to_text(const MarkerCatalog& catalog);

}  // namespace pmap

#endif  // POISSONMAPS_MARKERS_HPP_
