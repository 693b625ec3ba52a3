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

#ifndef POISSONMAPS_STATS_HPP_
#define POISSONMAPS_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <vector>

#include "poissonmaps/common.hpp"

namespace pmap {

// Regularized lower incomplete gamma P(a,x); Q = 1 - P. Series for x < a+1,
// Lentz continued fraction otherwise. Double precision is ample for p-values.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Survival function of the chi-square distribution with k dof.
inline double chi2_sf(double x, double k) { return gamma_q(k / 2.0, x / 2.0); }

// Asymptotic Kolmogorov-Smirnov survival function with the small-sample
// correction lambda = (sqrt(n) + 0.12 + 0.11/sqrt(n)) * d.
double ks_sf(double d, std::size_t n);

// One-sample KS statistic against U[0,1] for samples already in [0,1].
double ks_stat_uniform(std::vector<double> xs);

struct GofResult {
  double stat = 0.0;
  int df = 0;
  double p = 1.0;
  std::size_t cells = 0;  // after pooling
};

// Pearson chi-square against expected counts, pooling the tail (and any
// low-expectation cells, scanning from the end) so every pooled cell has
// expectation >= min_expected. df = cells - 1 - fitted_params.
GofResult chi2_gof(const std::vector<double>& observed,
                   const std::vector<double>& expected, int fitted_params = 0,
                   double min_expected = 5.0);

// Poisson pmf / cdf in doubles, for expected counts in GOF tables.
inline double poisson_pmf(u64 k, double lambda) {
  if (lambda <= 0.0) return k == 0 ? 1.0 : 0.0;
  return std::exp(static_cast<double>(k) * std::log(lambda) - lambda -
                  std::lgamma(static_cast<double>(k) + 1.0));
}

struct Moments {
  std::size_t n = 0;
  double mean = 0.0;
  double var = 0.0;  // unbiased
};

inline Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.n = xs.size();
  if (m.n == 0) return m;
  double s = 0.0;
  for (double x : xs) s += x;
  m.mean = s / static_cast<double>(m.n);
  if (m.n > 1) {
    double q = 0.0;
    for (double x : xs) q += (x - m.mean) * (x - m.mean);
    m.var = q / static_cast<double>(m.n - 1);
  }
  return m;
}

inline double dispersion_index(const std::vector<double>& xs) {
  Moments m = moments(xs);
  require(m.mean > 0.0, "domain", "dispersion index needs positive mean");
  return m.var / m.mean;
}

inline double correlation(const std::vector<double>& xs,
                          const std::vector<double>& ys) {
  require(xs.size() == ys.size() && xs.size() > 1, "domain",
          "correlation needs paired samples");
  Moments mx = moments(xs), my = moments(ys);
  require(mx.var > 0.0 && my.var > 0.0, "domain",
          "correlation needs nondegenerate samples");
  double c = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i)
    c += (xs[i] - mx.mean) * (ys[i] - my.mean);
  c /= static_cast<double>(xs.size() - 1);
  return c / std::sqrt(mx.var * my.var);
}

}  // namespace pmap

#endif  // POISSONMAPS_STATS_HPP_
