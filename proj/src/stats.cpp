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

#include "poissonmaps/stats.hpp"

#include <cmath>
#include <limits>

namespace pmap {
namespace {

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 10000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
  const double tiny = std::numeric_limits<double>::min() / 1e-30;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_p(double a, double x) {
  require(a > 0.0 && x >= 0.0, "domain", "gamma_p arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double gamma_q(double a, double x) {
  require(a > 0.0 && x >= 0.0, "domain", "gamma_q arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

double ks_sf(double d, std::size_t n) {
  if (d <= 0.0) return 1.0;
  double sn = std::sqrt(static_cast<double>(n));
  double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 200; ++j) {
    double term = std::exp(-2.0 * lambda * lambda * j * j);
    sum += sign * term;
    if (term < 1e-14) break;
    sign = -sign;
  }
  double sf = 2.0 * sum;
  return std::min(1.0, std::max(0.0, sf));
}

double ks_stat_uniform(std::vector<double> xs) {
  require(!xs.empty(), "domain", "KS statistic needs samples");
  std::sort(xs.begin(), xs.end());
  double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double lo = xs[i] - static_cast<double>(i) / n;
    double hi = static_cast<double>(i + 1) / n - xs[i];
    d = std::max(d, std::max(lo, hi));
  }
  return d;
}

GofResult chi2_gof(const std::vector<double>& observed,
                   const std::vector<double>& expected, int fitted_params,
                   double min_expected) {
  require(observed.size() == expected.size() && !observed.empty(), "domain",
          "chi2_gof table shape");
  // Pool from the right edge first (the thin Poisson tail), then sweep any
  // interior cell still below threshold into its left neighbor.
  std::vector<double> obs(observed), exp2(expected);
  while (exp2.size() > 1 && exp2.back() < min_expected) {
    exp2[exp2.size() - 2] += exp2.back();
    obs[obs.size() - 2] += obs.back();
    exp2.pop_back();
    obs.pop_back();
  }
  for (std::size_t i = exp2.size(); i-- > 1;) {
    if (exp2[i] < min_expected) {
      exp2[i - 1] += exp2[i];
      obs[i - 1] += obs[i];
      exp2.erase(exp2.begin() + static_cast<long>(i));
      obs.erase(obs.begin() + static_cast<long>(i));
    }
  }
  if (exp2.size() > 1 && exp2.front() < min_expected) {
    exp2[1] += exp2[0];
    obs[1] += obs[0];
    exp2.erase(exp2.begin());
    obs.erase(obs.begin());
  }
  GofResult r;
  r.cells = exp2.size();
  for (std::size_t i = 0; i < exp2.size(); ++i) {
    require(exp2[i] > 0.0, "domain", "chi2_gof zero expectation after pooling");
    double diff = obs[i] - exp2[i];
    r.stat += diff * diff / exp2[i];
  }
  r.df = static_cast<int>(exp2.size()) - 1 - fitted_params;
  if (r.df < 1) r.df = 1;
  r.p = chi2_sf(r.stat, static_cast<double>(r.df));
  return r;
}

}  // namespace pmap
