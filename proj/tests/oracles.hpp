#pragma once

// Slow, obviously-correct reimplementations used as test references.

#include <boost/math/special_functions/zeta.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "tailwise/powerlaw.hpp"

namespace oracle {

/// Model CDF: closed form for continuous; zeta(a) minus a partial sum of
/// k^-a for discrete.
inline double cdf(double alpha, double xmin, tailwise::Kind kind, double x) {
  if (kind == tailwise::Kind::continuous)
    return x < xmin ? 0.0 : 1.0 - std::pow(x / xmin, 1.0 - alpha);
  if (x < xmin)
    return 0.0;
  auto tail_sum = [alpha](double from) {
    double partial = 0.0;
    for (double k = 1; k < from; ++k)
      partial += std::pow(k, -alpha);
    return boost::math::zeta(alpha) - partial;
  };
  return 1.0 - tail_sum(std::floor(x) + 1.0) / tail_sum(xmin);
}

/// KS distance with the empirical CDF found by counting. Continuous: both
/// sides of every observation. Discrete: every integer from xmin to the max.
inline double ks(const std::vector<double>& tail, double alpha, double xmin,
                 tailwise::Kind kind) {
  const auto m = static_cast<double>(tail.size());
  double d = 0.0;
  auto emp = [&](double x, bool strict) {
    double c = 0.0;
    for (double v : tail)
      c += strict ? (v < x) : (v <= x);
    return c / m;
  };
  if (kind == tailwise::Kind::continuous) {
    for (double x : tail) {
      const double f = cdf(alpha, xmin, kind, x);
      d = std::max({d, std::abs(emp(x, false) - f), std::abs(emp(x, true) - f)});
    }
  } else {
    const double top = *std::max_element(tail.begin(), tail.end());
    for (double k = xmin; k <= top; ++k)
      d = std::max(d, std::abs(emp(k, false) - cdf(alpha, xmin, kind, k)));
  }
  return d;
}

struct ScanResult {
  double xmin = std::numeric_limits<double>::quiet_NaN();
  double alpha = std::numeric_limits<double>::quiet_NaN();
};

/// Continuous threshold scan refitting from scratch at every distinct value.
inline ScanResult scan_xmin(const std::vector<double>& data, std::size_t min_tail) {
  std::vector<double> distinct = data;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  ScanResult best;
  double best_ks = std::numeric_limits<double>::infinity();
  for (double u : distinct) {
    std::vector<double> tail;
    for (double v : data)
      if (v >= u)
        tail.push_back(v);
    if (tail.size() < min_tail)
      continue;
    double sum = 0.0;
    for (double v : tail)
      sum += std::log(v / u);
    if (sum <= 0.0)
      continue;
    const double alpha = 1.0 + static_cast<double>(tail.size()) / sum;
    const double d = ks(tail, alpha, u, tailwise::Kind::continuous);
    if (d < best_ks) {
      best_ks = d;
      best = {u, alpha};
    }
  }
  return best;
}

struct Stats {
  double mean, sd, median, q25, q75, min, max;
};

/// Sort, then textbook formulas: n - 1 SD and linear-interpolation quantiles.
inline Stats stats(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  double mean = 0.0;
  for (double x : v)
    mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  auto q = [&](double p) {
    const double h = static_cast<double>(n - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, n - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return {mean, n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0,
          q(0.5), q(0.25), q(0.75), v.front(), v.back()};
}

/// Average ranks by counting, then 1 - 6 sum d^2 / (n (n^2 - 1)).
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = x.size();
  auto rank = [](const std::vector<double>& v, std::size_t i) {
    double less = 0.0;
    double equal = 0.0;
    for (double w : v) {
      less += w < v[i];
      equal += w == v[i];
    }
    return less + (equal + 1.0) / 2.0;
  };
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = rank(x, i) - rank(y, i);
    d2 += d * d;
  }
  const double nd = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nd * (nd * nd - 1.0));
}

} // namespace oracle
