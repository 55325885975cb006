#include "tailwise/alt_estimators.hpp"

#include "tailwise/errors.hpp"
#include "tailwise/parallel.hpp"
#include "tailwise/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace tailwise {

namespace {

void check_k(const Sample& s, std::size_t k) {
  if (k < 2 || k >= s.size())
    throw DomainError("k must satisfy 2 <= k < n (k=" + std::to_string(k)
                      + ", n=" + std::to_string(s.size()) + ")");
}

// First and second moments of the log-excesses of the top k values over the
// (k+1)-th largest.
struct LogMoments {
  double m1;
  double m2;
  double threshold;
};

LogMoments log_moments(const Sample& s, std::size_t k) {
  const auto x = s.values();
  const std::size_t n = x.size();
  const double threshold = x[n - k - 1];
  if (x[n - 1] == threshold)
    throw DegenerateTail("top k+1 order statistics are all equal");
  long double s1 = 0.0L;
  long double s2 = 0.0L;
  for (std::size_t i = n - k; i < n; ++i) {
    const long double y = std::log(x[i] / threshold);
    s1 += y;
    s2 += y * y;
  }
  const auto kd = static_cast<long double>(k);
  return {static_cast<double>(s1 / kd), static_cast<double>(s2 / kd), threshold};
}

std::optional<double> alpha_from_gamma(double gamma) {
  if (gamma > 0.0)
    return 1.0 + 1.0 / gamma;
  return std::nullopt;
}

// Mean of (M2(k) - 2 M1(k)^2)^2 over bootstrap resamples of size ns, for
// k = 0..ns-1 (entry k is the statistic for k top values). Replicates are
// split into a fixed number of chunks so the floating-point summation order
// does not depend on the thread count.
std::vector<double> bootstrap_criterion(const std::vector<double>& logs,
                                        std::size_t ns, std::size_t replicates,
                                        std::uint64_t seed, std::uint64_t stream0) {
  constexpr std::size_t chunks = 16;
  std::vector<std::vector<long double>> partial(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    auto& acc = partial[c];
    acc.assign(ns, 0.0L);
    std::vector<double> draw(ns);
    for (std::size_t r = c; r < replicates; r += chunks) {
      Rng rng{derive_seed(seed, stream0 + r)};
      for (auto& v : draw)
        v = logs[rng.below(logs.size())];
      std::sort(draw.begin(), draw.end(), std::greater<>{});
      long double sum1 = 0.0L;
      long double sum2 = 0.0L;
      for (std::size_t k = 1; k < ns; ++k) {
        sum1 += draw[k - 1];
        sum2 += static_cast<long double>(draw[k - 1]) * draw[k - 1];
        const long double t = draw[k];
        const auto kd = static_cast<long double>(k);
        const long double m1 = sum1 / kd - t;
        const long double m2 = sum2 / kd - 2.0L * t * (sum1 / kd) + t * t;
        const long double d = m2 - 2.0L * m1 * m1;
        acc[k] += d * d;
      }
    }
  });
  std::vector<double> out(ns, std::numeric_limits<double>::infinity());
  for (std::size_t k = 1; k < ns; ++k) {
    long double total = 0.0L;
    for (const auto& acc : partial)
      total += acc[k];
    out[k] = static_cast<double>(total / static_cast<long double>(replicates));
  }
  return out;
}

std::size_t argmin_k(const std::vector<double>& crit) {
  std::size_t best = 2;
  for (std::size_t k = 2; k < crit.size(); ++k) {
    if (crit[k] < crit[best])
      best = k;
  }
  return best;
}

} // namespace

std::string_view to_string(TailMethod method) {
  switch (method) {
    case TailMethod::hill:
      return "hill";
    case TailMethod::adjusted_hill:
      return "adjusted_hill";
    case TailMethod::moments:
      return "moments";
    case TailMethod::cns:
      return "cns";
  }
  return "unknown";
}

TailIndexEstimate hill(const Sample& s, std::size_t k) {
  check_k(s, k);
  const auto lm = log_moments(s, k);
  const double gamma = lm.m1;
  const auto alpha = alpha_from_gamma(gamma);
  std::optional<double> se;
  if (alpha)
    se = (*alpha - 1.0) / std::sqrt(static_cast<double>(k));
  return {TailMethod::hill, gamma, alpha, k, lm.threshold, se};
}

TailIndexEstimate moments(const Sample& s, std::size_t k) {
  check_k(s, k);
  const auto lm = log_moments(s, k);
  const double spread = lm.m2 - lm.m1 * lm.m1;
  if (!(spread > 0.0))
    throw DegenerateTail("log-excesses have zero variance");
  const double gamma = lm.m1 + 1.0 - 0.5 / (1.0 - lm.m1 * lm.m1 / lm.m2);
  const auto alpha = alpha_from_gamma(gamma);
  std::optional<double> se;
  if (alpha) {
    // Var(gamma_M) ~ (1 + gamma^2) / k for gamma > 0; delta method to alpha.
    se = std::sqrt((1.0 + gamma * gamma) / static_cast<double>(k)) / (gamma * gamma);
  }
  return {TailMethod::moments, gamma, alpha, k, lm.threshold, se};
}

TailIndexEstimate adjusted_hill(const Sample& s, std::size_t k,
                                const AdjustedHillOptions& opts) {
  check_k(s, k);
  if (!(opts.rho < 0.0))
    throw ConfigError("rho must be negative");
  const auto x = s.values();
  const std::size_t n = x.size();
  const std::size_t lo = std::max<std::size_t>(2, k / 4);
  std::vector<std::size_t> grid;
  const std::size_t points = std::max<std::size_t>(opts.grid_points, 2);
  for (std::size_t i = 0; i < points; ++i) {
    const auto kp = lo + static_cast<std::size_t>(std::llround(
                           static_cast<double>(k - lo) * static_cast<double>(i)
                           / static_cast<double>(points - 1)));
    if (grid.empty() || grid.back() != kp)
      grid.push_back(kp);
  }
  if (grid.size() < 5)
    throw InsufficientGrid("adjusted Hill needs at least 5 distinct grid points, got "
                           + std::to_string(grid.size()));

  // Prefix sums of the logs of the largest values.
  std::vector<long double> top(k + 1, 0.0L);
  for (std::size_t i = 1; i <= k; ++i)
    top[i] = top[i - 1] + std::log(static_cast<long double>(x[n - i]));

  // Least squares of hill(k') on (k'/n)^-rho, weighted by k' since the
  // variance of hill(k') is proportional to 1/k'.
  long double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto kp : grid) {
    const long double t = std::log(static_cast<long double>(x[n - kp - 1]));
    const long double g = top[kp] / static_cast<long double>(kp) - t;
    const long double reg = std::pow(static_cast<long double>(kp) / n, -opts.rho);
    const auto w = static_cast<long double>(kp);
    sw += w;
    sx += w * reg;
    sy += w * g;
    sxx += w * reg * reg;
    sxy += w * reg * g;
  }
  const long double denom = sw * sxx - sx * sx;
  if (!(denom > 0.0L))
    throw InsufficientGrid("adjusted Hill grid has no spread");
  const long double slope = (sw * sxy - sx * sy) / denom;
  const auto gamma = static_cast<double>((sy - slope * sx) / sw);
  if (x[n - 1] == x[n - k - 1])
    throw DegenerateTail("top k+1 order statistics are all equal");
  return {TailMethod::adjusted_hill, gamma, alpha_from_gamma(gamma), k,
          x[n - k - 1], std::nullopt};
}

DoubleBootstrapResult double_bootstrap(const Sample& s, std::uint64_t seed,
                                       const DoubleBootstrapOptions& opts) {
  const std::size_t n = s.size();
  if (n < 500)
    throw SampleTooSmall("double bootstrap needs at least 500 observations");
  if (opts.replicates == 0)
    throw ConfigError("double bootstrap needs at least one replicate");
  const auto n1 = static_cast<std::size_t>(
    std::floor(std::pow(static_cast<double>(n), opts.n1_exponent)));
  const auto n2 = static_cast<std::size_t>(
    std::floor(static_cast<double>(n1) * static_cast<double>(n1) / static_cast<double>(n)));
  if (n2 < 4)
    throw SampleTooSmall("second bootstrap sample size is too small");

  std::vector<double> logs(n);
  for (std::size_t i = 0; i < n; ++i)
    logs[i] = std::log(s[i]);

  const auto k1 = argmin_k(bootstrap_criterion(logs, n1, opts.replicates, seed, 0));
  const auto k2 = argmin_k(
    bootstrap_criterion(logs, n2, opts.replicates, seed, opts.replicates));

  const double lk1 = std::log(static_cast<double>(k1));
  const double ln1 = std::log(static_cast<double>(n1));
  const double ratio = lk1 / (2.0 * ln1 - lk1);
  const double correction = std::pow(ratio * ratio, (ln1 - lk1) / ln1);
  const double raw = static_cast<double>(k1) * static_cast<double>(k1)
                     / static_cast<double>(k2) * correction;
  const double clamped = std::clamp(std::floor(raw), 2.0, static_cast<double>(n - 1));
  return {static_cast<std::size_t>(clamped), n1, n2, k1, k2};
}

std::size_t double_bootstrap_k(const Sample& s, std::uint64_t seed) {
  return double_bootstrap(s, seed).k_star;
}

EstimatorComparison estimator_comparison(const Sample& s, std::uint64_t seed,
                                         const ComparisonOptions& opts) {
  if (s.size() < 500)
    throw SampleTooSmall("estimator comparison needs at least 500 observations");
  EstimatorComparison out{};
  const TailFit fit = select_xmin(s, opts.cns);
  out.estimates.push_back({TailMethod::cns, 1.0 / (fit.alpha - 1.0), fit.alpha,
                           fit.n_tail, fit.xmin, fit.std_error});
  out.k_star = opts.k_override ? *opts.k_override
                               : double_bootstrap(s, seed, opts.bootstrap).k_star;
  out.estimates.push_back(hill(s, out.k_star));
  out.estimates.push_back(adjusted_hill(s, out.k_star, opts.adjusted));
  out.estimates.push_back(moments(s, out.k_star));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& e : out.estimates) {
    if (e.alpha) {
      lo = std::min(lo, *e.alpha);
      hi = std::max(hi, *e.alpha);
    }
  }
  out.alpha_spread = hi >= lo ? hi - lo : 0.0;
  out.flagged = out.alpha_spread > opts.flag_spread;
  return out;
}

} // namespace tailwise
