#include "tailwise/cns_fit.hpp"

#include "tailwise/errors.hpp"
#include "tailwise/parallel.hpp"
#include "tailwise/rng.hpp"
#include "tailwise/zeta.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace tailwise {

namespace {

constexpr double discrete_alpha_lo = 1.01;
constexpr double discrete_alpha_hi = 6.0;
constexpr double golden_tolerance = 1e-6;

bool is_integer(double v) {
  return std::floor(v) == v;
}

void require_integers(std::span<const double> values) {
  for (double v : values) {
    if (!is_integer(v))
      throw KindMismatch("discrete fit on non-integer value "
                         + std::to_string(v));
  }
}

// Golden-section maximization of f on [lo, hi].
template <class F>
double golden_max(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double continuous_loglik(double alpha, double xmin, double n, double sum_rel) {
  return n * std::log(alpha - 1.0) - n * std::log(xmin) - alpha * sum_rel;
}

double exact_discrete_alpha(double xmin, std::size_t n, double sum_log) {
  const auto nd = static_cast<double>(n);
  return golden_max(
    [&](double a) { return -nd * std::log(hurwitz_zeta(a, xmin)) - a * sum_log; },
    discrete_alpha_lo, discrete_alpha_hi, golden_tolerance);
}

MleFit discrete_fit_from_sums(double xmin, std::size_t n, double sum_log,
                              bool exact) {
  const auto nd = static_cast<double>(n);
  const double rel = sum_log - nd * std::log(xmin);
  if (!(rel > 0.0))
    throw DegenerateTail("every tail value equals xmin");
  double alpha;
  if (exact) {
    alpha = exact_discrete_alpha(xmin, n, sum_log);
  } else {
    const double shifted = sum_log - nd * std::log(xmin - 0.5);
    alpha = 1.0 + nd / shifted;
  }
  return MleFit{alpha, (alpha - 1.0) / std::sqrt(nd),
                discrete_loglik(alpha, xmin, n, sum_log)};
}

// Sorted sample viewed as runs of equal values, with suffix sums of logs.
struct Groups {
  std::vector<std::size_t> start; // start[g] = first index of group g; start[G] = n
  std::vector<double> value;
  std::vector<double> log_value;
  std::vector<long double> suffix_log; // per group: sum of ln x over indices >= start[g]

  explicit Groups(std::span<const double> x) {
    for (std::size_t i = 0; i < x.size();) {
      std::size_t j = i;
      while (j < x.size() && x[j] == x[i])
        ++j;
      start.push_back(i);
      value.push_back(x[i]);
      log_value.push_back(std::log(x[i]));
      i = j;
    }
    start.push_back(x.size());
    const auto groups = value.size();
    suffix_log.assign(groups + 1, 0.0L);
    for (std::size_t g = groups; g-- > 0;) {
      const auto count = static_cast<long double>(start[g + 1] - start[g]);
      suffix_log[g] = suffix_log[g + 1] + count * log_value[g];
    }
  }

  [[nodiscard]] std::size_t size() const {
    return value.size();
  }
};

// KS distance of the continuous fit at candidate group c, abandoned as soon as
// the running maximum exceeds `bound` (the result is then only a lower bound
// greater than `bound`). `hint` is a group where a previous candidate broke
// its bound; adjacent candidates usually deviate most at the same place, so it
// is tried first and updated on exit. The rest is visited coarse-to-fine.
double continuous_ks(const Groups& gr, std::size_t c, double alpha, double bound,
                     std::size_t& hint) {
  const std::size_t groups = gr.size();
  const std::size_t j = gr.start[c];
  const double m = static_cast<double>(gr.start[groups] - j);
  const double log_xmin = gr.log_value[c];
  const double slope = alpha - 1.0;
  double run = 0.0;
  auto visit = [&](std::size_t g) {
    const double model_cdf = -std::expm1(-slope * (gr.log_value[g] - log_xmin));
    const double below = static_cast<double>(gr.start[g] - j) / m;
    const double upto = static_cast<double>(gr.start[g + 1] - j) / m;
    run = std::max({run, std::abs(upto - model_cdf), std::abs(model_cdf - below)});
    return run > bound;
  };
  if (hint >= c && hint < groups && visit(hint))
    return run;
  const std::size_t len = groups - c;
  std::size_t stride = 1;
  while (stride * 64 < len)
    stride <<= 1;
  for (std::size_t off = 0; off < len; off += stride) {
    if (visit(c + off)) {
      hint = c + off;
      return run;
    }
  }
  for (std::size_t s = stride >> 1; s >= 1; s >>= 1) {
    for (std::size_t off = s; off < len; off += 2 * s) {
      if (visit(c + off)) {
        hint = c + off;
        return run;
      }
    }
  }
  return run;
}

// Discrete KS with an incrementally maintained Hurwitz zeta; sequential with
// the same early exit.
double discrete_ks(const Groups& gr, std::size_t c, double alpha, double bound) {
  const std::size_t groups = gr.size();
  const std::size_t j = gr.start[c];
  const double m = static_cast<double>(gr.start[groups] - j);
  const double z0 = hurwitz_zeta(alpha, gr.value[c]);
  double z = z0;
  double prev = gr.value[c];
  double run = 0.0;
  for (std::size_t g = c; g < groups; ++g) {
    const double v = gr.value[g];
    if (v - prev <= 32.0) {
      for (double k = prev; k < v; k += 1.0)
        z -= std::pow(k, -alpha);
    } else {
      z = hurwitz_zeta(alpha, v);
    }
    prev = v;
    const double ccdf_at = z / z0;
    const double ccdf_next = (z - std::pow(v, -alpha)) / z0;
    const double below = static_cast<double>(gr.start[g] - j) / m;
    const double upto = static_cast<double>(gr.start[g + 1] - j) / m;
    run = std::max({run, std::abs(upto - (1.0 - ccdf_next)),
                    std::abs(below - (1.0 - ccdf_at))});
    if (run > bound)
      return run;
  }
  return run;
}

TailFit make_fit(const Sample& s, double xmin, const MleFit& mle, double ks) {
  const auto first = s.lower_index(xmin);
  return TailFit{mle.alpha, xmin, s.size() - first, ks, mle.std_error,
                 mle.loglik, s.size(), s.kind()};
}

} // namespace

void FitOptions::validate() const {
  if (min_tail < 2)
    throw ConfigError("min_tail must be at least 2");
  if (xmin_override && !(*xmin_override > 0.0))
    throw ConfigError("xmin override must be positive");
  if (candidate_cap && *candidate_cap == 0)
    throw ConfigError("candidate cap must be positive");
}

MleFit mle_alpha_continuous(std::span<const double> tail, double xmin) {
  if (tail.empty())
    throw EmptySample("empty tail");
  if (!(xmin > 0.0))
    throw DomainError("xmin must be positive");
  long double sum = 0.0L;
  for (double v : tail) {
    if (v < xmin)
      throw DomainError("tail value below xmin");
    sum += std::log(static_cast<long double>(v) / xmin);
  }
  if (!(sum > 0.0L))
    throw DegenerateTail("every tail value equals xmin");
  const auto n = static_cast<double>(tail.size());
  const double alpha = 1.0 + n / static_cast<double>(sum);
  return MleFit{alpha, (alpha - 1.0) / std::sqrt(n),
                continuous_loglik(alpha, xmin, n, static_cast<double>(sum))};
}

MleFit mle_alpha_continuous(const Sample& tail, double xmin) {
  return mle_alpha_continuous(tail.values(), xmin);
}

double discrete_loglik(double alpha, double xmin, std::size_t n, double sum_log) {
  return -static_cast<double>(n) * std::log(hurwitz_zeta(alpha, xmin))
         - alpha * sum_log;
}

MleFit mle_alpha_discrete(std::span<const double> tail, double xmin, bool exact) {
  if (tail.empty())
    throw EmptySample("empty tail");
  if (xmin < 1.0 || !is_integer(xmin))
    throw KindMismatch("discrete xmin must be an integer >= 1");
  require_integers(tail);
  long double sum = 0.0L;
  for (double v : tail) {
    if (v < xmin)
      throw DomainError("tail value below xmin");
    sum += std::log(static_cast<long double>(v));
  }
  return discrete_fit_from_sums(xmin, tail.size(), static_cast<double>(sum), exact);
}

MleFit mle_alpha_discrete(const Sample& tail, double xmin, bool exact) {
  return mle_alpha_discrete(tail.values(), xmin, exact);
}

TailFit fit_at(const Sample& s, double xmin, const FitOptions& opts) {
  opts.validate();
  const auto first = s.lower_index(xmin);
  const auto tail = s.values().subspan(first);
  if (tail.size() < 2)
    throw SampleTooSmall("fewer than 2 observations at or above xmin");
  const MleFit mle = opts.kind == Kind::continuous
                       ? mle_alpha_continuous(tail, xmin)
                       : mle_alpha_discrete(tail, xmin, opts.discrete_exact);
  const PowerLawModel model{mle.alpha, xmin, opts.kind};
  return make_fit(s, xmin, mle, ks_distance(tail, model));
}

TailFit select_xmin(const Sample& s, const FitOptions& opts) {
  opts.validate();
  if (opts.xmin_override)
    return fit_at(s, *opts.xmin_override, opts);
  if (s.size() < opts.min_tail)
    throw SampleTooSmall("sample has " + std::to_string(s.size())
                         + " observations; at least "
                         + std::to_string(opts.min_tail) + " required");
  if (opts.kind == Kind::discrete)
    require_integers(s.values());

  const Groups gr{s.values()};
  const std::size_t n = s.size();

  // Candidate groups: tail large enough and not every tail value equal.
  std::vector<std::size_t> candidates;
  for (std::size_t g = 0; g + 1 < gr.size(); ++g) {
    if (n - gr.start[g] >= opts.min_tail)
      candidates.push_back(g);
  }
  if (candidates.empty())
    throw DegenerateTail("no candidate threshold leaves a non-degenerate tail");
  if (opts.candidate_cap && candidates.size() > *opts.candidate_cap) {
    const std::size_t cap = *opts.candidate_cap;
    std::vector<std::size_t> thinned;
    thinned.reserve(cap);
    for (std::size_t i = 0; i < cap; ++i)
      thinned.push_back(candidates[i * candidates.size() / cap]);
    candidates = std::move(thinned);
  }

  const bool continuous = opts.kind == Kind::continuous;
  auto alpha_at = [&](std::size_t g) {
    const auto m = n - gr.start[g];
    const auto sum_log = static_cast<double>(gr.suffix_log[g]);
    if (continuous) {
      const long double rel = gr.suffix_log[g]
                              - static_cast<long double>(m) * gr.log_value[g];
      return 1.0 + static_cast<double>(m) / static_cast<double>(rel);
    }
    return discrete_fit_from_sums(gr.value[g], m, sum_log, opts.discrete_exact).alpha;
  };
  std::size_t hint = 0;
  auto ks_at = [&](std::size_t g, double alpha, double bound) {
    return continuous ? continuous_ks(gr, g, alpha, bound, hint)
                      : discrete_ks(gr, g, alpha, bound);
  };

  double best_ks = std::numeric_limits<double>::infinity();
  std::size_t best_group = candidates.front();
  double best_alpha = 0.0;
  auto consider = [&](std::size_t g, double alpha, double ks) {
    if (ks < best_ks || (ks == best_ks && g < best_group)) {
      best_ks = ks;
      best_group = g;
      best_alpha = alpha;
    }
  };

  // Seed the bound with a sparse subset, then scan everything.
  const std::size_t probe_step = std::max<std::size_t>(1, candidates.size() / 32);
  std::vector<double> alphas(candidates.size(), 0.0);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    alphas[i] = alpha_at(candidates[i]);
  for (std::size_t i = 0; i < candidates.size(); i += probe_step) {
    const auto g = candidates[i];
    consider(g, alphas[i], ks_at(g, alphas[i], std::numeric_limits<double>::infinity()));
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (i % probe_step == 0)
      continue;
    const auto g = candidates[i];
    const double ks = ks_at(g, alphas[i], best_ks);
    if (ks <= best_ks)
      consider(g, alphas[i], ks);
  }

  const double xmin = gr.value[best_group];
  const auto m = n - gr.start[best_group];
  const auto md = static_cast<double>(m);
  MleFit mle{};
  mle.alpha = best_alpha;
  mle.std_error = (best_alpha - 1.0) / std::sqrt(md);
  if (continuous) {
    const long double rel = gr.suffix_log[best_group]
                            - static_cast<long double>(m) * gr.log_value[best_group];
    mle.loglik = continuous_loglik(best_alpha, xmin, md, static_cast<double>(rel));
  } else {
    mle.loglik = discrete_loglik(best_alpha, xmin, m,
                                 static_cast<double>(gr.suffix_log[best_group]));
  }
  return make_fit(s, xmin, mle, best_ks);
}

Sample gof_replicate(const Sample& s, const TailFit& fit, std::uint64_t seed) {
  const auto body_end = s.lower_index(fit.xmin);
  const auto n = s.size();
  const double p_tail = static_cast<double>(n - body_end) / static_cast<double>(n);
  if (body_end == 0 && p_tail < 1.0)
    throw DomainError("fit is inconsistent with the sample");
  const PowerLawModel model = fit.model();
  Rng rng{seed};
  std::vector<double> draws;
  draws.reserve(n);
  while (draws.size() < n) {
    if (rng.uniform() < p_tail) {
      const double x = model.quantile(rng.uniform());
      if (std::isfinite(x))
        draws.push_back(x);
    } else {
      draws.push_back(s[static_cast<std::size_t>(rng.below(body_end))]);
    }
  }
  return make_sample(std::move(draws), s.kind()).sample;
}

GofResult gof_pvalue(const Sample& s, const TailFit& fit, std::size_t n_boot,
                     std::uint64_t seed, const FitOptions& opts) {
  if (n_boot < 100)
    throw ConfigError("goodness of fit needs at least 100 bootstrap replicates");
  opts.validate();
  std::vector<double> replicate_ks(n_boot, 0.0);
  parallel_for(n_boot, [&](std::size_t b) {
    const Sample rep = gof_replicate(s, fit, derive_seed(seed, b));
    try {
      replicate_ks[b] = select_xmin(rep, opts).ks;
    } catch (const Error&) {
      replicate_ks[b] = std::numeric_limits<double>::infinity();
    }
  });
  std::size_t exceed = 0;
  std::size_t failed = 0;
  for (double d : replicate_ks) {
    if (d >= fit.ks)
      ++exceed;
    if (std::isinf(d))
      ++failed;
  }
  return GofResult{static_cast<double>(exceed) / static_cast<double>(n_boot),
                   n_boot, fit.ks, seed, failed};
}

double power_law_proportion(const Sample& s, const TailFit& fit) {
  return static_cast<double>(fit.n_tail) / static_cast<double>(s.size());
}

} // namespace tailwise
