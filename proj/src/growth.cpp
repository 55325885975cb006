#include "tailwise/growth.hpp"

#include "tailwise/errors.hpp"
#include "tailwise/parallel.hpp"
#include "tailwise/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace tailwise {

void GrowthConfig::validate() const {
  if (model == GrowthModel::copy) {
    if (!(gamma >= 0.0 && gamma <= 1.0))
      throw ConfigError("gamma must lie in [0, 1]");
    if (n_nodes < 1000)
      throw ConfigError("copy model needs at least 1000 nodes");
    if (arrival_units > 1)
      throw ConfigError("arrival_units must be 0 or 1");
  } else {
    if (m < 1)
      throw ConfigError("m must be at least 1");
    if (n_nodes <= m)
      throw ConfigError("n_nodes must exceed m");
  }
}

std::uint64_t DegreeSequence::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

Sample DegreeSequence::positive_sample() const {
  std::vector<double> values;
  values.reserve(counts.size());
  for (auto c : counts) {
    if (c >= 1)
      values.push_back(static_cast<double>(c));
  }
  return make_sample(std::move(values), Kind::discrete).sample;
}

TheoryPrediction theoretical_alpha(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0))
    throw DomainError("gamma must lie in [0, 1]");
  if (gamma == 1.0)
    return {gamma, std::numeric_limits<double>::infinity(), Regime::exponential};
  return {gamma, 1.0 + 1.0 / (1.0 - gamma), Regime::power_law};
}

DegreeSequence simulate_copy(const GrowthConfig& cfg) {
  cfg.validate();
  if (cfg.model != GrowthModel::copy)
    throw ConfigError("simulate_copy called with a non-copy config");
  const std::size_t n = cfg.n_nodes;
  Rng rng{cfg.seed};
  DegreeSequence out;
  out.config = cfg;
  out.counts.assign(n, 0);
  // One entry per unit of attention ever granted; a uniform draw from it is a
  // draw proportional to attention.
  std::vector<std::uint32_t> urn;
  urn.reserve(n * (1 + cfg.arrival_units));
  for (std::size_t t = 0; t < n; ++t) {
    const auto arrival = static_cast<std::uint32_t>(t);
    if (cfg.arrival_units == 1) {
      out.counts[t] = 1;
      urn.push_back(arrival);
    }
    const bool explore = rng.uniform() < cfg.gamma;
    std::uint32_t target;
    if (explore || urn.empty())
      target = static_cast<std::uint32_t>(rng.below(t + 1));
    else
      target = urn[rng.below(urn.size())];
    ++out.counts[target];
    urn.push_back(target);
  }
  out.steps = n;
  out.initial_total = static_cast<std::uint64_t>(cfg.arrival_units) * n;
  return out;
}

DegreeSequence simulate_ba(const GrowthConfig& cfg) {
  cfg.validate();
  if (cfg.model != GrowthModel::ba)
    throw ConfigError("simulate_ba called with a non-ba config");
  const std::size_t n = cfg.n_nodes;
  const std::size_t m = cfg.m;
  Rng rng{cfg.seed};
  DegreeSequence out;
  out.config = cfg;
  out.counts.assign(n, 0);
  // Every edge contributes both endpoints, so a uniform draw is proportional
  // to degree.
  std::vector<std::uint32_t> endpoints;
  endpoints.reserve(2 * (m * (m + 1) / 2 + m * (n - m - 1)));
  for (std::size_t a = 0; a <= m; ++a) {
    for (std::size_t b = a + 1; b <= m; ++b) {
      endpoints.push_back(static_cast<std::uint32_t>(a));
      endpoints.push_back(static_cast<std::uint32_t>(b));
      ++out.counts[a];
      ++out.counts[b];
    }
  }
  out.initial_total = m * (m + 1);
  std::vector<std::uint32_t> targets;
  targets.reserve(m);
  for (std::size_t v = m + 1; v < n; ++v) {
    targets.clear();
    const auto pool = endpoints.size();
    while (targets.size() < m) {
      const auto t = endpoints[rng.below(pool)];
      if (std::find(targets.begin(), targets.end(), t) == targets.end())
        targets.push_back(t);
    }
    for (auto t : targets) {
      endpoints.push_back(t);
      endpoints.push_back(static_cast<std::uint32_t>(v));
      ++out.counts[t];
      ++out.counts[v];
    }
    out.steps += m;
  }
  return out;
}

DegreeSequence simulate(const GrowthConfig& cfg) {
  return cfg.model == GrowthModel::copy ? simulate_copy(cfg) : simulate_ba(cfg);
}

TailFit measure_exponent(const DegreeSequence& d, FitOptions opts) {
  if (d.counts.empty())
    throw EmptySample("empty degree sequence");
  opts.kind = Kind::discrete;
  return select_xmin(d.positive_sample(), opts);
}

double ccdf_slope(const Sample& s, double lo, double hi) {
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  std::size_t k = 0;
  for (const auto& p : empirical_ccdf(s)) {
    if (p.x < lo || p.x > hi)
      continue;
    const double x = std::log(p.x);
    const double y = std::log(p.fraction);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++k;
  }
  if (k < 2)
    throw DomainError("fewer than two CCDF points in the slope window");
  const auto kd = static_cast<double>(k);
  const double denom = kd * sxx - sx * sx;
  if (!(denom > 0.0))
    throw DomainError("slope window spans a single abscissa");
  return (kd * sxy - sx * sy) / denom;
}

std::vector<SweepRow> gamma_sweep(std::vector<double> gammas, std::size_t n_nodes,
                                  std::size_t seeds_per_gamma, std::uint64_t seed,
                                  const FitOptions& opts) {
  for (double g : gammas) {
    if (!(g >= 0.0 && g <= 0.9))
      throw ConfigError("sweep gamma values must lie in [0, 0.9]");
  }
  std::sort(gammas.begin(), gammas.end());
  const std::size_t jobs = gammas.size() * seeds_per_gamma;
  std::vector<double> measured(jobs, std::numeric_limits<double>::quiet_NaN());
  parallel_for(jobs, [&](std::size_t job) {
    const double gamma = gammas[job / seeds_per_gamma];
    const std::size_t run = job % seeds_per_gamma;
    GrowthConfig cfg;
    cfg.model = GrowthModel::copy;
    cfg.n_nodes = n_nodes;
    cfg.gamma = gamma;
    cfg.seed = derive_seed(derive_seed(seed, std::bit_cast<std::uint64_t>(gamma)), run);
    try {
      measured[job] = measure_exponent(simulate_copy(cfg), opts).alpha;
    } catch (const SampleTooSmall&) {
      // a degenerate run leaves its slot empty
    } catch (const DegenerateTail&) {
    }
  });
  std::vector<SweepRow> rows;
  rows.reserve(gammas.size());
  for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
    double sum = 0.0;
    std::size_t k = 0;
    for (std::size_t r = 0; r < seeds_per_gamma; ++r) {
      const double a = measured[gi * seeds_per_gamma + r];
      if (std::isfinite(a)) {
        sum += a;
        ++k;
      }
    }
    const double mean = k > 0 ? sum / static_cast<double>(k)
                              : std::numeric_limits<double>::quiet_NaN();
    double ss = 0.0;
    for (std::size_t r = 0; r < seeds_per_gamma; ++r) {
      const double a = measured[gi * seeds_per_gamma + r];
      if (std::isfinite(a))
        ss += (a - mean) * (a - mean);
    }
    const double sd = k > 1 ? std::sqrt(ss / static_cast<double>(k - 1)) : 0.0;
    rows.push_back({gammas[gi], theoretical_alpha(gammas[gi]).alpha_predicted,
                    mean, sd, k});
  }
  return rows;
}

} // namespace tailwise
