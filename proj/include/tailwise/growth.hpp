#pragma once

#include "tailwise/cns_fit.hpp"
#include "tailwise/powerlaw.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace tailwise {

enum class GrowthModel { copy, ba };

/// Parameters of one growth run.
///
/// copy: one creator arrives per step and one attention event is then
/// allocated, uniformly over all creators with probability gamma and
/// proportionally to attention already received otherwise.
///
/// ba: Barabasi-Albert growth from a complete graph on m + 1 nodes, each new
/// node attaching m edges to distinct existing nodes with probability
/// proportional to degree.
struct GrowthConfig {
  GrowthModel model = GrowthModel::copy;
  std::size_t n_nodes = 100000;
  double gamma = 0.0;
  std::size_t m = 1;
  std::uint64_t seed = 1;
  /// copy model only: attention units a creator holds on arrival, counted in
  /// the proportional urn. 0 gives the exponent 1 + 1/(1 - gamma); 1 turns the
  /// process into Price's model with exponent 1 + 2/(1 - gamma).
  unsigned arrival_units = 0;

  /// Throws ConfigError on out-of-range parameters.
  void validate() const;
};

struct DegreeSequence {
  std::vector<std::uint64_t> counts;
  GrowthConfig config;
  /// copy: attention events allocated; ba: edges added after the seed graph.
  std::uint64_t steps = 0;
  /// Units present before the first step (copy) or the seed graph's degree
  /// sum (ba).
  std::uint64_t initial_total = 0;

  [[nodiscard]] std::uint64_t total() const;
  /// Counts >= 1 as a discrete sample.
  [[nodiscard]] Sample positive_sample() const;
};

enum class Regime { power_law, exponential };

struct TheoryPrediction {
  double gamma;
  double alpha_predicted; ///< +inf in the exponential regime
  Regime regime;
};

/// alpha = 1 + 1 / (1 - gamma) as a density exponent. gamma = 1 yields the
/// exponential regime; gamma outside [0, 1] throws DomainError.
TheoryPrediction theoretical_alpha(double gamma);

DegreeSequence simulate_copy(const GrowthConfig& cfg);
DegreeSequence simulate_ba(const GrowthConfig& cfg);
DegreeSequence simulate(const GrowthConfig& cfg);

/// Discrete threshold scan on the positive counts.
TailFit measure_exponent(const DegreeSequence& d, FitOptions opts = {});

/// Least-squares slope of log CCDF against log x over empirical CCDF points
/// with x in [lo, hi].
double ccdf_slope(const Sample& s, double lo, double hi);

struct SweepRow {
  double gamma;
  double alpha_pred;
  double alpha_mean; ///< NaN when no run produced a fit
  double alpha_sd;
  std::size_t n_runs; ///< runs that produced a fit
};

/// Runs seeds_per_gamma copy-model simulations per gamma (each in [0, 0.9])
/// and summarizes the measured exponents. Run r of a given gamma uses a seed
/// derived from (seed, gamma, r), so rows do not depend on the rest of the
/// list. Rows come back sorted by gamma.
std::vector<SweepRow> gamma_sweep(std::vector<double> gammas, std::size_t n_nodes,
                                  std::size_t seeds_per_gamma, std::uint64_t seed,
                                  const FitOptions& opts = {});

} // namespace tailwise
