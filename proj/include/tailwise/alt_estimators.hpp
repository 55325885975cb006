#pragma once

#include "tailwise/cns_fit.hpp"
#include "tailwise/powerlaw.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace tailwise {

enum class TailMethod { hill, adjusted_hill, moments, cns };

std::string_view to_string(TailMethod method);

/// Extreme-value index estimate. gamma is the index (1 / (alpha - 1) for a
/// power law); alpha is only set when gamma > 0.
struct TailIndexEstimate {
  TailMethod method;
  double gamma;
  std::optional<double> alpha;
  /// Order statistics used (n_tail for cns).
  std::size_t k_used;
  /// Threshold: the (k+1)-th largest value, or xmin for cns.
  double threshold;
  /// Asymptotic standard error of alpha, when one is defined.
  std::optional<double> std_error;
};

/// Mean log-excess of the top k order statistics over the (k+1)-th largest.
TailIndexEstimate hill(const Sample& s, std::size_t k);

/// Dekkers-Einmahl-de Haan moments estimator
/// gamma = M1 + 1 - 1/2 * (1 - M1^2 / M2)^-1.
TailIndexEstimate moments(const Sample& s, std::size_t k);

struct AdjustedHillOptions {
  /// Second-order parameter of the bias term (b * (k/n)^-rho).
  double rho = -1.0;
  /// Requested grid size; the grid holds the distinct k' in
  /// [max(2, k/4), k], evenly spaced.
  std::size_t grid_points = 20;
};

/// Hill estimates on a grid of k' <= k regressed on (k'/n)^-rho; the reported
/// gamma is the intercept, i.e. the estimate extrapolated to k' -> 0.
/// Throws InsufficientGrid when fewer than 5 distinct grid points exist.
TailIndexEstimate adjusted_hill(const Sample& s, std::size_t k,
                                const AdjustedHillOptions& opts = {});

struct DoubleBootstrapOptions {
  std::size_t replicates = 200;
  double n1_exponent = 0.95;
};

struct DoubleBootstrapResult {
  std::size_t k_star;
  std::size_t n1;
  std::size_t n2;
  std::size_t k1;
  std::size_t k2;
};

/// Data-driven choice of k from two bootstrap sample sizes n1 = n^0.95 and
/// n2 = n1^2 / n, each minimizing the mean of (M2(k) - 2 M1(k)^2)^2.
/// Needs n >= 500.
DoubleBootstrapResult double_bootstrap(const Sample& s, std::uint64_t seed,
                                       const DoubleBootstrapOptions& opts = {});
std::size_t double_bootstrap_k(const Sample& s, std::uint64_t seed);

struct ComparisonOptions {
  FitOptions cns;
  AdjustedHillOptions adjusted;
  DoubleBootstrapOptions bootstrap;
  /// Use this k for the order-statistics estimators instead of bootstrapping.
  std::optional<std::size_t> k_override;
  /// Spread of alphas beyond which the comparison is flagged.
  double flag_spread = 0.2;
};

struct EstimatorComparison {
  std::vector<TailIndexEstimate> estimates; ///< cns, hill, adjusted_hill, moments
  std::size_t k_star;
  /// Largest minus smallest alpha over estimates that report one.
  double alpha_spread;
  bool flagged;
};

/// All four estimators on one sample. Needs n >= 500.
EstimatorComparison estimator_comparison(const Sample& s, std::uint64_t seed,
                                         const ComparisonOptions& opts = {});

} // namespace tailwise
