#pragma once

#include "tailwise/powerlaw.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

namespace tailwise {

struct FitOptions {
  Kind kind = Kind::continuous;
  /// Smallest tail a candidate threshold may leave.
  std::size_t min_tail = 50;
  /// Fit at this threshold instead of scanning.
  std::optional<double> xmin_override;
  /// Thin the candidate thresholds to at most this many, evenly spaced.
  std::optional<std::size_t> candidate_cap;
  /// Discrete kind only: zeta-likelihood maximization (true) or the
  /// closed-form approximation with the xmin - 1/2 shift (false).
  bool discrete_exact = true;

  void validate() const;
};

struct MleFit {
  double alpha;
  double std_error; ///< (alpha - 1) / sqrt(n)
  double loglik;
};

/// alpha = 1 + n / sum(ln(x / xmin)). Throws DegenerateTail when every value
/// equals xmin.
MleFit mle_alpha_continuous(std::span<const double> tail, double xmin);
MleFit mle_alpha_continuous(const Sample& tail, double xmin);

/// Discrete MLE. Exact mode maximizes -n ln zeta(alpha, xmin) - alpha sum ln x
/// by golden-section search on [1.01, 6].
MleFit mle_alpha_discrete(std::span<const double> tail, double xmin, bool exact);
MleFit mle_alpha_discrete(const Sample& tail, double xmin, bool exact);

/// Log-likelihood of a discrete tail under exponent alpha.
double discrete_loglik(double alpha, double xmin, std::size_t n, double sum_log);

struct TailFit {
  double alpha;   ///< density exponent
  double xmin;
  std::size_t n_tail;
  double ks;
  double std_error;
  double loglik;
  std::size_t n;  ///< size of the sample the fit came from
  Kind kind;

  [[nodiscard]] PowerLawModel model() const {
    return PowerLawModel{alpha, xmin, kind};
  }
};

/// Fit with the threshold fixed at xmin (values >= xmin form the tail).
TailFit fit_at(const Sample& s, double xmin, const FitOptions& opts);

/// Scans every distinct sample value leaving at least opts.min_tail
/// observations at or above it, fits alpha by maximum likelihood at each, and
/// keeps the threshold with the smallest KS distance (ties go to the smaller
/// threshold). Honors opts.xmin_override.
TailFit select_xmin(const Sample& s, const FitOptions& opts = {});

struct GofResult {
  double p_value;
  std::size_t n_boot;
  double observed_ks;
  std::uint64_t seed;
  /// Replicates whose refit failed; they count as exceeding observed_ks.
  std::size_t failed = 0;
};

/// Semiparametric bootstrap goodness of fit. Replicate b uses the seed
/// derive_seed(seed, b), so the result does not depend on thread count.
GofResult gof_pvalue(const Sample& s, const TailFit& fit, std::size_t n_boot,
                     std::uint64_t seed, const FitOptions& opts = {});

/// One semiparametric replicate of s under fit; exposed for testing.
Sample gof_replicate(const Sample& s, const TailFit& fit, std::uint64_t seed);

/// n_tail / n.
double power_law_proportion(const Sample& s, const TailFit& fit);

} // namespace tailwise
