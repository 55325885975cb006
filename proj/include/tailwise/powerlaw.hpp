#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace tailwise {

enum class Kind { continuous, discrete };

std::string_view to_string(Kind kind);
/// Parses "continuous" or "discrete"; throws ConfigError otherwise.
Kind parse_kind(std::string_view text);

/// Positive observations held in ascending order.
class Sample {
public:
  [[nodiscard]] std::span<const double> values() const noexcept {
    return values_;
  }
  [[nodiscard]] std::size_t size() const noexcept {
    return values_.size();
  }
  [[nodiscard]] Kind kind() const noexcept {
    return kind_;
  }
  [[nodiscard]] double min() const noexcept {
    return values_.front();
  }
  [[nodiscard]] double max() const noexcept {
    return values_.back();
  }
  [[nodiscard]] double operator[](std::size_t i) const noexcept {
    return values_[i];
  }

  /// Every value multiplied by c > 0.
  [[nodiscard]] Sample scaled(double c) const;

  /// Values >= threshold, as a new sample of the same kind.
  [[nodiscard]] Sample tail_from(double threshold) const;

  /// Index of the first value >= threshold.
  [[nodiscard]] std::size_t lower_index(double threshold) const noexcept;

private:
  friend struct SampleBuild make_sample(std::vector<double> values, Kind kind);
  Sample(std::vector<double> sorted, Kind kind)
    : values_(std::move(sorted)), kind_(kind) {
  }

  std::vector<double> values_;
  Kind kind_;
};

struct SampleBuild {
  Sample sample;
  std::size_t rejected = 0;
};

/// Keeps finite positive values and sorts them. Throws EmptySample when
/// nothing survives.
SampleBuild make_sample(std::vector<double> values, Kind kind);

/// Both exponent conventions in use for power laws: density p(x) ~ x^-a and
/// survival P(X >= x) ~ x^-(a-1).
enum class Convention { density, ccdf };

struct Exponent {
  double value;
  Convention convention;

  [[nodiscard]] Exponent as(Convention target) const noexcept {
    if (target == convention)
      return *this;
    return target == Convention::ccdf ? Exponent{value - 1.0, target}
                                      : Exponent{value + 1.0, target};
  }
};

inline double density_to_ccdf(double alpha) noexcept {
  return Exponent{alpha, Convention::density}.as(Convention::ccdf).value;
}
inline double ccdf_to_density(double alpha) noexcept {
  return Exponent{alpha, Convention::ccdf}.as(Convention::density).value;
}

/// Power law above xmin with density exponent alpha. The discrete kind lives
/// on the integers xmin, xmin+1, ... and is normalized by the Hurwitz zeta
/// function.
class PowerLawModel {
public:
  PowerLawModel(double alpha, double xmin, Kind kind = Kind::continuous);

  [[nodiscard]] double alpha() const noexcept {
    return alpha_;
  }
  [[nodiscard]] double xmin() const noexcept {
    return xmin_;
  }
  [[nodiscard]] Kind kind() const noexcept {
    return kind_;
  }

  /// P(X >= x). Throws DomainError for x < xmin.
  [[nodiscard]] double ccdf(double x) const;
  /// P(X <= x).
  [[nodiscard]] double cdf(double x) const;
  /// P(X < x).
  [[nodiscard]] double cdf_below(double x) const;

  /// Inverse-CDF draw for u in [0, 1). For the discrete kind the result is
  /// the largest integer x with P(X >= x) >= 1 - u.
  [[nodiscard]] double quantile(double u) const;

private:
  double alpha_;
  double xmin_;
  Kind kind_;
  double zeta_xmin_ = 0.0;
};

double pl_ccdf(const PowerLawModel& model, double x);

/// n independent draws; deterministic in seed.
Sample pl_sample(const PowerLawModel& model, std::size_t n, std::uint64_t seed);

struct CcdfPoint {
  double x;
  double fraction; ///< count(values >= x) / n
};

/// One point per distinct value.
std::vector<CcdfPoint> empirical_ccdf(const Sample& s);

/// Largest gap between the empirical CDF of `tail` and the model CDF, taken
/// on both sides of every jump of the empirical CDF. For the discrete kind
/// the model's left limit at x is P(X <= x-1), which makes the result the
/// exact supremum over the integers.
double ks_distance(const Sample& tail, const PowerLawModel& model);

/// Same as above on a sorted span (every value >= model.xmin()).
double ks_distance(std::span<const double> sorted_tail,
                   const PowerLawModel& model);

} // namespace tailwise
