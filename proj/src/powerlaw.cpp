#include "tailwise/powerlaw.hpp"

#include "tailwise/errors.hpp"
#include "tailwise/rng.hpp"
#include "tailwise/zeta.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tailwise {

std::string_view to_string(Kind kind) {
  return kind == Kind::continuous ? "continuous" : "discrete";
}

Kind parse_kind(std::string_view text) {
  if (text == "continuous")
    return Kind::continuous;
  if (text == "discrete")
    return Kind::discrete;
  throw ConfigError("unknown kind '" + std::string{text}
                    + "' (expected continuous or discrete)");
}

SampleBuild make_sample(std::vector<double> values, Kind kind) {
  const auto before = values.size();
  std::erase_if(values, [](double v) { return !std::isfinite(v) || v <= 0.0; });
  if (values.empty())
    throw EmptySample("no finite positive values");
  std::sort(values.begin(), values.end());
  const auto rejected = before - values.size();
  return SampleBuild{Sample{std::move(values), kind}, rejected};
}

Sample Sample::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c))
    throw DomainError("scale factor must be a finite positive number");
  std::vector<double> out(values_.begin(), values_.end());
  for (auto& v : out)
    v *= c;
  return Sample{std::move(out), kind_};
}

std::size_t Sample::lower_index(double threshold) const noexcept {
  return static_cast<std::size_t>(
    std::lower_bound(values_.begin(), values_.end(), threshold)
    - values_.begin());
}

Sample Sample::tail_from(double threshold) const {
  const auto first = lower_index(threshold);
  if (first == values_.size())
    throw EmptySample("no values at or above the threshold");
  return Sample{std::vector<double>(values_.begin() + first, values_.end()),
                kind_};
}

PowerLawModel::PowerLawModel(double alpha, double xmin, Kind kind)
  : alpha_(alpha), xmin_(xmin), kind_(kind) {
  if (!(alpha > 1.0) || !std::isfinite(alpha))
    throw DomainError("power-law exponent must be > 1");
  if (!(xmin > 0.0) || !std::isfinite(xmin))
    throw DomainError("xmin must be > 0");
  if (kind == Kind::discrete) {
    if (xmin < 1.0 || std::floor(xmin) != xmin)
      throw DomainError("discrete xmin must be an integer >= 1");
    zeta_xmin_ = hurwitz_zeta(alpha, xmin);
  }
}

double PowerLawModel::ccdf(double x) const {
  if (!(x >= xmin_))
    throw DomainError("ccdf evaluated below xmin");
  if (kind_ == Kind::continuous)
    return std::pow(x / xmin_, 1.0 - alpha_);
  const double k = std::ceil(x);
  if (k == xmin_)
    return 1.0;
  return hurwitz_zeta(alpha_, k) / zeta_xmin_;
}

double PowerLawModel::cdf(double x) const {
  if (x < xmin_)
    return 0.0;
  if (kind_ == Kind::continuous)
    return 1.0 - ccdf(x);
  return 1.0 - ccdf(std::floor(x) + 1.0);
}

double PowerLawModel::cdf_below(double x) const {
  if (x <= xmin_)
    return 0.0;
  return 1.0 - ccdf(x);
}

double PowerLawModel::quantile(double u) const {
  if (!(u >= 0.0 && u < 1.0))
    throw DomainError("quantile requires u in [0, 1)");
  const double r = 1.0 - u;
  if (kind_ == Kind::continuous)
    return xmin_ * std::pow(r, -1.0 / (alpha_ - 1.0));
  // Start from the rounded continuous approximation and walk to the exact
  // inverse: the largest integer x with P(X >= x) >= r.
  double x = std::floor((xmin_ - 0.5) * std::pow(r, -1.0 / (alpha_ - 1.0)) + 0.5);
  if (!std::isfinite(x) || x > 0x1.0p52)
    return x;
  x = std::max(x, xmin_);
  while (x > xmin_ && ccdf(x) < r)
    x -= 1.0;
  while (ccdf(x + 1.0) >= r)
    x += 1.0;
  return x;
}

double pl_ccdf(const PowerLawModel& model, double x) {
  return model.ccdf(x);
}

Sample pl_sample(const PowerLawModel& model, std::size_t n, std::uint64_t seed) {
  if (n == 0)
    throw EmptySample("pl_sample requires n >= 1");
  Rng rng{seed};
  std::vector<double> out;
  out.reserve(n);
  while (out.size() < n) {
    const double x = model.quantile(rng.uniform());
    // Exponents close to 1 can overflow in the extreme upper tail.
    if (std::isfinite(x))
      out.push_back(x);
  }
  return make_sample(std::move(out), model.kind()).sample;
}

std::vector<CcdfPoint> empirical_ccdf(const Sample& s) {
  const auto values = s.values();
  const auto n = static_cast<double>(values.size());
  std::vector<CcdfPoint> out;
  for (std::size_t i = 0; i < values.size();) {
    std::size_t j = i;
    while (j < values.size() && values[j] == values[i])
      ++j;
    out.push_back({values[i], static_cast<double>(values.size() - i) / n});
    i = j;
  }
  return out;
}

double ks_distance(std::span<const double> tail, const PowerLawModel& model) {
  if (tail.empty())
    throw EmptySample("ks_distance on an empty tail");
  if (tail.front() < model.xmin())
    throw DomainError("tail contains values below xmin");
  const auto m = static_cast<double>(tail.size());
  double d = 0.0;
  for (std::size_t i = 0; i < tail.size();) {
    std::size_t j = i;
    while (j < tail.size() && tail[j] == tail[i])
      ++j;
    const double below = static_cast<double>(i) / m;
    const double upto = static_cast<double>(j) / m;
    d = std::max({d, std::abs(upto - model.cdf(tail[i])),
                  std::abs(below - model.cdf_below(tail[i]))});
    i = j;
  }
  return d;
}

double ks_distance(const Sample& tail, const PowerLawModel& model) {
  return ks_distance(tail.values(), model);
}

} // namespace tailwise
