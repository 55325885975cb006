#include "tailwise/zeta.hpp"

#include "tailwise/errors.hpp"

#include <array>
#include <cmath>

namespace tailwise {

namespace {

constexpr int direct_terms = 20;

// B_{2j} / (2j)! for j = 1..7.
constexpr std::array<double, 7> bernoulli_over_factorial{
  1.0 / 12.0,
  -1.0 / 720.0,
  1.0 / 30240.0,
  -1.0 / 1209600.0,
  1.0 / 47900160.0,
  -691.0 / 1307674368000.0,
  1.0 / 74724249600.0,
};

} // namespace

double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0) || !(q > 0.0))
    throw DomainError("hurwitz_zeta requires s > 1 and q > 0");
  double head = 0.0;
  for (int k = direct_terms - 1; k >= 0; --k)
    head += std::pow(q + k, -s);
  const double a = q + direct_terms;
  const double a_pow = std::pow(a, -s);
  double tail = a * a_pow / (s - 1.0) + 0.5 * a_pow;
  // Euler-Maclaurin: sum_j B_2j/(2j)! * s(s+1)...(s+2j-2) * a^(-s-2j+1).
  double rising = s;
  double power = a_pow / a;
  const double inv_a2 = 1.0 / (a * a);
  for (std::size_t j = 0; j < bernoulli_over_factorial.size(); ++j) {
    const double term = bernoulli_over_factorial[j] * rising * power;
    tail += term;
    if (std::abs(term) < 1e-17 * (head + tail))
      break;
    rising *= (s + 2.0 * j + 1.0) * (s + 2.0 * j + 2.0);
    power *= inv_a2;
  }
  return head + tail;
}

} // namespace tailwise
