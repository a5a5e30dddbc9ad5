#include "stableop/normalization.hpp"

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stableop/errors.hpp"

namespace stableop {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.5772156649015329;

void check_order(double s) {
  if (!(s > 0.0 && s < 1.0)) throw InvalidOrder("order parameter s must lie in (0,1)");
}

// int_0^a (1 - cos t) t^{-1-2s} dt, term-by-term from the cosine series.
// With a = 1/2 the ninth term is below 1e-21 of the total.
double taylor_head(double a, double s) {
  double acc = 0.0;
  double fact = 1.0;  // (2k)!
  double sign = 1.0;
  for (int k = 1; k <= 9; ++k) {
    fact *= (2.0 * k - 1.0) * (2.0 * k);
    double e = 2.0 * k - 2.0 * s;
    acc += sign * std::pow(a, e) / (fact * e);
    sign = -sign;
  }
  return acc;
}

// int_T^inf cos t * t^{-p} dt by four integrations by parts; the dropped
// remainder is below p^4 T^{-p-4} in magnitude.
double oscillatory_tail(double T, double p) {
  double st = std::sin(T), ct = std::cos(T);
  double t1 = -st * std::pow(T, -p);
  double t2 = p * ct * std::pow(T, -p - 1.0);
  double t3 = p * (p + 1.0) * st * std::pow(T, -p - 2.0);
  double t4 = -p * (p + 1.0) * (p + 2.0) * ct * std::pow(T, -p - 3.0);
  return t1 + t2 + t3 + t4;
}

}  // namespace

double normalization_constant(double s) {
  check_order(s);
  using boost::math::quadrature::gauss_kronrod;
  const double p = 1.0 + 2.0 * s;
  const double a = 0.5;
  const int blocks = 160;
  const double T = 1.0 + 2.0 * kPi * blocks;

  double acc = taylor_head(a, s);
  auto f = [&](double t) {
    double sh = std::sin(0.5 * t);
    return 2.0 * sh * sh * std::pow(t, -p);
  };
  acc += gauss_kronrod<double, 61>::integrate(f, a, 1.0, 8, 1e-13);
  for (int b = 0; b < blocks; ++b) {
    double lo = 1.0 + 2.0 * kPi * b;
    acc += gauss_kronrod<double, 61>::integrate(f, lo, lo + 2.0 * kPi, 8, 1e-13);
  }
  acc += std::pow(T, -2.0 * s) / (2.0 * s);
  acc -= oscillatory_tail(T, p);
  return 2.0 * acc;
}

double normalization_constant_closed_form(double s) {
  check_order(s);
  double e = s - 0.5;
  if (std::abs(e) < 1e-6) return kPi * (1.0 + 2.0 * (kEulerGamma - 1.0) * e);
  return std::cos(kPi * s) * std::tgamma(2.0 - 2.0 * s) / (s * (1.0 - 2.0 * s));
}

}  // namespace stableop
