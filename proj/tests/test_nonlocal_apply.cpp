#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "stableop/grid.hpp"
#include "stableop/nonlocal_apply.hpp"
#include "stableop/normalization.hpp"
#include "stableop/spectral_measure.hpp"
#include "stableop/symbol_heat.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kInf = std::numeric_limits<double>::infinity();

double gauss1(const stableop::Vec3& p) { return std::exp(-0.5 * p[0] * p[0]); }

stableop::EvaluableField cos_field() {
  return stableop::EvaluableField::from_callable(
      1, [](const stableop::Vec3& p) { return std::cos(p[0]); }, 1.0, 1.0);
}

}  // namespace

using namespace stableop;

TEST_SUITE("nonlocal_apply") {

TEST_CASE("power_segment_integral matches antiderivatives through p = -1") {
  CHECK(power_segment_integral(1.0, 2.0, -1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK(power_segment_integral(1.0, 2.0, -1.5) ==
        doctest::Approx(2.0 * (1.0 - 1.0 / std::sqrt(2.0))).epsilon(1e-14));
  CHECK(power_segment_integral(0.5, 3.0, 2.0) ==
        doctest::Approx((27.0 - 0.125) / 3.0).epsilon(1e-14));
  // continuity across the log branch
  double lo = power_segment_integral(1.0, 2.0, -1.0 - 1e-12);
  double hi = power_segment_integral(1.0, 2.0, -1.0 + 1e-12);
  CHECK(std::abs(lo - std::log(2.0)) < 1e-11);
  CHECK(std::abs(hi - std::log(2.0)) < 1e-11);
  CHECK(power_segment_integral(2.0, 2.0, -1.7) == 0.0);
}

TEST_CASE("radial integral of cosine hits -c_s/2 within the certified budget") {
  auto u = cos_field();
  QuadratureBudget b;
  b.tol = 1e-6;
  double v = radial_sd_integral(u, {0, 0, 0}, {1, 0, 0}, 0.5, b);
  CHECK(std::abs(v + 0.5 * kPi) < 1e-6);  // c_{1/2} = pi

  b.tol = 1e-3;
  for (double s : {0.3, 0.75}) {
    double cs = normalization_constant(s);
    double w = radial_sd_integral(u, {0, 0, 0}, {1, 0, 0}, s, b);
    CHECK(std::abs(w + 0.5 * cs) < 1e-3);
  }
}

TEST_CASE("declared vanishing second difference makes affine fields exact zeros") {
  auto u = EvaluableField::from_callable(
      1, [](const Vec3& p) { return 3.0 - 2.0 * p[0]; }, 0.0, kInf);
  u.declare_second_difference_sup(0.0);
  QuadratureBudget b;
  b.tol = 1e-8;
  for (double s : {0.3, 0.5, 0.75, 0.9}) {
    CHECK(radial_sd_integral(u, {1.7, 0, 0}, {1, 0, 0}, s, b) == 0.0);
  }
}

TEST_CASE("one-dimensional s-power field is harmonic on the positive axis") {
  auto op = StableOperator::fractional_laplacian(1, 0.5);
  auto u = EvaluableField::from_callable(
      1, [](const Vec3& p) { return p[0] > 0.0 ? std::sqrt(p[0]) : 0.0; }, 1.0, kInf);
  u.declare_growth(0.5, 1.0);
  QuadratureBudget b;
  b.tol = 1e-4;
  auto r = apply_pointwise(op, u, {1.0, 0, 0}, b);
  CHECK(std::abs(r.value) < 1e-4);
  CHECK(r.error_bound <= 1e-4);
}

TEST_CASE("half-space power profile is annihilated by the axis operator") {
  auto op = StableOperator::axis_sum(2, 0.75);
  auto u = EvaluableField::from_callable(
      2, [](const Vec3& p) { return p[1] > 0.0 ? std::pow(p[1], 0.75) : 0.0; }, 1.0, kInf);
  u.declare_growth(0.75, 1.0);
  QuadratureBudget b;
  b.tol = 1e-3;
  auto r = apply_pointwise(op, u, {0.3, 0.7, 0}, b);
  CHECK(std::abs(r.value) < 1e-3);
}

TEST_CASE("cosine eigenfields recover the symbol at the origin") {
  QuadratureBudget b;
  b.tol = 1e-5;
  auto op1 = StableOperator::fractional_laplacian(1, 0.5);
  auto r1 = apply_pointwise(op1, cos_field(), {0, 0, 0}, b);
  CHECK(std::abs(r1.value + 1.0) < 1e-5);  // multiplier |xi|^{2s} at xi = e_1

  auto op2 = StableOperator::axis_sum(2, 0.5);
  auto u2 = EvaluableField::from_callable(
      2, [](const Vec3& p) { return std::cos(p[0]) * std::cos(p[1]); }, 2.0, 1.0);
  auto r2 = apply_pointwise(op2, u2, {0, 0, 0}, b);
  CHECK(std::abs(r2.value + 2.0) < 1e-5);  // cos(x1)cos(x2) sums both axis symbols
}

TEST_CASE("pointwise quadrature agrees with the Fourier side for a Gaussian") {
  auto op = StableOperator::fractional_laplacian(1, 0.5);
  GridGeometry gg = GridGeometry::fft_line(-400.0, 400.0, 1 << 16);
  GridFunction u(gg, gauss1);
  GridFunction lu = apply_multiplier_fft(op, u);
  auto f = EvaluableField::from_callable(1, gauss1, 1.0, 1.0);
  QuadratureBudget b;
  b.tol = 2e-6;
  double worst = 0.0;
  for (int j : {32768, 32792, 32850, 32948}) {
    Vec3 x{gg.coord(0, j), 0, 0};
    auto r = apply_pointwise(op, f, x, b);
    worst = std::max(worst, std::abs(r.value - lu.at(j)));
  }
  CHECK(worst < 1e-5);  // remainder is quadrature budget plus periodic images
}

TEST_CASE("uniform measure in the plane reproduces the isotropic operator") {
  auto iso = StableOperator::fractional_laplacian(2, 0.5);
  GridGeometry gg = GridGeometry::fft_box({-50.0, -50.0}, {50.0, 50.0}, {2048, 2048});
  GridFunction u(gg, [](const Vec3& p) { return std::exp(-0.5 * (p[0] * p[0] + p[1] * p[1])); });
  GridFunction lu = apply_multiplier_fft(iso, u);
  auto f = EvaluableField::from_callable(
      2, [](const Vec3& p) { return std::exp(-0.5 * (p[0] * p[0] + p[1] * p[1])); }, 2.0, 1.0);
  QuadratureBudget b;
  b.tol = 1e-5;
  const int idx[5][2] = {{1024, 1024}, {1034, 1024}, {1029, 1039}, {1004, 1034}, {1055, 993}};
  double worst = 0.0;
  for (auto& ij : idx) {
    Vec3 x{gg.coord(0, ij[0]), gg.coord(1, ij[1]), 0};
    auto r = apply_pointwise(iso, f, x, b);
    worst = std::max(worst, std::abs(r.value - lu.at(ij[0], ij[1])));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("grid-backed fields certify against the closed-form sample") {
  auto op = StableOperator::fractional_laplacian(1, 0.5);
  GridGeometry gg = GridGeometry::line(-40.0, 40.0, 32769);
  GridFunction ug(gg, gauss1);
  auto fg = EvaluableField::from_grid(ug);
  CHECK(fg.m2() == doctest::Approx(1.0).epsilon(1e-3));  // max |u''| of the Gaussian
  auto fc = EvaluableField::from_callable(1, gauss1, 1.0, 1.0);
  QuadratureBudget bg;
  bg.tol = 3e-3;
  QuadratureBudget bc;
  bc.tol = 1e-5;

  // on a node the axis ray integrates the interpolant exactly
  auto rg = apply_pointwise(op, fg, {0, 0, 0}, bg);
  auto rc = apply_pointwise(op, fc, {0, 0, 0}, bc);
  CHECK(rg.interpolation_bound == 0.0);
  CHECK(std::abs(rg.value - rc.value) <= rg.error_bound + rc.error_bound);

  // off the lattice the interpolation term is reported and still covers the gap
  double x1 = gg.coord(0, 16589) + 0.3 * gg.h[0];
  auto rg2 = apply_pointwise(op, fg, {x1, 0, 0}, bg);
  auto rc2 = apply_pointwise(op, fc, {x1, 0, 0}, bc);
  CHECK(rg2.interpolation_bound > 0.0);
  CHECK(std::abs(rg2.value - rc2.value) <= rg2.error_bound + rc2.error_bound);

  // forcing the generic segment path reproduces the exact-cell value
  QuadratureBudget bf;
  bf.tol = 6e-3;
  bf.R_far = 500.0;
  auto rg3 = apply_pointwise(op, fg, {0, 0, 0}, bf);
  CHECK(std::abs(rg.value - rg3.value) < 1e-5);
}

TEST_CASE("box indicator under the axis operator has closed-form values") {
  auto op = StableOperator::axis_sum(2, 0.5);
  GridGeometry gg = GridGeometry::box({-1.0, -1.0}, {1.0, 1.0}, {41, 41});
  GridFunction ind(gg, [](const Vec3&) { return 1.0; });  // zero-extended box indicator
  QuadratureBudget b;
  b.tol = 1e-2;

  std::vector<std::uint8_t> mask(gg.size(), 0);
  mask[gg.index(20, 20)] = 1;
  mask[gg.index(30, 25)] = 1;
  GridFunction out = apply_grid(op, ind, mask, b);

  // centre: each ray contributes -1/r^2 beyond the hull, so L1 = -4/pi
  CHECK(std::abs(out.at(20, 20) + 4.0 / kPi) < 1e-14);
  // node (0.5, 0.25): one-sided exits at 0.5/1.5 and 0.75/1.25
  auto ray = [](double a, double c) { return -0.5 * (1.0 / a - 1.0 / c) - 1.0 / c; };
  double exact = (2.0 / kPi) * (ray(0.5, 1.5) + ray(0.75, 1.25));
  CHECK(std::abs(out.at(30, 25) - exact) < 1e-14);
  // unmasked nodes stay untouched
  CHECK(out.at(0, 0) == 0.0);
}

TEST_CASE("apply_grid of a constant field with matching extension vanishes") {
  auto op = StableOperator::axis_sum(2, 0.5);
  GridGeometry gg = GridGeometry::box({-1.0, -1.0}, {1.0, 1.0}, {41, 41});
  GridFunction cg(gg, [](const Vec3&) { return 5.0; });
  cg.set_extension([](const Vec3&) { return 5.0; });
  QuadratureBudget b;
  b.tol = 1e-6;
  GridFunction out = apply_grid(op, cg, {}, b);
  for (double v : out.values()) CHECK(v == 0.0);
}

TEST_CASE("linearity, translation, and scaling hold within certified bounds") {
  QuadratureBudget b;
  b.tol = 1e-5;
  auto u = cos_field();
  auto v = EvaluableField::from_callable(1, gauss1, 1.0, 1.0);
  auto w = EvaluableField::from_callable(
      1, [](const Vec3& p) { return 0.6 * std::cos(p[0]) - 1.3 * gauss1(p); }, 1.9, 1.9);
  double ru = radial_sd_integral(u, {0.2, 0, 0}, {1, 0, 0}, 0.5, b);
  double rv = radial_sd_integral(v, {0.2, 0, 0}, {1, 0, 0}, 0.5, b);
  double rw = radial_sd_integral(w, {0.2, 0, 0}, {1, 0, 0}, 0.5, b);
  CHECK(std::abs(rw - (0.6 * ru - 1.3 * rv)) < 2.2e-5);

  auto ut = EvaluableField::from_callable(
      1, [](const Vec3& p) { return gauss1({p[0] - 0.7, 0, 0}); }, 1.0, 1.0);
  double rt = radial_sd_integral(ut, {1.2, 0, 0}, {1, 0, 0}, 0.5, b);
  double r0 = radial_sd_integral(v, {0.5, 0, 0}, {1, 0, 0}, 0.5, b);
  CHECK(std::abs(rt - r0) < 1e-10);

  auto us = EvaluableField::from_callable(
      1, [](const Vec3& p) { return gauss1({2.0 * p[0], 0, 0}); }, 4.0, 1.0);
  double rs = radial_sd_integral(us, {0.4, 0, 0}, {1, 0, 0}, 0.5, b);
  double rr = radial_sd_integral(v, {0.8, 0, 0}, {1, 0, 0}, 0.5, b);
  CHECK(std::abs(rs - 2.0 * rr) < 2.25e-5);  // rho^{2s} = 2 at rho = 2, s = 1/2
}

TEST_CASE("budget and declaration violations raise typed errors") {
  QuadratureBudget b;
  b.tol = 1e-4;
  auto sqrtp = [](const Vec3& p) { return p[0] > 0.0 ? std::sqrt(p[0]) : 0.0; };

  SUBCASE("unbounded field without a declaration") {
    auto u = EvaluableField::from_callable(1, sqrtp, 1.0, kInf);
    CHECK_THROWS_AS(radial_sd_integral(u, {1, 0, 0}, {1, 0, 0}, 0.5, b),
                    QuadratureBudgetExceeded);
  }
  SUBCASE("infinite second-difference bound") {
    auto u = EvaluableField::from_callable(1, sqrtp, kInf, kInf);
    u.declare_growth(0.5, 1.0);
    CHECK_THROWS_AS(radial_sd_integral(u, {1, 0, 0}, {1, 0, 0}, 0.5, b), ConfigError);
  }
  SUBCASE("growth exponent at or past 2s") {
    auto u = EvaluableField::from_callable(1, [](const Vec3& p) { return p[0]; }, 0.0, kInf);
    u.declare_growth(1.2, 1.0);
    CHECK_THROWS_AS(radial_sd_integral(u, {0, 0, 0}, {1, 0, 0}, 0.5, b), ConfigError);
  }
  SUBCASE("shell budget too small for the certified range") {
    auto u = cos_field();
    QuadratureBudget tight;
    tight.tol = 1e-6;
    tight.shells = 3;
    CHECK_THROWS_AS(radial_sd_integral(u, {0, 0, 0}, {1, 0, 0}, 0.5, tight),
                    QuadratureBudgetExceeded);
  }
  SUBCASE("coarse grid off the lattice") {
    GridGeometry gg = GridGeometry::line(-4.0, 4.0, 81);
    GridFunction ug(gg, gauss1);
    auto f = EvaluableField::from_grid(ug);
    QuadratureBudget fine;
    fine.tol = 1e-3;
    CHECK_THROWS_AS(radial_sd_integral(f, {0.037, 0, 0}, {1, 0, 0}, 0.5, fine),
                    ResolutionError);
  }
  SUBCASE("high order near the rounding floor") {
    auto u = cos_field();
    QuadratureBudget tight;
    tight.tol = 1e-3;
    CHECK_THROWS_AS(radial_sd_integral(u, {0, 0, 0}, {1, 0, 0}, 0.9, tight),
                    QuadratureBudgetExceeded);
  }
  SUBCASE("invalid budget fields") {
    auto u = EvaluableField::from_callable(1, gauss1, 1.0, 1.0);
    QuadratureBudget bad;
    bad.nodes_per_shell = 7;
    CHECK_THROWS_AS(radial_sd_integral(u, {0, 0, 0}, {1, 0, 0}, 0.5, bad), ConfigError);
    QuadratureBudget zero;
    zero.tol = 0.0;
    CHECK_THROWS_AS(radial_sd_integral(u, {0, 0, 0}, {1, 0, 0}, 0.5, zero), ConfigError);
  }
  SUBCASE("order outside (0,1)") {
    auto u = EvaluableField::from_callable(1, gauss1, 1.0, 1.0);
    CHECK_THROWS_AS(radial_sd_integral(u, {0, 0, 0}, {1, 0, 0}, 1.2, b), InvalidOrder);
  }
  SUBCASE("operator and field dimensions differ") {
    auto op = StableOperator::axis_sum(2, 0.5);
    auto u = EvaluableField::from_callable(1, gauss1, 1.0, 1.0);
    CHECK_THROWS_AS(apply_pointwise(op, u, {0, 0, 0}, b), ConfigError);
  }
  SUBCASE("interior mask size mismatch") {
    auto op = StableOperator::axis_sum(2, 0.5);
    GridGeometry gg = GridGeometry::box({-1.0, -1.0}, {1.0, 1.0}, {41, 41});
    GridFunction ind(gg, [](const Vec3&) { return 1.0; });
    std::vector<std::uint8_t> short_mask(5, 1);
    CHECK_THROWS_AS(apply_grid(op, ind, short_mask, b), ConfigError);
  }
}

}  // TEST_SUITE
