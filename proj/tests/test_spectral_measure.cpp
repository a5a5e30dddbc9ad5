#include "doctest.h"

#include <cmath>
#include <random>

#include "stableop/errors.hpp"
#include "stableop/normalization.hpp"
#include "stableop/spectral_measure.hpp"

using namespace stableop;

namespace {

std::vector<Atom> axis_atoms_2d(double w) {
  return {{{1.0, 0.0, 0.0}, w}, {{-1.0, 0.0, 0.0}, w},
          {{0.0, 1.0, 0.0}, w}, {{0.0, -1.0, 0.0}, w}};
}

}  // namespace

TEST_SUITE("spectral_measure") {
  TEST_CASE("total mass: axis atoms") {
    auto m = SpectralMeasure::atomic(2, axis_atoms_2d(1.0));
    CHECK(m.total_mass() == doctest::Approx(4.0).epsilon(1e-14));
  }

  TEST_CASE("total mass: uniform level 1 on the circle") {
    auto m = SpectralMeasure::uniform(2, 1.0);
    CHECK(m.total_mass() == doctest::Approx(2.0 * M_PI).epsilon(1e-14));
  }

  TEST_CASE("total mass: |cos| density on the 512-node circle grid") {
    std::vector<double> vals(512);
    for (int k = 0; k < 512; ++k) vals[k] = std::abs(std::cos(2.0 * M_PI * k / 512.0));
    auto m = SpectralMeasure::density(vals);
    // Trapezoid error of |cos| on 512 nodes is h^2/3 ~ 5.0e-5; the quadrature
    // is the stored discretization, so the oracle is met only at that level.
    CHECK(m.total_mass() == doctest::Approx(4.0).epsilon(1e-4));
  }

  TEST_CASE("density via per-quadrant composite nodes hits the closed form") {
    // Same |cos| density, but with Gauss-Legendre nodes per smooth quadrant
    // supplied explicitly; the stored-weight path then reproduces 4 sharply.
    const int per_quadrant = 16;
    std::vector<Atom> nodes;
    // 16-point Gauss-Legendre on [-1,1]
    static const double gx[8] = {0.0950125098376374, 0.2816035507792589,
                                 0.4580167776572274, 0.6178762444026438,
                                 0.7554044083550030, 0.8656312023878318,
                                 0.9445750230732326, 0.9894009349916499};
    static const double gw[8] = {0.1894506104550685, 0.1826034150449236,
                                 0.1691565193950025, 0.1495959888165767,
                                 0.1246289712555339, 0.0951585116824928,
                                 0.0622535239386479, 0.0271524594117541};
    for (int q = 0; q < 4; ++q) {
      double a = -0.5 * M_PI + q * 0.5 * M_PI, b = a + 0.5 * M_PI;
      double mid = 0.5 * (a + b), half = 0.5 * (b - a);
      for (int i = 0; i < per_quadrant / 2; ++i) {
        for (double sign : {-1.0, 1.0}) {
          double phi = mid + sign * half * gx[i];
          double w = half * gw[i] * std::abs(std::cos(phi));
          nodes.push_back({{std::cos(phi), std::sin(phi), 0.0}, w});
        }
      }
    }
    auto m = SpectralMeasure::density_nodes(2, nodes);
    CHECK(m.kind() == SpectralMeasure::Kind::Density);
    CHECK(m.total_mass() == doctest::Approx(4.0).epsilon(1e-12));
  }

  TEST_CASE("total mass additive over disjoint atom lists") {
    auto a = SpectralMeasure::atomic(2, {{{1.0, 0.0, 0.0}, 0.7}});
    auto b = SpectralMeasure::atomic(2, {{{0.0, 1.0, 0.0}, 1.1}});
    auto both = SpectralMeasure::atomic(
        2, {{{1.0, 0.0, 0.0}, 0.7}, {{0.0, 1.0, 0.0}, 1.1}});
    CHECK(both.total_mass() ==
          doctest::Approx(a.total_mass() + b.total_mass()).epsilon(1e-14));
  }

  TEST_CASE("ellipticity: axis atoms at s=1/2") {
    auto m = SpectralMeasure::atomic(2, axis_atoms_2d(1.0));
    CHECK(ellipticity_lambda(m, 0.5) == doctest::Approx(2.0).epsilon(1e-9));
  }

  TEST_CASE("ellipticity: single symmetric pair is degenerate") {
    auto m = SpectralMeasure::atomic(2, {{{1.0, 0.0, 0.0}, 1.0}});
    CHECK_THROWS_AS(ellipticity_lambda(m, 0.5), DegenerateMeasure);
    CHECK_THROWS_AS(ellipticity_lambda(m, 0.3), DegenerateMeasure);
  }

  TEST_CASE("ellipticity: uniform level 1 equals the |cos| moment") {
    auto m = SpectralMeasure::uniform(2, 1.0);
    CHECK(ellipticity_lambda(m, 0.5) == doctest::Approx(4.0).epsilon(1e-3));
  }

  TEST_CASE("ellipticity bounded by total mass on random measures") {
    std::mt19937 rng(2026);
    std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI), wgt(0.1, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Atom> atoms;
      int k = 3 + static_cast<int>(trial % 4);
      for (int i = 0; i < k; ++i) {
        double phi = ang(rng);
        atoms.push_back({{std::cos(phi), std::sin(phi), 0.0}, wgt(rng)});
      }
      auto m = SpectralMeasure::atomic(2, atoms);
      double s = 0.2 + 0.6 * (trial / 19.0);
      double lam = ellipticity_lambda(m, s);
      CHECK(lam > 0.0);
      CHECK(lam <= m.total_mass() * (1.0 + 1e-12));
    }
  }

  TEST_CASE("ellipticity invariant under rotation") {
    std::vector<Atom> base = {{{1.0, 0.0, 0.0}, 1.0},
                              {{0.30901699437494745, 0.9510565162951535, 0.0}, 0.6},
                              {{-0.5877852522924731, 0.80901699437494745, 0.0}, 0.9}};
    auto m0 = SpectralMeasure::atomic(2, base);
    double rot = 0.731;
    std::vector<Atom> rotated;
    for (const auto& a : base) {
      double c = std::cos(rot), sn = std::sin(rot);
      rotated.push_back(
          {{c * a.theta[0] - sn * a.theta[1], sn * a.theta[0] + c * a.theta[1], 0.0}, a.w});
    }
    auto m1 = SpectralMeasure::atomic(2, rotated);
    double l0 = ellipticity_lambda(m0, 0.6, 2880);
    double l1 = ellipticity_lambda(m1, 0.6, 2880);
    CHECK(l0 == doctest::Approx(l1).epsilon(1e-8));
  }

  TEST_CASE("ellipticity never exceeds the raw scan minimum as resolution grows") {
    auto m = SpectralMeasure::atomic(
        2, {{{1.0, 0.0, 0.0}, 1.0}, {{0.6, 0.8, 0.0}, 0.5}, {{0.0, 1.0, 0.0}, 0.25}});
    double coarse = ellipticity_lambda(m, 0.4, 90);
    double fine = ellipticity_lambda(m, 0.4, 1440);
    CHECK(fine <= coarse * (1.0 + 1e-12));
  }

  TEST_CASE("symmetrization is idempotent") {
    auto m = SpectralMeasure::atomic(2, {{{0.8, 0.6, 0.0}, 1.3}, {{0.0, 1.0, 0.0}, 0.4}});
    std::vector<Atom> once(m.quadrature_atoms());
    auto m2 = SpectralMeasure::atomic(2, once);
    REQUIRE(m2.direction_pairs().size() == m.direction_pairs().size());
    for (std::size_t i = 0; i < m.direction_pairs().size(); ++i) {
      CHECK(m2.direction_pairs()[i].w ==
            doctest::Approx(m.direction_pairs()[i].w).epsilon(1e-14));
      for (int c = 0; c < 2; ++c)
        CHECK(m2.direction_pairs()[i].theta[c] ==
              doctest::Approx(m.direction_pairs()[i].theta[c]).epsilon(1e-14));
    }
    CHECK(m2.total_mass() == doctest::Approx(m.total_mass()).epsilon(1e-14));
  }

  TEST_CASE("operator validation") {
    auto m = SpectralMeasure::atomic(2, axis_atoms_2d(1.0));
    CHECK_THROWS_AS(StableOperator(m, 0.0), InvalidOrder);
    CHECK_THROWS_AS(StableOperator(m, 1.0), InvalidOrder);
    auto deg = SpectralMeasure::atomic(2, {{{1.0, 0.0, 0.0}, 1.0}});
    CHECK_THROWS_AS(StableOperator(deg, 0.5), DegenerateMeasure);
  }

  TEST_CASE("canonical axis_sum multiplier") {
    auto op = StableOperator::axis_sum(2, 0.5);
    CHECK(op.multiplier({1.0, 1.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(op.multiplier({1.0, 0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(op.mass() == doctest::Approx(2.0 / normalization_constant(0.5)).epsilon(1e-12));
  }

  TEST_CASE("canonical fractional laplacian multiplier") {
    auto op1 = StableOperator::fractional_laplacian(1, 0.5);
    CHECK(op1.multiplier({3.0, 0.0, 0.0}) == doctest::Approx(3.0).epsilon(1e-12));
    auto op2 = StableOperator::fractional_laplacian(2, 0.75);
    CHECK(op2.multiplier({1.0, 0.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-10));
    // rotation invariance of the closed-form uniform symbol
    CHECK(op2.multiplier({std::sqrt(0.5), std::sqrt(0.5), 0.0}) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(op2.multiplier({2.0, 0.0, 0.0}) ==
          doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-10));
  }

  TEST_CASE("canonical lookup by name") {
    auto op = StableOperator::canonical("axis_sum", 2, 0.5);
    CHECK(op.multiplier({1.0, 1.0, 0.0}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(StableOperator::canonical("laplacian", 2, 0.5), ConfigError);
  }

  TEST_CASE("pre-normalization axis atoms have ellipticity 2") {
    auto op = StableOperator(SpectralMeasure::atomic(2, axis_atoms_2d(1.0)), 0.5);
    CHECK(op.lambda() == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(op.mass() == doctest::Approx(4.0).epsilon(1e-14));
  }

  TEST_CASE("symbol examples") {
    auto raw = StableOperator(SpectralMeasure::atomic(2, axis_atoms_2d(1.0)), 0.5);
    CHECK(raw.symbol({1.0, 1.0, 0.0}) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(raw.symbol({0.0, 0.0, 0.0}) == 0.0);
    auto op = StableOperator::axis_sum(2, 0.75);
    Vec3 xi{0.37, -1.21, 0.0};
    CHECK(op.symbol({2.0 * xi[0], 2.0 * xi[1], 0.0}) ==
          doctest::Approx(std::pow(2.0, 1.5) * op.symbol(xi)).epsilon(1e-12));
  }

  TEST_CASE("symbol bounded by ellipticity constants at random frequencies") {
    auto op = StableOperator(
        SpectralMeasure::atomic(2, {{{1.0, 0.0, 0.0}, 0.8},
                                    {{0.4472135954999579, 0.8944271909999159, 0.0}, 1.2},
                                    {{0.0, 1.0, 0.0}, 0.5}}),
        0.65);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> comp(-5.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
      Vec3 xi{comp(rng), comp(rng), 0.0};
      double r = norm(xi, 2);
      if (r < 1e-6) continue;
      double a = op.symbol(xi);
      double grow = std::pow(r, 2.0 * 0.65);
      CHECK(a >= op.lambda() * grow * (1.0 - 1e-9));
      CHECK(a <= op.mass() * grow * (1.0 + 1e-9));
    }
  }

  TEST_CASE("input validation") {
    CHECK_THROWS_AS(SpectralMeasure::atomic(2, {}), ConfigError);
    CHECK_THROWS_AS(SpectralMeasure::atomic(2, {{{0.0, 0.0, 0.0}, 1.0}}), ConfigError);
    CHECK_THROWS_AS(SpectralMeasure::atomic(2, {{{1.0, 0.0, 0.0}, -1.0}}), ConfigError);
    CHECK_THROWS_AS(SpectralMeasure::uniform(2, -1.0), ConfigError);
    CHECK_THROWS_AS(SpectralMeasure::uniform(2, 1.0, 7), ConfigError);
    CHECK_THROWS_AS(SpectralMeasure::density({1.0, 2.0, 3.0}), ConfigError);
    CHECK_THROWS_AS(SpectralMeasure::atomic(4, {{{1.0, 0.0, 0.0}, 1.0}}), ConfigError);
  }

  TEST_CASE("directions normalized on input") {
    auto m = SpectralMeasure::atomic(2, {{{3.0, 4.0, 0.0}, 1.0}});
    REQUIRE(m.input_atoms().size() == 1);
    CHECK(m.input_atoms()[0].theta[0] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(m.input_atoms()[0].theta[1] == doctest::Approx(0.8).epsilon(1e-14));
  }
}
