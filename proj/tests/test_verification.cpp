#include <cmath>
#include <limits>

#include "doctest.h"
#include "stableop/errors.hpp"
#include "stableop/normalization.hpp"
#include "stableop/spectral_measure.hpp"
#include "stableop/verification.hpp"

using namespace stableop;

namespace {

StableOperator frac2() { return StableOperator::fractional_laplacian(2, 0.5); }
StableOperator axis2() { return StableOperator::axis_sum(2, 0.75); }

void check_probe(const BarrierProbe& p, double value, double tol) {
  CHECK(p.certified);
  CHECK(std::abs(p.value - value) <= tol);
}

}  // namespace

TEST_SUITE("verification") {

TEST_CASE("outside distance-power profile is nonnegative with log-bounded growth") {
  BarrierReport r = barrier_check(BarrierSpec{frac2(), BarrierKind::DistOutS, {0.25, 0.1, 0.01}});
  REQUIRE(r.probes.size() == 3);
  check_probe(r.probes[0], 1.016000, 2e-5);
  check_probe(r.probes[1], 1.084600, 2e-5);
  check_probe(r.probes[2], 1.132772, 2e-5);
  CHECK(r.sign_ok);
  CHECK(r.pass);
  CHECK(r.smallest_certified_rho == 0.01);
}

TEST_CASE("inside distance-power profile mirrors the outside one from below") {
  BarrierReport r = barrier_check(BarrierSpec{frac2(), BarrierKind::DistInS, {0.25, 0.1, 0.01}});
  check_probe(r.probes[0], -1.097175, 2e-5);
  check_probe(r.probes[1], -1.022154, 2e-5);
  check_probe(r.probes[2], -0.9840730, 2e-5);
  CHECK(r.sign_ok);
  CHECK(r.pass);

  // Magnitudes agree within 5% where the two slowly drifting branches cross.
  BarrierReport out = barrier_check(BarrierSpec{frac2(), BarrierKind::DistOutS, {0.15}});
  BarrierReport in = barrier_check(BarrierSpec{frac2(), BarrierKind::DistInS, {0.15}});
  CHECK(std::abs(out.probes[0].value - 1.060275) <= 2e-5);
  CHECK(std::abs(in.probes[0].value + 1.045374) <= 2e-5);
  CHECK(std::abs(-in.probes[0].value / out.probes[0].value - 1.0) <= 0.05);
}

TEST_CASE("outside 3s/2 profile diverges at the fitted -s/2 rate") {
  BarrierReport r =
      barrier_check(BarrierSpec{frac2(), BarrierKind::DistOut3s2, {0.1, 0.01, 0.001}});
  check_probe(r.probes[0], 3.575118, 2e-5);
  check_probe(r.probes[1], 4.616017, 2e-5);
  check_probe(r.probes[2], 6.456418, 2e-5);
  CHECK(std::abs(r.fitted_slope + 0.2475) <= 1e-3);
  CHECK(std::abs(r.fitted_slope + 0.25) <= 0.1);
  CHECK(r.fit_residual <= 1e-10);
  CHECK(r.sign_ok);
  CHECK(r.pass);
}

TEST_CASE("inside 3s/2 profile turns positive approaching the sphere") {
  BarrierReport r =
      barrier_check(BarrierSpec{frac2(), BarrierKind::DistIn3s2, {0.1, 0.01, 0.001}});
  check_probe(r.probes[0], -0.2830883, 2e-5);
  check_probe(r.probes[1], 0.8429208, 2e-5);
  check_probe(r.probes[2], 2.702653, 2e-5);
  CHECK(std::abs(r.fitted_slope + 0.2179) <= 1e-3);
  CHECK(r.sign_ok);  // bounded dip is allowed away from the sphere
  CHECK(r.pass);
}

TEST_CASE("anisotropic 3s/2 profile fits its own order") {
  BarrierReport r =
      barrier_check(BarrierSpec{axis2(), BarrierKind::DistOut3s2, {0.1, 0.01, 0.001}});
  check_probe(r.probes[0], 3.866778, 0.1);
  check_probe(r.probes[1], 6.237431, 0.1);
  check_probe(r.probes[2], 11.84170, 0.2);
  CHECK(std::abs(r.fitted_slope + 0.375) <= 0.1);
  CHECK(std::abs(r.fitted_slope + 0.3737) <= 5e-3);
  CHECK(r.pass);
}

TEST_CASE("supersolution stays below -1 across its collar") {
  BarrierSpec sp{StableOperator::axis_sum(2, 0.5), BarrierKind::Supersolution,
                 {0.2, 0.1, 0.025, 0.0025}};
  BarrierReport r = barrier_check(sp);
  check_probe(r.probes[0], -1.778581, 2e-5);
  check_probe(r.probes[1], -1.788009, 2e-5);
  check_probe(r.probes[2], -2.421450, 2e-5);
  check_probe(r.probes[3], -4.879387, 2e-4);
  CHECK(r.sign_ok);
  CHECK(r.pass);

  BarrierSpec spf{frac2(), BarrierKind::Supersolution, {0.2, 0.025}};
  BarrierReport rf = barrier_check(spf);
  check_probe(rf.probes[0], -1.542947, 2e-5);
  check_probe(rf.probes[1], -3.189310, 2e-5);
  CHECK(rf.pass);
}

TEST_CASE("supersolution with a wide collar fails the sign condition") {
  BarrierSpec sp{StableOperator::axis_sum(2, 0.5), BarrierKind::Supersolution, {0.4, 0.2}};
  sp.super_eps = 0.5;
  BarrierReport r = barrier_check(sp);
  check_probe(r.probes[0], -0.7996299, 2e-5);
  CHECK_FALSE(r.sign_ok);
  CHECK_FALSE(r.pass);
}

TEST_CASE("subsolution is strictly positive at certified probes") {
  std::vector<double> rho{0.3, 0.1, 0.03, 0.01, 0.003};
  BarrierReport rf =
      barrier_check(BarrierSpec{StableOperator::fractional_laplacian(2, 0.5),
                                BarrierKind::Subsolution, rho});
  check_probe(rf.probes[0], 0.8177674, 2e-5);
  check_probe(rf.probes[1], 0.1752898, 2e-5);
  check_probe(rf.probes[2], 0.1059335, 2e-5);
  check_probe(rf.probes[3], 0.09104374, 2e-5);
  check_probe(rf.probes[4], 0.08623012, 2e-5);
  CHECK(rf.sign_ok);
  CHECK(rf.pass);

  BarrierReport ra = barrier_check(
      BarrierSpec{StableOperator::axis_sum(2, 0.5), BarrierKind::Subsolution, rho});
  check_probe(ra.probes[0], 1.298488, 2e-5);
  check_probe(ra.probes[4], 0.3043100, 2e-5);
  CHECK(ra.pass);
}

TEST_CASE("a tall subsolution skirt loses positivity") {
  BarrierSpec sp{StableOperator::fractional_laplacian(2, 0.5), BarrierKind::Subsolution,
                 {0.3, 0.03}};
  sp.sub_kappa = 0.2;
  BarrierReport r = barrier_check(sp);
  check_probe(r.probes[1], -0.01082616, 2e-5);
  CHECK_FALSE(r.sign_ok);
  CHECK_FALSE(r.pass);
}

TEST_CASE("barrier probe and shape validation") {
  CHECK_THROWS_AS(barrier_check(BarrierSpec{frac2(), BarrierKind::DistOutS, {}}), ConfigError);
  CHECK_THROWS_AS(barrier_check(BarrierSpec{frac2(), BarrierKind::DistOutS, {1e-4}}),
                  DomainError);
  CHECK_THROWS_AS(barrier_check(BarrierSpec{frac2(), BarrierKind::DistOutS, {1.0}}),
                  DomainError);
  CHECK_THROWS_AS(barrier_check(BarrierSpec{frac2(), BarrierKind::DistInS, {0.5}}),
                  DomainError);
  // Subsolution probes must stay below the rise to the plateau.
  CHECK_THROWS_AS(barrier_check(BarrierSpec{frac2(), BarrierKind::Subsolution, {0.45}}),
                  DomainError);
  BarrierSpec bad_eps{frac2(), BarrierKind::Supersolution, {0.1}};
  bad_eps.super_eps = 0.6;
  CHECK_THROWS_AS(barrier_check(bad_eps), ConfigError);
  BarrierSpec bad_kappa{frac2(), BarrierKind::Subsolution, {0.1}};
  bad_kappa.sub_kappa = 1.5;
  CHECK_THROWS_AS(barrier_check(bad_kappa), ConfigError);
  BarrierSpec bad_tol{frac2(), BarrierKind::DistOutS, {0.1}};
  bad_tol.tol = 1.0;
  bad_tol.tol_cap = 0.1;
  CHECK_THROWS_AS(barrier_check(bad_tol), ConfigError);
}

TEST_CASE("half-space profile annihilates the operator at certified heights") {
  HalfspaceReport r = halfspace_profile_residual(axis2(), 0.75, {0.25, 0.5, 1.0});
  REQUIRE(r.points.size() == 3);
  CHECK(r.pass);
  CHECK(r.max_certified_residual <= 1e-5);
  for (const HalfspacePoint& p : r.points) {
    CHECK(p.certified);
    CHECK(p.identity_gap <= 2e-6);
  }
  CHECK(std::abs(r.c_normal - 1.0 / normalization_constant(0.75)) <= 1e-12);

  // Scaling the heights must not disturb the residual identity.
  HalfspaceReport r2 = halfspace_profile_residual(axis2(), 0.75, {0.5, 1.0, 2.0});
  CHECK(r2.pass);
  CHECK(r2.max_certified_residual <= 1e-5);

  const double c = std::sqrt(0.5);
  SpectralMeasure mu =
      SpectralMeasure::atomic(2, {{{c, c, 0.0}, 1.0}, {{c, -c, 0.0}, 1.0}});
  HalfspaceReport rot = halfspace_profile_residual(StableOperator(mu, 0.5), 0.5,
                                                   {0.25, 0.5, 1.0});
  CHECK(rot.pass);
  CHECK(rot.max_certified_residual <= 5e-4);
  CHECK(std::abs(rot.c_normal - std::sqrt(2.0)) <= 1e-12);
}

TEST_CASE("shallow half-space probes certify only at looser bounds") {
  HalfspaceReport r = halfspace_profile_residual(axis2(), 0.75, {0.01});
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0].certified);
  CHECK(r.points[0].error_bound > 1e-3);
  CHECK(r.points[0].error_bound <= 5e-2);
  CHECK(std::abs(r.points[0].value) <= 5e-4);
  CHECK(r.pass);
}

TEST_CASE("half-space validation") {
  CHECK_THROWS_AS(halfspace_profile_residual(axis2(), 0.5, {0.5}), ConfigError);
  CHECK_THROWS_AS(halfspace_profile_residual(axis2(), 0.75, {1e-5}), DomainError);
  CHECK_THROWS_AS(halfspace_profile_residual(axis2(), 0.75, {}), ConfigError);
}

TEST_CASE("heat kernel convolution fixes constants") {
  FixedPointReport r = convolution_fixed_point_check(axis2(), FixedPointField::Constant);
  CHECK(r.pass);
  CHECK(r.max_deviation <= 1e-12);
  CHECK(std::abs(r.kernel_mass - 1.0) <= 1e-12);

  FixedPointReport r1 = convolution_fixed_point_check(
      StableOperator::fractional_laplacian(1, 0.5), FixedPointField::Constant);
  CHECK(r1.pass);
  CHECK(r1.max_deviation <= 1e-12);
}

TEST_CASE("heat kernel convolution fixes linear fields when moments exist") {
  FixedPointReport r = convolution_fixed_point_check(axis2(), FixedPointField::Linear);
  CHECK(r.pass);
  CHECK(r.max_deviation <= 1e-10);

  FixedPointReport r1 = convolution_fixed_point_check(
      StableOperator::fractional_laplacian(1, 0.75), FixedPointField::Linear);
  CHECK(r1.pass);
  CHECK(r1.max_deviation <= 1e-10);

  CHECK_THROWS_AS(convolution_fixed_point_check(StableOperator::fractional_laplacian(1, 0.5),
                                                FixedPointField::Linear),
                  InvalidOrder);
  CHECK_THROWS_AS(convolution_fixed_point_check(StableOperator::axis_sum(2, 0.5),
                                                FixedPointField::Linear),
                  InvalidOrder);
}

TEST_CASE("interior difference quotient grows at the prescribed rate") {
  CounterexampleConfig cfg;
  InteriorDifferenceReport r = counterexample_interior(cfg);
  REQUIRE(r.values.size() == 3);
  CHECK(std::abs(r.values[0] - 7.79272366e-2) <= 1e-9);
  CHECK(std::abs(r.values[1] - 2.77312031e-2) <= 1e-9);
  CHECK(std::abs(r.values[2] - 9.83969155e-3) <= 1e-9);
  CHECK(r.all_positive);
  CHECK(r.exceeds_lower_bound);
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    CHECK(r.lower_bounds[i] > 0.0);
    CHECK(r.values[i] > r.lower_bounds[i]);
  }
  CHECK(std::abs(r.fitted_exponent - 0.44935) <= 1e-4);
  CHECK(std::abs(r.fitted_exponent - 0.45) <= cfg.exponent_tol);
  CHECK(r.pass);
}

TEST_CASE("interior difference quotient tracks the configured exponent") {
  CounterexampleConfig cfg;
  cfg.alpha = 0.4;
  cfg.eps = 0.1;
  InteriorDifferenceReport r = counterexample_interior(cfg);
  CHECK(std::abs(r.fitted_exponent - 0.29935) <= 1e-4);
  CHECK(r.pass);

  CounterexampleConfig zero;
  zero.cutoff_amplitude = 0.0;
  InteriorDifferenceReport rz = counterexample_interior(zero);
  for (double v : rz.values) CHECK(v == 0.0);
  CHECK_FALSE(rz.pass);
}

TEST_CASE("interior counterexample validation") {
  CounterexampleConfig bad;
  bad.alpha = 0.6;  // above s
  CHECK_THROWS_AS(counterexample_interior(bad), ConfigError);
  CounterexampleConfig bad2;
  bad2.eps = 0.5;  // not below alpha
  CHECK_THROWS_AS(counterexample_interior(bad2), ConfigError);
  CounterexampleConfig bad3;
  bad3.deltas = {1e-3, 1e-2};  // not decreasing
  CHECK_THROWS_AS(counterexample_interior(bad3), ConfigError);
  CounterexampleConfig bad4;
  bad4.deltas = {0.9, 0.01};  // first delta too deep into the cutoff
  CHECK_THROWS_AS(counterexample_interior(bad4), ConfigError);
  CounterexampleConfig bad5;
  bad5.cutoff_center = {0.5, 4.0, 0.0};
  CHECK_THROWS_AS(counterexample_interior(bad5), ConfigError);
  CounterexampleConfig bad6;
  bad6.s = 1.2;
  CHECK_THROWS_AS(counterexample_interior(bad6), InvalidOrder);
}

TEST_CASE("boundary second difference diverges only when the cutoff scales") {
  CounterexampleConfig cfg;
  BoundaryScalingReport r = counterexample_boundary(cfg);
  REQUIRE(r.values.size() == 3);
  CHECK(std::abs(r.values[0] - 0.3534264) <= 1e-4);
  CHECK(std::abs(r.values[1] - 1.884128) <= 1e-4);
  CHECK(std::abs(r.values[2] - 3.351900) <= 1e-4);
  CHECK(r.cutoff_scaled);
  CHECK(r.strictly_increasing);
  CHECK(std::abs(r.decade_ratio - 0.9589) <= 0.02);
  CHECK(r.rate_from_fit);
  CHECK(r.pass);

  CounterexampleConfig ctl;
  ctl.scale_cutoff = false;
  BoundaryScalingReport rc = counterexample_boundary(ctl);
  CHECK(std::abs(rc.values[0] + 0.31921740) <= 1e-6);
  CHECK(std::abs(rc.values[2] + 0.29775559) <= 1e-6);
  CHECK_FALSE(rc.cutoff_scaled);
  CHECK(rc.pass);  // converging increments are the control's success
}

TEST_CASE("boundary counterexample runs in three dimensions") {
  CounterexampleConfig cfg;
  cfg.dim = 3;
  BoundaryScalingReport r = counterexample_boundary(cfg);
  CHECK(std::abs(r.values[0] - 0.55516) <= 1e-4);
  CHECK(std::abs(r.values[2] - 5.2652) <= 1e-3);
  CHECK(r.strictly_increasing);
  CHECK(r.pass);
}

TEST_CASE("boundary counterexample validation") {
  CounterexampleConfig bad;
  bad.boundary_cutoff = 0.6;
  CHECK_THROWS_AS(counterexample_boundary(bad), ConfigError);
  CounterexampleConfig bad2;
  bad2.radii = {1e-3, 1e-2};
  CHECK_THROWS_AS(counterexample_boundary(bad2), ConfigError);
  CounterexampleConfig bad3;
  bad3.radii = {0.3, 0.01};  // first radius beyond the boundary cutoff
  CHECK_THROWS_AS(counterexample_boundary(bad3), ConfigError);
  CounterexampleConfig bad4;
  bad4.dim = 4;
  CHECK_THROWS_AS(counterexample_boundary(bad4), ConfigError);
}

}  // TEST_SUITE
