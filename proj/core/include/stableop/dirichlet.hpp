#pragma once

#include <functional>
#include <vector>

#include "stableop/grid.hpp"
#include "stableop/nonlocal_apply.hpp"
#include "stableop/spectral_measure.hpp"

namespace stableop {

/// Test-domain geometry with an exact signed distance to the boundary:
/// positive inside, zero on, negative outside.  Supported shapes keep the
/// distance closed-form; complement_ball_in_box is {|x - c| > R} clipped to a
/// box strictly containing the ball (exterior-domain geometry near a concave
/// boundary piece).
struct DomainSpec {
  enum class Kind { Interval, Ball, Box, ComplementBallInBox };

  static DomainSpec interval(double a, double b);
  static DomainSpec ball(int n, const Vec3& center, double radius);
  static DomainSpec box(int n, const Vec3& lo, const Vec3& hi);
  static DomainSpec complement_ball_in_box(int n, const Vec3& center, double radius,
                                           const Vec3& lo, const Vec3& hi);

  double signed_distance(const Vec3& x) const;
  bool inside(const Vec3& x) const { return signed_distance(x) > 0.0; }
  /// Axis-aligned bounding box of the domain.
  void bounds(Vec3& lo, Vec3& hi) const;
  double diameter() const;

  Kind kind = Kind::Interval;
  int n = 1;
  Vec3 center{0.0, 0.0, 0.0};
  double radius = 0.0;
  Vec3 lo{0.0, 0.0, 0.0};
  Vec3 hi{0.0, 0.0, 0.0};
};

/// Lu = f in Omega, u = 0 on the rest of the grid and beyond it.  The grid
/// must cover the domain's bounding box with a margin of at least one
/// diameter on every side; standard() builds such a grid with the domain
/// centre on a node.  Nodes with signed distance > h/10 are the interior
/// unknowns, every other node is pinned to zero, and the far field past the
/// grid contributes exactly zero to each row.
struct DirichletProblem {
  StableOperator op;
  DomainSpec domain;
  std::function<double(const Vec3&)> f;
  GridGeometry grid;
  /// Off-axis spectral atoms need interpolated reads between grid columns;
  /// set false to reject them instead (ConfigError).
  bool interpolate_offaxis = true;

  static DirichletProblem standard(const StableOperator& op, const DomainSpec& domain,
                                   std::function<double(const Vec3&)> f, double h);
};

/// Dense collocation system over the interior nodes.  Row i carries the exact
/// integrals of the nodal interpolant against r^{-1-2s} along every measure
/// direction (split at cell crossings), an inner Taylor segment [0, r0] with
/// r0 = min(h, d(x_i)/2) modelled through the h-scale second difference, and
/// the exact tail of the homogeneous exterior condition.  taylor_coef and
/// interp_coef turn a curvature bound M2 (sup of directional second
/// derivatives of u over the cells a row touches) into the row's consistency
/// error: |row.u - (Lu)(x_i)| <= (taylor_coef[i] + interp_coef[i]) * M2.
struct AssembledSystem {
  int m = 0;                     ///< interior unknown count
  std::vector<int> nodes;        ///< flat grid index of each unknown
  std::vector<double> matrix;    ///< m*m, row-major
  std::vector<double> rhs;       ///< f at the interior nodes
  std::vector<double> taylor_coef;
  std::vector<double> interp_coef;
  double consistency_defect = 0.0;  ///< worst relative gap, cell sums vs analytic mass
};

AssembledSystem assemble(const DirichletProblem& p);

/// Collocation solution: zero-extended grid field plus the direct-solver
/// residual report.
struct DirichletSolution {
  GridFunction u;
  double linear_residual = 0.0;     ///< max |A u - f| from the factorization
  double consistency_defect = 0.0;  ///< carried over from assembly
  int interior_count = 0;
};

DirichletSolution solve(const DirichletProblem& p);

/// Independent check: max over probes of |L u(x) - f(x)| evaluated with the
/// certified pointwise quadrature (no reuse of the assembled matrix).  The
/// local curvature bound for each probe is estimated from grid data near it.
double residual_check(const DirichletProblem& p, const GridFunction& u,
                      const std::vector<Vec3>& probes, const QuadratureBudget& budget);

}  // namespace stableop
