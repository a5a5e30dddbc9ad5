#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "stableop/errors.hpp"
#include "stableop/grid.hpp"
#include "stableop/spectral_measure.hpp"

namespace stableop {

/// Scalar field the singular quadrature can read along rays, together with
/// the analytic declarations the error certificate needs.  Closed-form fields
/// wrap a callable; grid fields read a GridFunction through multilinear
/// interpolation and its extension rule (the grid must outlive the field).
///
/// Declarations and their roles:
///  - second_difference_bound M2: |u(x+y)+u(x-y)-2u(x)| <= M2 |y|^2 for
///    |y| <= r0; bounds the skipped inner segment [0, r0].
///  - sup_norm: bounds the far tail by 2 sup / (2s R^{2s}) per unit measure.
///    Pass infinity for unbounded fields and declare growth instead.
///  - declare_growth(beta, c): |u(y)| <= c (1 + |y|)^beta with beta < 2s;
///    replaces the sup-norm tail bound for fields of polynomial growth.
///  - declare_second_difference_sup(d): |u(x+y)+u(x-y)-2u(x)|/2 <= d for all
///    y; sharpens the tail for fields whose odd part dominates (exactly 0 for
///    affine fields, where the second difference vanishes identically).
class EvaluableField {
 public:
  static EvaluableField from_callable(int n, std::function<double(const Vec3&)> f,
                                      double second_difference_bound, double sup_norm);
  /// Grid field; M2 estimated from interior second differences of the data,
  /// sup norm taken as max |values| (a callable extension must stay within it).
  static EvaluableField from_grid(const GridFunction& g);
  static EvaluableField from_grid(const GridFunction& g, double second_difference_bound);

  EvaluableField& declare_growth(double exponent, double constant);
  EvaluableField& declare_second_difference_sup(double d);

  int dim() const { return n_; }
  double value(const Vec3& p) const { return grid_ ? grid_->eval(p) : fn_(p); }
  double m2() const { return m2_; }
  double sup_norm() const { return sup_; }
  const GridFunction* grid() const { return grid_; }

  bool growth_declared() const { return growth_declared_; }
  double growth_exponent() const { return growth_beta_; }
  double growth_constant() const { return growth_c_; }
  bool second_difference_sup_declared() const { return d2_declared_; }
  double second_difference_sup() const { return d2_sup_; }

 private:
  EvaluableField() = default;

  int n_ = 1;
  std::function<double(const Vec3&)> fn_;
  const GridFunction* grid_ = nullptr;
  double m2_ = 0.0;
  double sup_ = 0.0;
  bool growth_declared_ = false;
  double growth_beta_ = 0.0;
  double growth_c_ = 0.0;
  bool d2_declared_ = false;
  double d2_sup_ = 0.0;
};

/// Resource and tolerance contract for one radial integral (value-type; apply
/// operations pass it per ray with the tolerance split across the measure).
/// Zero means "derive from tol and the field's declarations".
struct QuadratureBudget {
  double r0 = 0.0;          ///< inner cutoff; auto: grid spacing h, or <= 1e-4 for callables
  double R_far = 0.0;       ///< outer cutoff; auto: from tol and the tail declarations
  int shells = 0;           ///< cap on dyadic shells between r0 and R_far; auto: unlimited
  int nodes_per_shell = 16; ///< Gauss-Legendre points per segment (8, 16, or 32)
  double tol = 1e-6;        ///< target absolute error for the certified bound
};

/// Pointwise application result.  error_bound is the certified total (inner
/// Taylor remainder + shell quadrature estimate + interpolation term + tail
/// bound); interpolation_bound is the portion due to reading a grid field
/// between its nodes (zero for closed-form fields and for axis-aligned rays
/// through a node of a zero-extended grid, which touch node values only).
struct ApplyResult {
  double value = 0.0;
  double error_bound = 0.0;
  double interpolation_bound = 0.0;
};

/// One-sided singular radial integral along +-theta,
///   integral_0^inf [ (u(x+r theta) + u(x-r theta))/2 - u(x) ] r^{-1-2s} dr.
/// The two-sided integral over the whole line is twice this value; operator
/// application sums 2 w_pair times this integral over direction pairs, so the
/// full-space Fourier multiplier comes out as -c_s A(xi).
/// [0, r0] is bounded analytically via M2 and skipped; [r0, R_far] is covered
/// by dyadic shells with embedded Gauss-Legendre error estimation and
/// adaptive bisection; the tail is bounded (or, for zero-extended grid
/// fields, integrated exactly).  Throws QuadratureBudgetExceeded when the
/// certified bound cannot meet budget.tol, ResolutionError when the grid
/// interpolation term alone dominates it.
double radial_sd_integral(const EvaluableField& u, const Vec3& x, const Vec3& theta,
                          double s, const QuadratureBudget& budget);

/// L u(x): 2 sum over direction pairs of w_pair times the radial integral,
/// with budget.tol distributed across the measure so the summed certificate
/// meets it.  Errors as for radial_sd_integral.
ApplyResult apply_pointwise(const StableOperator& op, const EvaluableField& u,
                            const Vec3& x, const QuadratureBudget& budget);

/// L u at every node with a nonzero mask entry (empty mask: all nodes);
/// other entries of the result are zero.  The field is the multilinear
/// interpolant of u with its extension rule.
GridFunction apply_grid(const StableOperator& op, const GridFunction& u,
                        const std::vector<std::uint8_t>& interior_mask,
                        const QuadratureBudget& budget);

/// integral_a^b r^p dr for 0 < a <= b, including the p = -1 logarithmic
/// branch; evaluated in a form stable for b/a near 1 and p near -1.
double power_segment_integral(double a, double b, double p);

}  // namespace stableop
