#pragma once

#include <vector>

#include "stableop/dirichlet.hpp"
#include "stableop/grid.hpp"

namespace stableop {

/// Multi-scale smoothness measurement over a rectangular window.  profile[k]
/// is the modulus at scale scales[k]: the sup of |u(x) - u(y)| (pair mode,
/// beta < 1) or |second difference| (interior mode, beta >= 1) over all
/// axis-aligned and diagonal increments of length at most scales[k] with both
/// endpoints in the window, so it is nonnegative and nondecreasing by
/// construction.  fitted_exponent is the log-log slope of the profile;
/// seminorm_estimate is max_k profile[k] / scales[k]^beta.
struct HolderReport {
  std::vector<double> scales;
  std::vector<double> profile;
  double fitted_exponent = 0.0;
  double fit_residual = 0.0;
  bool flagged = false;  ///< log-space fit residual above 0.15
  double seminorm_estimate = 0.0;
  double beta = 0.0;
  Vec3 window_lo{0, 0, 0};
  Vec3 window_hi{0, 0, 0};
};

HolderReport holder_seminorm(const GridFunction& u, const Vec3& window_lo,
                             const Vec3& window_hi, double beta);

/// Log-log slope of sup |second difference of u at the given centre| against
/// the increment length, over the requested scales (snapped to node
/// multiples; axis and diagonal directions).
struct ExponentFit {
  double exponent = 0.0;
  double residual = 0.0;
  bool flagged = false;
};

ExponentFit exponent_fit(const GridFunction& u, const Vec3& center,
                         const std::vector<double>& scales);

/// u / d^s on the band of nodes with d(x) in [d_min, d_max]; zero elsewhere.
/// Feed the result back into holder_seminorm with a window inside the band.
GridFunction boundary_ratio(const GridFunction& u, const DomainSpec& domain, double s,
                            double d_min, double d_max);

/// Best-coefficient curve of the one-sided boundary model Q ((x-z).nu)_+^s
/// over shrinking balls: qstar[k] minimizes the discrete L2 gap on
/// B_{radii[k]}(z), q_limit averages the two smallest-radius values with a
/// geometric-series error bar driven by the fitted contraction rate, and
/// remainder[k] is the sup gap against the limit coefficient.
struct BoundaryExpansion {
  Vec3 z{0, 0, 0};
  Vec3 nu{0, 0, 0};
  std::vector<double> radii;
  std::vector<double> qstar;
  std::vector<double> remainder;
  double q_limit = 0.0;
  double q_error = 0.0;
  double contraction_rate = 0.0;  ///< fitted slope of |Q*(2r) - Q*(r)| vs r
  double remainder_slope = 0.0;
};

BoundaryExpansion boundary_coefficient(const GridFunction& u, const Vec3& z, const Vec3& nu,
                                       double s, const std::vector<double>& radii);

/// How far the curved-boundary power d^s sits from its flat linearization
/// ((x-z).nu)_+^s near the boundary point z: sup gaps and Holder-(s-eps)
/// seminorms of the gap over B_r(x0) for each radius, with their fitted
/// r-exponents.  Needs a shape whose curvature is known (ball, or a flat box
/// face where the gap vanishes identically).
struct DistanceGap {
  std::vector<double> radii;
  std::vector<double> sup_gap;
  std::vector<double> holder_gap;
  double sup_exponent = 0.0;
  double holder_exponent = 0.0;
};

DistanceGap distance_linearization_gap(const DomainSpec& domain, const Vec3& z, const Vec3& x0,
                                       double s, const std::vector<double>& radii,
                                       double eps = 0.1);

}  // namespace stableop
