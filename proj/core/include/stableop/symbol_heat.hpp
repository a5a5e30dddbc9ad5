#pragma once

#include "stableop/grid.hpp"
#include "stableop/spectral_measure.hpp"

namespace stableop {

/// Heat kernel p(t,.) sampled on a half-open FFT grid, together with the
/// resolution diagnostics the construction was gated on.  Fourier convention:
/// forward transform integral u e^{-i x.xi} dx, inverse with (2 pi)^{-n};
/// the time multiplier is exp(-c_s A(xi) t).
struct HeatKernel {
  StableOperator op;
  double t = 1.0;
  GridFunction p;
  double mass = 0.0;             // h^n sum of node values; 1 up to rounding
  double nyquist_damping = 0.0;  // multiplier surviving at the grid's edge frequency
  double tail_mass_bound = 0.0;  // estimated probability mass outside the box
  double max_asymmetry = 0.0;    // sup |p(x) - p(-x)| over paired nodes
  double min_value = 0.0;        // most negative ringing value
};

/// Default kernel grids: [-200,200] with 2^16 points in 1-D, [-50,50]^2 with
/// 2^10 points per axis in 2-D.
GridGeometry default_heat_grid(int n);

/// Estimated mass of the time-t law outside the centered ball of radius R,
/// from the jump-tail asymptotics t * nu(|y| > R) = t * mass * R^{-2s} / s.
double heat_tail_mass_estimate(const StableOperator& op, double t, double R);

/// Inverse-FFT construction of p(t,.) on grid g (FFT convention).  Resolution
/// gate: the multiplier must be damped below ring_tol at the edge frequency,
/// OR the spatial tail estimate must fall below mass_tol; otherwise
/// ResolutionError.  Defaults refuse small orders (s < 0.25) on the default
/// grids through the same gate rather than silently truncating.
HeatKernel heat_kernel(const StableOperator& op, double t, const GridGeometry& g,
                       double ring_tol = 1e-12, double mass_tol = 1e-6);

/// Max over nodes of |p(t2,x) - r^{n} p(t1, r x)| / max p with
/// r = (t1/t2)^{1/2s}.  The t1 kernel is computed on the grid scaled by r, so
/// node j corresponds to node j exactly and both transforms periodize the
/// same function over the same lattice; the defect isolates genuine
/// self-similarity violations rather than fold or interpolation error.
double heat_selfsimilarity_check(const StableOperator& op, double t1, double t2,
                                 const GridGeometry& g);

struct MomentResult {
  double value = 0.0;       // integral of (1 + |x|^{2s-delta}) p(t,x) dx
  double tail_bound = 0.0;  // residual uncertainty after the tail corrections
  double raw_grid_sum = 0.0;
  double fold_correction = 0.0;  // periodized mass subtracted from the grid sum
  double tail_correction = 0.0;  // analytic contribution from outside the box
};

/// Weighted moment of Prop-2.2 type.  For delta in (0, 2s) the grid sum is
/// corrected analytically from the jump-tail asymptotics: the periodization
/// fold is subtracted and the true outside-the-box contribution added, so the
/// value tracks the R^n integral rather than the finite box.  delta <= 0
/// (divergent-weight negative control) returns the raw grid sum only, with an
/// infinite tail bound; callers compare extents to observe the divergence.
MomentResult moment_integral(const HeatKernel& hk, double delta);

/// Max over adjacent node pairs of |dp| / h along grid axes.
double lipschitz_seminorm(const HeatKernel& hk);

struct ConvolveResult {
  GridFunction g;
  double tail_bound = 0.0;  // neglected mass outside the box times sup |f|
};

/// Linear (non-circular) convolution p(t,.) * f on the kernel's grid: both
/// factors are laid out on a doubled grid, f through its extension rule, so
/// no periodic wrap contaminates the result.  f must live on the same grid
/// geometry as the kernel (ResolutionError otherwise).
ConvolveResult heat_convolve(const HeatKernel& hk, const GridFunction& f);

/// Spectral application of L: forward FFT of u, multiply by -c_s A(xi),
/// inverse FFT.  u must be on an FFT-convention grid; periodization of u and
/// Lu across the box boundary is the caller's responsibility.
GridFunction apply_multiplier_fft(const StableOperator& op, const GridFunction& u);

}  // namespace stableop
