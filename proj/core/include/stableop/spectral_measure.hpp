#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "stableop/errors.hpp"

namespace stableop {

/// Points and directions live in R^n with n <= 3; unused components are zero.
using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b, int n) {
  double r = 0.0;
  for (int i = 0; i < n; ++i) r += a[i] * b[i];
  return r;
}

inline double norm(const Vec3& a, int n) { return std::sqrt(dot(a, a, n)); }

inline Vec3 axpy(double t, const Vec3& d, const Vec3& x, int n) {
  Vec3 r{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) r[i] = x[i] + t * d[i];
  return r;
}

/// One direction on the unit sphere with a nonnegative weight.
struct Atom {
  Vec3 theta{0.0, 0.0, 0.0};
  double w = 0.0;
};

/// Finite measure mu on S^{n-1}.  Evaluation always goes through the
/// symmetrized form (mu(theta) + mu(-theta))/2, realized as a finite list of
/// quadrature atoms; atomic inputs need not list both +theta and -theta.
/// Uniform and density measures are discretized on a fixed antipodally
/// symmetric node set with per-node weights stored explicitly.
class SpectralMeasure {
 public:
  enum class Kind { Atomic, Uniform, Density };

  static SpectralMeasure atomic(int n, std::vector<Atom> atoms);
  static SpectralMeasure uniform(int n, double level, int nodes = 512);
  /// Density values on the uniform angular grid phi_k = 2 pi k / N (n = 2).
  static SpectralMeasure density(std::vector<double> values);
  /// Density with caller-supplied nodes and quadrature weights; atom.w must be
  /// weight * value.  Nodes are symmetrized like atomic input.
  static SpectralMeasure density_nodes(int n, std::vector<Atom> weighted);

  Kind kind() const { return kind_; }
  int dim() const { return n_; }
  double total_mass() const { return mass_; }
  double level() const { return level_; }

  /// Atomic / density-node input as given (directions normalized, order kept);
  /// empty for uniform measures.
  const std::vector<Atom>& input_atoms() const { return raw_; }

  /// Symmetrized quadrature atoms; weights sum to total_mass().
  const std::vector<Atom>& quadrature_atoms() const { return quad_; }

  /// Unique direction pairs {theta, -theta} with combined weight
  /// w(theta) + w(-theta).  Radial second-difference integrals are even in
  /// theta, so integrating each pair once is exact.
  const std::vector<Atom>& direction_pairs() const { return pairs_; }

 private:
  SpectralMeasure() = default;
  void finalize();

  Kind kind_ = Kind::Atomic;
  int n_ = 0;
  double level_ = 0.0;
  double mass_ = 0.0;
  std::vector<Atom> raw_;
  std::vector<Atom> quad_;
  std::vector<Atom> pairs_;
};

/// inf over unit nu of integral |nu . theta|^{2s} dmu(theta): dense scan over
/// search_resolution directions (default 720 on S^1, ~5000 on S^2) plus
/// golden-section refinement; never exceeds the raw scan minimum.  Throws
/// DegenerateMeasure when the infimum falls below 1e-10 * total mass (support
/// contained in a hyperplane up to numerical tolerance).
double ellipticity_lambda(const SpectralMeasure& mu, double s, int search_resolution = 0);

/// Symmetric stable operator of order 2s determined by a spectral measure.
/// The Fourier multiplier of L is -c_s A(xi) with
/// A(xi) = integral |xi . theta|^{2s} dmu(theta).
class StableOperator {
 public:
  StableOperator(SpectralMeasure mu, double s);

  /// Uniform measure normalized so the multiplier is exactly |xi|^{2s} in
  /// every direction; pointwise application quadratures see the discretized
  /// sphere and agree up to the node-set ripple.
  static StableOperator fractional_laplacian(int n, double s);
  /// Atoms at +-e_i, each of weight 1/(2 c_s): multiplier sum_i |xi_i|^{2s}.
  static StableOperator axis_sum(int n, double s);
  /// Canonical operator by name: "fractional_laplacian" or "axis_sum".
  static StableOperator canonical(const std::string& name, int n, double s);

  const SpectralMeasure& measure() const { return mu_; }
  int dim() const { return mu_.dim(); }
  double s() const { return s_; }
  double cs() const { return cs_; }
  double lambda() const { return lambda_; }
  double mass() const { return mu_.total_mass(); }

  /// A(xi); exact finite sum over quadrature atoms.
  double symbol(const Vec3& xi) const;
  /// c_s A(xi); the heat multiplier is exp(-multiplier(xi) t).
  double multiplier(const Vec3& xi) const { return cs_ * symbol(xi); }

 private:
  SpectralMeasure mu_;
  double s_ = 0.0;
  double cs_ = 0.0;
  double lambda_ = 0.0;
};

}  // namespace stableop
