#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "stableop/spectral_measure.hpp"

namespace stableop {

/// Uniform tensor grid in dimension n (1 or 2): node (i0, i1) sits at
/// lo[k] + i_k h[k].  Storage is row-major with the first axis fastest:
/// index = i0 + pts[0] * i1.
struct GridGeometry {
  int n = 1;
  std::array<int, 2> pts{1, 1};
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> h{1.0, 1.0};

  /// Closed interval [a, b] with npts nodes, h = (b - a)/(npts - 1).
  static GridGeometry line(double a, double b, int npts);
  /// Closed box with npts[k] nodes per axis.
  static GridGeometry box(const std::array<double, 2>& a, const std::array<double, 2>& b,
                          const std::array<int, 2>& npts);
  /// Half-open FFT convention: npts nodes x_j = a + j (b - a)/npts, j < npts.
  static GridGeometry fft_line(double a, double b, int npts);
  static GridGeometry fft_box(const std::array<double, 2>& a,
                              const std::array<double, 2>& b,
                              const std::array<int, 2>& npts);

  std::size_t size() const {
    return static_cast<std::size_t>(pts[0]) * (n == 2 ? pts[1] : 1);
  }
  std::size_t index(int i0, int i1 = 0) const {
    return static_cast<std::size_t>(i0) + static_cast<std::size_t>(pts[0]) * i1;
  }
  double coord(int axis, int i) const { return lo[axis] + i * h[axis]; }
  double hi(int axis) const { return lo[axis] + (pts[axis] - 1) * h[axis]; }
  Vec3 node(int i0, int i1 = 0) const {
    return {coord(0, i0), n == 2 ? coord(1, i1) : 0.0, 0.0};
  }
  bool contains(const Vec3& x, double tol_cells = 1e-9) const;
};

/// Scalar field sampled on a grid.  Evaluation between nodes interpolates;
/// outside the node hull the extension rule applies (identically zero, or a
/// caller-supplied function of x).
class GridFunction {
 public:
  enum class Extension { Zero, Callable };

  GridFunction() = default;
  GridFunction(GridGeometry g, std::vector<double> values);
  GridFunction(GridGeometry g, const std::function<double(const Vec3&)>& fill);

  void set_extension(std::function<double(const Vec3&)> f);
  Extension extension() const { return ext_; }

  const GridGeometry& geometry() const { return geom_; }
  const std::vector<double>& values() const { return v_; }
  std::vector<double>& values() { return v_; }
  double at(int i0, int i1 = 0) const { return v_[geom_.index(i0, i1)]; }
  double& at(int i0, int i1 = 0) { return v_[geom_.index(i0, i1)]; }

  /// Value at an out-of-range multi-index, routed through the extension.
  double at_ext(int i0, int i1 = 0) const;

  /// Multilinear interpolation; extension outside the hull.
  double eval(const Vec3& x) const;
  /// Tensor cubic (Catmull-Rom) interpolation; extension supplies the values
  /// of stencil nodes that fall outside the grid.
  double eval_cubic(const Vec3& x) const;

  double max_abs() const;

 private:
  GridGeometry geom_;
  std::vector<double> v_;
  Extension ext_ = Extension::Zero;
  std::function<double(const Vec3&)> ext_fn_;
};

/// Writes "x1,value" or "x1,x2,value" rows with 17 significant digits, first
/// axis varying fastest; LF line endings.
void write_csv(const std::string& path, const GridFunction& f);
/// Writes the same grid layout with extra value columns, e.g. {"Lu","err_bound"}.
void write_csv_columns(const std::string& path, const GridGeometry& g,
                       const std::vector<std::string>& names,
                       const std::vector<const std::vector<double>*>& columns);
/// Reads a CSV produced by write_csv; reconstructs the uniform geometry and
/// accepts rows in any order.  Throws ConfigError on malformed input.
GridFunction read_csv(const std::string& path);

}  // namespace stableop
