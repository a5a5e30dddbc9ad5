#include "stableop/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "stableop/errors.hpp"

namespace stableop {

namespace {

void format_double(char* buf, std::size_t cap, double v) {
  std::snprintf(buf, cap, "%.17g", v);
}

}  // namespace

GridGeometry GridGeometry::line(double a, double b, int npts) {
  if (npts < 2 || !(b > a)) throw ConfigError("grid interval needs b > a and >= 2 nodes");
  GridGeometry g;
  g.n = 1;
  g.pts = {npts, 1};
  g.lo = {a, 0.0};
  g.h = {(b - a) / (npts - 1), 1.0};
  return g;
}

GridGeometry GridGeometry::box(const std::array<double, 2>& a, const std::array<double, 2>& b,
                               const std::array<int, 2>& npts) {
  GridGeometry g;
  g.n = 2;
  for (int k = 0; k < 2; ++k) {
    if (npts[k] < 2 || !(b[k] > a[k]))
      throw ConfigError("grid box needs b > a and >= 2 nodes per axis");
    g.lo[k] = a[k];
    g.h[k] = (b[k] - a[k]) / (npts[k] - 1);
  }
  g.pts = npts;
  return g;
}

GridGeometry GridGeometry::fft_line(double a, double b, int npts) {
  if (npts < 2 || !(b > a)) throw ConfigError("grid interval needs b > a and >= 2 nodes");
  GridGeometry g;
  g.n = 1;
  g.pts = {npts, 1};
  g.lo = {a, 0.0};
  g.h = {(b - a) / npts, 1.0};
  return g;
}

GridGeometry GridGeometry::fft_box(const std::array<double, 2>& a,
                                   const std::array<double, 2>& b,
                                   const std::array<int, 2>& npts) {
  GridGeometry g;
  g.n = 2;
  for (int k = 0; k < 2; ++k) {
    if (npts[k] < 2 || !(b[k] > a[k]))
      throw ConfigError("grid box needs b > a and >= 2 nodes per axis");
    g.lo[k] = a[k];
    g.h[k] = (b[k] - a[k]) / npts[k];
  }
  g.pts = npts;
  return g;
}

bool GridGeometry::contains(const Vec3& x, double tol_cells) const {
  for (int k = 0; k < n; ++k) {
    double t = (x[k] - lo[k]) / h[k];
    if (t < -tol_cells || t > pts[k] - 1 + tol_cells) return false;
  }
  return true;
}

GridFunction::GridFunction(GridGeometry g, std::vector<double> values)
    : geom_(g), v_(std::move(values)) {
  if (v_.size() != geom_.size()) throw ConfigError("grid value count does not match geometry");
}

GridFunction::GridFunction(GridGeometry g, const std::function<double(const Vec3&)>& fill)
    : geom_(g), v_(g.size(), 0.0) {
  for (int i1 = 0; i1 < (geom_.n == 2 ? geom_.pts[1] : 1); ++i1)
    for (int i0 = 0; i0 < geom_.pts[0]; ++i0)
      v_[geom_.index(i0, i1)] = fill(geom_.node(i0, i1));
}

void GridFunction::set_extension(std::function<double(const Vec3&)> f) {
  ext_ = Extension::Callable;
  ext_fn_ = std::move(f);
}

double GridFunction::at_ext(int i0, int i1) const {
  bool inside = i0 >= 0 && i0 < geom_.pts[0];
  if (geom_.n == 2) inside = inside && i1 >= 0 && i1 < geom_.pts[1];
  if (inside) return v_[geom_.index(i0, i1)];
  if (ext_ == Extension::Zero) return 0.0;
  return ext_fn_({geom_.coord(0, i0), geom_.n == 2 ? geom_.coord(1, i1) : 0.0, 0.0});
}

double GridFunction::eval(const Vec3& x) const {
  if (!geom_.contains(x)) {
    if (ext_ == Extension::Zero) return 0.0;
    return ext_fn_(x);
  }
  std::array<int, 2> i{0, 0};
  std::array<double, 2> u{0.0, 0.0};
  for (int k = 0; k < geom_.n; ++k) {
    double t = (x[k] - geom_.lo[k]) / geom_.h[k];
    int c = static_cast<int>(std::floor(t));
    c = std::clamp(c, 0, geom_.pts[k] - 2);
    i[k] = c;
    u[k] = std::clamp(t - c, 0.0, 1.0);
  }
  if (geom_.n == 1) {
    return (1.0 - u[0]) * at(i[0]) + u[0] * at(i[0] + 1);
  }
  double v00 = at(i[0], i[1]), v10 = at(i[0] + 1, i[1]);
  double v01 = at(i[0], i[1] + 1), v11 = at(i[0] + 1, i[1] + 1);
  return (1.0 - u[1]) * ((1.0 - u[0]) * v00 + u[0] * v10) +
         u[1] * ((1.0 - u[0]) * v01 + u[0] * v11);
}

namespace {

double catmull_rom(double p0, double p1, double p2, double p3, double t) {
  return 0.5 * (2.0 * p1 + t * (p2 - p0) +
                t * t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) +
                t * t * t * (3.0 * (p1 - p2) + p3 - p0));
}

}  // namespace

double GridFunction::eval_cubic(const Vec3& x) const {
  if (!geom_.contains(x)) {
    if (ext_ == Extension::Zero) return 0.0;
    return ext_fn_(x);
  }
  std::array<int, 2> i{0, 0};
  std::array<double, 2> u{0.0, 0.0};
  for (int k = 0; k < geom_.n; ++k) {
    double t = (x[k] - geom_.lo[k]) / geom_.h[k];
    int c = static_cast<int>(std::floor(t));
    c = std::clamp(c, 0, geom_.pts[k] - 2);
    i[k] = c;
    u[k] = std::clamp(t - c, 0.0, 1.0);
  }
  if (geom_.n == 1) {
    return catmull_rom(at_ext(i[0] - 1), at_ext(i[0]), at_ext(i[0] + 1), at_ext(i[0] + 2),
                       u[0]);
  }
  double rows[4];
  for (int r = 0; r < 4; ++r) {
    int j = i[1] - 1 + r;
    rows[r] = catmull_rom(at_ext(i[0] - 1, j), at_ext(i[0], j), at_ext(i[0] + 1, j),
                          at_ext(i[0] + 2, j), u[0]);
  }
  return catmull_rom(rows[0], rows[1], rows[2], rows[3], u[1]);
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

void write_csv(const std::string& path, const GridFunction& f) {
  write_csv_columns(path, f.geometry(), {"value"}, {&f.values()});
}

void write_csv_columns(const std::string& path, const GridGeometry& g,
                       const std::vector<std::string>& names,
                       const std::vector<const std::vector<double>*>& columns) {
  if (names.size() != columns.size() || names.empty())
    throw ConfigError("csv column names and data must match");
  for (const auto* c : columns)
    if (c->size() != g.size()) throw ConfigError("csv column length does not match grid");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << (g.n == 2 ? "x1,x2" : "x1");
  for (const auto& name : names) out << ',' << name;
  out << '\n';
  char buf[40];
  for (int i1 = 0; i1 < (g.n == 2 ? g.pts[1] : 1); ++i1) {
    for (int i0 = 0; i0 < g.pts[0]; ++i0) {
      format_double(buf, sizeof buf, g.coord(0, i0));
      out << buf;
      if (g.n == 2) {
        format_double(buf, sizeof buf, g.coord(1, i1));
        out << ',' << buf;
      }
      for (const auto* c : columns) {
        format_double(buf, sizeof buf, (*c)[g.index(i0, i1)]);
        out << ',' << buf;
      }
      out << '\n';
    }
  }
  if (!out) throw ConfigError("write failed: " + path);
}

namespace {

std::vector<double> axis_levels(std::vector<double> vals) {
  std::sort(vals.begin(), vals.end());
  std::vector<double> out;
  double span = vals.back() - vals.front();
  double tol = std::max(1e-12, 1e-9 * std::max(span, 1.0));
  for (double v : vals)
    if (out.empty() || v - out.back() > tol) out.push_back(v);
  return out;
}

}  // namespace

GridFunction read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open for reading: " + path);
  std::string header;
  if (!std::getline(in, header)) throw ConfigError("empty csv: " + path);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  int n = 0;
  if (header.rfind("x1,x2,", 0) == 0)
    n = 2;
  else if (header.rfind("x1,", 0) == 0)
    n = 1;
  else
    throw ConfigError("csv header must start with x1[,x2]: " + path);

  std::vector<std::array<double, 3>> rows;  // x1, x2, value (first value column)
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 3> row{0.0, 0.0, 0.0};
    const char* p = line.c_str();
    for (int c = 0; c < n + 1; ++c) {
      char* end = nullptr;
      double v = std::strtod(p, &end);
      if (end == p)
        throw ConfigError("csv parse error at line " + std::to_string(lineno) + ": " + path);
      row[c == n ? 2 : c] = v;
      p = end;
      if (*p == ',') ++p;
    }
    rows.push_back(row);
  }
  if (rows.size() < 2) throw ConfigError("csv needs at least two data rows: " + path);

  std::vector<double> c0, c1;
  for (const auto& r : rows) c0.push_back(r[0]);
  if (n == 2)
    for (const auto& r : rows) c1.push_back(r[1]);
  std::vector<double> l0 = axis_levels(c0);
  std::vector<double> l1 = n == 2 ? axis_levels(c1) : std::vector<double>{0.0};
  if (l0.size() < 2 || (n == 2 && l1.size() < 2))
    throw ConfigError("csv grid needs >= 2 distinct coordinates per axis: " + path);

  auto check_uniform = [&](const std::vector<double>& l) {
    double h = (l.back() - l.front()) / (l.size() - 1);
    for (std::size_t i = 0; i < l.size(); ++i)
      if (std::abs(l[i] - (l.front() + i * h)) > 1e-6 * h)
        throw ConfigError("csv grid is not uniform: " + path);
    return h;
  };
  double h0 = check_uniform(l0);
  double h1 = n == 2 ? check_uniform(l1) : 1.0;

  GridGeometry g;
  g.n = n;
  g.pts = {static_cast<int>(l0.size()), n == 2 ? static_cast<int>(l1.size()) : 1};
  g.lo = {l0.front(), n == 2 ? l1.front() : 0.0};
  g.h = {h0, h1};
  if (g.size() != rows.size())
    throw ConfigError("csv row count does not fill the grid: " + path);

  std::vector<double> vals(g.size(), 0.0);
  std::vector<bool> seen(g.size(), false);
  for (const auto& r : rows) {
    int i0 = static_cast<int>(std::lround((r[0] - g.lo[0]) / g.h[0]));
    int i1 = n == 2 ? static_cast<int>(std::lround((r[1] - g.lo[1]) / g.h[1])) : 0;
    if (i0 < 0 || i0 >= g.pts[0] || i1 < 0 || i1 >= g.pts[1] ||
        std::abs(r[0] - g.coord(0, i0)) > 1e-6 * g.h[0] ||
        (n == 2 && std::abs(r[1] - g.coord(1, i1)) > 1e-6 * g.h[1]))
      throw ConfigError("csv row does not sit on the grid: " + path);
    std::size_t idx = g.index(i0, i1);
    if (seen[idx]) throw ConfigError("duplicate csv grid node: " + path);
    seen[idx] = true;
    vals[idx] = r[2];
  }
  return GridFunction(g, std::move(vals));
}

}  // namespace stableop
