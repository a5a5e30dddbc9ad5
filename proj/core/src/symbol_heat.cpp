#include "stableop/symbol_heat.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "stableop/errors.hpp"

namespace stableop {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct FftBuffer {
  fftw_complex* data = nullptr;
  explicit FftBuffer(std::size_t count) {
    data = fftw_alloc_complex(count);
    if (!data) throw std::bad_alloc();
  }
  ~FftBuffer() { fftw_free(data); }
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;
};

// In-place c2c transform.  Layout is i0-fastest, so the grid's axis 0 is
// FFTW's last dimension.  FFTW_ESTIMATE keeps planning deterministic and does
// not overwrite the (already filled) array.
void transform(const GridGeometry& g, fftw_complex* a, int sign) {
  fftw_plan plan = (g.n == 1)
                       ? fftw_plan_dft_1d(g.pts[0], a, a, sign, FFTW_ESTIMATE)
                       : fftw_plan_dft_2d(g.pts[1], g.pts[0], a, a, sign, FFTW_ESTIMATE);
  if (!plan) throw Error("FFT plan creation failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);
}

// Frequency of DFT index k on axis `axis`, with the usual wrap to negative
// frequencies past N/2.
double frequency(const GridGeometry& g, int axis, int k) {
  const int half = g.pts[axis] / 2;
  const int kk = (k < half) ? k : k - g.pts[axis];
  return 2.0 * kPi * kk / (g.pts[axis] * g.h[axis]);
}

void require_fft_grid(const GridGeometry& g) {
  if (g.n < 1 || g.n > 2) throw ConfigError("FFT grids cover dimensions 1 and 2");
  for (int a = 0; a < g.n; ++a)
    if (g.pts[a] < 4 || g.pts[a] % 2 != 0)
      throw ConfigError("FFT grids need an even node count (>= 4) per axis");
}

double box_period(const GridGeometry& g, int axis) { return g.pts[axis] * g.h[axis]; }

double min_half_extent(const GridGeometry& g) {
  double r = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.n; ++a) r = std::min(r, 0.5 * box_period(g, a));
  return r;
}

// Radius at which the ray r -> r * dir from the origin leaves the periodic box.
double exit_radius(const GridGeometry& g, const Vec3& dir) {
  double r = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.n; ++a) {
    const double lo = g.lo[a];
    const double hi = g.lo[a] + box_period(g, a);
    if (!(lo < 0.0 && hi > 0.0)) throw ConfigError("grid box must contain the origin");
    if (dir[a] > 1e-14) r = std::min(r, hi / dir[a]);
    if (dir[a] < -1e-14) r = std::min(r, lo / dir[a]);
  }
  return r;
}

// Position y folded into the periodic box, componentwise.
Vec3 wrap_into_box(const GridGeometry& g, const Vec3& y) {
  Vec3 w{0.0, 0.0, 0.0};
  for (int a = 0; a < g.n; ++a) {
    const double period = box_period(g, a);
    w[a] = y[a] - period * std::floor((y[a] - g.lo[a]) / period);
  }
  return w;
}

constexpr double kGl8Nodes[4] = {0.1834346424956498, 0.5255324099163290,
                                 0.7966664774136267, 0.9602898564975363};
constexpr double kGl8Weights[4] = {0.3626837833783620, 0.3137066458778873,
                                   0.2223810344533745, 0.1012285362903763};

// integral over (r0, r1) of (1 + |wrap(r dir)|^a) r^{-1-2s} dr.  Cut at the
// radii where the folded position jumps between periods AND where a folded
// coordinate passes through zero (|.|^a has a root-type cusp there); between
// cuts the integrand is smooth enough for fixed Gauss-Legendre.
double folded_weight_integral(const GridGeometry& g, const Vec3& dir, double r0, double r1,
                              double a, double s) {
  std::vector<double> cuts{r0, r1};
  for (int ax = 0; ax < g.n; ++ax) {
    if (std::abs(dir[ax]) < 1e-14) continue;
    const double period = box_period(g, ax);
    const double step = period / std::abs(dir[ax]);
    const double base = (g.lo[ax] / dir[ax]);
    for (double base_r : {base, 0.0}) {
      const double kmin = std::ceil((r0 - base_r) / step);
      for (double k = kmin;; k += 1.0) {
        const double rc = base_r + k * step;
        if (!(rc < r1)) break;
        if (rc > r0) cuts.push_back(rc);
      }
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    if (!(hi > lo * (1.0 + 1e-15))) continue;
    const double mid = 0.5 * (lo + hi);
    const double rad = 0.5 * (hi - lo);
    for (int q = 0; q < 4; ++q) {
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        const double r = mid + sgn * rad * kGl8Nodes[q];
        const Vec3 y{r * dir[0], r * dir[1], r * dir[2]};
        const double w = 1.0 + std::pow(norm(wrap_into_box(g, y), g.n), a);
        acc += kGl8Weights[q] * rad * w * std::pow(r, -1.0 - 2.0 * s);
      }
    }
  }
  return acc;
}

}  // namespace

GridGeometry default_heat_grid(int n) {
  if (n == 1) return GridGeometry::fft_line(-200.0, 200.0, 1 << 16);
  if (n == 2) return GridGeometry::fft_box({-50.0, -50.0}, {50.0, 50.0}, {1 << 10, 1 << 10});
  throw ConfigError("heat kernel grids cover dimensions 1 and 2");
}

double heat_tail_mass_estimate(const StableOperator& op, double t, double R) {
  if (!(t > 0.0) || !(R > 0.0)) throw ConfigError("tail estimate needs t > 0 and R > 0");
  return t * op.mass() * std::pow(R, -2.0 * op.s()) / op.s();
}

HeatKernel heat_kernel(const StableOperator& op, double t, const GridGeometry& g,
                       double ring_tol, double mass_tol) {
  require_fft_grid(g);
  if (op.dim() != g.n) throw ConfigError("operator and grid dimensions differ");
  if (!(t > 0.0)) throw ConfigError("heat kernel time must be positive");

  double xi_edge = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.n; ++a) xi_edge = std::min(xi_edge, kPi / g.h[a]);
  const double half_extent = min_half_extent(g);
  // The multiplier exceeds c_s * lambda * |xi|^{2s}, so this bounds what
  // survives at the edge of the frequency box.
  const double damping =
      std::exp(-t * op.cs() * op.lambda() * std::pow(xi_edge, 2.0 * op.s()));
  const double tail = heat_tail_mass_estimate(op, t, half_extent);
  if (!(damping < ring_tol) && !(tail < mass_tol))
    throw ResolutionError(
        "heat kernel grid resolves neither the frequency decay (damping " +
        std::to_string(damping) + " >= " + std::to_string(ring_tol) +
        ") nor the spatial tail (estimate " + std::to_string(tail) +
        " >= " + std::to_string(mass_tol) + "); enlarge or refine the grid");

  const std::size_t total = g.size();
  FftBuffer buf(total);
  if (g.n == 1) {
    for (int k = 0; k < g.pts[0]; ++k) {
      const Vec3 xi{frequency(g, 0, k), 0.0, 0.0};
      const double sign = (k & 1) ? -1.0 : 1.0;
      buf.data[k][0] = sign * std::exp(-t * op.multiplier(xi));
      buf.data[k][1] = 0.0;
    }
  } else {
    for (int k1 = 0; k1 < g.pts[1]; ++k1) {
      const double f1 = frequency(g, 1, k1);
      for (int k0 = 0; k0 < g.pts[0]; ++k0) {
        const Vec3 xi{frequency(g, 0, k0), f1, 0.0};
        const double sign = ((k0 + k1) & 1) ? -1.0 : 1.0;
        const std::size_t idx = g.index(k0, k1);
        buf.data[idx][0] = sign * std::exp(-t * op.multiplier(xi));
        buf.data[idx][1] = 0.0;
      }
    }
  }
  transform(g, buf.data, FFTW_BACKWARD);

  double inv_box = 1.0;
  double cell = 1.0;
  for (int a = 0; a < g.n; ++a) {
    inv_box /= box_period(g, a);
    cell *= g.h[a];
  }
  std::vector<double> values(total);
  double sum = 0.0;
  double min_value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < total; ++j) {
    values[j] = buf.data[j][0] * inv_box;
    sum += values[j];
    min_value = std::min(min_value, values[j]);
  }

  double asym = 0.0;
  if (g.n == 1) {
    for (int j = 1; 2 * j < g.pts[0]; ++j)
      asym = std::max(asym, std::abs(values[j] - values[g.pts[0] - j]));
  } else {
    for (int j1 = 1; j1 < g.pts[1]; ++j1)
      for (int j0 = 1; j0 < g.pts[0]; ++j0) {
        const std::size_t idx = g.index(j0, j1);
        const std::size_t partner = g.index(g.pts[0] - j0, g.pts[1] - j1);
        if (partner > idx)
          asym = std::max(asym, std::abs(values[idx] - values[partner]));
      }
  }

  return HeatKernel{op,   t,    GridFunction(g, std::move(values)),
                    cell * sum, damping, tail,
                    asym, min_value};
}

double heat_selfsimilarity_check(const StableOperator& op, double t1, double t2,
                                 const GridGeometry& g) {
  if (!(t1 > 0.0 && t2 > 0.0)) throw ConfigError("self-similarity check needs t1, t2 > 0");
  const double r = std::pow(t1 / t2, 1.0 / (2.0 * op.s()));
  // Scale the t1 grid by r so node j of one grid maps onto node j of the
  // other: both FFTs then periodize the same function over the same lattice
  // and the comparison carries no interpolation or fold mismatch.
  GridGeometry gs = g;
  for (int ax = 0; ax < g.n; ++ax) {
    gs.lo[ax] *= r;
    gs.h[ax] *= r;
  }
  const HeatKernel a = heat_kernel(op, t1, gs);
  const HeatKernel b = heat_kernel(op, t2, g);
  const double rn = std::pow(r, g.n);
  const double pmax = b.p.max_abs();
  double worst = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    worst = std::max(worst, std::abs(b.p.values()[j] - rn * a.p.values()[j]));
  return worst / pmax;
}

MomentResult moment_integral(const HeatKernel& hk, double delta) {
  const double s = hk.op.s();
  if (!(delta < 2.0 * s)) throw ConfigError("moment weight needs delta < 2s");
  const GridGeometry& g = hk.p.geometry();
  const double a = 2.0 * s - delta;

  double cell = 1.0;
  for (int ax = 0; ax < g.n; ++ax) cell *= g.h[ax];
  double raw = 0.0;
  for (int j1 = 0; j1 < (g.n == 2 ? g.pts[1] : 1); ++j1)
    for (int j0 = 0; j0 < g.pts[0]; ++j0) {
      const Vec3 x = g.node(j0, j1);
      raw += (1.0 + std::pow(norm(x, g.n), a)) * hk.p.at(j0, j1);
    }
  raw *= cell;

  if (delta <= 0.0)
    return MomentResult{raw, std::numeric_limits<double>::infinity(), raw, 0.0, 0.0};

  double corner = 0.0;
  double max_period = 0.0;
  for (int ax = 0; ax < g.n; ++ax) {
    const double m = std::max(std::abs(g.lo[ax]), std::abs(g.lo[ax] + box_period(g, ax)));
    corner += m * m;
    max_period = std::max(max_period, box_period(g, ax));
  }
  const double w_max = 1.0 + std::pow(std::sqrt(corner), a);
  const double r_stop = 1000.0 * max_period;

  const double t = hk.t;
  double fold = 0.0;
  double outside = 0.0;
  double remainder = 0.0;
  for (const Atom& pair : hk.op.measure().direction_pairs()) {
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      const Vec3 dir{sgn * pair.theta[0], sgn * pair.theta[1], sgn * pair.theta[2]};
      const double rex = exit_radius(g, dir);
      outside += t * pair.w *
                 (std::pow(rex, -2.0 * s) / (2.0 * s) + std::pow(rex, -delta) / delta);
      fold += t * pair.w * folded_weight_integral(g, dir, rex, r_stop, a, s);
      remainder += t * pair.w * w_max * std::pow(r_stop, -2.0 * s) / (2.0 * s);
    }
  }
  // second-order-in-t slack for replacing the exact tail by the jump density
  const double second = 0.5 * hk.tail_mass_bound * hk.tail_mass_bound *
                        (1.0 + std::pow(2.0 * min_half_extent(g), a));

  return MomentResult{raw - fold + outside, remainder + second, raw, fold, outside};
}

double lipschitz_seminorm(const HeatKernel& hk) {
  const GridGeometry& g = hk.p.geometry();
  double worst = 0.0;
  for (int j1 = 0; j1 < (g.n == 2 ? g.pts[1] : 1); ++j1)
    for (int j0 = 0; j0 + 1 < g.pts[0]; ++j0)
      worst = std::max(worst, std::abs(hk.p.at(j0 + 1, j1) - hk.p.at(j0, j1)) / g.h[0]);
  if (g.n == 2)
    for (int j1 = 0; j1 + 1 < g.pts[1]; ++j1)
      for (int j0 = 0; j0 < g.pts[0]; ++j0)
        worst = std::max(worst, std::abs(hk.p.at(j0, j1 + 1) - hk.p.at(j0, j1)) / g.h[1]);
  return worst;
}

ConvolveResult heat_convolve(const HeatKernel& hk, const GridFunction& f) {
  const GridGeometry& g = hk.p.geometry();
  const GridGeometry& gf = f.geometry();
  bool same = gf.n == g.n;
  for (int ax = 0; same && ax < g.n; ++ax)
    same = gf.pts[ax] == g.pts[ax] && std::abs(gf.lo[ax] - g.lo[ax]) <= 1e-9 * g.h[ax] &&
           std::abs(gf.h[ax] - g.h[ax]) <= 1e-12 * g.h[ax];
  if (!same) throw ResolutionError("convolution factors must share one grid geometry");

  GridGeometry g2 = g;
  std::array<int, 2> q{0, 0};
  for (int ax = 0; ax < g.n; ++ax) {
    q[ax] = static_cast<int>(std::lround(-g.lo[ax] / g.h[ax]));
    if (std::abs(q[ax] * g.h[ax] + g.lo[ax]) > 1e-6 * g.h[ax])
      throw ResolutionError("kernel grid must place the origin on a node");
    g2.pts[ax] = 2 * g.pts[ax];
    g2.lo[ax] = g.lo[ax] - 0.5 * box_period(g, ax);
  }

  const std::size_t total2 = g2.size();
  FftBuffer kern(total2);
  FftBuffer func(total2);
  double max_f = 0.0;
  const int n1 = (g.n == 2) ? g2.pts[1] : 1;
  // The kernel's box-edge sample represents both antipodal displacements
  // +-P/2, so it is split half-and-half between them (closed-trapezoid
  // endpoint weighting); otherwise the seam biases the kernel's odd moments.
  auto seam_split = [&](int j, int axis, int& idx_axis, double& w) {
    if (j > 0 && j < g.pts[axis]) {
      idx_axis = j;
      w = 1.0;
    } else if (j == 0 || j == g.pts[axis]) {
      idx_axis = 0;
      w = 0.5;
    } else {
      idx_axis = 0;
      w = 0.0;
    }
  };
  for (int d1 = 0; d1 < n1; ++d1) {
    const int dd1 = (g.n == 2 && d1 >= g.pts[1]) ? d1 - g2.pts[1] : d1;
    int i1p = 0;
    double w1 = 1.0;
    if (g.n == 2) seam_split(dd1 + q[1], 1, i1p, w1);
    for (int d0 = 0; d0 < g2.pts[0]; ++d0) {
      const int dd0 = (d0 >= g.pts[0]) ? d0 - g2.pts[0] : d0;
      int i0p = 0;
      double w0 = 0.0;
      seam_split(dd0 + q[0], 0, i0p, w0);
      const std::size_t idx = static_cast<std::size_t>(d0) +
                              static_cast<std::size_t>(g2.pts[0]) * d1;
      const double w = w0 * w1;
      kern.data[idx][0] = (w != 0.0) ? w * hk.p.at(i0p, i1p) : 0.0;
      kern.data[idx][1] = 0.0;
    }
  }
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i0 = 0; i0 < g2.pts[0]; ++i0) {
      const std::size_t idx = static_cast<std::size_t>(i0) +
                              static_cast<std::size_t>(g2.pts[0]) * i1;
      const double v = f.at_ext(i0 - g.pts[0] / 2, g.n == 2 ? i1 - g.pts[1] / 2 : 0);
      func.data[idx][0] = v;
      func.data[idx][1] = 0.0;
      max_f = std::max(max_f, std::abs(v));
    }
  }

  transform(g2, kern.data, FFTW_FORWARD);
  transform(g2, func.data, FFTW_FORWARD);
  double cell = 1.0;
  for (int ax = 0; ax < g.n; ++ax) cell *= g.h[ax];
  const double scale = cell / static_cast<double>(total2);
  for (std::size_t j = 0; j < total2; ++j) {
    const double re = kern.data[j][0] * func.data[j][0] - kern.data[j][1] * func.data[j][1];
    const double im = kern.data[j][0] * func.data[j][1] + kern.data[j][1] * func.data[j][0];
    kern.data[j][0] = re * scale;
    kern.data[j][1] = im * scale;
  }
  transform(g2, kern.data, FFTW_BACKWARD);

  std::vector<double> out(g.size());
  for (int j1 = 0; j1 < (g.n == 2 ? g.pts[1] : 1); ++j1)
    for (int j0 = 0; j0 < g.pts[0]; ++j0) {
      const std::size_t src = static_cast<std::size_t>(j0 + g.pts[0] / 2) +
                              static_cast<std::size_t>(g2.pts[0]) *
                                  (g.n == 2 ? j1 + g.pts[1] / 2 : 0);
      out[g.index(j0, j1)] = kern.data[src][0];
    }
  return ConvolveResult{GridFunction(g, std::move(out)), hk.tail_mass_bound * max_f};
}

GridFunction apply_multiplier_fft(const StableOperator& op, const GridFunction& u) {
  const GridGeometry& g = u.geometry();
  require_fft_grid(g);
  if (op.dim() != g.n) throw ConfigError("operator and grid dimensions differ");
  const std::size_t total = g.size();
  FftBuffer buf(total);
  for (std::size_t j = 0; j < total; ++j) {
    buf.data[j][0] = u.values()[j];
    buf.data[j][1] = 0.0;
  }
  transform(g, buf.data, FFTW_FORWARD);
  const double inv_total = 1.0 / static_cast<double>(total);
  for (int k1 = 0; k1 < (g.n == 2 ? g.pts[1] : 1); ++k1) {
    const double f1 = (g.n == 2) ? frequency(g, 1, k1) : 0.0;
    for (int k0 = 0; k0 < g.pts[0]; ++k0) {
      const Vec3 xi{frequency(g, 0, k0), f1, 0.0};
      const double factor = -op.multiplier(xi) * inv_total;
      const std::size_t idx = g.index(k0, k1);
      buf.data[idx][0] *= factor;
      buf.data[idx][1] *= factor;
    }
  }
  transform(g, buf.data, FFTW_BACKWARD);
  std::vector<double> out(total);
  for (std::size_t j = 0; j < total; ++j) out[j] = buf.data[j][0];
  return GridFunction(g, std::move(out));
}

}  // namespace stableop
