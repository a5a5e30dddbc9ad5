#include "stableop/dirichlet.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>

#include "stableop/errors.hpp"
#include "stableop/parallel.hpp"

namespace stableop {

namespace {

double power_tail(double r, double s) { return std::pow(r, -2.0 * s) / (2.0 * s); }

int axis_of(const Vec3& theta, int n) {
  for (int a = 0; a < n; ++a) {
    if (std::abs(std::abs(theta[a]) - 1.0) < 1e-12) return a;
  }
  return -1;
}

}  // namespace

DomainSpec DomainSpec::interval(double a, double b) {
  if (!(a < b)) throw DomainError("interval needs a < b");
  DomainSpec d;
  d.kind = Kind::Interval;
  d.n = 1;
  d.lo = {a, 0.0, 0.0};
  d.hi = {b, 0.0, 0.0};
  d.center = {0.5 * (a + b), 0.0, 0.0};
  return d;
}

DomainSpec DomainSpec::ball(int n, const Vec3& center, double radius) {
  if (n < 1 || n > 2) throw DomainError("domains support n in {1, 2}");
  if (!(radius > 0.0)) throw DomainError("ball needs a positive radius");
  DomainSpec d;
  d.kind = Kind::Ball;
  d.n = n;
  d.center = center;
  d.radius = radius;
  for (int a = 0; a < n; ++a) {
    d.lo[a] = center[a] - radius;
    d.hi[a] = center[a] + radius;
  }
  return d;
}

DomainSpec DomainSpec::box(int n, const Vec3& lo, const Vec3& hi) {
  if (n < 1 || n > 2) throw DomainError("domains support n in {1, 2}");
  for (int a = 0; a < n; ++a) {
    if (!(lo[a] < hi[a])) throw DomainError("box needs lo < hi on every axis");
  }
  DomainSpec d;
  d.kind = Kind::Box;
  d.n = n;
  d.lo = lo;
  d.hi = hi;
  for (int a = 0; a < n; ++a) d.center[a] = 0.5 * (lo[a] + hi[a]);
  return d;
}

DomainSpec DomainSpec::complement_ball_in_box(int n, const Vec3& center, double radius,
                                              const Vec3& lo, const Vec3& hi) {
  DomainSpec d = box(n, lo, hi);
  if (!(radius > 0.0)) throw DomainError("complement ball needs a positive radius");
  for (int a = 0; a < n; ++a) {
    // strict containment keeps the min-of-distances formula exact
    if (center[a] - radius <= lo[a] || center[a] + radius >= hi[a])
      throw DomainError("complement ball must lie strictly inside the box");
  }
  d.kind = Kind::ComplementBallInBox;
  d.center = center;
  d.radius = radius;
  return d;
}

double DomainSpec::signed_distance(const Vec3& x) const {
  auto box_dist = [&](const Vec3& p) {
    double inside = std::numeric_limits<double>::infinity();
    double out2 = 0.0;
    bool out = false;
    for (int a = 0; a < n; ++a) {
      double q = std::max(lo[a] - p[a], p[a] - hi[a]);
      if (q > 0.0) {
        out = true;
        out2 += q * q;
      } else {
        inside = std::min(inside, -q);
      }
    }
    return out ? -std::sqrt(out2) : inside;
  };
  switch (kind) {
    case Kind::Interval:
      return std::min(x[0] - lo[0], hi[0] - x[0]);
    case Kind::Ball: {
      double r2 = 0.0;
      for (int a = 0; a < n; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
      return radius - std::sqrt(r2);
    }
    case Kind::Box:
      return box_dist(x);
    case Kind::ComplementBallInBox: {
      double r2 = 0.0;
      for (int a = 0; a < n; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
      return std::min(std::sqrt(r2) - radius, box_dist(x));
    }
  }
  return 0.0;
}

void DomainSpec::bounds(Vec3& blo, Vec3& bhi) const {
  blo = lo;
  bhi = hi;
}

double DomainSpec::diameter() const {
  double d2 = 0.0;
  for (int a = 0; a < n; ++a) d2 += (hi[a] - lo[a]) * (hi[a] - lo[a]);
  return std::sqrt(d2);
}

DirichletProblem DirichletProblem::standard(const StableOperator& op, const DomainSpec& domain,
                                            std::function<double(const Vec3&)> f, double h) {
  if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");
  if (op.dim() != domain.n) throw ConfigError("operator and domain dimensions differ");
  DirichletProblem p{op, domain, std::move(f), GridGeometry{}, true};
  double margin = domain.diameter();
  if (domain.n == 1) {
    double half = 0.5 * (domain.hi[0] - domain.lo[0]);
    int k = static_cast<int>(std::ceil((half + margin) / h - 1e-12));
    p.grid = GridGeometry::line(domain.center[0] - k * h, domain.center[0] + k * h, 2 * k + 1);
  } else {
    Vec3 glo{0, 0, 0}, ghi{0, 0, 0};
    std::array<int, 2> npts{0, 0};
    for (int a = 0; a < 2; ++a) {
      double half = 0.5 * (domain.hi[a] - domain.lo[a]);
      int k = static_cast<int>(std::ceil((half + margin) / h - 1e-12));
      glo[a] = domain.center[a] - k * h;
      ghi[a] = domain.center[a] + k * h;
      npts[a] = 2 * k + 1;
    }
    p.grid = GridGeometry::box({glo[0], glo[1]}, {ghi[0], ghi[1]}, npts);
  }
  return p;
}

namespace {

struct RowScratch {
  std::vector<double> row;      // dense coefficients over interior columns
  double shell_mass = 0.0;      // accumulated cell integrals of r^{-1-2s}
  double shell_mass_exact = 0.0;
};

/// Exact integrals of the P1 interpolant along one side of an axis pair.
/// Cells are [k h, (k+1) h] out to the grid edge; the first is clipped at r0.
void axis_side(const GridGeometry& gg, const std::array<int, 2>& ix, int axis, int dir,
               double s, double r0, double half_factor, const std::vector<int>& col_of,
               RowScratch& rs) {
  const double h = gg.h[axis];
  const int cells = dir > 0 ? gg.pts[axis] - 1 - ix[axis] : ix[axis];
  for (int k = 0; k < cells; ++k) {
    double a = k == 0 ? r0 : k * h;
    double b = (k + 1) * h;
    if (!(a < b)) continue;
    double i0 = power_segment_integral(a, b, -1.0 - 2.0 * s);
    double i1 = power_segment_integral(a, b, -2.0 * s);
    double w_near = (k + 1) * i0 - i1 / h;
    double w_far = i1 / h - k * i0;
    std::array<int, 2> near = ix, far = ix;
    near[axis] += dir * k;
    far[axis] += dir * (k + 1);
    int cn = col_of[gg.index(near[0], near[1])];
    int cf = col_of[gg.index(far[0], far[1])];
    if (cn >= 0) rs.row[cn] += half_factor * w_near;
    if (cf >= 0) rs.row[cf] += half_factor * w_far;
    rs.shell_mass += i0;
  }
  if (cells > 0)
    rs.shell_mass_exact += power_segment_integral(r0, cells * h, -1.0 - 2.0 * s);
}

/// Bilinear reads for one off-axis point; weights land on the four corners of
/// the cell containing it (clamped to the grid).
void scatter_bilinear(const GridGeometry& gg, const Vec3& pt, double coef,
                      const std::vector<int>& col_of, RowScratch& rs) {
  std::array<int, 2> ic{0, 0};
  std::array<double, 2> t{0.0, 0.0};
  for (int a = 0; a < gg.n; ++a) {
    double u = (pt[a] - gg.lo[a]) / gg.h[a];
    int i = static_cast<int>(std::floor(u));
    i = std::clamp(i, 0, gg.pts[a] - 2);
    ic[a] = i;
    t[a] = std::clamp(u - i, 0.0, 1.0);
  }
  for (int da = 0; da <= 1; ++da) {
    double wa = da ? t[0] : 1.0 - t[0];
    if (gg.n == 1) {
      int c = col_of[gg.index(ic[0] + da, 0)];
      if (c >= 0) rs.row[c] += coef * wa;
      continue;
    }
    for (int db = 0; db <= 1; ++db) {
      double wb = db ? t[1] : 1.0 - t[1];
      int c = col_of[gg.index(ic[0] + da, ic[1] + db)];
      if (c >= 0) rs.row[c] += coef * wa * wb;
    }
  }
}

double hull_exit_from(const GridGeometry& gg, const Vec3& x0, const Vec3& d, int n) {
  double r = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a) {
    if (d[a] > 1e-300) r = std::min(r, (gg.coord(a, gg.pts[a] - 1) - x0[a]) / d[a]);
    else if (d[a] < -1e-300) r = std::min(r, (gg.lo[a] - x0[a]) / d[a]);
  }
  return std::max(r, 0.0);
}

/// Exact integrals of the bilinear interpolant along an oblique ray: between
/// consecutive lattice-plane crossings each corner weight is a quadratic in r.
void oblique_side(const GridGeometry& gg, const Vec3& x0, const Vec3& d, double s, double r0,
                  double half_factor, const std::vector<int>& col_of, RowScratch& rs) {
  const int n = gg.n;
  const double R = hull_exit_from(gg, x0, d, n);
  if (!(R > r0)) return;
  std::vector<double> cuts;
  cuts.push_back(r0);
  for (int a = 0; a < n; ++a) {
    if (std::abs(d[a]) < 1e-300) continue;
    for (int k = 0; k < gg.pts[a]; ++k) {
      double r = (gg.coord(a, k) - x0[a]) / d[a];
      if (r > r0 * (1.0 + 1e-12) && r < R * (1.0 - 1e-12)) cuts.push_back(r);
    }
  }
  cuts.push_back(R);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [&](double a, double b) { return b - a < 1e-12 * gg.h[0]; }),
             cuts.end());
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    double a = cuts[j], b = cuts[j + 1];
    double rm = 0.5 * (a + b);
    Vec3 pm{x0[0] + rm * d[0], x0[1] + rm * d[1], 0.0};
    std::array<int, 2> ic{0, 0};
    bool ok = true;
    for (int ax = 0; ax < n; ++ax) {
      int i = static_cast<int>(std::floor((pm[ax] - gg.lo[ax]) / gg.h[ax]));
      if (i < 0 || i > gg.pts[ax] - 2) ok = false;
      ic[ax] = std::clamp(i, 0, gg.pts[ax] - 2);
    }
    if (!ok) continue;
    double i0 = power_segment_integral(a, b, -1.0 - 2.0 * s);
    double i1 = power_segment_integral(a, b, -2.0 * s);
    double i2 = power_segment_integral(a, b, 1.0 - 2.0 * s);
    // xi_a(r) = alpha_a + beta_a r within the cell
    std::array<double, 2> alpha{0.0, 0.0}, beta{0.0, 0.0};
    for (int ax = 0; ax < n; ++ax) {
      alpha[ax] = (x0[ax] - gg.coord(ax, ic[ax])) / gg.h[ax];
      beta[ax] = d[ax] / gg.h[ax];
    }
    for (int da = 0; da <= 1; ++da) {
      double a0 = da ? alpha[0] : 1.0 - alpha[0];
      double b0 = da ? beta[0] : -beta[0];
      if (n == 1) {
        int c = col_of[gg.index(ic[0] + da, 0)];
        if (c >= 0) rs.row[c] += half_factor * (a0 * i0 + b0 * i1);
        continue;
      }
      for (int db = 0; db <= 1; ++db) {
        double a1 = db ? alpha[1] : 1.0 - alpha[1];
        double b1 = db ? beta[1] : -beta[1];
        int c = col_of[gg.index(ic[0] + da, ic[1] + db)];
        if (c >= 0)
          rs.row[c] += half_factor * (a0 * a1 * i0 + (a0 * b1 + a1 * b0) * i1 + b0 * b1 * i2);
      }
    }
    rs.shell_mass += i0;
  }
  rs.shell_mass_exact += power_segment_integral(r0, R, -1.0 - 2.0 * s);
}

}  // namespace

AssembledSystem assemble(const DirichletProblem& p) {
  const GridGeometry& gg = p.grid;
  const int n = gg.n;
  if (p.op.dim() != p.domain.n || p.domain.n != n)
    throw ConfigError("operator, domain, and grid dimensions must agree");
  if (!p.f) throw ConfigError("problem has no right-hand side");
  const double s = p.op.s();
  double diam = p.domain.diameter();
  for (int a = 0; a < n; ++a) {
    double tol = 1e-9 * diam;
    if (gg.lo[a] > p.domain.lo[a] - diam + tol ||
        gg.coord(a, gg.pts[a] - 1) < p.domain.hi[a] + diam - tol)
      throw ConfigError("grid must cover the domain with a margin of one diameter");
  }

  const double hmax = n == 2 ? std::max(gg.h[0], gg.h[1]) : gg.h[0];
  const int total = gg.size();
  std::vector<int> col_of(total, -1);
  std::vector<int> nodes;
  std::vector<double> dist;
  for (int j = 0; j < total; ++j) {
    std::array<int, 2> ix{j % gg.pts[0], n == 2 ? j / gg.pts[0] : 0};
    Vec3 x = gg.node(ix[0], ix[1]);
    double d = p.domain.signed_distance(x);
    if (d > hmax / 10.0) {
      col_of[j] = static_cast<int>(nodes.size());
      nodes.push_back(j);
      dist.push_back(d);
    }
  }
  const int m = static_cast<int>(nodes.size());
  if (m == 0) throw ConfigError("no interior nodes: the grid cannot resolve the domain");
  if (m > 8500)
    throw ConfigError("interior unknown count " + std::to_string(m) +
                      " exceeds the dense-solver cap (8500)");

  auto pairs = p.op.measure().direction_pairs();
  for (auto& [theta, w] : pairs) {
    (void)w;
    if (axis_of(theta, n) < 0 && !p.interpolate_offaxis)
      throw ConfigError("off-axis atom with interpolation disabled");
  }

  AssembledSystem sys;
  sys.m = m;
  sys.nodes = nodes;
  sys.matrix.assign(static_cast<std::size_t>(m) * m, 0.0);
  sys.rhs.resize(m);
  sys.taylor_coef.assign(m, 0.0);
  sys.interp_coef.assign(m, 0.0);

  std::mutex err_mu;
  std::exception_ptr first_error;
  std::atomic<bool> stop{false};
  std::vector<double> defects(m, 0.0);

  parallel_for(0, static_cast<std::size_t>(m), [&](std::size_t urow) {
    if (stop.load(std::memory_order_relaxed)) return;
    const int row = static_cast<int>(urow);
    try {
      int j = nodes[row];
      std::array<int, 2> ix{j % gg.pts[0], n == 2 ? j / gg.pts[0] : 0};
      Vec3 x = gg.node(ix[0], ix[1]);
      sys.rhs[row] = p.f(x);
      RowScratch rs;
      rs.row.assign(m, 0.0);
      double diag = 0.0, taylor = 0.0, interp = 0.0;
      for (auto& [theta, wpair] : pairs) {
        const double factor = 2.0 * wpair;
        const int axis = axis_of(theta, n);
        const double hray = axis >= 0 ? gg.h[axis] : std::min(gg.h[0], n == 2 ? gg.h[1] : gg.h[0]);
        const double r0 = std::min(hray, dist[row] / 2.0);
        const double c_in = std::pow(r0, 2.0 - 2.0 * s) / (2.0 * (2.0 - 2.0 * s));
        // inner Taylor segment via the h-scale second difference
        diag += -2.0 * factor * c_in / (hray * hray);
        if (axis >= 0) {
          for (int dir : {+1, -1}) {
            std::array<int, 2> nb = ix;
            nb[axis] += dir;
            int c = col_of[gg.index(nb[0], nb[1])];
            if (c >= 0) rs.row[c] += factor * c_in / (hray * hray);
          }
          double before = rs.shell_mass;
          axis_side(gg, ix, axis, +1, s, r0, 0.5 * factor, col_of, rs);
          axis_side(gg, ix, axis, -1, s, r0, 0.5 * factor, col_of, rs);
          interp += factor * 0.5 * (rs.shell_mass - before) * gg.h[axis] * gg.h[axis] / 8.0;
        } else {
          Vec3 dminus{-theta[0], -theta[1], 0.0};
          for (const Vec3& pt : {Vec3{x[0] + hray * theta[0], x[1] + hray * theta[1], 0.0},
                                 Vec3{x[0] - hray * theta[0], x[1] - hray * theta[1], 0.0}})
            scatter_bilinear(gg, pt, factor * c_in / (hray * hray), col_of, rs);
          double before = rs.shell_mass;
          oblique_side(gg, x, theta, s, r0, 0.5 * factor, col_of, rs);
          oblique_side(gg, x, dminus, s, r0, 0.5 * factor, col_of, rs);
          interp += factor * 0.5 * (rs.shell_mass - before) *
                    (gg.h[0] * gg.h[0] + (n == 2 ? gg.h[1] * gg.h[1] : 0.0)) / 8.0;
        }
        // homogeneous exterior condition: exact tail of -u_i
        diag += -factor * power_tail(r0, s);
        taylor += 2.0 * factor * c_in;
      }
      rs.row[row] += diag;
      double defect = rs.shell_mass_exact > 0.0
                          ? std::abs(rs.shell_mass - rs.shell_mass_exact) / rs.shell_mass_exact
                          : 0.0;
      if (defect > 0.01)
        throw ResolutionError("row quadrature mass deviates from the analytic value by " +
                              std::to_string(defect * 100.0) + "% (grid too coarse for s)");
      defects[row] = defect;
      sys.taylor_coef[row] = taylor;
      sys.interp_coef[row] = interp;
      std::copy(rs.row.begin(), rs.row.end(),
                sys.matrix.begin() + static_cast<std::size_t>(row) * m);
    } catch (...) {
      std::lock_guard<std::mutex> lk(err_mu);
      if (!first_error) first_error = std::current_exception();
      stop.store(true, std::memory_order_relaxed);
    }
  });
  if (first_error) std::rethrow_exception(first_error);
  sys.consistency_defect = *std::max_element(defects.begin(), defects.end());
  return sys;
}

DirichletSolution solve(const DirichletProblem& p) {
  AssembledSystem sys = assemble(p);
  const int m = sys.m;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A(
      sys.matrix.data(), m, m);
  Eigen::Map<const Eigen::VectorXd> b(sys.rhs.data(), m);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd du = lu.matrixLU().diagonal().cwiseAbs();
  double dmin = du.minCoeff(), dmax = du.maxCoeff();
  if (!(dmax > 0.0) || dmin < 1e-13 * dmax)
    throw SingularSystem("collocation matrix is numerically singular (pivot ratio " +
                         std::to_string(dmax > 0.0 ? dmin / dmax : 0.0) + ")");
  Eigen::VectorXd u = lu.solve(b);
  double residual = (A * u - b).cwiseAbs().maxCoeff();

  GridFunction out(p.grid, std::vector<double>(p.grid.size(), 0.0));
  for (int row = 0; row < m; ++row) out.values()[sys.nodes[row]] = u[row];
  return DirichletSolution{std::move(out), residual, sys.consistency_defect, m};
}

double residual_check(const DirichletProblem& p, const GridFunction& u,
                      const std::vector<Vec3>& probes, const QuadratureBudget& budget) {
  const GridGeometry& gg = u.geometry();
  const int n = gg.n;
  double worst = 0.0;
  for (const Vec3& x : probes) {
    // local curvature bound from second differences near the probe
    std::array<int, 2> ic{0, 0};
    for (int a = 0; a < n; ++a) {
      int i = static_cast<int>(std::lround((x[a] - gg.lo[a]) / gg.h[a]));
      ic[a] = std::clamp(i, 0, gg.pts[a] - 1);
    }
    double m2 = 0.0;
    const int win = 4;
    for (int a = 0; a < n; ++a) {
      int lo = std::max(1, ic[a] - win), hi = std::min(gg.pts[a] - 2, ic[a] + win);
      for (int i = lo; i <= hi; ++i) {
        std::array<int, 2> im = ic, i0 = ic, ip = ic;
        im[a] = i - 1;
        i0[a] = i;
        ip[a] = i + 1;
        double d2 = u.at(ip[0], ip[1]) - 2.0 * u.at(i0[0], i0[1]) + u.at(im[0], im[1]);
        m2 = std::max(m2, std::abs(d2) / (gg.h[a] * gg.h[a]));
      }
    }
    auto field = EvaluableField::from_grid(u, m2);
    ApplyResult r = apply_pointwise(p.op, field, x, budget);
    worst = std::max(worst, std::abs(r.value - p.f(x)));
  }
  return worst;
}

}  // namespace stableop
