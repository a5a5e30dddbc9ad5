#include "stableop/nonlocal_apply.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>

#include "stableop/parallel.hpp"

namespace stableop {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxDepth = 18;
constexpr long kSegmentBudget = 1200000;
constexpr int kMaxAutoShells = 600;

/// integral_a^inf r^{-1-2s} dr
double power_tail(double a, double s) { return std::pow(a, -2.0 * s) / (2.0 * s); }

void check_order(double s) {
  if (!(s > 0.0 && s < 1.0))
    throw InvalidOrder("order s must lie in (0, 1), got " + std::to_string(s));
}

void check_budget(const QuadratureBudget& b) {
  if (!(b.tol > 0.0)) throw ConfigError("quadrature tolerance must be positive");
  if (b.nodes_per_shell != 8 && b.nodes_per_shell != 16 && b.nodes_per_shell != 32)
    throw ConfigError("nodes_per_shell must be 8, 16, or 32");
  if (b.r0 < 0.0 || b.R_far < 0.0 || b.shells < 0)
    throw ConfigError("budget cutoffs and shell count must be nonnegative");
  if (b.r0 > 0.0 && b.R_far > 0.0 && b.R_far <= b.r0)
    throw ConfigError("budget requires R_far > r0");
}

Vec3 unit_direction(const Vec3& th, int n) {
  double len = norm(th, n);
  if (!(len > 0.0)) throw ConfigError("ray direction must be nonzero");
  Vec3 d{0.0, 0.0, 0.0};
  for (int i = 0; i < n; ++i) d[i] = th[i] / len;
  return d;
}

/// Certificate pieces accumulated for one ray (or summed over a measure).
struct RayCert {
  double value = 0.0;
  double inner = 0.0;
  double quad = 0.0;
  double interp = 0.0;
  double tail = 0.0;
  double total() const { return inner + quad + interp + tail; }
};

template <unsigned N, class F>
void gl_embedded(const F& f, double a, double b, double& v, double& e) {
  using boost::math::quadrature::gauss;
  v = gauss<double, N>::integrate(f, a, b);
  e = std::abs(v - gauss<double, N / 2>::integrate(f, a, b));
}

template <class F>
void gl_dispatch(int nodes, const F& f, double a, double b, double& v, double& e) {
  if (nodes == 8)
    gl_embedded<8>(f, a, b, v, e);
  else if (nodes == 32)
    gl_embedded<32>(f, a, b, v, e);
  else
    gl_embedded<16>(f, a, b, v, e);
}

struct AdaptState {
  long segments = 0;
  double value = 0.0;
  double estimate = 0.0;
};

template <class F>
void adapt_segment(const F& f, double a, double b, int nodes, double tol_loc,
                   double tol_floor, int depth, AdaptState& st) {
  if (++st.segments > kSegmentBudget)
    throw QuadratureBudgetExceeded("radial quadrature exhausted its segment budget near r = " +
                                   std::to_string(a));
  double v = 0.0, e = 0.0;
  gl_dispatch(nodes, f, a, b, v, e);
  double mid = std::sqrt(a * b);
  if (e <= std::max(tol_loc, tol_floor) || depth >= kMaxDepth || !(mid > a && mid < b)) {
    st.value += v;
    st.estimate += e;
    return;
  }
  adapt_segment(f, a, mid, nodes, 0.5 * tol_loc, tol_floor, depth + 1, st);
  adapt_segment(f, mid, b, nodes, 0.5 * tol_loc, tol_floor, depth + 1, st);
}

/// Largest r >= 0 with x + r d still inside the node hull (0 if x is outside).
double hull_exit(const GridGeometry& g, const Vec3& x, const Vec3& d) {
  double enter = 0.0, exit = kInf;
  for (int k = 0; k < g.n; ++k) {
    double lo = g.lo[k], hi = g.hi(k);
    if (std::abs(d[k]) < 1e-300) {
      if (x[k] < lo || x[k] > hi) return 0.0;
      continue;
    }
    double t1 = (lo - x[k]) / d[k], t2 = (hi - x[k]) / d[k];
    if (t1 > t2) std::swap(t1, t2);
    enter = std::max(enter, t1);
    exit = std::min(exit, t2);
  }
  if (enter > 1e-12 || exit < 0.0) return 0.0;
  return std::max(exit, 0.0);
}

/// +-e_k within tolerance -> k; otherwise -1.
int axis_of(const Vec3& d, int n) {
  for (int k = 0; k < n; ++k) {
    if (std::abs(d[k]) < 1.0 - 1e-12) continue;
    bool clean = true;
    for (int j = 0; j < n; ++j)
      if (j != k && std::abs(d[j]) > 1e-12) clean = false;
    if (clean) return k;
  }
  return -1;
}

bool on_node(const GridGeometry& g, const Vec3& x, std::array<int, 2>& ix) {
  for (int k = 0; k < g.n; ++k) {
    double t = (x[k] - g.lo[k]) / g.h[k];
    long i = std::lround(t);
    if (std::abs(t - static_cast<double>(i)) > 1e-9) return false;
    if (i < 0 || i >= g.pts[k]) return false;
    ix[k] = static_cast<int>(i);
  }
  return true;
}

/// One side of the exact path: integral_{r0}^{inf} (P1(u)(x + r dir e_a) - u0)
/// r^{-1-2s} dr for a zero-extended grid field, walking whole cells between
/// nodes and closing the constant tail beyond the hull in closed form.
double exact_axis_side(const GridFunction& g, const std::array<int, 2>& ix, int a, int dir,
                       double u0, double r0, double s) {
  const GridGeometry& gg = g.geometry();
  const double h = gg.h[a];
  const int start = ix[a];
  const int last = dir > 0 ? gg.pts[a] - 1 : 0;
  const int steps = dir > 0 ? last - start : start - last;
  const int other = gg.n == 2 ? ix[1 - a] : 0;
  auto node_value = [&](int j) {
    int i = start + dir * j;
    return a == 0 ? g.at(i, other) : g.at(other, i);
  };
  double acc = 0.0;
  for (int j = 0; j < steps; ++j) {
    double rb = (j + 1) * h;
    if (rb <= r0) continue;
    double ra = std::max(static_cast<double>(j) * h, r0);
    if (!(rb > ra)) continue;
    double v0 = node_value(j), v1 = node_value(j + 1);
    double slope = (v1 - v0) / h;
    double c0 = v0 - slope * (j * h) - u0;
    acc += c0 * power_segment_integral(ra, rb, -1.0 - 2.0 * s) +
           slope * power_segment_integral(ra, rb, -2.0 * s);
  }
  double redge = std::max(static_cast<double>(steps) * h, r0);
  acc -= u0 * power_tail(redge, s);
  return acc;
}

struct LineIntegrand {
  const EvaluableField* u;
  Vec3 x;
  Vec3 d;
  int n;
  double u0;
  double s;
  double operator()(double r) const {
    double up = u->value(axpy(r, d, x, n));
    double um = u->value(axpy(-r, d, x, n));
    return (0.5 * (up + um) - u0) * std::pow(r, -1.0 - 2.0 * s);
  }
};

double solve_growth_R(double c, double beta, double absx, double absu0, double s,
                      double share, double rmin) {
  auto bound = [&](double R) {
    double f = std::pow(1.0 + (1.0 + absx) / R, beta);
    return c * f * std::pow(R, beta - 2.0 * s) / (2.0 * s - beta) +
           absu0 * power_tail(R, s);
  };
  double lo = std::max(rmin, 1.0);
  if (bound(lo) <= share) return lo;
  double hi = lo;
  for (int i = 0; i < 120 && bound(hi) > share; ++i) hi *= 4.0;
  if (bound(hi) > share)
    throw QuadratureBudgetExceeded("growth tail bound cannot reach the requested tolerance");
  for (int i = 0; i < 80; ++i) {
    double m = std::sqrt(lo * hi);
    (bound(m) > share ? lo : hi) = m;
  }
  return hi;
}

/// Core of the radial integral: value plus certificate for one direction,
/// against the tolerance this ray was allotted.
RayCert radial_cert(const EvaluableField& u, const Vec3& x0, const Vec3& theta, double s,
                    const QuadratureBudget& budget, double tol_ray) {
  check_order(s);
  check_budget(budget);
  const int n = u.dim();
  const Vec3 d = unit_direction(theta, n);
  const double u0 = u.value(x0);
  if (!std::isfinite(u0)) throw ConfigError("field value at the base point is not finite");
  const double m2 = u.m2();
  if (u.growth_declared() && !(u.growth_exponent() < 2.0 * s))
    throw ConfigError("declared growth exponent must stay below 2s = " + std::to_string(2.0 * s));
  // A declared zero second-difference sup means the integrand vanishes
  // identically (affine fields); nothing to integrate or certify.
  if (u.second_difference_sup_declared() && u.second_difference_sup() == 0.0) return RayCert{};
  // The singular head is controlled by the Taylor bound m2 * r^2; a uniform
  // second-difference sup alone leaves the head integral divergent.
  if (!std::isfinite(m2))
    throw ConfigError(
        "certifying the inner cut needs a finite second-difference bound near the point");

  const double inner_share = 0.25 * tol_ray;
  const double quad_share = 0.25 * tol_ray;
  const double tail_share = 0.5 * tol_ray;
  const double scale = std::max(1.0, std::abs(u0));

  const GridFunction* g = u.grid();
  const bool zero_ext = g && g->extension() == GridFunction::Extension::Zero;

  double exit_plus = kInf, exit_minus = kInf, r_cover = kInf;
  if (g) {
    Vec3 dm{0.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i) dm[i] = -d[i];
    exit_plus = hull_exit(g->geometry(), x0, d);
    exit_minus = hull_exit(g->geometry(), x0, dm);
    r_cover = std::max(exit_plus, exit_minus);
  }

  // Inner cutoff: explicit, or the grid spacing, or solved from the Taylor
  // share with a floor where second differences sink into rounding noise.
  double r0;
  if (budget.r0 > 0.0) {
    r0 = budget.r0;
  } else if (g) {
    r0 = g->geometry().n == 2 ? std::min(g->geometry().h[0], g->geometry().h[1])
                              : g->geometry().h[0];
  } else {
    const double cap = 1e-4;
    double solved = m2 > 0.0
        ? std::pow(inner_share * 2.0 * (2.0 - 2.0 * s) / m2, 1.0 / (2.0 - 2.0 * s))
        : cap;
    double noise_floor = std::sqrt(8.0 * kEps * scale / std::max(m2, kEps));
    r0 = std::min(cap, std::max(solved, noise_floor));
  }
  RayCert cert;
  cert.inner = 0.5 * m2 * std::pow(r0, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);

  // Outer cutoff and tail model.  Zero-extended grid fields get an exact
  // constant tail once both rays have left the hull; otherwise the declared
  // second-difference sup, growth envelope, or sup norm bounds the remainder.
  double R;
  bool tail_exact = false;
  if (budget.R_far > 0.0) {
    R = budget.R_far;
    if (zero_ext && R >= r_cover) {
      tail_exact = true;
    } else if (u.second_difference_sup_declared()) {
      cert.tail = u.second_difference_sup() * power_tail(R, s);
    } else if (u.growth_declared()) {
      double f = std::pow(1.0 + (1.0 + norm(x0, n)) / R, u.growth_exponent());
      cert.tail = u.growth_constant() * f * std::pow(R, u.growth_exponent() - 2.0 * s) /
                      (2.0 * s - u.growth_exponent()) +
                  std::abs(u0) * power_tail(R, s);
    } else if (std::isfinite(u.sup_norm())) {
      cert.tail = 2.0 * u.sup_norm() * power_tail(R, s);
    } else {
      throw QuadratureBudgetExceeded(
          "unbounded field needs a growth or second-difference declaration to bound the tail");
    }
  } else if (zero_ext) {
    R = std::max(r_cover, 2.0 * r0);
    tail_exact = true;
  } else if (u.second_difference_sup_declared()) {
    double d2 = u.second_difference_sup();
    R = d2 > 0.0 ? std::pow(d2 / (2.0 * s * tail_share), 1.0 / (2.0 * s)) : 2.0 * r0;
    R = std::max(R, 2.0 * r0);
    cert.tail = d2 * power_tail(R, s);
  } else if (u.growth_declared()) {
    R = solve_growth_R(u.growth_constant(), u.growth_exponent(), norm(x0, n), std::abs(u0),
                       s, tail_share, 2.0 * r0);
    double f = std::pow(1.0 + (1.0 + norm(x0, n)) / R, u.growth_exponent());
    cert.tail = u.growth_constant() * f * std::pow(R, u.growth_exponent() - 2.0 * s) /
                    (2.0 * s - u.growth_exponent()) +
                std::abs(u0) * power_tail(R, s);
  } else if (std::isfinite(u.sup_norm())) {
    double sup = u.sup_norm();
    R = sup > 0.0 ? std::pow(2.0 * sup / (2.0 * s * tail_share), 1.0 / (2.0 * s)) : 2.0 * r0;
    R = std::max(R, 2.0 * r0);
    cert.tail = 2.0 * sup * power_tail(R, s);
  } else {
    throw QuadratureBudgetExceeded(
        "unbounded field needs a growth or second-difference declaration to bound the tail");
  }
  R = std::max(R, 2.0 * r0);

  // Exact path: axis ray through a node of a zero-extended grid reads node
  // values only, so the piecewise-linear field integrates in closed form.
  std::array<int, 2> ix{0, 0};
  const int axis = g ? axis_of(d, n) : -1;
  if (zero_ext && budget.R_far == 0.0 && axis >= 0 && on_node(g->geometry(), x0, ix)) {
    cert.value = 0.5 * (exact_axis_side(*g, ix, axis, +1, u0, r0, s) +
                        exact_axis_side(*g, ix, axis, -1, u0, r0, s));
    double rc = std::max(r_cover, r0);
    if (rc > r0)
      cert.quad = 0.125 * m2 * g->geometry().h[axis] * g->geometry().h[axis] *
                  power_segment_integral(r0, rc, -1.0 - 2.0 * s);
    return cert;
  }

  // Dyadic shells r0 2^k, cut additionally where a ray leaves the hull so no
  // Gauss segment straddles the extension seam.
  int needed = R > r0 ? static_cast<int>(std::ceil(std::log2(R / r0) - 1e-9)) : 0;
  if (budget.shells > 0 && needed > budget.shells)
    throw QuadratureBudgetExceeded("range [" + std::to_string(r0) + ", " + std::to_string(R) +
                                   "] needs " + std::to_string(needed) +
                                   " dyadic shells, budget allows " +
                                   std::to_string(budget.shells));
  if (needed > kMaxAutoShells)
    throw QuadratureBudgetExceeded("dyadic shell count " + std::to_string(needed) +
                                   " exceeds the hard cap");
  std::vector<double> cuts;
  cuts.push_back(r0);
  for (double b = r0; b < R;) {
    b = std::min(2.0 * b, R);
    cuts.push_back(b);
  }
  if (g) {
    for (double e : {exit_plus, exit_minus}) {
      if (e > r0 * (1.0 + 1e-12) && e < R * (1.0 - 1e-12)) cuts.push_back(e);
    }
    // Within the hull the interpolant has derivative kinks at every lattice
    // plane; cutting there keeps each Gauss segment on one smooth piece (the
    // embedded error estimate cannot be trusted across a kink).
    const GridGeometry& gg = g->geometry();
    for (int side = 0; side < 2; ++side) {
      const double sgn = side == 0 ? 1.0 : -1.0;
      const double hull = side == 0 ? exit_plus : exit_minus;
      const double rmax = std::min(R, hull) * (1.0 - 1e-12);
      for (int a = 0; a < n; ++a) {
        const double da = sgn * d[a];
        if (std::abs(da) < 1e-300) continue;
        for (int kk = 0; kk < gg.pts[a]; ++kk) {
          double r = (gg.coord(a, kk) - x0[a]) / da;
          if (r > r0 * (1.0 + 1e-12) && r < rmax) cuts.push_back(r);
        }
      }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [](double a, double b) { return b <= a * (1.0 + 1e-12); }),
               cuts.end());
  }

  LineIntegrand f{&u, x0, d, n, u0, s};
  AdaptState st;
  const double tol_floor = quad_share * 1e-9;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    int k = static_cast<int>(std::floor(std::log2(cuts[i] / r0) + 1e-9));
    double tol_loc = quad_share * std::pow(2.0, -static_cast<double>(k + 1));
    adapt_segment(f, cuts[i], cuts[i + 1], budget.nodes_per_shell, tol_loc, tol_floor, 0, st);
  }
  cert.value = st.value;
  cert.quad = st.estimate + 4.0 * kEps * scale * power_segment_integral(r0, R, -1.0 - 2.0 * s);

  if (g) {
    const GridGeometry& gg = g->geometry();
    double e_node = 0.125 * m2 *
                    (gg.h[0] * gg.h[0] + (gg.n == 2 ? gg.h[1] * gg.h[1] : 0.0));
    double upper = std::min(R, std::max(r_cover, r0));
    if (upper > r0) {
      double factor = on_node(gg, x0, ix) ? 1.0 : 2.0;
      cert.interp = factor * e_node * power_segment_integral(r0, upper, -1.0 - 2.0 * s);
    }
  }

  if (tail_exact) cert.value -= u0 * power_tail(R, s);
  return cert;
}

std::string cert_message(const RayCert& c, double tol) {
  return "certified bound " + std::to_string(c.total()) + " (inner " + std::to_string(c.inner) +
         ", quadrature " + std::to_string(c.quad) + ", interpolation " +
         std::to_string(c.interp) + ", tail " + std::to_string(c.tail) + ") exceeds tol " +
         std::to_string(tol);
}

void enforce_cert(const RayCert& c, double tol) {
  if (c.interp > 0.5 * tol)
    throw ResolutionError("grid interpolation term " + std::to_string(c.interp) +
                          " dominates tol " + std::to_string(tol) + "; refine the grid");
  if (c.total() > tol) throw QuadratureBudgetExceeded(cert_message(c, tol));
}

double estimate_m2(const GridFunction& g) {
  const GridGeometry& gg = g.geometry();
  double best = 0.0;
  const int n1 = gg.n == 2 ? gg.pts[1] : 1;
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i0 = 1; i0 + 1 < gg.pts[0]; ++i0) {
      double d2 = std::abs(g.at(i0 + 1, i1) + g.at(i0 - 1, i1) - 2.0 * g.at(i0, i1));
      best = std::max(best, d2 / (gg.h[0] * gg.h[0]));
    }
  }
  if (gg.n == 2) {
    for (int i0 = 0; i0 < gg.pts[0]; ++i0) {
      for (int i1 = 1; i1 + 1 < gg.pts[1]; ++i1) {
        double d2 = std::abs(g.at(i0, i1 + 1) + g.at(i0, i1 - 1) - 2.0 * g.at(i0, i1));
        best = std::max(best, d2 / (gg.h[1] * gg.h[1]));
      }
    }
  }
  return best;
}

}  // namespace

double power_segment_integral(double a, double b, double p) {
  if (!(a > 0.0) || !(b >= a)) throw ConfigError("power segment needs 0 < a <= b");
  if (b == a) return 0.0;
  double big_l = std::log(b / a);
  double z = (p + 1.0) * big_l;
  double head = std::pow(a, p + 1.0);
  if (std::abs(z) < 1e-8) return head * big_l * (1.0 + 0.5 * z + z * z / 6.0);
  return head * std::expm1(z) / (p + 1.0);
}

EvaluableField EvaluableField::from_callable(int n, std::function<double(const Vec3&)> f,
                                             double second_difference_bound, double sup_norm) {
  if (n < 1 || n > 3) throw ConfigError("field dimension must be 1, 2, or 3");
  if (!f) throw ConfigError("field callable must be set");
  if (!(second_difference_bound >= 0.0))
    throw ConfigError("second difference bound must be nonnegative");
  if (!(sup_norm >= 0.0))
    throw ConfigError("sup norm must be nonnegative (infinity when unbounded)");
  EvaluableField u;
  u.n_ = n;
  u.fn_ = std::move(f);
  u.m2_ = second_difference_bound;
  u.sup_ = sup_norm;
  return u;
}

EvaluableField EvaluableField::from_grid(const GridFunction& g) {
  return from_grid(g, estimate_m2(g));
}

EvaluableField EvaluableField::from_grid(const GridFunction& g, double second_difference_bound) {
  if (g.values().empty()) throw ConfigError("grid field has no values");
  if (!(second_difference_bound >= 0.0))
    throw ConfigError("second difference bound must be nonnegative");
  EvaluableField u;
  u.n_ = g.geometry().n;
  u.grid_ = &g;
  u.m2_ = second_difference_bound;
  u.sup_ = g.max_abs();
  return u;
}

EvaluableField& EvaluableField::declare_growth(double exponent, double constant) {
  if (!(exponent >= 0.0) || !std::isfinite(exponent))
    throw ConfigError("growth exponent must be finite and nonnegative");
  if (!(constant >= 0.0) || !std::isfinite(constant))
    throw ConfigError("growth constant must be finite and nonnegative");
  growth_declared_ = true;
  growth_beta_ = exponent;
  growth_c_ = constant;
  return *this;
}

EvaluableField& EvaluableField::declare_second_difference_sup(double d) {
  if (!(d >= 0.0) || !std::isfinite(d))
    throw ConfigError("second difference sup must be finite and nonnegative");
  d2_declared_ = true;
  d2_sup_ = d;
  return *this;
}

double radial_sd_integral(const EvaluableField& u, const Vec3& x, const Vec3& theta, double s,
                          const QuadratureBudget& budget) {
  RayCert c = radial_cert(u, x, theta, s, budget, budget.tol);
  enforce_cert(c, budget.tol);
  return c.value;
}

ApplyResult apply_pointwise(const StableOperator& op, const EvaluableField& u, const Vec3& x,
                            const QuadratureBudget& budget) {
  if (op.dim() != u.dim())
    throw ConfigError("operator dimension " + std::to_string(op.dim()) +
                      " does not match field dimension " + std::to_string(u.dim()));
  check_budget(budget);
  const double tol_ray = budget.tol / (2.0 * op.mass());
  RayCert total;
  for (const Atom& pair : op.measure().direction_pairs()) {
    RayCert c = radial_cert(u, x, pair.theta, op.s(), budget, tol_ray);
    const double w = 2.0 * pair.w;
    total.value += w * c.value;
    total.inner += w * c.inner;
    total.quad += w * c.quad;
    total.interp += w * c.interp;
    total.tail += w * c.tail;
  }
  enforce_cert(total, budget.tol);
  return {total.value, total.total(), total.interp};
}

GridFunction apply_grid(const StableOperator& op, const GridFunction& u,
                        const std::vector<std::uint8_t>& interior_mask,
                        const QuadratureBudget& budget) {
  const GridGeometry& g = u.geometry();
  if (op.dim() != g.n)
    throw ConfigError("operator dimension does not match the grid dimension");
  if (!interior_mask.empty() && interior_mask.size() != g.size())
    throw ConfigError("interior mask size " + std::to_string(interior_mask.size()) +
                      " does not match node count " + std::to_string(g.size()));
  EvaluableField field = EvaluableField::from_grid(u);
  GridFunction out(g, std::vector<double>(g.size(), 0.0));
  std::mutex error_mx;
  std::exception_ptr first_error;
  std::atomic<bool> stop{false};
  parallel_for(0, g.size(), [&](std::size_t idx) {
    if (stop.load(std::memory_order_relaxed)) return;
    if (!interior_mask.empty() && !interior_mask[idx]) return;
    try {
      const int i0 = static_cast<int>(idx % static_cast<std::size_t>(g.pts[0]));
      const int i1 = static_cast<int>(idx / static_cast<std::size_t>(g.pts[0]));
      out.values()[idx] = apply_pointwise(op, field, g.node(i0, i1), budget).value;
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mx);
      if (!first_error) first_error = std::current_exception();
      stop.store(true, std::memory_order_relaxed);
    }
  });
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

}  // namespace stableop
