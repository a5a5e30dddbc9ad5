#include "stableop/spectral_measure.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <functional>
#include <unordered_map>

#include <Eigen/Dense>

#include "stableop/normalization.hpp"

namespace stableop {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_dim(int n) {
  if (n < 1 || n > 3) throw ConfigError("spatial dimension must be 1, 2, or 3");
}

Vec3 negate(const Vec3& t) { return {-t[0], -t[1], -t[2]}; }

// K(n,s) = int over S^{n-1} of |e1 . theta|^{2s} dtheta: the rotation-invariant
// directional moment of the unit-level uniform measure.
double uniform_moment_constant(int n, double s) {
  if (n == 1) return 2.0;
  if (n == 2)
    return 2.0 * std::sqrt(kPi) * std::tgamma(s + 0.5) / std::tgamma(s + 1.0);
  return 4.0 * kPi / (2.0 * s + 1.0);
}

// Canonical representative of the pair {theta, -theta}: first nonzero
// component positive, negative zeros normalized away so the byte key is exact.
Vec3 canonical_direction(Vec3 t, int n) {
  for (int i = 0; i < n; ++i) {
    if (t[i] != 0.0) {
      if (t[i] < 0.0) t = negate(t);
      break;
    }
  }
  for (int i = 0; i < 3; ++i) t[i] += 0.0;
  return t;
}

struct KeyHash {
  std::size_t operator()(const std::array<std::uint64_t, 3>& k) const {
    std::size_t h = 1469598103934665603ull;
    for (auto v : k) {
      h ^= v;
      h *= 1099511628211ull;
    }
    return h;
  }
};

std::array<std::uint64_t, 3> byte_key(const Vec3& t) {
  std::array<std::uint64_t, 3> k{};
  std::memcpy(k.data(), t.data(), sizeof(k));
  return k;
}

// Antipodally symmetric node set on S^2: ns/2 Fibonacci-spiral nodes on the
// open upper hemisphere, each paired with its exact negation by the caller.
std::vector<Vec3> hemisphere_nodes(int half) {
  std::vector<Vec3> nodes;
  nodes.reserve(half);
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < half; ++i) {
    double z = (i + 0.5) / half;  // uniform in (0,1): upper hemisphere
    double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    double phi = golden * i;
    nodes.push_back({rho * std::cos(phi), rho * std::sin(phi), z});
  }
  return nodes;
}

}  // namespace

void SpectralMeasure::finalize() {
  mass_ = 0.0;
  for (const auto& a : quad_) mass_ += a.w;
  pairs_.clear();
  std::unordered_map<std::array<std::uint64_t, 3>, std::size_t, KeyHash> index;
  for (const auto& a : quad_) {
    Vec3 rep = canonical_direction(a.theta, n_);
    auto key = byte_key(rep);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, pairs_.size());
      pairs_.push_back({rep, a.w});
    } else {
      pairs_[it->second].w += a.w;
    }
  }
}

SpectralMeasure SpectralMeasure::atomic(int n, std::vector<Atom> atoms) {
  check_dim(n);
  if (atoms.empty()) throw ConfigError("atomic measure needs at least one atom");
  SpectralMeasure m;
  m.kind_ = Kind::Atomic;
  m.n_ = n;
  for (auto& a : atoms) {
    double len = norm(a.theta, n);
    if (!(len > 0.0)) throw ConfigError("atom direction must be nonzero");
    if (!(a.w >= 0.0)) throw ConfigError("atom weight must be nonnegative");
    Vec3 t{0.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i) t[i] = a.theta[i] / len;
    m.raw_.push_back({t, a.w});
    if (a.w == 0.0) continue;
    m.quad_.push_back({t, 0.5 * a.w});
    m.quad_.push_back({negate(t), 0.5 * a.w});
  }
  if (m.quad_.empty()) throw ConfigError("atomic measure has zero total weight");
  m.finalize();
  return m;
}

SpectralMeasure SpectralMeasure::uniform(int n, double level, int nodes) {
  check_dim(n);
  if (!(level > 0.0)) throw ConfigError("uniform level must be positive");
  SpectralMeasure m;
  m.kind_ = Kind::Uniform;
  m.n_ = n;
  m.level_ = level;
  if (n == 1) {
    m.quad_.push_back({{1.0, 0.0, 0.0}, level});
    m.quad_.push_back({{-1.0, 0.0, 0.0}, level});
  } else if (n == 2) {
    if (nodes < 8 || nodes % 2 != 0)
      throw ConfigError("uniform S^1 discretization needs an even node count >= 8");
    double w = level * 2.0 * kPi / nodes;
    for (int k = 0; k < nodes / 2; ++k) {
      double phi = 2.0 * kPi * k / nodes;
      Vec3 t{std::cos(phi), std::sin(phi), 0.0};
      m.quad_.push_back({t, w});
      m.quad_.push_back({negate(t), w});
    }
  } else {
    if (nodes < 32 || nodes % 2 != 0)
      throw ConfigError("uniform S^2 discretization needs an even node count >= 32");
    double w = level * 4.0 * kPi / nodes;
    for (const auto& t : hemisphere_nodes(nodes / 2)) {
      m.quad_.push_back({t, w});
      m.quad_.push_back({negate(t), w});
    }
  }
  m.finalize();
  // exact surface measure; the node sum only approximates it to rounding
  m.mass_ = level * (n == 1 ? 2.0 : n == 2 ? 2.0 * kPi : 4.0 * kPi);
  return m;
}

SpectralMeasure SpectralMeasure::density(std::vector<double> values) {
  const int nodes = static_cast<int>(values.size());
  if (nodes < 8 || nodes % 2 != 0)
    throw ConfigError("density needs an even number of angular values >= 8");
  for (double v : values)
    if (!(v >= 0.0)) throw ConfigError("density values must be nonnegative");
  SpectralMeasure m;
  m.kind_ = Kind::Density;
  m.n_ = 2;
  double dphi = 2.0 * kPi / nodes;
  for (int k = 0; k < nodes; ++k) {
    double phi = dphi * k;
    m.raw_.push_back({{std::cos(phi), std::sin(phi), 0.0}, values[k]});
  }
  for (int k = 0; k < nodes / 2; ++k) {
    double v = 0.5 * (values[k] + values[k + nodes / 2]);
    if (v == 0.0) continue;
    double phi = dphi * k;
    Vec3 t{std::cos(phi), std::sin(phi), 0.0};
    m.quad_.push_back({t, v * dphi});
    m.quad_.push_back({negate(t), v * dphi});
  }
  if (m.quad_.empty()) throw ConfigError("density is identically zero");
  m.finalize();
  return m;
}

SpectralMeasure SpectralMeasure::density_nodes(int n, std::vector<Atom> weighted) {
  SpectralMeasure m = atomic(n, std::move(weighted));
  m.kind_ = Kind::Density;
  return m;
}

StableOperator StableOperator::canonical(const std::string& name, int n, double s) {
  if (name == "fractional_laplacian") return fractional_laplacian(n, s);
  if (name == "axis_sum") return axis_sum(n, s);
  throw ConfigError("unknown canonical operator: " + name);
}

namespace {

// Smallest eigenvalue of the second-moment matrix sum w theta theta^T.  Zero
// exactly when the measure is supported on a hyperplane, which kills the
// directional moment for every order simultaneously.
double min_second_moment(const SpectralMeasure& mu) {
  const int n = mu.dim();
  if (n == 1) return mu.total_mass();
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  for (const auto& a : mu.quadrature_atoms())
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) += a.w * a.theta[i] * a.theta[j];
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(M);
  // unused trailing dimensions contribute zero eigenvalues; skip them
  return es.eigenvalues()(3 - n);
}

double directional_moment(const SpectralMeasure& mu, double s, const Vec3& nu) {
  if (mu.kind() == SpectralMeasure::Kind::Uniform && mu.dim() >= 2)
    return mu.level() * uniform_moment_constant(mu.dim(), s);
  double acc = 0.0;
  for (const auto& a : mu.quadrature_atoms()) {
    double d = std::abs(dot(nu, a.theta, mu.dim()));
    acc += (d > 0.0) ? a.w * std::pow(d, 2.0 * s) : 0.0;
  }
  return acc;
}

double golden_min_1d(const std::function<double(double)>& f, double lo, double hi,
                     int iters) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return std::min(fc, fd);
}

}  // namespace

double ellipticity_lambda(const SpectralMeasure& mu, double s, int search_resolution) {
  if (!(s > 0.0 && s < 1.0)) throw InvalidOrder("order parameter s must lie in (0,1)");
  const int n = mu.dim();
  if (search_resolution <= 0) search_resolution = (n == 3) ? 5000 : 720;
  if (mu.kind() != SpectralMeasure::Kind::Uniform &&
      !(min_second_moment(mu) >= 1e-24 * mu.total_mass()))
    throw DegenerateMeasure("spectral measure is supported on a hyperplane");
  double lambda = 0.0;
  if (n == 1) {
    lambda = mu.total_mass();
  } else if (n == 2) {
    auto f = [&](double alpha) {
      return directional_moment(mu, s, {std::cos(alpha), std::sin(alpha), 0.0});
    };
    const int scan = search_resolution;
    double best = f(0.0);
    double best_alpha = 0.0;
    for (int k = 1; k < scan; ++k) {
      double alpha = kPi * k / scan;
      double v = f(alpha);
      if (v < best) {
        best = v;
        best_alpha = alpha;
      }
    }
    double dalpha = kPi / scan;
    lambda = golden_min_1d(f, best_alpha - dalpha, best_alpha + dalpha, 60);
    lambda = std::min(lambda, best);
  } else {
    auto dir = [](double az, double pol) -> Vec3 {
      double sp = std::sin(pol);
      return {sp * std::cos(az), sp * std::sin(az), std::cos(pol)};
    };
    auto f = [&](double az, double pol) { return directional_moment(mu, s, dir(az, pol)); };
    double best = f(0.0, 0.0), best_az = 0.0, best_pol = 0.0;
    const int na = std::max(8, static_cast<int>(std::lround(std::sqrt(2.0 * search_resolution))));
    const int np = std::max(4, (search_resolution + na - 1) / na);
    for (int i = 0; i < na; ++i)
      for (int j = 0; j <= np; ++j) {
        double az = kPi * i / na, pol = kPi * j / np;
        double v = f(az, pol);
        if (v < best) {
          best = v;
          best_az = az;
          best_pol = pol;
        }
      }
    double da = kPi / na, dp = kPi / np;
    double az = best_az, pol = best_pol;
    for (int round = 0; round < 4; ++round) {
      golden_min_1d(
          [&](double a) {
            double v = f(a, pol);
            if (v < best) {
              best = v;
              az = a;
            }
            return v;
          },
          az - da, az + da, 40);
      golden_min_1d(
          [&](double p) {
            double v = f(az, p);
            if (v < best) {
              best = v;
              pol = p;
            }
            return v;
          },
          pol - dp, pol + dp, 40);
      da *= 0.1;
      dp *= 0.1;
    }
    lambda = best;
  }
  if (!(lambda >= 1e-10 * mu.total_mass()))
    throw DegenerateMeasure("spectral measure is degenerate: directional moment vanishes");
  return lambda;
}

StableOperator::StableOperator(SpectralMeasure mu, double s) : mu_(std::move(mu)), s_(s) {
  if (!(s > 0.0 && s < 1.0)) throw InvalidOrder("order parameter s must lie in (0,1)");
  cs_ = normalization_constant(s);
  lambda_ = ellipticity_lambda(mu_, s);
}

StableOperator StableOperator::axis_sum(int n, double s) {
  check_dim(n);
  double cs = normalization_constant(s);
  std::vector<Atom> atoms;
  for (int i = 0; i < n; ++i) {
    Vec3 e{0.0, 0.0, 0.0};
    e[i] = 1.0;
    atoms.push_back({e, 1.0 / cs});
  }
  return StableOperator(SpectralMeasure::atomic(n, std::move(atoms)), s);
}

StableOperator StableOperator::fractional_laplacian(int n, double s) {
  check_dim(n);
  double cs = normalization_constant(s);
  double level = 1.0 / (cs * uniform_moment_constant(n, s));
  int nodes = (n == 1) ? 8 : (n == 2) ? 512 : 2048;
  if (n == 1) return StableOperator(SpectralMeasure::uniform(1, level), s);
  return StableOperator(SpectralMeasure::uniform(n, level, nodes), s);
}

double StableOperator::symbol(const Vec3& xi) const {
  if (mu_.kind() == SpectralMeasure::Kind::Uniform && mu_.dim() >= 2) {
    double r = norm(xi, mu_.dim());
    if (r == 0.0) return 0.0;
    return mu_.level() * uniform_moment_constant(mu_.dim(), s_) * std::pow(r, 2.0 * s_);
  }
  double acc = 0.0;
  for (const auto& a : mu_.quadrature_atoms()) {
    double d = std::abs(dot(xi, a.theta, mu_.dim()));
    acc += (d > 0.0) ? a.w * std::pow(d, 2.0 * s_) : 0.0;
  }
  return acc;
}

}  // namespace stableop
