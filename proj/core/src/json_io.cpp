#include "stableop/json_io.hpp"

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "stableop/errors.hpp"
#include "stableop/grid.hpp"

namespace stableop {

namespace {

using nlohmann::ordered_json;

ordered_json parse_text(const std::string& text, const std::string& what) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError(what + ": malformed JSON");
  return j;
}

const ordered_json& require(const ordered_json& j, const char* field, const std::string& ctx) {
  if (!j.is_object() || !j.contains(field))
    throw ConfigError(ctx + ": missing field \"" + field + "\"");
  return j.at(field);
}

double require_number(const ordered_json& j, const char* field, const std::string& ctx) {
  const ordered_json& v = require(j, field, ctx);
  if (!v.is_number()) throw ConfigError(ctx + ": field \"" + field + "\" must be a number");
  return v.get<double>();
}

std::string require_string(const ordered_json& j, const char* field, const std::string& ctx) {
  const ordered_json& v = require(j, field, ctx);
  if (!v.is_string()) throw ConfigError(ctx + ": field \"" + field + "\" must be a string");
  return v.get<std::string>();
}

Vec3 vec_from(const ordered_json& v, const char* field, const std::string& ctx,
              int* dim_out = nullptr) {
  if (!v.is_array() || v.empty() || v.size() > 3)
    throw ConfigError(ctx + ": field \"" + field + "\" must be an array of 1..3 numbers");
  Vec3 x{0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number())
      throw ConfigError(ctx + ": field \"" + field + "\" must contain numbers");
    x[k] = v[k].get<double>();
  }
  if (dim_out) *dim_out = static_cast<int>(v.size());
  return x;
}

std::vector<Atom> atoms_from(const ordered_json& arr, const std::string& ctx, int& dim) {
  if (!arr.is_array() || arr.empty())
    throw ConfigError(ctx + ": field \"atoms\" must be a nonempty array");
  std::vector<Atom> atoms;
  for (const ordered_json& a : arr) {
    Atom atom;
    int d = 0;
    atom.theta = vec_from(require(a, "theta", ctx), "theta", ctx, &d);
    if (dim == 0) dim = d;
    if (d != dim)
      throw ConfigError(ctx + ": field \"theta\" length " + std::to_string(d) +
                        " disagrees with dimension " + std::to_string(dim));
    atom.w = require_number(a, "w", ctx);
    atoms.push_back(atom);
  }
  return atoms;
}

SpectralMeasure measure_from(const ordered_json& j, int dim_hint, const std::string& ctx) {
  const std::string kind = require_string(j, "kind", ctx);
  if (kind == "atomic" || kind == "density_nodes") {
    int dim = dim_hint;
    std::vector<Atom> atoms = atoms_from(require(j, "atoms", ctx), ctx, dim);
    return kind == "atomic" ? SpectralMeasure::atomic(dim, std::move(atoms))
                            : SpectralMeasure::density_nodes(dim, std::move(atoms));
  }
  if (kind == "uniform") {
    const double level = require_number(j, "level", ctx);
    int dim = dim_hint;
    if (j.contains("dim")) dim = static_cast<int>(require_number(j, "dim", ctx));
    if (dim == 0) throw ConfigError(ctx + ": uniform measure needs field \"dim\"");
    const int nodes =
        j.contains("nodes") ? static_cast<int>(require_number(j, "nodes", ctx)) : 512;
    return SpectralMeasure::uniform(dim, level, nodes);
  }
  if (kind == "density") {
    const ordered_json& vals = require(j, "values", ctx);
    if (!vals.is_array() || vals.empty())
      throw ConfigError(ctx + ": field \"values\" must be a nonempty array");
    std::vector<double> values;
    for (const ordered_json& v : vals) {
      if (!v.is_number()) throw ConfigError(ctx + ": field \"values\" must contain numbers");
      values.push_back(v.get<double>());
    }
    const auto n_nodes = static_cast<std::size_t>(require_number(j, "n_nodes", ctx));
    if (n_nodes != values.size())
      throw ConfigError(ctx + ": field \"n_nodes\" (" + std::to_string(n_nodes) +
                        ") disagrees with values length " + std::to_string(values.size()));
    return SpectralMeasure::density(std::move(values));
  }
  throw ConfigError(ctx + ": field \"kind\" has unknown value \"" + kind + "\"");
}

StableOperator operator_from(const ordered_json& j, const std::string& ctx) {
  const double s = require_number(j, "s", ctx);
  if (j.contains("canonical")) {
    const std::string name = require_string(j, "canonical", ctx);
    const int dim = static_cast<int>(require_number(j, "dim", ctx));
    return StableOperator::canonical(name, dim, s);
  }
  int dim = 0;
  if (j.contains("dim")) dim = static_cast<int>(require_number(j, "dim", ctx));
  SpectralMeasure mu = measure_from(require(j, "measure", ctx), dim, ctx + ".measure");
  return StableOperator(std::move(mu), s);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- SHA-256 (FIPS 180-4) ----

struct Sha256 {
  std::array<std::uint32_t, 8> h{0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                                 0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
  std::array<std::uint8_t, 64> block{};
  std::uint64_t total = 0;
  std::size_t fill = 0;

  static std::uint32_t rotr(std::uint32_t x, int r) { return (x >> r) | (x << (32 - r)); }

  void compress(const std::uint8_t* p) {
    static constexpr std::uint32_t K[64] = {
        0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
        0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
        0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
        0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
        0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
        0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
        0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
        0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
        0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
        0xc67178f2};
    std::uint32_t w[64];
    for (int i = 0; i < 16; ++i)
      w[i] = (std::uint32_t(p[4 * i]) << 24) | (std::uint32_t(p[4 * i + 1]) << 16) |
             (std::uint32_t(p[4 * i + 2]) << 8) | std::uint32_t(p[4 * i + 3]);
    for (int i = 16; i < 64; ++i) {
      const std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
      const std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
      w[i] = w[i - 16] + s0 + w[i - 7] + s1;
    }
    std::uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6],
                  hh = h[7];
    for (int i = 0; i < 64; ++i) {
      const std::uint32_t S1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      const std::uint32_t ch = (e & f) ^ (~e & g);
      const std::uint32_t t1 = hh + S1 + ch + K[i] + w[i];
      const std::uint32_t S0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      const std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      const std::uint32_t t2 = S0 + maj;
      hh = g;
      g = f;
      f = e;
      e = d + t1;
      d = c;
      c = b;
      b = a;
      a = t1 + t2;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
    h[5] += f;
    h[6] += g;
    h[7] += hh;
  }

  void update(const void* data, std::size_t len) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    total += len;
    while (len > 0) {
      const std::size_t take = std::min(len, block.size() - fill);
      std::memcpy(block.data() + fill, p, take);
      fill += take;
      p += take;
      len -= take;
      if (fill == block.size()) {
        compress(block.data());
        fill = 0;
      }
    }
  }

  std::string hex() {
    const std::uint64_t bits = total * 8;
    const std::uint8_t one = 0x80;
    update(&one, 1);
    const std::uint8_t zero = 0;
    while (fill != 56) update(&zero, 1);
    std::uint8_t len[8];
    for (int i = 0; i < 8; ++i) len[i] = std::uint8_t(bits >> (56 - 8 * i));
    update(len, 8);
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    for (std::uint32_t v : h)
      for (int i = 28; i >= 0; i -= 4) out.push_back(digits[(v >> i) & 0xF]);
    return out;
  }
};

}  // namespace

SpectralMeasure measure_from_json_text(const std::string& text, int dim_hint) {
  return measure_from(parse_text(text, "measure spec"), dim_hint, "measure spec");
}

std::string measure_to_json_text(const SpectralMeasure& mu) {
  ordered_json j;
  switch (mu.kind()) {
    case SpectralMeasure::Kind::Uniform:
      j["kind"] = "uniform";
      j["level"] = mu.level();
      j["dim"] = mu.dim();
      break;
    case SpectralMeasure::Kind::Atomic:
    case SpectralMeasure::Kind::Density: {
      const bool atomic = mu.kind() == SpectralMeasure::Kind::Atomic;
      j["kind"] = atomic ? "atomic" : "density_nodes";
      ordered_json atoms = ordered_json::array();
      for (const Atom& a : mu.input_atoms()) {
        ordered_json ja;
        ordered_json theta = ordered_json::array();
        for (int k = 0; k < mu.dim(); ++k) theta.push_back(a.theta[k]);
        ja["theta"] = std::move(theta);
        ja["w"] = a.w;
        atoms.push_back(std::move(ja));
      }
      j["atoms"] = std::move(atoms);
      break;
    }
  }
  return j.dump(2) + "\n";
}

StableOperator operator_from_json_text(const std::string& text) {
  return operator_from(parse_text(text, "operator spec"), "operator spec");
}

StableOperator operator_from_json_file(const std::string& path) {
  return operator_from(parse_text(read_file(path), path), path);
}

std::string operator_to_json_text(const StableOperator& op) {
  ordered_json j;
  j["dim"] = op.dim();
  j["s"] = op.s();
  j["measure"] = ordered_json::parse(measure_to_json_text(op.measure()));
  return j.dump(2) + "\n";
}

LoadedProblem problem_from_json_file(const std::string& path) {
  const ordered_json j = parse_text(read_file(path), path);
  const std::string ctx = path;
  StableOperator op = operator_from(require(j, "operator", ctx), ctx + ".operator");

  const ordered_json& jd = require(j, "domain", ctx);
  const std::string dctx = ctx + ".domain";
  const std::string dkind = require_string(jd, "kind", dctx);
  DomainSpec domain;
  if (dkind == "interval") {
    domain = DomainSpec::interval(require_number(jd, "a", dctx), require_number(jd, "b", dctx));
  } else if (dkind == "ball") {
    int cd = 0;
    const Vec3 c = vec_from(require(jd, "center", dctx), "center", dctx, &cd);
    domain = DomainSpec::ball(cd, c, require_number(jd, "radius", dctx));
  } else if (dkind == "box") {
    int bd = 0;
    const Vec3 lo = vec_from(require(jd, "lo", dctx), "lo", dctx, &bd);
    const Vec3 hi = vec_from(require(jd, "hi", dctx), "hi", dctx);
    domain = DomainSpec::box(bd, lo, hi);
  } else if (dkind == "complement_ball_in_box") {
    int cd = 0;
    const Vec3 c = vec_from(require(jd, "center", dctx), "center", dctx, &cd);
    const double radius = require_number(jd, "radius", dctx);
    const Vec3 lo = vec_from(require(jd, "lo", dctx), "lo", dctx);
    const Vec3 hi = vec_from(require(jd, "hi", dctx), "hi", dctx);
    domain = DomainSpec::complement_ball_in_box(cd, c, radius, lo, hi);
  } else {
    throw ConfigError(dctx + ": field \"kind\" has unknown value \"" + dkind + "\"");
  }

  const ordered_json& jf = require(j, "f", ctx);
  const std::string fctx = ctx + ".f";
  const std::string fkind = require_string(jf, "kind", fctx);
  std::function<double(const Vec3&)> f;
  if (fkind == "constant") {
    const double value = require_number(jf, "value", fctx);
    f = [value](const Vec3&) { return value; };
  } else if (fkind == "sign_x1") {
    f = [](const Vec3& x) { return x[0] > 0.0 ? 1.0 : (x[0] < 0.0 ? -1.0 : 0.0); };
  } else if (fkind == "custom_table") {
    const std::string rel = require_string(jf, "path", fctx);
    const std::filesystem::path table =
        std::filesystem::path(path).parent_path() / rel;
    auto gf = std::make_shared<GridFunction>(read_csv(table.string()));
    f = [gf](const Vec3& x) { return gf->eval(x); };
  } else {
    throw ConfigError(fctx + ": field \"kind\" has unknown value \"" + fkind + "\"");
  }

  const ordered_json& jg = require(j, "grid", ctx);
  const std::string gctx = ctx + ".grid";
  LoadedProblem out;
  if (jg.contains("h")) {
    out.problem = DirichletProblem::standard(op, domain, f, require_number(jg, "h", gctx));
  } else {
    const Vec3 lo = vec_from(require(jg, "lo", gctx), "lo", gctx);
    const Vec3 hi = vec_from(require(jg, "hi", gctx), "hi", gctx);
    const ordered_json& jp = require(jg, "pts", gctx);
    if (!jp.is_array() || jp.empty() || jp.size() > 2)
      throw ConfigError(gctx + ": field \"pts\" must be an array of 1..2 integers");
    std::array<int, 2> pts{1, 1};
    for (std::size_t k = 0; k < jp.size(); ++k) pts[k] = jp[k].get<int>();
    GridGeometry g = domain.n == 1
                         ? GridGeometry::line(lo[0], hi[0], pts[0])
                         : GridGeometry::box({lo[0], lo[1]}, {hi[0], hi[1]}, pts);
    out.problem = DirichletProblem{op, domain, f, g, true};
  }
  if (j.contains("interpolate_offaxis"))
    out.problem.interpolate_offaxis = j.at("interpolate_offaxis").get<bool>();
  out.f_name = fkind;
  return out;
}

std::string sha256_hex(const std::string& bytes) {
  Sha256 s;
  s.update(bytes.data(), bytes.size());
  return s.hex();
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

void RunManifest::add_file(const std::string& file_path, const std::string& record_path) {
  const std::string content = read_file(file_path);
  ManifestEntry e;
  e.path = record_path.empty() ? file_path : record_path;
  e.sha256 = sha256_hex(content);
  e.bytes = content.size();
  files.push_back(std::move(e));
}

void RunManifest::write(const std::string& path) const {
  ordered_json j;
  j["config"] = config_text.empty() ? ordered_json(nullptr)
                                    : parse_text(config_text, "manifest config");
  j["config_sha256"] = sha256_hex(config_text);
  ordered_json jf = ordered_json::array();
  for (const ManifestEntry& e : files) {
    ordered_json je;
    je["path"] = e.path;
    je["bytes"] = e.bytes;
    je["sha256"] = e.sha256;
    jf.push_back(std::move(je));
  }
  j["files"] = std::move(jf);
  ordered_json jv = ordered_json::array();
  for (const auto& [name, pass] : verdicts) {
    ordered_json v;
    v["name"] = name;
    v["pass"] = pass;
    jv.push_back(std::move(v));
  }
  j["verdicts"] = std::move(jv);
  ordered_json jb = ordered_json::array();
  for (const auto& [name, bound] : error_bounds) {
    ordered_json v;
    v["name"] = name;
    v["bound"] = bound;
    jb.push_back(std::move(v));
  }
  j["error_bounds"] = std::move(jb);
  j["wall_seconds"] = wall_seconds;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace stableop
