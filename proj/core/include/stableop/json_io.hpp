#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stableop/dirichlet.hpp"
#include "stableop/spectral_measure.hpp"

namespace stableop {

/// Measure schema: {"kind":"atomic","atoms":[{"theta":[...],"w":...}]} |
/// {"kind":"uniform","level":...[,"nodes":...]} |
/// {"kind":"density","n_nodes":N,"values":[...]} |
/// {"kind":"density_nodes","atoms":[{"theta":[...],"w":...}]}.
/// Directions are normalized on load.  dim_hint supplies the ambient
/// dimension for kinds whose payload does not determine it (uniform); atomic
/// thetas must agree with the hint when both are present.  Throws ConfigError
/// naming the offending field.
SpectralMeasure measure_from_json_text(const std::string& text, int dim_hint = 0);
std::string measure_to_json_text(const SpectralMeasure& mu);

/// Operator schema: {"dim":n,"s":s,"measure":{...}} or the shorthand
/// {"canonical":"fractional_laplacian"|"axis_sum","dim":n,"s":s}.
StableOperator operator_from_json_text(const std::string& text);
StableOperator operator_from_json_file(const std::string& path);
std::string operator_to_json_text(const StableOperator& op);

/// Problem schema: {"operator":{...},"domain":{...},"f":{...},"grid":{...}}.
/// domain: {"kind":"interval","a":..,"b":..} | {"kind":"ball","center":[..],
/// "radius":..} | {"kind":"box","lo":[..],"hi":[..]} |
/// {"kind":"complement_ball_in_box","center":[..],"radius":..,"lo":[..],
/// "hi":[..]}.  f: {"kind":"constant","value":..} | {"kind":"sign_x1"} |
/// {"kind":"custom_table","path":"u.csv"} (path relative to the problem
/// file).  grid: {"h":..} for the standard enclosing grid, or explicit
/// {"lo":[..],"hi":[..],"pts":[..]}.  Optional "interpolate_offaxis": bool.
struct LoadedProblem {
  DirichletProblem problem;
  std::string f_name;  ///< builtin name, for reports
};
LoadedProblem problem_from_json_file(const std::string& path);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

struct ManifestEntry {
  std::string path;  ///< as recorded, typically relative to the output dir
  std::string sha256;
  std::uint64_t bytes = 0;
};

/// Machine-readable run record: the resolved config verbatim (with its
/// hash), every emitted data file with a checksum, per-experiment verdicts,
/// and the wall clock.  Callers write the manifest last, so a crashed run
/// leaves no manifest rather than a partial one.
struct RunManifest {
  std::string config_text;
  std::vector<ManifestEntry> files;
  std::vector<std::pair<std::string, bool>> verdicts;
  std::vector<std::pair<std::string, double>> error_bounds;
  double wall_seconds = 0.0;

  /// Hash and record a file on disk; record_path is what the manifest lists
  /// (defaults to file_path).  Throws ConfigError if unreadable.
  void add_file(const std::string& file_path, const std::string& record_path = "");
  /// Stable key order, UTF-8, trailing newline.
  void write(const std::string& path) const;
};

}  // namespace stableop
