#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbie/gmres.hpp"
#include "cbie/physics.hpp"

namespace cbie {

struct GeometryConfig {
  /// sphere, rounded_cube, rounded_box, dipole, torus or file.
  std::string kind;
  double diameter = 2.0;
  Vec3 center = Vec3::Zero();
  double edge = 1.0;
  Vec3 size = Vec3::Ones();
  double radius = 0.01;
  double arm_cross = 0.025;
  double arm_length = 0.25;
  double gap = 0.04;
  double major_radius = 1.0;
  double minor_radius = 0.3;
  int n_major = 4;
  int n_minor = 4;
  std::string path;
};

struct RcsCutConfig {
  double phi_deg = 0.0;
  double start_deg = 0.0;
  double stop_deg = 180.0;
  int count = 181;
};

struct RunConfig {
  GeometryConfig geometry;
  /// Wavelength in model length units.
  double wavelength = 1.0;
  /// Metres per model length unit, for dBsm.
  double length_unit_m = 1.0;
  int n = 10;
  Formulation formulation = Formulation::efie_closed;
  GridKind mfie_grid = GridKind::open;
  GmresOptions gmres;
  OperatorConfig quadrature;
  Vec3 direction{0.0, 0.0, 1.0};
  CVec3 polarization{1.0, 0.0, 0.0};
  Complex amplitude{1.0, 0.0};
  std::filesystem::path output_dir = "out";
  bool write_density = true;
  std::optional<RcsCutConfig> rcs;
  std::vector<int> sweep;
  std::vector<Formulation> sweep_formulations;
  /// Density CSV of a fine solve used when no Mie oracle applies.
  std::filesystem::path reference;
  int export_samples = 20;
  std::filesystem::path export_path;
  /// 0 keeps the OpenMP default.
  int threads = 0;
  /// Echo of the parsed input.
  nlohmann::json source;
};

/// Throws ConfigError with the offending field named.
RunConfig parse_config(const nlohmann::json& j);
/// Reads and parses a JSON file; IoError when unreadable, ConfigError on
/// malformed content.
RunConfig load_config(const std::filesystem::path& path);

MediumParams medium_of(const RunConfig& config);
Surface build_surface(const RunConfig& config);
PlaneWave plane_wave_of(const RunConfig& config);

struct SolveOutcome {
  int n_unique = 0;
  int n_full = 0;
  int groups = 0;
  SolveReport report;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
};

/// Builds, solves and writes density.csv, rcs.csv (when requested) and
/// manifest.json into the output directory.
SolveOutcome run_solve(const RunConfig& config);

struct ConvergenceRow {
  Formulation formulation;
  int n = 0;
  int unknowns = 0;
  double forward_error = 0.0;
  int iterations = 0;
  bool converged = false;
  double solution_error = 0.0;
};

/// One row per (formulation, N); writes convergence.csv.
std::vector<ConvergenceRow> run_convergence(const RunConfig& config);

/// Writes the sampled-patch file of the configured geometry.
void run_export(const RunConfig& config);

/// Density CSV: patch id, u, v, x, y, z, Re/Im of Jx, Jy, Jz and |J|.
void write_density_csv(const std::filesystem::path& path, const Discretization& disc, const VectorXc& density);

/// Current sampler from a density CSV written for the same surface.
class ReferenceDensity {
 public:
  ReferenceDensity(const Surface& surface, const std::filesystem::path& path);
  int n() const noexcept { return n_; }
  /// Cartesian current at (patch, u, v) by spectral interpolation.
  CVec3 current(int patch, double u, double v) const;

 private:
  int n_ = 0;
  GridKind kind_ = GridKind::closed;
  std::optional<NodeSet> nodes_;
  std::vector<CVec3> samples_;
};

}  // namespace cbie
