#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cbie/types.hpp"

namespace cbie {

/// Point and first derivatives of a patch map at (u, v).
struct PatchPoint {
  Vec3 r;
  Vec3 ru;
  Vec3 rv;
};

/// Smooth map from the square [-1,1]^2 into 3-space. Implementations are
/// immutable once constructed and may be evaluated concurrently.
class PatchParametrization {
 public:
  virtual ~PatchParametrization() = default;
  virtual PatchPoint eval(double u, double v) const = 0;
  Vec3 point(double u, double v) const { return eval(u, v).r; }
};

using PatchPtr = std::shared_ptr<const PatchParametrization>;

/// Differential geometry at one parameter point. a_u x a_v = jacobian * normal.
struct PatchFrame {
  Vec3 point;
  Vec3 a_u;
  Vec3 a_v;
  Vec3 normal;
  double jacobian = 0.0;
  Mat2 metric;
  Mat2 inverse_metric;

  Mat32 basis() const {
    Mat32 b;
    b.col(0) = a_u;
    b.col(1) = a_v;
    return b;
  }
  template <class V>
  auto to_cartesian(const V& contra) const {
    return (a_u * contra[0] + a_v * contra[1]).eval();
  }
  /// Contravariant components of the tangential part of a Cartesian vector.
  Vec2 to_contravariant(const Vec3& w) const {
    return inverse_metric * Vec2(a_u.dot(w), a_v.dot(w));
  }
  Eigen::Vector2cd to_contravariant(const CVec3& w) const {
    Eigen::Vector2cd cov(a_u.cast<Complex>().dot(w), a_v.cast<Complex>().dot(w));
    return inverse_metric.cast<Complex>() * cov;
  }
};

PatchFrame make_frame(const PatchPoint& p);
/// Throws DomainError for parameters outside the closed square.
PatchFrame eval_frame(const PatchParametrization& patch, double u, double v);

/// Homogeneous lossless medium. Lengths are in the same unit as the wavelength.
struct MediumParams {
  double wavelength = 1.0;
  double wavenumber = 2.0 * pi;
  double impedance = 0.0;
  double permittivity = 0.0;
  double permeability = 0.0;
  double angular_frequency = 0.0;

  static MediumParams free_space(double wavelength = 1.0);
};

/// Edges: 0 is v=-1, 1 is u=+1, 2 is v=+1, 3 is u=-1. The edge parameter t
/// is u on edges 0 and 2 and v on edges 1 and 3, increasing from -1 to 1.
Vec2 edge_uv(int edge, double t);

struct EdgeRef {
  int patch = 0;
  int edge = 0;
  bool operator==(const EdgeRef&) const = default;
};

/// Two patch edges traced by the same point set; flip means t on a maps to -t on b.
struct Adjacency {
  EdgeRef a;
  EdgeRef b;
  bool flip = false;
};

/// Closed surface made of conforming quadrilateral patches. Every patch edge
/// belongs to exactly one adjacency record.
class Surface {
 public:
  Surface(std::vector<PatchPtr> patches, MediumParams medium, std::vector<Adjacency> adjacency,
          std::vector<int> ids = {});
  /// Builds the adjacency list by matching edge samples geometrically.
  static Surface from_patches(std::vector<PatchPtr> patches, MediumParams medium,
                              std::vector<int> ids = {});

  int size() const noexcept { return static_cast<int>(patches_.size()); }
  const PatchParametrization& patch(int i) const { return *patches_.at(static_cast<std::size_t>(i)); }
  const PatchPtr& patch_ptr(int i) const { return patches_.at(static_cast<std::size_t>(i)); }
  const std::vector<PatchPtr>& patches() const noexcept { return patches_; }
  int id(int i) const { return ids_.at(static_cast<std::size_t>(i)); }
  const std::vector<int>& ids() const noexcept { return ids_; }
  const MediumParams& medium() const noexcept { return medium_; }
  const std::vector<Adjacency>& adjacency() const noexcept { return adjacency_; }
  /// Partner of a patch edge, or nullopt if unknown (never for a valid surface).
  std::optional<std::pair<EdgeRef, bool>> neighbor(EdgeRef e) const;
  /// Bounding-box diagonal.
  double diameter() const noexcept { return diameter_; }
  Vec3 centroid() const noexcept { return centroid_; }

  Surface with_medium(const MediumParams& medium) const;
  /// Rigid motion r -> rotation * r + shift applied to every patch.
  Surface transformed(const Mat3& rotation, const Vec3& shift) const;

 private:
  std::vector<PatchPtr> patches_;
  std::vector<int> ids_;
  MediumParams medium_;
  std::vector<Adjacency> adjacency_;
  std::vector<std::array<int, 4>> edge_record_;
  double diameter_ = 0.0;
  Vec3 centroid_ = Vec3::Zero();
};

/// Matches patch edges by sampled coincidence; throws GeometryError when an
/// edge has no partner.
std::vector<Adjacency> detect_adjacency(const std::vector<PatchPtr>& patches, double tol,
                                        const std::vector<int>& ids = {});

/// Face-coordinate stretch of make_sphere.
inline constexpr double kSphereStretch = 0.5;
/// Six-patch cube-sphere: central projection of cube faces whose angular
/// coordinate is (pi/4) asin(s u) / asin(s) with s = kSphereStretch.
Surface make_sphere(double diameter, const Vec3& center = Vec3::Zero(),
                    const MediumParams& medium = MediumParams::free_space());
/// Box with cylindrical edge fillets and spherical corner fillets. Each patch
/// is exact geometry: 6 faces, 24 half-cylinders (each edge fillet split
/// lengthwise) and 24 corner quads (each spherical octant split in three).
Surface make_rounded_box(const Vec3& size, double radius, const Vec3& center = Vec3::Zero(),
                         const MediumParams& medium = MediumParams::free_space());
Surface make_rounded_cube(double edge, double radius,
                          const MediumParams& medium = MediumParams::free_space());
/// Two rounded-box arms along z separated by a gap, centred at the origin.
Surface make_dipole(double arm_cross, double arm_len, double gap, double radius,
                    const MediumParams& medium = MediumParams::free_space());
/// Torus split into n_major x n_minor patches with aligned parametrizations.
Surface make_torus(double major_radius, double minor_radius, int n_major, int n_minor,
                   const MediumParams& medium = MediumParams::free_space());

/// Patch counts of the rounded box decomposition.
inline constexpr int kRoundedBoxFaces = 6;
inline constexpr int kRoundedBoxEdgePatches = 24;
inline constexpr int kRoundedBoxCornerPatches = 24;
inline constexpr int kRoundedBoxPatches = 54;

enum class PatchRole { face, edge, corner, other };
/// Role of a patch index within a make_rounded_box / make_dipole surface.
PatchRole rounded_box_role(int patch_index);

}  // namespace cbie
