#pragma once

#include <vector>

#include "cbie/geometry.hpp"
#include "cbie/spectral.hpp"

namespace cbie {

/// Tensor grid of n x n nodes on every patch with precomputed frames and
/// quadrature weights. Point index = p * n^2 + iu * n + iv (v fastest).
/// Density vectors hold, per patch, all u-components then all v-components.
class Discretization {
 public:
  Discretization(const Surface& surface, GridKind kind, int n);

  const Surface& surface() const noexcept { return *surface_; }
  GridKind kind() const noexcept { return nodes_.kind(); }
  int n() const noexcept { return nodes_.size(); }
  int per_patch() const noexcept { return n() * n(); }
  int patches() const noexcept { return surface_->size(); }
  int points() const noexcept { return patches() * per_patch(); }
  int density_size() const noexcept { return 2 * points(); }
  const NodeSet& nodes() const noexcept { return nodes_; }

  int index(int patch, int iu, int iv) const noexcept { return (patch * n() + iu) * n() + iv; }
  int patch_of(int point) const noexcept { return point / per_patch(); }
  int iu_of(int point) const noexcept { return (point % per_patch()) / n(); }
  int iv_of(int point) const noexcept { return point % n(); }
  Vec2 uv(int point) const { return {nodes_.node(iu_of(point)), nodes_.node(iv_of(point))}; }

  const PatchFrame& frame(int point) const { return frames_[static_cast<std::size_t>(point)]; }
  const Vec3& position(int point) const { return frames_[static_cast<std::size_t>(point)].point; }
  /// w_u * w_v * sqrt(g) at the node.
  double weight(int point) const { return weights_[static_cast<std::size_t>(point)]; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  /// Largest distance between grid samples of a patch (sampled estimate).
  double patch_diameter(int patch) const { return diameters_[static_cast<std::size_t>(patch)]; }
  const Vec3& patch_center(int patch) const { return centers_[static_cast<std::size_t>(patch)]; }
  /// Radius of a ball around patch_center containing the whole patch.
  double patch_radius(int patch) const { return radii_[static_cast<std::size_t>(patch)]; }

  /// Offsets into a density vector.
  int u_slot(int point) const noexcept { return patch_of(point) * 2 * per_patch() + point % per_patch(); }
  int v_slot(int point) const noexcept { return u_slot(point) + per_patch(); }

 private:
  const Surface* surface_;
  NodeSet nodes_;
  std::vector<PatchFrame> frames_;
  std::vector<double> weights_, diameters_, radii_;
  std::vector<Vec3> centers_;
};

/// Converts a density vector (contravariant samples) to Cartesian vectors.
std::vector<CVec3> to_cartesian(const Discretization& disc, const VectorXc& density);
/// Contravariant samples of the tangential part of Cartesian vectors.
VectorXc to_density(const Discretization& disc, const std::vector<CVec3>& field);

}  // namespace cbie
