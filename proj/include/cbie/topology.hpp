#pragma once

#include <vector>

#include <Eigen/Sparse>

#include "cbie/discretization.hpp"

namespace cbie {

enum class PointType { A, B, C };

struct PointClass {
  PointType type = PointType::A;
  int multiplicity = 1;
};

/// Type by parameter position (interior, edge, corner). Multiplicity is 1
/// here; build_coincidence supplies the true counts.
std::vector<PointType> classify_points(const Discretization& disc);

/// Physically coinciding grid points. members are sorted point indices; the
/// first member's covariant basis is the unknowns' frame for the group.
struct CoincidenceGroup {
  std::vector<int> members;
  Vec3 representative;
  PointType type = PointType::A;
  int owner() const { return members.front(); }
  int multiplicity() const { return static_cast<int>(members.size()); }
};

/// Partitions all grid points into coincidence groups, ordered by owner.
/// Throws ConformityError when a boundary point has no partner or when member
/// normals differ by more than angle_tol radians.
std::vector<CoincidenceGroup> build_coincidence(const Discretization& disc, double tol,
                                                double angle_tol = 1e-6);
std::vector<CoincidenceGroup> build_coincidence(const Discretization& disc);

std::vector<PointClass> point_classes(const Discretization& disc, const std::vector<CoincidenceGroup>& groups);

/// Projection P (unique -> per-patch density) and compression Q (density ->
/// unique) with 2x2 frame blocks per member point.
class UniquenessMap {
 public:
  UniquenessMap(const Discretization& disc, std::vector<CoincidenceGroup> groups);
  /// One group per point; P and Q are identities and the unique vector uses
  /// the density layout.
  static UniquenessMap identity(const Discretization& disc);

  int n_unique() const noexcept { return 2 * groups(); }
  int n_full() const noexcept { return n_full_; }
  int groups() const noexcept { return static_cast<int>(groups_.size()); }
  const std::vector<CoincidenceGroup>& group_list() const noexcept { return groups_; }
  int group_of(int point) const { return group_of_[static_cast<std::size_t>(point)]; }
  /// Position of component c (0 = u, 1 = v) of a group in the unique vector.
  int unique_slot(int group, int c) const { return uslot_[static_cast<std::size_t>(2 * group + c)]; }
  /// Block mapping group components to the member point's contravariant components.
  const Mat2& projection_block(int point) const { return pblock_[static_cast<std::size_t>(point)]; }
  /// Block mapping member components back to group components, including the 1/m weight.
  const Mat2& compression_block(int point) const { return qblock_[static_cast<std::size_t>(point)]; }
  /// Scalar averaging weight of a member point (1/multiplicity).
  double compression_weight(int point) const { return qweight_[static_cast<std::size_t>(point)]; }

  VectorXc expand(const VectorXc& unique) const;
  VectorXc compress(const VectorXc& full) const;
  /// Scalar versions: one value per group <-> one value per grid point.
  VectorXc expand_scalar(const VectorXc& per_group) const;
  VectorXc compress_scalar(const VectorXc& per_point) const;

  Eigen::SparseMatrix<double> projection_matrix() const;
  Eigen::SparseMatrix<double> compression_matrix() const;

 private:
  UniquenessMap() = default;
  const Discretization* disc_ = nullptr;
  int n_full_ = 0;
  std::vector<CoincidenceGroup> groups_;
  std::vector<int> group_of_, uslot_;
  std::vector<Mat2> pblock_, qblock_;
  std::vector<double> qweight_;
};

/// Largest jump of the edge-normal current component between patches that
/// share an edge through a coinciding point.
double edge_normal_jump(const Discretization& disc, const UniquenessMap& map, const VectorXc& density);

}  // namespace cbie
