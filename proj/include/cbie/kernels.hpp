#pragma once

#include <cstddef>
#include <vector>

#include "cbie/discretization.hpp"
#include "cbie/quadrature.hpp"
#include "cbie/topology.hpp"

namespace cbie {

/// e^{ikR} / (4 pi R); throws DomainError for coincident points.
Complex green(const Vec3& r, const Vec3& rp, double k);
/// Gradient of green with respect to r.
CVec3 green_gradient(const Vec3& r, const Vec3& rp, double k);

/// (1/sqrt g) [d_u(sqrt g J^u) + d_v(sqrt g J^v)] at every grid point.
VectorXc surface_divergence(const Discretization& disc, const VectorXc& density);
/// g^{ij} (d_j f) a_i at every grid point, from per-point scalar samples.
std::vector<CVec3> surface_gradient(const Discretization& disc, const VectorXc& values);

enum class Variant { closed_continuity, open_no_continuity };

struct OperatorConfig {
  /// Patches closer than this fraction of their diameter get local quadrature.
  double near_threshold = 0.3;
  /// Panel-length divisor between successive refinement levels.
  double refinement_factor = 2.0;
  int max_levels = 4;
  /// Relative agreement required between successive levels.
  double tolerance = 1e-10;
  /// Gauss points per panel; 0 selects max(N, 8).
  int order = 0;
  /// Panel bounds of the coarsest level (see polar_rule).
  double kappa = 2.0;
  double max_panel = 0.5;
  Variant variant = Variant::closed_continuity;
  /// Dense single-layer matrices larger than this are applied matrix-free.
  std::size_t dense_limit_bytes = std::size_t(1400) << 20;

  void validate() const;
};

/// Evaluation points for the operators: one per coincidence group, with the
/// grid points that sit on it.
struct TargetSet {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<std::vector<int>> members;
  int size() const noexcept { return static_cast<int>(points.size()); }
};
TargetSet make_targets(const Discretization& disc, const UniquenessMap& map);

enum class KernelKind {
  /// G; one weight set.
  single_layer,
  /// n_t x (grad G x a_alpha) for alpha = u, v and Cartesian components; six sets.
  magnetic
};

/// Local-quadrature weights for (target, patch) pairs that are too close for
/// the plain grid rule. Block weights act on the patch's grid samples.
class NearField {
 public:
  NearField() = default;
  NearField(const Discretization& disc, const TargetSet& targets, KernelKind kind, double k,
            const OperatorConfig& config);

  struct Block {
    int target;
    int patch;
    Vec2 apex;
    double distance;
    int level;
  };
  int kernels() const noexcept { return kernels_; }
  int per_patch() const noexcept { return per_patch_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }
  /// [begin, end) block range of a target.
  std::pair<int, int> target_range(int t) const { return {begin_[t], begin_[t + 1]}; }
  /// Weight array (per_patch values, row-major iu, iv) of a block and kernel.
  const Complex* weights(int block, int kernel) const {
    return &weights_[(static_cast<std::size_t>(block) * kernels_ + kernel) * per_patch_];
  }
  /// Near block of (target, patch) or -1.
  int find(int target, int patch) const;

 private:
  int kernels_ = 1;
  int per_patch_ = 0;
  std::vector<Block> blocks_;
  std::vector<int> begin_;
  std::vector<Complex> weights_;
};

/// Local weights for one target and patch; throws ConvergenceError when the
/// refinement levels do not agree.
std::vector<Complex> local_weights(const Discretization& disc, int patch, const Vec3& target,
                                   const Vec3& target_normal, const Vec2& apex, double distance,
                                   KernelKind kind, double k, const OperatorConfig& config,
                                   int* level_used = nullptr);

/// Self-patch corrections: for every node of the patch, weights w with
/// sum_j w_j rho_j ~ integral of G(node, .) rho over the patch.
struct SingularCorrection {
  int patch = 0;
  int n = 0;
  double k = 0.0;
  std::vector<std::vector<Complex>> weights;
};
SingularCorrection precompute_singular(const Discretization& disc, int patch, double k,
                                       const OperatorConfig& config);

/// Discrete sum_j S_tj rho_j approximating integral G(x_t, y) rho(y) dsigma.
class SingleLayerOperator {
 public:
  SingleLayerOperator(const Discretization& disc, const TargetSet& targets, double k,
                      const OperatorConfig& config);
  /// sources: points x m; result: targets x m.
  MatrixXc apply(const MatrixXc& sources) const;
  bool is_dense() const noexcept { return dense_.size() > 0; }
  const NearField& near() const noexcept { return near_; }
  const MatrixXc& matrix() const noexcept { return dense_; }

 private:
  const Discretization* disc_;
  const TargetSet* targets_;
  double k_;
  NearField near_;
  MatrixXc dense_;
};

/// Principal-value n_t x integral grad G x J dsigma at every target.
class MagneticOperator {
 public:
  MagneticOperator(const Discretization& disc, const TargetSet& targets, double k,
                   const OperatorConfig& config);
  std::vector<CVec3> apply(const VectorXc& density) const;
  const NearField& near() const noexcept { return near_; }

 private:
  const Discretization* disc_;
  const TargetSet* targets_;
  double k_;
  NearField near_;
};

}  // namespace cbie
