#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cbie/kernels.hpp"

namespace cbie {

enum class Formulation { efie_closed, efie_open, mfie };

std::string to_string(Formulation f);
/// Accepts "efie-closed", "efie-open" and "mfie".
Formulation parse_formulation(const std::string& name);

/// Square linear map on unique vectors.
class LinearMap {
 public:
  virtual ~LinearMap() = default;
  virtual int size() const = 0;
  virtual VectorXc apply(const VectorXc& x) const = 0;
};

/// Q (n x E^s[P x]) with E^s = i k eta (A + grad phi / k^2), A = S J and
/// phi = S div J. Closed variant: closed grid with a coincidence map. Open
/// variant: open grid with the identity map.
class EfieOperator : public LinearMap {
 public:
  EfieOperator(const Discretization& disc, const UniquenessMap& map, const MediumParams& medium,
               const OperatorConfig& config);

  int size() const override { return map_->n_unique(); }
  VectorXc apply(const VectorXc& x) const override;
  /// n x E^s at every grid point for a full density.
  std::vector<CVec3> tangential_field(const VectorXc& density) const;

  const Discretization& discretization() const noexcept { return *disc_; }
  const UniquenessMap& map() const noexcept { return *map_; }
  const SingleLayerOperator& single_layer() const noexcept { return *single_; }

 private:
  const Discretization* disc_;
  const UniquenessMap* map_;
  double k_, eta_;
  TargetSet targets_;
  std::unique_ptr<SingleLayerOperator> single_;
};

/// Q (J / 2 - n x PV integral grad G x J) on either grid.
class MfieOperator : public LinearMap {
 public:
  MfieOperator(const Discretization& disc, const UniquenessMap& map, const MediumParams& medium,
               const OperatorConfig& config);

  int size() const override { return map_->n_unique(); }
  VectorXc apply(const VectorXc& x) const override;
  std::vector<CVec3> tangential_field(const VectorXc& density) const;

  const Discretization& discretization() const noexcept { return *disc_; }
  const UniquenessMap& map() const noexcept { return *map_; }

 private:
  const Discretization* disc_;
  const UniquenessMap* map_;
  TargetSet targets_;
  std::unique_ptr<MagneticOperator> magnetic_;
};

/// Grid kind a formulation runs on; mfie takes the grid given by the caller.
GridKind grid_for(Formulation f, GridKind mfie_grid = GridKind::open);

/// Discretization, map and operator of one formulation, built together.
class Problem {
 public:
  Problem(const Surface& surface, Formulation f, int n, const OperatorConfig& config,
          GridKind mfie_grid = GridKind::open);

  Formulation formulation() const noexcept { return formulation_; }
  const Discretization& discretization() const noexcept { return *disc_; }
  const UniquenessMap& map() const noexcept { return *map_; }
  const LinearMap& op() const noexcept { return *op_; }
  /// Unique vector of a tangential field sampled at every grid point.
  VectorXc project(const std::vector<CVec3>& field) const;

 private:
  Formulation formulation_;
  std::unique_ptr<Discretization> disc_;
  std::unique_ptr<UniquenessMap> map_;
  std::unique_ptr<LinearMap> op_;
};

}  // namespace cbie
