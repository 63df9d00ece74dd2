#include "cbie/formulation.hpp"

#include "cbie/errors.hpp"

namespace cbie {

std::string to_string(Formulation f) {
  switch (f) {
    case Formulation::efie_closed:
      return "efie-closed";
    case Formulation::efie_open:
      return "efie-open";
    case Formulation::mfie:
      return "mfie";
  }
  return "unknown";
}

Formulation parse_formulation(const std::string& name) {
  if (name == "efie-closed") return Formulation::efie_closed;
  if (name == "efie-open") return Formulation::efie_open;
  if (name == "mfie") return Formulation::mfie;
  throw ConfigError("unknown formulation '" + name + "' (expected efie-closed, efie-open or mfie)");
}

namespace {

void check_variant(const Discretization& disc, const UniquenessMap& map, const OperatorConfig& config) {
  if (map.n_full() != disc.density_size()) throw DomainError("uniqueness map does not match the discretization");
  if (config.variant == Variant::closed_continuity) {
    if (disc.kind() != GridKind::closed)
      throw DomainError("variant mismatch: closed-continuity operator needs the closed grid");
  } else {
    if (disc.kind() != GridKind::open || map.groups() != disc.points())
      throw DomainError("variant mismatch: open operator needs the open grid and the identity map");
  }
}

std::vector<CVec3> expand_targets(const UniquenessMap& map, const std::vector<CVec3>& per_target, int points) {
  std::vector<CVec3> out(static_cast<std::size_t>(points));
  for (int p = 0; p < points; ++p) out[p] = per_target[map.group_of(p)];
  return out;
}

}  // namespace

EfieOperator::EfieOperator(const Discretization& disc, const UniquenessMap& map, const MediumParams& medium,
                           const OperatorConfig& config)
    : disc_(&disc), map_(&map), k_(medium.wavenumber), eta_(medium.impedance) {
  config.validate();
  check_variant(disc, map, config);
  if (!(k_ > 0.0)) throw DomainError("EFIE needs a positive wavenumber");
  targets_ = make_targets(disc, map);
  single_ = std::make_unique<SingleLayerOperator>(disc, targets_, k_, config);
}

std::vector<CVec3> EfieOperator::tangential_field(const VectorXc& density) const {
  const Discretization& d = *disc_;
  if (density.size() != d.density_size()) throw DomainError("EFIE: density has the wrong size");
  const int np = d.points();
  const std::vector<CVec3> j = to_cartesian(d, density);
  const VectorXc div = surface_divergence(d, density);
  MatrixXc sources(np, 4);
  for (int p = 0; p < np; ++p) {
    sources.block<1, 3>(p, 0) = j[p].transpose();
    sources(p, 3) = div[p];
  }
  const MatrixXc pot = single_->apply(sources);
  const VectorXc phi = map_->expand_scalar(pot.col(3));
  const std::vector<CVec3> grad = surface_gradient(d, phi);
  const Complex c = I * k_ * eta_;
  std::vector<CVec3> out(static_cast<std::size_t>(np));
  for (int p = 0; p < np; ++p) {
    const int g = map_->group_of(p);
    const CVec3 e = c * (pot.block<1, 3>(g, 0).transpose() + grad[p] / (k_ * k_));
    out[p] = cross(d.frame(p).normal, e);
  }
  return out;
}

VectorXc EfieOperator::apply(const VectorXc& x) const {
  if (x.size() != size()) throw DomainError("EFIE: input has the wrong size");
  return map_->compress(to_density(*disc_, tangential_field(map_->expand(x))));
}

MfieOperator::MfieOperator(const Discretization& disc, const UniquenessMap& map, const MediumParams& medium,
                           const OperatorConfig& config)
    : disc_(&disc), map_(&map) {
  config.validate();
  if (map.n_full() != disc.density_size()) throw DomainError("uniqueness map does not match the discretization");
  targets_ = make_targets(disc, map);
  magnetic_ = std::make_unique<MagneticOperator>(disc, targets_, medium.wavenumber, config);
}

std::vector<CVec3> MfieOperator::tangential_field(const VectorXc& density) const {
  if (density.size() != disc_->density_size()) throw DomainError("MFIE: density has the wrong size");
  const std::vector<CVec3> j = to_cartesian(*disc_, density);
  const std::vector<CVec3> m = expand_targets(*map_, magnetic_->apply(density), disc_->points());
  std::vector<CVec3> out(j.size());
  for (std::size_t p = 0; p < j.size(); ++p) out[p] = 0.5 * j[p] - m[p];
  return out;
}

VectorXc MfieOperator::apply(const VectorXc& x) const {
  if (x.size() != size()) throw DomainError("MFIE: input has the wrong size");
  return map_->compress(to_density(*disc_, tangential_field(map_->expand(x))));
}

GridKind grid_for(Formulation f, GridKind mfie_grid) {
  switch (f) {
    case Formulation::efie_closed:
      return GridKind::closed;
    case Formulation::efie_open:
      return GridKind::open;
    case Formulation::mfie:
      return mfie_grid;
  }
  return GridKind::closed;
}

Problem::Problem(const Surface& surface, Formulation f, int n, const OperatorConfig& config, GridKind mfie_grid)
    : formulation_(f) {
  const GridKind kind = grid_for(f, mfie_grid);
  disc_ = std::make_unique<Discretization>(surface, kind, n);
  if (kind == GridKind::closed)
    map_ = std::make_unique<UniquenessMap>(*disc_, build_coincidence(*disc_));
  else
    map_ = std::make_unique<UniquenessMap>(UniquenessMap::identity(*disc_));
  OperatorConfig c = config;
  c.variant = kind == GridKind::closed ? Variant::closed_continuity : Variant::open_no_continuity;
  if (f == Formulation::mfie)
    op_ = std::make_unique<MfieOperator>(*disc_, *map_, surface.medium(), c);
  else
    op_ = std::make_unique<EfieOperator>(*disc_, *map_, surface.medium(), c);
}

VectorXc Problem::project(const std::vector<CVec3>& field) const {
  return map_->compress(to_density(*disc_, field));
}

}  // namespace cbie
