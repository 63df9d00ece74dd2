#pragma once

#include <vector>

#include "cbie/formulation.hpp"

namespace cbie {

struct PlaneWave {
  CVec3 polarization{1.0, 0.0, 0.0};
  Vec3 direction{0.0, 0.0, 1.0};
  Complex amplitude{1.0, 0.0};
  MediumParams medium;

  /// Throws DomainError unless direction is a unit vector, polarization has
  /// unit norm and the two are orthogonal to 1e-14.
  void validate() const;
};

CVec3 plane_wave_eval(const PlaneWave& pw, const Vec3& r);
/// H = (direction x E) / eta.
CVec3 plane_wave_h(const PlaneWave& pw, const Vec3& r);

/// n x E^inc at every grid point of a discretization.
std::vector<CVec3> incident_tangential_e(const Discretization& disc, const PlaneWave& pw);
/// Right-hand side of a problem: -n x E^inc for the EFIE, n x H^inc for the MFIE.
VectorXc assemble_rhs(const Problem& problem, const PlaneWave& pw);

struct FarFieldPattern {
  std::vector<double> theta;
  std::vector<double> phi;
  /// F with E^s ~ F e^{ikr} / r.
  std::vector<CVec3> amplitude;
  double wavelength = 1.0;

  int size() const noexcept { return static_cast<int>(theta.size()); }
  Vec3 direction(int i) const;
  /// Bistatic RCS 4 pi |F|^2 / |E0|^2 in square length units.
  std::vector<double> rcs(double incident_amplitude = 1.0) const;
};

Vec3 spherical_direction(double theta, double phi);
/// F(r) = (i k eta / 4 pi) (I - r r) sum_j w_j J_j e^{-i k r . y_j}.
FarFieldPattern far_field(const Discretization& disc, const VectorXc& density, const std::vector<double>& theta,
                          const std::vector<double>& phi);
/// Cut in the plane spanned by z and the phi direction. Sample i has the
/// angle a_i = a0 + (a1 - a0) i / (count - 1) in degrees, taken as theta = a_i
/// at phi for a_i >= 0 and theta = -a_i at phi + 180 otherwise.
FarFieldPattern far_field_cut(const Discretization& disc, const VectorXc& density, double phi_deg, double a0,
                              double a1, int count);
double cut_angle(double a0, double a1, int i, int count);

/// 10 log10 of sigma in square metres; sigma is given in model length units
/// squared and unit_m is the length of one model unit in metres.
double to_dbsm(double sigma, double unit_m);

}  // namespace cbie
