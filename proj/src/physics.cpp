#include "cbie/physics.hpp"

#include <cmath>

#include "cbie/errors.hpp"

namespace cbie {

void PlaneWave::validate() const {
  if (std::abs(direction.norm() - 1.0) > 1e-14) throw DomainError("plane wave direction must be a unit vector");
  if (std::abs(polarization.norm() - 1.0) > 1e-14) throw DomainError("plane wave polarization must have unit norm");
  if (std::abs(direction.cast<Complex>().dot(polarization)) > 1e-14)
    throw DomainError("plane wave polarization must be orthogonal to the direction");
  if (!(medium.wavenumber > 0.0) || !(medium.impedance > 0.0)) throw DomainError("plane wave medium is not set");
}

CVec3 plane_wave_eval(const PlaneWave& pw, const Vec3& r) {
  return pw.polarization * (pw.amplitude * std::polar(1.0, pw.medium.wavenumber * pw.direction.dot(r)));
}

CVec3 plane_wave_h(const PlaneWave& pw, const Vec3& r) {
  return cross(pw.direction, plane_wave_eval(pw, r)) / pw.medium.impedance;
}

std::vector<CVec3> incident_tangential_e(const Discretization& disc, const PlaneWave& pw) {
  std::vector<CVec3> out(static_cast<std::size_t>(disc.points()));
  for (int p = 0; p < disc.points(); ++p)
    out[p] = cross(disc.frame(p).normal, plane_wave_eval(pw, disc.position(p)));
  return out;
}

VectorXc assemble_rhs(const Problem& problem, const PlaneWave& pw) {
  pw.validate();
  const Discretization& d = problem.discretization();
  std::vector<CVec3> f(static_cast<std::size_t>(d.points()));
  const bool magnetic = problem.formulation() == Formulation::mfie;
  for (int p = 0; p < d.points(); ++p) {
    const Vec3& n = d.frame(p).normal;
    const Vec3& r = d.position(p);
    f[p] = magnetic ? cross(n, plane_wave_h(pw, r)) : CVec3(-cross(n, plane_wave_eval(pw, r)));
  }
  return problem.project(f);
}

Vec3 spherical_direction(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

Vec3 FarFieldPattern::direction(int i) const { return spherical_direction(theta[i], phi[i]); }

std::vector<double> FarFieldPattern::rcs(double incident_amplitude) const {
  if (!(incident_amplitude > 0.0)) throw DomainError("rcs: incident amplitude must be positive");
  std::vector<double> out;
  out.reserve(amplitude.size());
  for (const CVec3& f : amplitude) out.push_back(4.0 * pi * f.squaredNorm() / (incident_amplitude * incident_amplitude));
  return out;
}

FarFieldPattern far_field(const Discretization& disc, const VectorXc& density, const std::vector<double>& theta,
                          const std::vector<double>& phi) {
  if (theta.size() != phi.size()) throw DomainError("far_field: theta and phi differ in length");
  const std::vector<CVec3> j = to_cartesian(disc, density);
  const MediumParams& m = disc.surface().medium();
  const double k = m.wavenumber;
  FarFieldPattern out;
  out.theta = theta;
  out.phi = phi;
  out.wavelength = m.wavelength;
  out.amplitude.resize(theta.size());
  const int na = static_cast<int>(theta.size());
#pragma omp parallel for schedule(static)
  for (int a = 0; a < na; ++a) {
    const Vec3 r = spherical_direction(theta[a], phi[a]);
    CVec3 s = CVec3::Zero();
    for (int p = 0; p < disc.points(); ++p) s += j[p] * std::polar(disc.weight(p), -k * r.dot(disc.position(p)));
    const CVec3 rc = r.cast<Complex>();
    const CVec3 t = s - rc * rc.dot(s);
    out.amplitude[a] = (I * k * m.impedance / (4.0 * pi)) * t;
  }
  return out;
}

double cut_angle(double a0, double a1, int i, int count) {
  return count == 1 ? a0 : a0 + (a1 - a0) * i / (count - 1);
}

FarFieldPattern far_field_cut(const Discretization& disc, const VectorXc& density, double phi_deg, double a0,
                              double a1, int count) {
  if (count < 1) throw DomainError("far_field_cut: count must be positive");
  std::vector<double> theta, phi;
  for (int i = 0; i < count; ++i) {
    const double a = cut_angle(a0, a1, i, count);
    theta.push_back(std::abs(a) * pi / 180.0);
    phi.push_back((a >= 0.0 ? phi_deg : phi_deg + 180.0) * pi / 180.0);
  }
  return far_field(disc, density, theta, phi);
}

double to_dbsm(double sigma, double unit_m) {
  if (!(unit_m > 0.0)) throw DomainError("to_dbsm: length unit must be positive");
  return 10.0 * std::log10(sigma * unit_m * unit_m);
}

}  // namespace cbie
