#pragma once

#include <vector>

#include "cbie/physics.hpp"

namespace cbie {

struct MieFields {
  CVec3 e;
  CVec3 h;
};

/// Series solution for a PEC sphere lit by a linearly polarized plane wave.
/// The wave is rotated into the frame where it travels along +z with x
/// polarization; results are returned in the global frame.
class MieSeries {
 public:
  MieSeries(double diameter, const PlaneWave& pw, const Vec3& center = Vec3::Zero(), int max_order = 200);

  int order() const noexcept { return static_cast<int>(a_.size()) - 1; }
  Complex a(int n) const { return a_.at(static_cast<std::size_t>(n)); }
  Complex b(int n) const { return b_.at(static_cast<std::size_t>(n)); }
  double radius() const noexcept { return radius_; }

  /// Series for the incident or scattered field at a point off the centre.
  MieFields incident(const Vec3& r) const { return fields(r, false); }
  MieFields scattered(const Vec3& r) const { return fields(r, true); }
  /// n x H at the radial projection of r onto the sphere.
  CVec3 surface_current(const Vec3& r) const;

  /// Amplitude functions in the local frame.
  Complex s1(double theta) const;
  Complex s2(double theta) const;
  /// F with E^s ~ F e^{ikr} / r along a global direction.
  CVec3 far_field(const Vec3& direction) const;
  double rcs(const Vec3& direction) const;
  double scattering_cross_section() const;
  /// Optical theorem: (4 pi / k^2) Re S(0) |E0|^2 normalised to |E0|^2.
  double extinction_cross_section() const;

 private:
  MieFields fields(const Vec3& r, bool scattered) const;
  void angular(double mu, std::vector<double>& p, std::vector<double>& t) const;

  double radius_, k_, eta_;
  Vec3 center_;
  Mat3 rot_;  // rows: local x, y, z in global coordinates
  Complex e0_;
  std::vector<Complex> a_, b_;
};

}  // namespace cbie
