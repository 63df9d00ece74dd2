#include "cbie/discretization.hpp"

#include <algorithm>

#include "cbie/errors.hpp"

namespace cbie {

Discretization::Discretization(const Surface& surface, GridKind kind, int n)
    : surface_(&surface), nodes_(kind, n) {
  if (n < 2) throw DomainError("grid needs at least 2 points per direction");
  const int m = surface.size();
  frames_.resize(static_cast<std::size_t>(m) * n * n);
  weights_.resize(frames_.size());
  diameters_.assign(static_cast<std::size_t>(m), 0.0);
  radii_.assign(static_cast<std::size_t>(m), 0.0);
  centers_.assign(static_cast<std::size_t>(m), Vec3::Zero());
  for (int p = 0; p < m; ++p) {
    const PatchParametrization& patch = surface.patch(p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const int idx = index(p, i, j);
        frames_[idx] = make_frame(patch.eval(nodes_.node(i), nodes_.node(j)));
        weights_[idx] = nodes_.weight(i) * nodes_.weight(j) * frames_[idx].jacobian;
      }
    // Bounding data from a fine sample so open grids see the patch corners too.
    constexpr int s = 9;
    std::vector<Vec3> pts;
    pts.reserve(s * s);
    Vec3 lo = Vec3::Constant(1e300), hi = -lo;
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) {
        pts.push_back(patch.point(-1.0 + 2.0 * i / (s - 1), -1.0 + 2.0 * j / (s - 1)));
        lo = lo.cwiseMin(pts.back());
        hi = hi.cwiseMax(pts.back());
      }
    const Vec3 c = 0.5 * (lo + hi);
    double diam = 0.0, rad = 0.0;
    for (std::size_t a = 0; a < pts.size(); ++a) {
      rad = std::max(rad, (pts[a] - c).norm());
      for (std::size_t b = a + 1; b < pts.size(); ++b) diam = std::max(diam, (pts[a] - pts[b]).norm());
    }
    centers_[p] = c;
    diameters_[p] = diam;
    // Inflate for curvature between samples.
    radii_[p] = 1.05 * rad + 0.05 * diam;
  }
}

std::vector<CVec3> to_cartesian(const Discretization& disc, const VectorXc& density) {
  if (density.size() != disc.density_size()) throw DomainError("density vector has the wrong size");
  std::vector<CVec3> out(static_cast<std::size_t>(disc.points()));
  for (int i = 0; i < disc.points(); ++i) {
    const PatchFrame& f = disc.frame(i);
    out[i] = f.a_u.cast<Complex>() * density[disc.u_slot(i)] + f.a_v.cast<Complex>() * density[disc.v_slot(i)];
  }
  return out;
}

VectorXc to_density(const Discretization& disc, const std::vector<CVec3>& field) {
  if (static_cast<int>(field.size()) != disc.points()) throw DomainError("field has the wrong number of points");
  VectorXc out(disc.density_size());
  for (int i = 0; i < disc.points(); ++i) {
    const Eigen::Vector2cd c = disc.frame(i).to_contravariant(field[i]);
    out[disc.u_slot(i)] = c[0];
    out[disc.v_slot(i)] = c[1];
  }
  return out;
}

}  // namespace cbie
