#include "cbie/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbie/errors.hpp"

namespace cbie {

PatchFrame make_frame(const PatchPoint& p) {
  PatchFrame f;
  f.point = p.r;
  f.a_u = p.ru;
  f.a_v = p.rv;
  const Vec3 c = p.ru.cross(p.rv);
  f.jacobian = c.norm();
  if (!(f.jacobian > 0.0)) throw GeometryError("degenerate patch frame (zero Jacobian)");
  f.normal = c / f.jacobian;
  f.metric << p.ru.dot(p.ru), p.ru.dot(p.rv), p.ru.dot(p.rv), p.rv.dot(p.rv);
  f.inverse_metric = f.metric.inverse();
  return f;
}

PatchFrame eval_frame(const PatchParametrization& patch, double u, double v) {
  constexpr double slack = 1e-13;
  if (!(std::abs(u) <= 1.0 + slack) || !(std::abs(v) <= 1.0 + slack)) {
    throw DomainError("eval_frame: (u, v) outside [-1,1]^2");
  }
  return make_frame(patch.eval(std::clamp(u, -1.0, 1.0), std::clamp(v, -1.0, 1.0)));
}

MediumParams MediumParams::free_space(double wavelength) {
  if (!(wavelength > 0.0) || !std::isfinite(wavelength)) {
    throw DomainError("wavelength must be positive and finite");
  }
  constexpr double c0 = 299792458.0;
  constexpr double mu0 = 4.0e-7 * pi;
  MediumParams m;
  m.wavelength = wavelength;
  m.wavenumber = 2.0 * pi / wavelength;
  m.permeability = mu0;
  m.permittivity = 1.0 / (mu0 * c0 * c0);
  m.impedance = std::sqrt(m.permeability / m.permittivity);
  m.angular_frequency = m.wavenumber * c0;
  return m;
}

Vec2 edge_uv(int edge, double t) {
  switch (edge) {
    case 0: return {t, -1.0};
    case 1: return {1.0, t};
    case 2: return {t, 1.0};
    case 3: return {-1.0, t};
    default: throw DomainError("edge index must be in 0..3");
  }
}

namespace {

constexpr int kEdgeSamples = 5;
constexpr double kEdgeT[kEdgeSamples] = {-1.0, -0.55, 0.1, 0.62, 1.0};

double sample_diameter(const std::vector<PatchPtr>& patches, Vec3* centroid) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = -lo;
  Vec3 sum = Vec3::Zero();
  int count = 0;
  for (const auto& p : patches) {
    for (int i = 0; i < 5; ++i) {
      for (int j = 0; j < 5; ++j) {
        const Vec3 r = p->point(-1.0 + 0.5 * i, -1.0 + 0.5 * j);
        lo = lo.cwiseMin(r);
        hi = hi.cwiseMax(r);
        sum += r;
        ++count;
      }
    }
  }
  if (centroid) *centroid = count ? Vec3(sum / count) : Vec3::Zero();
  return count ? (hi - lo).norm() : 0.0;
}

std::string edge_name(const std::vector<int>& ids, EdgeRef e) {
  const int id = ids.empty() ? e.patch : ids[static_cast<std::size_t>(e.patch)];
  return "patch " + std::to_string(id) + " edge " + std::to_string(e.edge);
}

}  // namespace

std::vector<Adjacency> detect_adjacency(const std::vector<PatchPtr>& patches, double tol,
                                        const std::vector<int>& ids) {
  const int m = static_cast<int>(patches.size());
  std::vector<std::array<Vec3, kEdgeSamples>> samples(static_cast<std::size_t>(4 * m));
  for (int p = 0; p < m; ++p)
    for (int e = 0; e < 4; ++e)
      for (int s = 0; s < kEdgeSamples; ++s) {
        const Vec2 uv = edge_uv(e, kEdgeT[s]);
        samples[4 * p + e][s] = patches[p]->point(uv[0], uv[1]);
      }

  std::vector<int> partner(static_cast<std::size_t>(4 * m), -1);
  std::vector<Adjacency> out;
  auto matches = [&](int a, int b, bool flip) {
    for (int s = 0; s < kEdgeSamples; ++s) {
      const int sb = flip ? kEdgeSamples - 1 - s : s;
      // The sample abscissae are not symmetric, so compare via re-evaluation.
      const Vec3 rb = flip ? patches[b / 4]->point(edge_uv(b % 4, -kEdgeT[s])[0],
                                                   edge_uv(b % 4, -kEdgeT[s])[1])
                           : samples[b][sb];
      if ((samples[a][s] - rb).norm() > tol) return false;
    }
    return true;
  };
  for (int a = 0; a < 4 * m; ++a) {
    if (partner[a] >= 0) continue;
    for (int b = a + 1; b < 4 * m; ++b) {
      if (partner[b] >= 0) continue;
      // Cheap endpoint screen before the full comparison.
      const bool same = (samples[a][0] - samples[b][0]).norm() <= tol;
      const bool flipped = (samples[a][0] - samples[b][kEdgeSamples - 1]).norm() <= tol;
      if (!same && !flipped) continue;
      for (bool flip : {false, true}) {
        if ((flip ? flipped : same) && matches(a, b, flip)) {
          partner[a] = b;
          partner[b] = a;
          out.push_back({{a / 4, a % 4}, {b / 4, b % 4}, flip});
          break;
        }
      }
      if (partner[a] >= 0) break;
    }
    if (partner[a] < 0) {
      throw ConformityError("surface is not closed: " + edge_name(ids, {a / 4, a % 4}) +
                            " has no matching partner edge");
    }
  }
  return out;
}

Surface::Surface(std::vector<PatchPtr> patches, MediumParams medium,
                 std::vector<Adjacency> adjacency, std::vector<int> ids)
    : patches_(std::move(patches)),
      ids_(std::move(ids)),
      medium_(medium),
      adjacency_(std::move(adjacency)) {
  if (patches_.empty()) throw GeometryError("surface has no patches");
  if (ids_.empty()) {
    ids_.resize(patches_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) ids_[i] = static_cast<int>(i);
  }
  if (ids_.size() != patches_.size()) throw GeometryError("patch id list size mismatch");
  std::vector<std::array<int, 4>> seen(patches_.size(), {-1, -1, -1, -1});
  for (std::size_t r = 0; r < adjacency_.size(); ++r) {
    for (const EdgeRef& e : {adjacency_[r].a, adjacency_[r].b}) {
      if (e.patch < 0 || e.patch >= size() || e.edge < 0 || e.edge > 3) {
        throw GeometryError("adjacency record " + std::to_string(r) + " references an invalid edge");
      }
      int& slot = seen[static_cast<std::size_t>(e.patch)][static_cast<std::size_t>(e.edge)];
      if (slot >= 0) {
        throw GeometryError(edge_name(ids_, e) + " appears in more than one adjacency record");
      }
      slot = static_cast<int>(r);
    }
  }
  for (int p = 0; p < size(); ++p)
    for (int e = 0; e < 4; ++e)
      if (seen[p][e] < 0) {
        throw GeometryError("surface is not closed: " + edge_name(ids_, {p, e}) +
                            " has no adjacency record");
      }
  edge_record_ = std::move(seen);
  diameter_ = sample_diameter(patches_, &centroid_);
}

Surface Surface::from_patches(std::vector<PatchPtr> patches, MediumParams medium,
                              std::vector<int> ids) {
  Vec3 c;
  const double diam = sample_diameter(patches, &c);
  auto adj = detect_adjacency(patches, 1e-9 * std::max(diam, 1e-300), ids);
  return Surface(std::move(patches), medium, std::move(adj), std::move(ids));
}

std::optional<std::pair<EdgeRef, bool>> Surface::neighbor(EdgeRef e) const {
  if (e.patch < 0 || e.patch >= size() || e.edge < 0 || e.edge > 3) return std::nullopt;
  const int r = edge_record_[static_cast<std::size_t>(e.patch)][static_cast<std::size_t>(e.edge)];
  if (r < 0) return std::nullopt;
  const Adjacency& a = adjacency_[static_cast<std::size_t>(r)];
  return std::make_pair(a.a == e ? a.b : a.a, a.flip);
}

Surface Surface::with_medium(const MediumParams& medium) const {
  Surface s = *this;
  s.medium_ = medium;
  return s;
}

namespace {

class TransformedPatch final : public PatchParametrization {
 public:
  TransformedPatch(PatchPtr base, const Mat3& rot, const Vec3& shift)
      : base_(std::move(base)), rot_(rot), shift_(shift) {}
  PatchPoint eval(double u, double v) const override {
    const PatchPoint p = base_->eval(u, v);
    return {rot_ * p.r + shift_, rot_ * p.ru, rot_ * p.rv};
  }

 private:
  PatchPtr base_;
  Mat3 rot_;
  Vec3 shift_;
};

}  // namespace

Surface Surface::transformed(const Mat3& rotation, const Vec3& shift) const {
  if (std::abs(rotation.determinant() - 1.0) > 1e-12 ||
      (rotation.transpose() * rotation - Mat3::Identity()).norm() > 1e-12) {
    throw DomainError("transformed: matrix is not a proper rotation");
  }
  std::vector<PatchPtr> moved;
  moved.reserve(patches_.size());
  for (const auto& p : patches_) moved.push_back(std::make_shared<TransformedPatch>(p, rotation, shift));
  return Surface(std::move(moved), medium_, adjacency_, ids_);
}

// ---------------------------------------------------------------------------
// Analytic patch types.

namespace {

class FlatPatch final : public PatchParametrization {
 public:
  FlatPatch(const Vec3& c, const Vec3& e1, const Vec3& e2) : c_(c), e1_(e1), e2_(e2) {}
  PatchPoint eval(double u, double v) const override { return {c_ + u * e1_ + v * e2_, e1_, e2_}; }

 private:
  Vec3 c_, e1_, e2_;
};

/// Central projection of a cube face onto a sphere, with the face coordinates
/// warped by tan(pi/4 t) so the nodes are equiangular.
class CubeSpherePatch final : public PatchParametrization {
 public:
  CubeSpherePatch(const Vec3& center, double radius, const Vec3& e0, const Vec3& e1, const Vec3& e2)
      : c_(center), radius_(radius), e0_(e0), e1_(e1), e2_(e2) {}
  PatchPoint eval(double u, double v) const override {
    double ta, da, tb, db;
    warp(u, ta, da);
    warp(v, tb, db);
    const Vec3 s = e0_ + ta * e1_ + tb * e2_;
    const double len = s.norm();
    const Vec3 p = s / len;
    const Vec3 su = da * e1_;
    const Vec3 sv = db * e2_;
    const Vec3 du = (su - p * p.dot(su)) * (radius_ / len);
    const Vec3 dv = (sv - p * p.dot(sv)) * (radius_ / len);
    return {c_ + radius_ * p, du, dv};
  }

 private:
  // Face angle (pi/4) asin(s u) / asin(s): equiangular for s -> 0, stretched
  // towards the face centre otherwise. t = tan(angle), dt = dt/du.
  static void warp(double u, double& t, double& dt) {
    constexpr double s = kSphereStretch;
    const double scale = 0.25 * pi / std::asin(s);
    const double angle = scale * std::asin(s * u);
    t = std::tan(angle);
    dt = (1.0 + t * t) * scale * s / std::sqrt(1.0 - s * s * u * u);
  }

  Vec3 c_;
  double radius_;
  Vec3 e0_, e1_, e2_;
};

/// Circular cylinder sector: axis point o + u * half_axis, angle linear in v.
class CylinderPatch final : public PatchParametrization {
 public:
  CylinderPatch(const Vec3& o, const Vec3& half_axis, const Vec3& x, const Vec3& y, double radius,
                double phi0, double phi1)
      : o_(o), a_(half_axis), x_(x), y_(y), radius_(radius), phi0_(phi0), phi1_(phi1) {}
  PatchPoint eval(double u, double v) const override {
    const double half = 0.5 * (phi1_ - phi0_);
    const double phi = phi0_ + (v + 1.0) * half;
    const Vec3 d = std::cos(phi) * x_ + std::sin(phi) * y_;
    const Vec3 t = -std::sin(phi) * x_ + std::cos(phi) * y_;
    return {o_ + u * a_ + radius_ * d, a_, radius_ * half * t};
  }

 private:
  Vec3 o_, a_, x_, y_;
  double radius_, phi0_, phi1_;
};

struct Slerp {
  Vec3 a, b;
  double omega;
  Vec3 at(double s) const {
    return (std::sin((1.0 - s) * omega) * a + std::sin(s * omega) * b) / std::sin(omega);
  }
  Vec3 ds(double s) const {
    return omega * (-std::cos((1.0 - s) * omega) * a + std::cos(s * omega) * b) / std::sin(omega);
  }
};

Slerp make_slerp(const Vec3& a, const Vec3& b) {
  return {a, b, std::acos(std::clamp(a.dot(b), -1.0, 1.0))};
}

/// Spherical quadrilateral: Coons blend of four great-circle arcs traced at
/// uniform angle, projected back onto the sphere.
class SphereCoonsPatch final : public PatchParametrization {
 public:
  SphereCoonsPatch(const Vec3& center, double radius, const Vec3& q0, const Vec3& q1, const Vec3& q2,
                   const Vec3& q3)
      : c_(center),
        radius_(radius),
        q0_(q0),
        q1_(q1),
        q2_(q2),
        q3_(q3),
        bottom_(make_slerp(q0, q1)),
        top_(make_slerp(q3, q2)),
        left_(make_slerp(q0, q3)),
        right_(make_slerp(q1, q2)) {}

  PatchPoint eval(double u, double v) const override {
    const double s = 0.5 * (u + 1.0), t = 0.5 * (v + 1.0);
    const Vec3 b = bottom_.at(s), tp = top_.at(s), l = left_.at(t), r = right_.at(t);
    const Vec3 corner = (1 - s) * (1 - t) * q0_ + s * (1 - t) * q1_ + s * t * q2_ + (1 - s) * t * q3_;
    const Vec3 sv = (1 - t) * b + t * tp + (1 - s) * l + s * r - corner;
    const Vec3 dsv = (1 - t) * bottom_.ds(s) + t * top_.ds(s) - l + r -
                     (-(1 - t) * q0_ + (1 - t) * q1_ + t * q2_ - t * q3_);
    const Vec3 dtv = -b + tp + (1 - s) * left_.ds(t) + s * right_.ds(t) -
                     (-(1 - s) * q0_ - s * q1_ + s * q2_ + (1 - s) * q3_);
    const double len = sv.norm();
    const Vec3 p = sv / len;
    const Vec3 du = 0.5 * (dsv - p * p.dot(dsv)) * (radius_ / len);
    const Vec3 dv = 0.5 * (dtv - p * p.dot(dtv)) * (radius_ / len);
    return {c_ + radius_ * p, du, dv};
  }

 private:
  // Face angle (pi/4) asin(s u) / asin(s): equiangular for s -> 0, stretched
  // towards the face centre otherwise. t = tan(angle), dt = dt/du.
  static void warp(double u, double& t, double& dt) {
    constexpr double s = kSphereStretch;
    const double scale = 0.25 * pi / std::asin(s);
    const double angle = scale * std::asin(s * u);
    t = std::tan(angle);
    dt = (1.0 + t * t) * scale * s / std::sqrt(1.0 - s * s * u * u);
  }

  Vec3 c_;
  double radius_;
  Vec3 q0_, q1_, q2_, q3_;
  Slerp bottom_, top_, left_, right_;
};

class TorusPatch final : public PatchParametrization {
 public:
  TorusPatch(double big_r, double small_r, double t0, double t1, double p0, double p1)
      : big_r_(big_r), small_r_(small_r), t0_(t0), t1_(t1), p0_(p0), p1_(p1) {}
  PatchPoint eval(double u, double v) const override {
    const double ht = 0.5 * (t1_ - t0_), hp = 0.5 * (p1_ - p0_);
    const double th = t0_ + (u + 1.0) * ht, ph = p0_ + (v + 1.0) * hp;
    const double rho = big_r_ + small_r_ * std::cos(ph);
    const Vec3 r(rho * std::cos(th), rho * std::sin(th), small_r_ * std::sin(ph));
    const Vec3 ru = ht * Vec3(-rho * std::sin(th), rho * std::cos(th), 0.0);
    const Vec3 rv = hp * small_r_ *
                    Vec3(-std::sin(ph) * std::cos(th), -std::sin(ph) * std::sin(th), std::cos(ph));
    return {r, ru, rv};
  }

 private:
  double big_r_, small_r_, t0_, t1_, p0_, p1_;
};

bool outward(const PatchParametrization& p, const Vec3& inside) {
  const PatchFrame f = make_frame(p.eval(0.0, 0.0));
  return f.normal.dot(f.point - inside) > 0.0;
}

const Vec3 kAxes[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};

void append_rounded_box(std::vector<PatchPtr>& out, const Vec3& size, double radius, const Vec3& center) {
  const Vec3 h = 0.5 * size - Vec3::Constant(radius);

  // Faces.
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (double s : {1.0, -1.0}) {
      const Vec3 fc = center + s * (0.5 * size[a]) * kAxes[a];
      Vec3 e1 = h[b] * kAxes[b], e2 = h[c] * kAxes[c];
      if (s < 0) std::swap(e1, e2);
      out.push_back(std::make_shared<FlatPatch>(fc, e1, e2));
    }
  }
  // Edge fillets, each split into two 45-degree halves.
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (double sb : {1.0, -1.0})
      for (double sc : {1.0, -1.0}) {
        const Vec3 o = center + sb * h[b] * kAxes[b] + sc * h[c] * kAxes[c];
        const Vec3 x = sb * kAxes[b], y = sc * kAxes[c];
        for (int half = 0; half < 2; ++half) {
          const double phi0 = half * pi / 4.0, phi1 = (half + 1) * pi / 4.0;
          PatchPtr p = std::make_shared<CylinderPatch>(o, h[a] * kAxes[a], x, y, radius, phi0, phi1);
          if (!outward(*p, o)) p = std::make_shared<CylinderPatch>(o, -h[a] * kAxes[a], x, y, radius, phi0, phi1);
          out.push_back(p);
        }
      }
  }
  // Corner fillets: each octant split into three quads around its centroid.
  for (double sx : {1.0, -1.0})
    for (double sy : {1.0, -1.0})
      for (double sz : {1.0, -1.0}) {
        const Vec3 cc = center + Vec3(sx * h[0], sy * h[1], sz * h[2]);
        const Vec3 d[3] = {sx * kAxes[0], sy * kAxes[1], sz * kAxes[2]};
        const Vec3 g = (d[0] + d[1] + d[2]).normalized();
        for (int i = 0; i < 3; ++i) {
          const Vec3& vi = d[i];
          const Vec3 m1 = (vi + d[(i + 1) % 3]).normalized();
          const Vec3 m2 = (vi + d[(i + 2) % 3]).normalized();
          PatchPtr p = std::make_shared<SphereCoonsPatch>(cc, radius, vi, m1, g, m2);
          if (!outward(*p, cc)) p = std::make_shared<SphereCoonsPatch>(cc, radius, vi, m2, g, m1);
          out.push_back(p);
        }
      }
}

void check_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

}  // namespace

Surface make_sphere(double diameter, const Vec3& center, const MediumParams& medium) {
  check_positive(diameter, "sphere diameter");
  const double r = 0.5 * diameter;
  const Vec3 x = Vec3::UnitX(), y = Vec3::UnitY(), z = Vec3::UnitZ();
  std::vector<PatchPtr> p;
  p.push_back(std::make_shared<CubeSpherePatch>(center, r, x, y, z));
  p.push_back(std::make_shared<CubeSpherePatch>(center, r, -x, z, y));
  p.push_back(std::make_shared<CubeSpherePatch>(center, r, y, z, x));
  p.push_back(std::make_shared<CubeSpherePatch>(center, r, -y, x, z));
  p.push_back(std::make_shared<CubeSpherePatch>(center, r, z, x, y));
  p.push_back(std::make_shared<CubeSpherePatch>(center, r, -z, y, x));
  return Surface::from_patches(std::move(p), medium);
}

Surface make_rounded_box(const Vec3& size, double radius, const Vec3& center, const MediumParams& medium) {
  check_positive(radius, "fillet radius");
  for (int a = 0; a < 3; ++a) {
    check_positive(size[a], "box size");
    if (!(radius < 0.5 * size[a])) throw DomainError("fillet radius must be below half the box size");
  }
  std::vector<PatchPtr> p;
  append_rounded_box(p, size, radius, center);
  return Surface::from_patches(std::move(p), medium);
}

Surface make_rounded_cube(double edge, double radius, const MediumParams& medium) {
  check_positive(edge, "cube edge");
  return make_rounded_box(Vec3::Constant(edge), radius, Vec3::Zero(), medium);
}

Surface make_dipole(double arm_cross, double arm_len, double gap, double radius, const MediumParams& medium) {
  check_positive(arm_cross, "arm cross-section");
  check_positive(arm_len, "arm length");
  if (!(gap > 0.0)) throw DomainError("dipole gap must be positive (arms would overlap)");
  check_positive(radius, "fillet radius");
  if (!(radius < 0.5 * arm_cross) || !(radius < 0.5 * arm_len)) {
    throw DomainError("fillet radius must be below half the arm cross-section");
  }
  const Vec3 size(arm_cross, arm_cross, arm_len);
  const double offset = 0.5 * gap + 0.5 * arm_len;
  std::vector<PatchPtr> p;
  append_rounded_box(p, size, radius, Vec3(0, 0, offset));
  append_rounded_box(p, size, radius, Vec3(0, 0, -offset));
  return Surface::from_patches(std::move(p), medium);
}

Surface make_torus(double major_radius, double minor_radius, int n_major, int n_minor,
                   const MediumParams& medium) {
  check_positive(minor_radius, "torus minor radius");
  if (!(major_radius > minor_radius)) throw DomainError("torus major radius must exceed the minor radius");
  if (n_major < 2 || n_minor < 2) throw DomainError("torus needs at least 2x2 patches");
  std::vector<PatchPtr> p;
  for (int i = 0; i < n_major; ++i)
    for (int j = 0; j < n_minor; ++j) {
      p.push_back(std::make_shared<TorusPatch>(major_radius, minor_radius, 2 * pi * i / n_major,
                                               2 * pi * (i + 1) / n_major, 2 * pi * j / n_minor,
                                               2 * pi * (j + 1) / n_minor));
    }
  return Surface::from_patches(std::move(p), medium);
}

PatchRole rounded_box_role(int patch_index) {
  const int local = patch_index % kRoundedBoxPatches;
  if (local < kRoundedBoxFaces) return PatchRole::face;
  if (local < kRoundedBoxFaces + kRoundedBoxEdgePatches) return PatchRole::edge;
  return PatchRole::corner;
}

}  // namespace cbie
