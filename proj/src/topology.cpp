#include "cbie/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "cbie/errors.hpp"

namespace cbie {

std::vector<PointType> classify_points(const Discretization& disc) {
  std::vector<PointType> out(static_cast<std::size_t>(disc.points()), PointType::A);
  const NodeSet& nodes = disc.nodes();
  for (int i = 0; i < disc.points(); ++i) {
    const int on = (nodes.is_endpoint(disc.iu_of(i)) ? 1 : 0) + (nodes.is_endpoint(disc.iv_of(i)) ? 1 : 0);
    out[i] = on == 0 ? PointType::A : (on == 1 ? PointType::B : PointType::C);
  }
  return out;
}

namespace {

struct CellHash {
  std::size_t operator()(const std::array<long long, 3>& k) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (long long c : k) h = (h ^ static_cast<std::size_t>(c)) * 1099511628211ull;
    return h;
  }
};

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

std::string describe_point(const Discretization& disc, int point) {
  std::ostringstream s;
  const int n = disc.n();
  const int iu = disc.iu_of(point), iv = disc.iv_of(point);
  s << "patch " << disc.surface().id(disc.patch_of(point));
  std::vector<int> edges;
  if (iv == n - 1) edges.push_back(0);
  if (iu == 0) edges.push_back(1);
  if (iv == 0) edges.push_back(2);
  if (iu == n - 1) edges.push_back(3);
  for (std::size_t e = 0; e < edges.size(); ++e) s << (e == 0 ? " edge " : "/") << edges[e];
  s << " node (" << iu << ", " << iv << ")";
  return s.str();
}

}  // namespace

std::vector<CoincidenceGroup> build_coincidence(const Discretization& disc) {
  return build_coincidence(disc, 1e-9 * disc.surface().diameter());
}

std::vector<CoincidenceGroup> build_coincidence(const Discretization& disc, double tol, double angle_tol) {
  if (!(tol > 0.0)) throw DomainError("coincidence tolerance must be positive");
  const std::vector<PointType> types = classify_points(disc);
  const int np = disc.points();
  std::vector<int> parent(static_cast<std::size_t>(np));
  std::iota(parent.begin(), parent.end(), 0);

  const double cell = 4.0 * tol;
  auto key_of = [&](const Vec3& r) {
    return std::array<long long, 3>{static_cast<long long>(std::floor(r[0] / cell)),
                                    static_cast<long long>(std::floor(r[1] / cell)),
                                    static_cast<long long>(std::floor(r[2] / cell))};
  };
  std::unordered_map<std::array<long long, 3>, std::vector<int>, CellHash> buckets;
  for (int i = 0; i < np; ++i)
    if (types[i] != PointType::A) buckets[key_of(disc.position(i))].push_back(i);

  for (int i = 0; i < np; ++i) {
    if (types[i] == PointType::A) continue;
    const auto k = key_of(disc.position(i));
    for (long long dx = -1; dx <= 1; ++dx)
      for (long long dy = -1; dy <= 1; ++dy)
        for (long long dz = -1; dz <= 1; ++dz) {
          auto it = buckets.find({k[0] + dx, k[1] + dy, k[2] + dz});
          if (it == buckets.end()) continue;
          for (int j : it->second) {
            if (j <= i || (disc.position(i) - disc.position(j)).norm() > tol) continue;
            const int a = find_root(parent, i), b = find_root(parent, j);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
          }
        }
  }

  std::vector<int> slot(static_cast<std::size_t>(np), -1);
  std::vector<CoincidenceGroup> groups;
  for (int i = 0; i < np; ++i) {
    const int r = find_root(parent, i);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(groups.size());
      groups.push_back({});
      groups.back().representative = disc.position(i);
    }
    CoincidenceGroup& g = groups[slot[r]];
    g.members.push_back(i);
    g.type = std::max(g.type, types[i]);
  }
  for (const CoincidenceGroup& g : groups) {
    if (g.type != PointType::A && g.multiplicity() < 2) {
      throw ConformityError("non-conforming surface: " + describe_point(disc, g.owner()) +
                            " has no coinciding point on a neighbouring patch");
    }
    const Vec3& n0 = disc.frame(g.owner()).normal;
    for (int m : g.members) {
      const double c = std::clamp(n0.dot(disc.frame(m).normal), -1.0, 1.0);
      if (std::acos(c) > angle_tol) {
        throw ConformityError("surface is not tangent-plane continuous at " + describe_point(disc, m) +
                              " (normal angle " + std::to_string(std::acos(c)) + " rad)");
      }
    }
  }
  return groups;
}

std::vector<PointClass> point_classes(const Discretization& disc, const std::vector<CoincidenceGroup>& groups) {
  const std::vector<PointType> types = classify_points(disc);
  std::vector<PointClass> out(static_cast<std::size_t>(disc.points()));
  for (const CoincidenceGroup& g : groups)
    for (int m : g.members) out[m] = {types[m], g.multiplicity()};
  return out;
}

UniquenessMap::UniquenessMap(const Discretization& disc, std::vector<CoincidenceGroup> group_list)
    : disc_(&disc), n_full_(disc.density_size()), groups_(std::move(group_list)) {
  const int np = disc.points();
  group_of_.assign(static_cast<std::size_t>(np), -1);
  pblock_.resize(static_cast<std::size_t>(np));
  qblock_.resize(static_cast<std::size_t>(np));
  qweight_.resize(static_cast<std::size_t>(np));
  for (int g = 0; g < groups(); ++g) {
    const CoincidenceGroup& grp = groups_[g];
    const Mat32 a0 = disc.frame(grp.owner()).basis();
    const double w = 1.0 / grp.multiplicity();
    for (int m : grp.members) {
      if (group_of_[m] >= 0) throw DomainError("grid point belongs to more than one coincidence group");
      group_of_[m] = g;
      const PatchFrame& f = disc.frame(m);
      Mat2 b = m == grp.owner() ? Mat2::Identity() : Mat2(f.inverse_metric * (f.basis().transpose() * a0));
      for (int r = 0; r < 4; ++r) {
        const double snapped = std::round(b(r));
        if (std::abs(snapped) <= 1.0 && std::abs(b(r) - snapped) < 1e-12) b(r) = snapped;
      }
      const double det = b.determinant();
      if (!(std::abs(det) > 1e-10)) {
        throw GeometryError("degenerate frame conversion at grid point " + std::to_string(m));
      }
      pblock_[m] = b;
      qblock_[m] = w * b.inverse();
      qweight_[m] = w;
    }
  }
  for (int i = 0; i < np; ++i)
    if (group_of_[i] < 0) throw DomainError("grid point " + std::to_string(i) + " has no coincidence group");
  uslot_.resize(static_cast<std::size_t>(2 * groups()));
  std::iota(uslot_.begin(), uslot_.end(), 0);
}

UniquenessMap UniquenessMap::identity(const Discretization& disc) {
  UniquenessMap map;
  map.disc_ = &disc;
  map.n_full_ = disc.density_size();
  const int np = disc.points();
  map.groups_.resize(static_cast<std::size_t>(np));
  map.group_of_.resize(static_cast<std::size_t>(np));
  map.pblock_.assign(static_cast<std::size_t>(np), Mat2::Identity());
  map.qblock_.assign(static_cast<std::size_t>(np), Mat2::Identity());
  map.qweight_.assign(static_cast<std::size_t>(np), 1.0);
  const std::vector<PointType> types = classify_points(disc);
  for (int i = 0; i < np; ++i) {
    map.groups_[i].members = {i};
    map.groups_[i].representative = disc.position(i);
    map.groups_[i].type = types[i];
    map.group_of_[i] = i;
  }
  map.uslot_.resize(static_cast<std::size_t>(2 * np));
  for (int i = 0; i < np; ++i) {
    map.uslot_[2 * i] = disc.u_slot(i);
    map.uslot_[2 * i + 1] = disc.v_slot(i);
  }
  return map;
}

VectorXc UniquenessMap::expand(const VectorXc& unique) const {
  if (unique.size() != n_unique()) throw DomainError("expand: unique vector has the wrong size");
  VectorXc full(n_full_);
  for (int i = 0; i < static_cast<int>(group_of_.size()); ++i) {
    const int g = group_of_[i];
    const Mat2& b = pblock_[i];
    const Complex xu = unique[uslot_[2 * g]], xv = unique[uslot_[2 * g + 1]];
    full[disc_->u_slot(i)] = b(0, 0) * xu + b(0, 1) * xv;
    full[disc_->v_slot(i)] = b(1, 0) * xu + b(1, 1) * xv;
  }
  return full;
}

VectorXc UniquenessMap::compress(const VectorXc& full) const {
  if (full.size() != n_full_) throw DomainError("compress: density vector has the wrong size");
  VectorXc unique = VectorXc::Zero(n_unique());
  for (int i = 0; i < static_cast<int>(group_of_.size()); ++i) {
    const int g = group_of_[i];
    const Mat2& q = qblock_[i];
    const Complex ju = full[disc_->u_slot(i)], jv = full[disc_->v_slot(i)];
    unique[uslot_[2 * g]] += q(0, 0) * ju + q(0, 1) * jv;
    unique[uslot_[2 * g + 1]] += q(1, 0) * ju + q(1, 1) * jv;
  }
  return unique;
}

VectorXc UniquenessMap::expand_scalar(const VectorXc& per_group) const {
  if (per_group.size() != groups()) throw DomainError("expand_scalar: wrong size");
  VectorXc out(static_cast<Eigen::Index>(group_of_.size()));
  for (std::size_t i = 0; i < group_of_.size(); ++i) out[i] = per_group[group_of_[i]];
  return out;
}

VectorXc UniquenessMap::compress_scalar(const VectorXc& per_point) const {
  if (per_point.size() != static_cast<Eigen::Index>(group_of_.size())) {
    throw DomainError("compress_scalar: wrong size");
  }
  VectorXc out = VectorXc::Zero(groups());
  for (std::size_t i = 0; i < group_of_.size(); ++i) out[group_of_[i]] += qweight_[i] * per_point[i];
  return out;
}

Eigen::SparseMatrix<double> UniquenessMap::projection_matrix() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * group_of_.size());
  for (int i = 0; i < static_cast<int>(group_of_.size()); ++i) {
    const int g = group_of_[i];
    const int rows[2] = {disc_->u_slot(i), disc_->v_slot(i)};
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        if (pblock_[i](r, c) != 0.0) t.emplace_back(rows[r], uslot_[2 * g + c], pblock_[i](r, c));
  }
  Eigen::SparseMatrix<double> p(n_full_, n_unique());
  p.setFromTriplets(t.begin(), t.end());
  return p;
}

Eigen::SparseMatrix<double> UniquenessMap::compression_matrix() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(4 * group_of_.size());
  for (int i = 0; i < static_cast<int>(group_of_.size()); ++i) {
    const int g = group_of_[i];
    const int cols[2] = {disc_->u_slot(i), disc_->v_slot(i)};
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        if (qblock_[i](r, c) != 0.0) t.emplace_back(uslot_[2 * g + r], cols[c], qblock_[i](r, c));
  }
  Eigen::SparseMatrix<double> q(n_unique(), n_full_);
  q.setFromTriplets(t.begin(), t.end());
  return q;
}

namespace {

bool on_edge(const Discretization& disc, int point, int edge) {
  const int n = disc.n();
  switch (edge) {
    case 0: return disc.iv_of(point) == n - 1;
    case 1: return disc.iu_of(point) == 0;
    case 2: return disc.iv_of(point) == 0;
    default: return disc.iu_of(point) == n - 1;
  }
}

}  // namespace

double edge_normal_jump(const Discretization& disc, const UniquenessMap& map, const VectorXc& density) {
  if (density.size() != disc.density_size()) throw DomainError("edge_normal_jump: wrong density size");
  if (disc.kind() != GridKind::closed) return 0.0;
  const Surface& s = disc.surface();
  double worst = 0.0;
  auto cart = [&](int i) {
    const PatchFrame& f = disc.frame(i);
    return (f.a_u.cast<Complex>() * density[disc.u_slot(i)] + f.a_v.cast<Complex>() * density[disc.v_slot(i)]).eval();
  };
  for (const CoincidenceGroup& g : map.group_list()) {
    if (g.multiplicity() < 2) continue;
    for (int a : g.members)
      for (int b : g.members) {
        const int pa = disc.patch_of(a), pb = disc.patch_of(b);
        if (a == b || pa == pb) continue;
        for (int e = 0; e < 4; ++e) {
          if (!on_edge(disc, a, e)) continue;
          const auto nb = s.neighbor({pa, e});
          if (!nb || nb->first.patch != pb || !on_edge(disc, b, nb->first.edge)) continue;
          const PatchFrame& f = disc.frame(a);
          const Vec3 t = (e == 0 || e == 2) ? f.a_u : f.a_v;
          const Vec3 en = t.cross(f.normal).normalized();
          const Complex jump = (cart(a) - cart(b)).dot(en.cast<Complex>());
          worst = std::max(worst, std::abs(jump));
        }
      }
  }
  return worst;
}

}  // namespace cbie
