#include "cbie/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cbie/errors.hpp"

namespace cbie {

Complex green(const Vec3& r, const Vec3& rp, double k) {
  const double d = (r - rp).norm();
  if (!(d > 0.0)) throw DomainError("green: coincident source and target");
  return std::polar(1.0 / (4.0 * pi * d), k * d);
}

CVec3 green_gradient(const Vec3& r, const Vec3& rp, double k) {
  const Vec3 x = r - rp;
  const double d = x.norm();
  if (!(d > 0.0)) throw DomainError("green_gradient: coincident source and target");
  const Complex f = Complex(-1.0, k * d) * std::polar(1.0 / (4.0 * pi * d * d * d), k * d);
  return x.cast<Complex>() * f;
}

VectorXc surface_divergence(const Discretization& disc, const VectorXc& density) {
  if (density.size() != disc.density_size()) throw DomainError("surface_divergence: wrong density size");
  const int n = disc.n();
  const Eigen::MatrixXcd d = disc.nodes().diff_matrix().cast<Complex>();
  VectorXc out(disc.points());
  Eigen::MatrixXcd fu(n, n), fv(n, n);
  for (int p = 0; p < disc.patches(); ++p) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const int idx = disc.index(p, i, j);
        const double g = disc.frame(idx).jacobian;
        fu(i, j) = g * density[disc.u_slot(idx)];
        fv(i, j) = g * density[disc.v_slot(idx)];
      }
    const Eigen::MatrixXcd div = d * fu + fv * d.transpose();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const int idx = disc.index(p, i, j);
        out[idx] = div(i, j) / disc.frame(idx).jacobian;
      }
  }
  return out;
}

std::vector<CVec3> surface_gradient(const Discretization& disc, const VectorXc& values) {
  if (values.size() != disc.points()) throw DomainError("surface_gradient: wrong sample count");
  const int n = disc.n();
  const Eigen::MatrixXcd d = disc.nodes().diff_matrix().cast<Complex>();
  std::vector<CVec3> out(static_cast<std::size_t>(disc.points()));
  Eigen::MatrixXcd f(n, n);
  for (int p = 0; p < disc.patches(); ++p) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) f(i, j) = values[disc.index(p, i, j)];
    const Eigen::MatrixXcd fu = d * f, fv = f * d.transpose();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const int idx = disc.index(p, i, j);
        const PatchFrame& fr = disc.frame(idx);
        const Complex cu = fr.inverse_metric(0, 0) * fu(i, j) + fr.inverse_metric(0, 1) * fv(i, j);
        const Complex cv = fr.inverse_metric(1, 0) * fu(i, j) + fr.inverse_metric(1, 1) * fv(i, j);
        out[idx] = fr.a_u.cast<Complex>() * cu + fr.a_v.cast<Complex>() * cv;
      }
  }
  return out;
}

void OperatorConfig::validate() const {
  if (!(near_threshold > 0.0 && near_threshold < 1.0)) throw DomainError("near_threshold must lie in (0, 1)");
  if (!(refinement_factor >= 2.0)) throw DomainError("refinement_factor must be at least 2");
  if (max_levels < 1) throw DomainError("max_levels must be at least 1");
  if (!(tolerance > 0.0)) throw DomainError("quadrature tolerance must be positive");
  if (order < 0 || order == 1) throw DomainError("quadrature order must be 0 (automatic) or at least 2");
  if (!(kappa > 0.0) || !(max_panel > 0.0 && max_panel <= 1.0)) throw DomainError("invalid panel parameters");
}

TargetSet make_targets(const Discretization& disc, const UniquenessMap& map) {
  TargetSet t;
  t.points.reserve(static_cast<std::size_t>(map.groups()));
  for (const CoincidenceGroup& g : map.group_list()) {
    t.points.push_back(disc.position(g.owner()));
    t.normals.push_back(disc.frame(g.owner()).normal);
    t.members.push_back(g.members);
  }
  return t;
}

namespace {

int kernel_count(KernelKind kind) { return kind == KernelKind::single_layer ? 1 : 6; }

double chebyshev_t(int m, double x) {
  double a = 1.0, b = x;
  if (m == 0) return a;
  for (int i = 1; i < m; ++i) {
    const double c = 2.0 * x * b - a;
    a = b;
    b = c;
  }
  return b;
}

}  // namespace

std::vector<Complex> local_weights(const Discretization& disc, int patch, const Vec3& target,
                                   const Vec3& target_normal, const Vec2& apex, double distance,
                                   KernelKind kind, double k, const OperatorConfig& config, int* level_used) {
  const PatchParametrization& surf = disc.surface().patch(patch);
  const NodeSet& nodes = disc.nodes();
  const int n = disc.n();
  const int nk = kernel_count(kind);
  LocalRuleParams params;
  params.order = config.order > 0 ? config.order : std::max(n, 8);
  params.kappa = config.kappa;
  params.max_len = config.max_panel;

  struct Eval {
    LocalRule rule;
    std::vector<Complex> c;  // nk values per node
    Eigen::VectorXcd check;
    double scale = 0.0;
  };
  auto evaluate = [&](int level) {
    Eval e;
    e.rule = polar_rule(surf, apex, distance, params, level, config.refinement_factor);
    const int q = e.rule.size();
    e.c.resize(static_cast<std::size_t>(q) * nk);
    e.check = Eigen::VectorXcd::Zero(nk);
    for (int i = 0; i < q; ++i) {
      const Vec2& uv = e.rule.uv[i];
      const PatchPoint pp = surf.eval(uv[0], uv[1]);
      const double w = e.rule.w[i] * pp.ru.cross(pp.rv).norm();
      const Vec3 x = target - pp.r;
      const double r = x.norm();
      const double rho = 1.0 + chebyshev_t(n - 1, uv[0]) * chebyshev_t(n - 1, uv[1]);
      Complex* ci = &e.c[static_cast<std::size_t>(i) * nk];
      if (kind == KernelKind::single_layer) {
        ci[0] = w * std::polar(1.0 / (4.0 * pi * r), k * r);
      } else {
        const Complex f = w * Complex(-1.0, k * r) * std::polar(1.0 / (4.0 * pi * r * r * r), k * r);
        const double nx = target_normal.dot(x);
        const Vec3* basis[2] = {&pp.ru, &pp.rv};
        for (int a = 0; a < 2; ++a) {
          const Vec3& av = *basis[a];
          const double na = target_normal.dot(av);
          for (int d = 0; d < 3; ++d) ci[3 * a + d] = f * (x[d] * na - av[d] * nx);
        }
      }
      for (int kk = 0; kk < nk; ++kk) {
        e.check[kk] += ci[kk] * rho;
        e.scale += std::sqrt(std::norm(ci[kk])) * std::abs(rho);
      }
    }
    return e;
  };

  // Level l is accepted once it agrees with level l - 1 to sqrt(tolerance):
  // halving Gauss panels at least squares the error of a converging rule.
  Eval coarse = evaluate(0);
  int level = 1;
  for (;; ++level) {
    if (level > config.max_levels) {
      std::ostringstream msg;
      msg << "local quadrature did not converge for patch " << disc.surface().id(patch) << " and target ("
          << target[0] << ", " << target[1] << ", " << target[2] << ") after " << config.max_levels
          << " refinement levels";
      throw ConvergenceError(msg.str());
    }
    Eval fine = evaluate(level);
    const double diff = (fine.check - coarse.check).norm();
    coarse = std::move(fine);
    if (diff <= std::sqrt(config.tolerance) * std::max(coarse.scale, 1e-300)) break;
  }
  if (level_used) *level_used = level;

  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const int q = coarse.rule.size();
  RowMat lu(q, n), lv(q, n);
  for (int i = 0; i < q; ++i) {
    nodes.cardinals(coarse.rule.uv[i][0], lu.row(i).data());
    nodes.cardinals(coarse.rule.uv[i][1], lv.row(i).data());
  }
  // Columns [2 n kk, 2 n kk + n) hold Re c * Lv, the next n Im c * Lv.
  RowMat scaled(q, 2 * n * nk);
  for (int i = 0; i < q; ++i) {
    const Complex* ci = &coarse.c[static_cast<std::size_t>(i) * nk];
    double* row = scaled.row(i).data();
    const double* l = lv.row(i).data();
    for (int kk = 0; kk < nk; ++kk) {
      const double re = ci[kk].real(), im = ci[kk].imag();
      double* dst = row + 2 * n * kk;
      for (int j = 0; j < n; ++j) {
        dst[j] = re * l[j];
        dst[n + j] = im * l[j];
      }
    }
  }
  const Eigen::MatrixXd w = lu.transpose() * scaled;
  std::vector<Complex> out(static_cast<std::size_t>(nk) * n * n);
  for (int kk = 0; kk < nk; ++kk) {
    Complex* dst = &out[static_cast<std::size_t>(kk) * n * n];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) dst[a * n + b] = Complex(w(a, 2 * n * kk + b), w(a, 2 * n * kk + n + b));
  }
  return out;
}

NearField::NearField(const Discretization& disc, const TargetSet& targets, KernelKind kind, double k,
                     const OperatorConfig& config)
    : kernels_(kernel_count(kind)), per_patch_(disc.per_patch()) {
  config.validate();
  const int nt = targets.size();
  const int m = disc.patches();
  std::vector<std::vector<Block>> per_target(static_cast<std::size_t>(nt));
#pragma omp parallel for schedule(dynamic, 16)
  for (int t = 0; t < nt; ++t) {
    const Vec3& x = targets.points[t];
    std::vector<int> self(static_cast<std::size_t>(m), -1);
    for (int member : targets.members[t]) {
      const int p = disc.patch_of(member);
      if (self[p] < 0) self[p] = member;
    }
    for (int p = 0; p < m; ++p) {
      if (self[p] >= 0) {
        per_target[t].push_back({t, p, disc.uv(self[p]), 0.0, 0});
        continue;
      }
      const double limit = config.near_threshold * disc.patch_diameter(p);
      if ((x - disc.patch_center(p)).norm() - disc.patch_radius(p) > limit) continue;
      const ClosestPoint cp = closest_point(disc.surface().patch(p), x);
      if (cp.distance < limit) per_target[t].push_back({t, p, cp.uv, cp.distance, 0});
    }
  }
  begin_.assign(static_cast<std::size_t>(nt) + 1, 0);
  for (int t = 0; t < nt; ++t) {
    begin_[t + 1] = begin_[t] + static_cast<int>(per_target[t].size());
    blocks_.insert(blocks_.end(), per_target[t].begin(), per_target[t].end());
  }
  const std::size_t stride = static_cast<std::size_t>(kernels_) * per_patch_;
  weights_.resize(blocks_.size() * stride);
  const int nb = static_cast<int>(blocks_.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (int b = 0; b < nb; ++b) {
    try {
      Block& blk = blocks_[b];
      const std::vector<Complex> w =
          local_weights(disc, blk.patch, targets.points[blk.target], targets.normals[blk.target], blk.apex,
                        blk.distance, kind, k, config, &blk.level);
      std::copy(w.begin(), w.end(), weights_.begin() + static_cast<std::ptrdiff_t>(b * stride));
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

int NearField::find(int target, int patch) const {
  for (int b = begin_[target]; b < begin_[target + 1]; ++b)
    if (blocks_[b].patch == patch) return b;
  return -1;
}

SingularCorrection precompute_singular(const Discretization& disc, int patch, double k, const OperatorConfig& config) {
  config.validate();
  SingularCorrection sc;
  sc.patch = patch;
  sc.n = disc.n();
  sc.k = k;
  for (int i = 0; i < disc.per_patch(); ++i) {
    const int idx = patch * disc.per_patch() + i;
    sc.weights.push_back(local_weights(disc, patch, disc.position(idx), disc.frame(idx).normal, disc.uv(idx), 0.0,
                                       KernelKind::single_layer, k, config));
  }
  return sc;
}

SingleLayerOperator::SingleLayerOperator(const Discretization& disc, const TargetSet& targets, double k,
                                         const OperatorConfig& config)
    : disc_(&disc), targets_(&targets), k_(k), near_(disc, targets, KernelKind::single_layer, k, config) {
  const std::size_t bytes = static_cast<std::size_t>(targets.size()) * disc.points() * sizeof(Complex);
  if (bytes > config.dense_limit_bytes) return;
  const int nt = targets.size(), np = disc.points(), nn = disc.per_patch();
  dense_.resize(nt, np);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < np; ++j) {
    const Vec3& y = disc.position(j);
    const double w = disc.weight(j);
    for (int t = 0; t < nt; ++t) {
      const double r = (targets.points[t] - y).norm();
      dense_(t, j) = r > 0.0 ? std::polar(w / (4.0 * pi * r), k * r) : Complex(0.0);
    }
  }
  for (int b = 0; b < static_cast<int>(near_.blocks().size()); ++b) {
    const auto& blk = near_.blocks()[b];
    const Complex* w = near_.weights(b, 0);
    for (int i = 0; i < nn; ++i) dense_(blk.target, blk.patch * nn + i) = w[i];
  }
}

MatrixXc SingleLayerOperator::apply(const MatrixXc& sources) const {
  if (sources.rows() != disc_->points()) throw DomainError("single layer: source rows must equal grid points");
  if (is_dense()) return dense_ * sources;
  const int nt = targets_->size(), m = disc_->patches(), nn = disc_->per_patch();
  const int nc = static_cast<int>(sources.cols());
  MatrixXc out = MatrixXc::Zero(nt, nc);
#pragma omp parallel for schedule(dynamic, 8)
  for (int t = 0; t < nt; ++t) {
    const Vec3& x = targets_->points[t];
    const auto [b0, b1] = near_.target_range(t);
    std::vector<int> near_block(static_cast<std::size_t>(m), -1);
    for (int b = b0; b < b1; ++b) near_block[near_.blocks()[b].patch] = b;
    for (int p = 0; p < m; ++p) {
      const int b = near_block[p];
      if (b >= 0) {
        const Complex* w = near_.weights(b, 0);
        for (int i = 0; i < nn; ++i)
          for (int c = 0; c < nc; ++c) out(t, c) += w[i] * sources(p * nn + i, c);
        continue;
      }
      for (int i = 0; i < nn; ++i) {
        const int j = p * nn + i;
        const double r = (x - disc_->position(j)).norm();
        const Complex g = std::polar(disc_->weight(j) / (4.0 * pi * r), k_ * r);
        for (int c = 0; c < nc; ++c) out(t, c) += g * sources(j, c);
      }
    }
  }
  return out;
}

MagneticOperator::MagneticOperator(const Discretization& disc, const TargetSet& targets, double k,
                                   const OperatorConfig& config)
    : disc_(&disc), targets_(&targets), k_(k), near_(disc, targets, KernelKind::magnetic, k, config) {}

std::vector<CVec3> MagneticOperator::apply(const VectorXc& density) const {
  if (density.size() != disc_->density_size()) throw DomainError("magnetic operator: wrong density size");
  const int nt = targets_->size(), m = disc_->patches(), nn = disc_->per_patch();
  std::vector<CVec3> jw(static_cast<std::size_t>(disc_->points()));
  for (int j = 0; j < disc_->points(); ++j) {
    const PatchFrame& f = disc_->frame(j);
    jw[j] = (f.a_u.cast<Complex>() * density[disc_->u_slot(j)] + f.a_v.cast<Complex>() * density[disc_->v_slot(j)]) *
            disc_->weight(j);
  }
  std::vector<CVec3> out(static_cast<std::size_t>(nt), CVec3::Zero());
#pragma omp parallel for schedule(dynamic, 8)
  for (int t = 0; t < nt; ++t) {
    const Vec3& x = targets_->points[t];
    const Vec3& nt_ = targets_->normals[t];
    const auto [b0, b1] = near_.target_range(t);
    std::vector<int> near_block(static_cast<std::size_t>(m), -1);
    for (int b = b0; b < b1; ++b) near_block[near_.blocks()[b].patch] = b;
    CVec3 acc = CVec3::Zero();
    for (int p = 0; p < m; ++p) {
      const int b = near_block[p];
      if (b >= 0) {
        for (int a = 0; a < 2; ++a)
          for (int d = 0; d < 3; ++d) {
            const Complex* w = near_.weights(b, 3 * a + d);
            Complex s = 0.0;
            for (int i = 0; i < nn; ++i) {
              const int j = p * nn + i;
              s += w[i] * density[a == 0 ? disc_->u_slot(j) : disc_->v_slot(j)];
            }
            acc[d] += s;
          }
        continue;
      }
      for (int i = 0; i < nn; ++i) {
        const int j = p * nn + i;
        const Vec3 r = x - disc_->position(j);
        const double d = r.norm();
        const Complex f = Complex(-1.0, k_ * d) * std::polar(1.0 / (4.0 * pi * d * d * d), k_ * d);
        const CVec3& jj = jw[j];
        const Complex nj = nt_[0] * jj[0] + nt_[1] * jj[1] + nt_[2] * jj[2];
        const double nr = nt_.dot(r);
        for (int c = 0; c < 3; ++c) acc[c] += f * (r[c] * nj - jj[c] * nr);
      }
    }
    out[t] = acc;
  }
  return out;
}

}  // namespace cbie
