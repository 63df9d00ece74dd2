// Acceptance runs: one PASS/FAIL line per criterion. Arguments select a
// subset (e.g. "1 4 8"); no arguments runs all eight.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>

#include <Eigen/Dense>

#include "cbie/gmres.hpp"
#include "cbie/mie.hpp"
#include "cbie/physics.hpp"
#include "cbie/topology.hpp"

using namespace cbie;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [fails]");
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

PlaneWave sphere_wave(const Surface& s) {
  PlaneWave pw;
  pw.medium = s.medium();
  return pw;
}

/// Sphere problems and solutions shared by criteria 1, 2, 3 and 5.
class SphereStudy {
 public:
  SphereStudy() : surface_(make_sphere(2.0)), mie_(2.0, sphere_wave(surface_)) {}

  const Surface& surface() const { return surface_; }
  const MieSeries& mie() const { return mie_; }

  const Problem& problem(Formulation f, int n) {
    auto& slot = problems_[{f, n}];
    if (!slot) {
      const auto t0 = Clock::now();
      slot = std::make_unique<Problem>(surface_, f, n, OperatorConfig{});
      std::printf("  setup %s N=%d: %.1f s\n", to_string(f).c_str(), n, since(t0));
      std::fflush(stdout);
    }
    return *slot;
  }

  VectorXc exact(const Problem& p) const {
    const Discretization& d = p.discretization();
    std::vector<CVec3> j(static_cast<std::size_t>(d.points()));
    for (int i = 0; i < d.points(); ++i) j[i] = mie_.surface_current(d.position(i));
    return p.project(j);
  }

  double forward_error(Formulation f, int n) {
    const Problem& p = problem(f, n);
    const VectorXc rhs = assemble_rhs(p, sphere_wave(surface_));
    return (p.op().apply(exact(p)) - rhs).norm() / rhs.norm();
  }

  /// Unrestarted GMRES at tol 1e-6.
  const SolveReport& solve(Formulation f, int n) {
    auto it = solutions_.find({f, n});
    if (it != solutions_.end()) return it->second;
    const Problem& p = problem(f, n);
    GmresOptions o;
    o.tol = 1e-6;
    o.max_iter = 5000;
    o.restart = o.max_iter;
    const auto t0 = Clock::now();
    SolveReport r = gmres([&](const VectorXc& x) { return p.op().apply(x); }, assemble_rhs(p, sphere_wave(surface_)), o);
    std::printf("  solve %s N=%d: %d iterations, %.1f s\n", to_string(f).c_str(), n, r.iterations, since(t0));
    std::fflush(stdout);
    return solutions_.emplace(std::make_pair(f, n), std::move(r)).first->second;
  }

  void release(Formulation f, int n) { problems_.erase({f, n}); }

 private:
  Surface surface_;
  MieSeries mie_;
  std::map<std::pair<Formulation, int>, std::unique_ptr<Problem>> problems_;
  std::map<std::pair<Formulation, int>, SolveReport> solutions_;
};

Verdict criterion1(SphereStudy& s) {
  Verdict v;
  std::map<int, double> e;
  for (int n : {10, 12, 14, 16}) {
    const auto t0 = Clock::now();
    e[n] = s.forward_error(Formulation::efie_closed, n);
    v.check(since(t0) < 600.0, "N=" + std::to_string(n) + " error " + fmt("%.3e", e[n]) + " in " + fmt("%.0f s", since(t0)));
  }
  v.check(e[10] >= 3.4e-4 && e[10] <= 3.4e-2, "N=10 within [3.4e-4, 3.4e-2]");
  v.check(e[14] >= 1.06e-6 && e[14] <= 1.06e-4, "N=14 within [1.06e-6, 1.06e-4]");
  v.check(e[12] < e[10] && e[14] < e[12] && e[16] < e[14], "monotone");
  v.check(e[10] / e[16] >= 1e3, "N=10 to 16 drop " + fmt("%.2e", e[10] / e[16]));
  return v;
}

Verdict criterion2(SphereStudy& s) {
  Verdict v;
  const SolveReport& c = s.solve(Formulation::efie_closed, 14);
  const SolveReport& o = s.solve(Formulation::efie_open, 14);
  s.release(Formulation::efie_open, 14);
  v.check(c.converged && o.converged, "closed " + std::to_string(c.iterations) + " and open " +
                                          std::to_string(o.iterations) + " iterations, both converged");
  v.check(5 * c.iterations <= o.iterations, "ratio " + fmt("%.1f", double(o.iterations) / std::max(1, c.iterations)));
  return v;
}

Verdict criterion3(SphereStudy& s) {
  Verdict v;
  {
    const Problem& p = s.problem(Formulation::efie_closed, 14);
    const SolveReport& r = s.solve(Formulation::efie_closed, 14);
    const VectorXc x = s.exact(p);
    const double err = (r.solution - x).norm() / x.norm();
    v.check(r.converged && err <= 1e-4, "N=14 solution error " + fmt("%.3e", err));
  }
  s.release(Formulation::efie_closed, 14);
  const Problem& p = s.problem(Formulation::efie_closed, 16);
  const SolveReport& r = s.solve(Formulation::efie_closed, 16);
  const FarFieldPattern f = far_field_cut(p.discretization(), p.map().expand(r.solution), 0.0, 0.0, 180.0, 181);
  const std::vector<double> rcs = f.rcs();
  double num = 0.0, den = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const double ref = s.mie().rcs(f.direction(i));
    num += (rcs[i] - ref) * (rcs[i] - ref);
    den += ref * ref;
  }
  const double rel = std::sqrt(num / den);
  v.check(r.converged && rel <= 1e-2, "N=16 E-plane RCS relative L2 " + fmt("%.3e", rel));
  return v;
}

Verdict criterion4() {
  Verdict v;
  const Surface s = make_sphere(2.0);
  bool counts = true;
  for (int n = 4; n <= 24; ++n) {
    Discretization d(s, GridKind::closed, n);
    const UniquenessMap map(d, build_coincidence(d));
    counts = counts && map.groups() == 6 * n * n - 12 * n + 8;
  }
  v.check(counts, "unique points 6N^2-12N+8 for N=4..24");

  double qp = 0.0, rows = 0.0, jump = 0.0;
  std::mt19937 rng(17);
  std::normal_distribution<double> nd;
  for (const Surface& surf : {make_sphere(2.0), make_rounded_cube(1.0, 0.01), make_torus(1.0, 0.3, 4, 4)}) {
    Discretization d(surf, GridKind::closed, 8);
    const UniquenessMap map(d, build_coincidence(d));
    const Eigen::SparseMatrix<double> p = map.projection_matrix(), q = map.compression_matrix();
    const Eigen::MatrixXd id = Eigen::MatrixXd(q * p) - Eigen::MatrixXd::Identity(map.n_unique(), map.n_unique());
    qp = std::max(qp, id.cwiseAbs().maxCoeff());
    for (int g = 0; g < map.groups(); ++g) {
      double sum = 0.0;
      for (int m : map.group_list()[g].members) sum += map.compression_weight(m);
      rows = std::max(rows, std::abs(sum - 1.0));
    }
    VectorXc x(map.n_unique());
    for (int i = 0; i < x.size(); ++i) x[i] = Complex(nd(rng), nd(rng));
    jump = std::max(jump, edge_normal_jump(d, map, map.expand(x)) / x.cwiseAbs().maxCoeff());
  }
  v.check(qp <= 1e-13, "QP - I " + fmt("%.1e", qp));
  v.check(rows <= 1e-14, "Q row sums " + fmt("%.1e", rows));
  v.check(jump < 1e-12, "edge normal jump " + fmt("%.1e", jump));
  return v;
}

Verdict criterion5(SphereStudy& s) {
  Verdict v;
  const Problem& p = s.problem(Formulation::efie_closed, 16);
  const auto& op = dynamic_cast<const EfieOperator&>(p.op());
  const MatrixXc y = op.single_layer().apply(MatrixXc::Ones(p.discretization().points(), 1));
  const double k = 2.0 * pi;
  const Complex exact = (std::exp(Complex(0.0, 2.0 * k)) - 1.0) / Complex(0.0, 2.0 * k);
  double worst = 0.0;
  for (int i = 0; i < y.rows(); ++i) worst = std::max(worst, std::abs(y(i, 0) - exact));
  v.check(worst <= 1e-8, "sphere single layer N=16 error " + fmt("%.2e", worst));

  double cc = 0.0, diff = 0.0;
  for (int n = 4; n <= 24; ++n) {
    const std::vector<double> x = cc_nodes(n), w = cc_weights(n);
    for (int deg = 0; deg <= n - 1; ++deg) {
      double q = 0.0;
      for (int i = 0; i < n; ++i) q += w[i] * std::pow(x[i], deg);
      const double ref = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      cc = std::max(cc, std::abs(q - ref));
      Eigen::MatrixXd vals(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) vals(i, j) = std::pow(x[i], deg) * (1.0 + x[j]);
      const Eigen::MatrixXd d = cheb_diff(vals, Direction::u);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const double ref_d = deg ? deg * std::pow(x[i], deg - 1) * (1.0 + x[j]) : 0.0;
          diff = std::max(diff, std::abs(d(i, j) - ref_d) / std::max(1.0, double(deg * deg)));
        }
    }
  }
  v.check(cc <= 1e-12, "CC monomials " + fmt("%.1e", cc));
  v.check(diff <= 1e-10, "Chebyshev derivative " + fmt("%.1e", diff));
  return v;
}

/// Cartesian current at parameter (u, v) of a patch from grid samples.
CVec3 interpolate(const Discretization& d, const std::vector<CVec3>& j, int patch, double u, double v) {
  const std::vector<double> cu = d.nodes().cardinals(u), cv = d.nodes().cardinals(v);
  CVec3 s = CVec3::Zero();
  for (int a = 0; a < d.n(); ++a)
    for (int b = 0; b < d.n(); ++b) s += (cu[a] * cv[b]) * j[d.index(patch, a, b)];
  return s;
}

double segment_distance(const Vec3& x, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double t = std::clamp((x - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
  return (x - a - t * ab).norm();
}

std::vector<CVec3> solve_current(const Surface& surf, Formulation f, int n, const PlaneWave& pw,
                                 std::unique_ptr<Problem>& keep, SolveReport& rep) {
  const auto t0 = Clock::now();
  keep = std::make_unique<Problem>(surf, f, n, OperatorConfig{});
  std::printf("  setup %s N=%d: %.1f s\n", to_string(f).c_str(), n, since(t0));
  std::fflush(stdout);
  const auto t1 = Clock::now();
  GmresOptions o;
  o.tol = 1e-6;
  o.max_iter = 6000;
  o.restart = o.max_iter;
  rep = gmres([&](const VectorXc& x) { return keep->op().apply(x); }, assemble_rhs(*keep, pw), o);
  std::printf("  solve %s N=%d: %d iterations, residual %.2e, %.1f s\n", to_string(f).c_str(), n, rep.iterations,
              rep.residual, since(t1));
  std::fflush(stdout);
  return to_cartesian(keep->discretization(), keep->map().expand(rep.solution));
}

Verdict criterion6() {
  Verdict v;
  const Surface cube = make_rounded_cube(1.0, 0.01);
  PlaneWave pw;
  pw.medium = cube.medium();
  const int n = 12;
  std::unique_ptr<Problem> pe, pm;
  SolveReport re, rm;
  const std::vector<CVec3> je = solve_current(cube, Formulation::efie_closed, n, pw, pe, re);
  const Discretization& de = pe->discretization();
  std::vector<double> face_mag, corner_mag;
  for (int p = 0; p < de.points(); ++p) {
    const PatchRole role = rounded_box_role(de.patch_of(p));
    if (role == PatchRole::face) face_mag.push_back(je[p].norm());
    if (role == PatchRole::corner) corner_mag.push_back(je[p].norm());
  }
  // Solve the MFIE after releasing the EFIE operator to bound peak memory.
  std::vector<Vec3> pos;
  std::vector<std::pair<int, Vec2>> where;
  std::vector<double> emag;
  const auto types = classify_points(de);
  for (int p = 0; p < de.points(); ++p) {
    const int patch = de.patch_of(p);
    if (rounded_box_role(patch) != PatchRole::face || types[p] != PointType::A) continue;
    const auto& par = cube.patch(patch);
    const Vec3 c[4] = {par.point(-1, -1), par.point(1, -1), par.point(1, 1), par.point(-1, 1)};
    double dist = 1e300;
    for (int e = 0; e < 4; ++e) dist = std::min(dist, segment_distance(de.position(p), c[e], c[(e + 1) % 4]));
    if (dist < 0.1) continue;
    where.emplace_back(patch, de.uv(p));
    emag.push_back(je[p].norm());
  }
  pe.reset();
  const std::vector<CVec3> jm = solve_current(cube, Formulation::mfie, n, pw, pm, rm);
  const Discretization& dm = pm->discretization();
  double worst = 0.0;
  for (std::size_t i = 0; i < where.size(); ++i) {
    const double m = interpolate(dm, jm, where[i].first, where[i].second[0], where[i].second[1]).norm();
    worst = std::max(worst, std::abs(emag[i] - m) / m);
  }
  v.check(re.converged && rm.converged, "EFIE " + std::to_string(re.iterations) + " and MFIE " +
                                            std::to_string(rm.iterations) + " iterations converged");
  v.check(worst <= 0.05, std::to_string(where.size()) + " face points, worst |J| difference " + fmt("%.2f%%", 100 * worst));
  std::nth_element(face_mag.begin(), face_mag.begin() + face_mag.size() / 2, face_mag.end());
  const double median = face_mag[face_mag.size() / 2];
  const double peak = *std::max_element(corner_mag.begin(), corner_mag.end());
  v.check(peak <= 3.0 * median, "corner max / face median " + fmt("%.2f", peak / median));
  return v;
}

Verdict criterion7(int n) {
  Verdict v;
  const Surface dip = make_dipole(0.025, 0.25, 0.04, 0.0025);
  PlaneWave pw;
  pw.medium = dip.medium();
  pw.direction = Vec3(1.0, 0.0, 0.0);
  pw.polarization = CVec3(0.0, 0.0, -1.0);
  std::vector<double> db[2];
  const Formulation fs[2] = {Formulation::efie_closed, Formulation::mfie};
  bool converged = true;
  std::string iters;
  for (int k = 0; k < 2; ++k) {
    std::unique_ptr<Problem> p;
    SolveReport r;
    solve_current(dip, fs[k], n, pw, p, r);
    converged = converged && r.converged;
    iters += (k ? " and " : "") + std::to_string(r.iterations);
    const FarFieldPattern f =
        far_field_cut(p->discretization(), p->map().expand(r.solution), 0.0, -180.0, 180.0, 361);
    for (double x : f.rcs()) db[k].push_back(10.0 * std::log10(x));
  }
  double worst = 0.0, at = 0.0;
  for (std::size_t i = 0; i < db[0].size(); ++i) {
    const double dd = std::abs(db[0][i] - db[1][i]);
    if (dd > worst) {
      worst = dd;
      at = cut_angle(-180.0, 180.0, static_cast<int>(i), 361);
    }
  }
  const double broadside = db[0][180 + 90];
  v.check(converged, "N=" + std::to_string(n) + " iterations " + iters + " converged");
  v.check(worst <= 0.5, "worst difference " + fmt("%.3f dB", worst) + " at " + fmt("%.0f deg", at) +
                            ", broadside level " + fmt("%.1f dB", broadside));
  return v;
}

Verdict criterion8() {
  Verdict v;
  std::mt19937 rng(23);
  std::normal_distribution<double> nd;
  MatrixXc a(50, 50);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) a(i, j) = Complex(nd(rng), nd(rng)) / std::sqrt(50.0);
  a += 2.0 * MatrixXc::Identity(50, 50);
  VectorXc b(50);
  for (int i = 0; i < 50; ++i) b[i] = Complex(nd(rng), nd(rng));
  for (const int restart : {200, 7}) {
    GmresOptions o;
    o.tol = 1e-8;
    o.restart = restart;
    const SolveReport r = gmres([&](const VectorXc& x) { return VectorXc(a * x); }, b, o);
    bool mono = true;
    for (std::size_t c = 0; c < r.restarts.size(); ++c) {
      const std::size_t s = static_cast<std::size_t>(r.restarts[c]);
      const std::size_t e = c + 1 < r.restarts.size() ? static_cast<std::size_t>(r.restarts[c + 1]) : r.history.size() - 1;
      for (std::size_t i = s + 2; i <= e; ++i) mono = mono && r.history[i] <= r.history[i - 1];
    }
    const VectorXc x = a.partialPivLu().solve(b);
    const double err = (r.solution - x).norm() / x.norm();
    v.check(r.converged && mono && err <= 10.0 * o.tol,
            "restart " + std::to_string(restart) + ": " + std::to_string(r.iterations) + " iterations, " +
                std::to_string(r.restarts.size()) + " cycles, error " + fmt("%.1e", err));
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> want;
  for (int i = 1; i < argc; ++i) want.insert(std::atoi(argv[i]));
  if (want.empty()) want = {1, 2, 3, 4, 5, 6, 7, 8};
  const int dipole_n = std::getenv("CBIE_DIPOLE_N") ? std::atoi(std::getenv("CBIE_DIPOLE_N")) : 8;
  SphereStudy sphere;
  bool all = true;
  for (int c : want) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      switch (c) {
        case 1: v = criterion1(sphere); break;
        case 2: v = criterion2(sphere); break;
        case 3: v = criterion3(sphere); break;
        case 4: v = criterion4(); break;
        case 5: v = criterion5(sphere); break;
        case 6: v = criterion6(); break;
        case 7: v = criterion7(dipole_n); break;
        case 8: v = criterion8(); break;
        default: continue;
      }
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    all = all && v.pass;
    std::printf("criterion %d %s (%.0f s): %s\n", c, v.pass ? "PASS" : "FAIL", since(t0), v.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
