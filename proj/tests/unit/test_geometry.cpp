#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "cbie/discretization.hpp"
#include "cbie/errors.hpp"
#include "cbie/geometry.hpp"
#include "cbie/surface_io.hpp"

using namespace cbie;

namespace {

double area(const Surface& s, int n) {
  Discretization d(s, GridKind::closed, n);
  double a = 0.0;
  for (double w : d.weights()) a += w;
  return a;
}

void expect_frames_consistent(const Surface& s) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> d(-1, 1);
  for (int p = 0; p < s.size(); ++p) {
    for (int k = 0; k < 6; ++k) {
      const double u = k == 0 ? 1.0 : d(rng), v = k == 1 ? -1.0 : d(rng);
      const PatchFrame f = eval_frame(s.patch(p), u, v);
      EXPECT_GT(f.jacobian, 0.0);
      EXPECT_LT((f.a_u.cross(f.a_v) - f.jacobian * f.normal).norm(), 1e-12 * std::max(1.0, f.jacobian));
      EXPECT_LT((f.metric * f.inverse_metric - Mat2::Identity()).norm(), 1e-12);
      const double h = 1e-5;
      const double up = std::min(u + h, 1.0), um = std::max(u - h, -1.0);
      const double vp = std::min(v + h, 1.0), vm = std::max(v - h, -1.0);
      const Vec3 fu = (s.patch(p).point(up, v) - s.patch(p).point(um, v)) / (up - um);
      const Vec3 fv = (s.patch(p).point(u, vp) - s.patch(p).point(u, vm)) / (vp - vm);
      const double scale = std::max(1.0, f.a_u.norm());
      // One-sided differences at the boundary are first order only.
      const double tol = (up - um < 2 * h || vp - vm < 2 * h) ? 1e-4 : 1e-8;
      EXPECT_LT((fu - f.a_u).norm(), tol * scale) << p;
      EXPECT_LT((fv - f.a_v).norm(), tol * std::max(1.0, f.a_v.norm())) << p;
    }
  }
}

void expect_edges_shared(const Surface& s) {
  std::vector<int> count(static_cast<std::size_t>(4 * s.size()), 0);
  for (const Adjacency& a : s.adjacency()) {
    ++count[4 * a.a.patch + a.a.edge];
    ++count[4 * a.b.patch + a.b.edge];
    for (double t : cc_nodes(13)) {
      const Vec2 pa = edge_uv(a.a.edge, t), pb = edge_uv(a.b.edge, a.flip ? -t : t);
      EXPECT_LT((s.patch(a.a.patch).point(pa[0], pa[1]) - s.patch(a.b.patch).point(pb[0], pb[1])).norm(), 1e-12);
    }
  }
  for (int c : count) EXPECT_EQ(c, 1);
}

void expect_outward(const Surface& s, const Vec3& inside) {
  Discretization d(s, GridKind::closed, 6);
  for (int i = 0; i < d.points(); ++i) EXPECT_GT((d.position(i) - inside).dot(d.frame(i).normal), 0.0);
}

}  // namespace

TEST(Sphere, PoleAndRadius) {
  const Surface s = make_sphere(2.0);
  ASSERT_EQ(s.size(), 6);
  bool found_pole = false;
  for (int p = 0; p < 6; ++p) {
    const PatchFrame f = eval_frame(s.patch(p), 0.0, 0.0);
    if ((f.point - Vec3(0, 0, 1)).norm() < 1e-15) {
      found_pole = true;
      EXPECT_LT((f.normal - Vec3(0, 0, 1)).norm(), 1e-15);
    }
  }
  EXPECT_TRUE(found_pole);
  Discretization d(s, GridKind::closed, 9);
  for (int i = 0; i < d.points(); ++i) EXPECT_NEAR(d.position(i).norm(), 1.0, 1e-12);
  EXPECT_THROW(make_sphere(0.0), DomainError);
  EXPECT_THROW(make_sphere(-1.0), DomainError);
}

TEST(Sphere, AreaConvergesSpectrally) {
  const Surface s = make_sphere(2.0);
  const double exact = 4 * pi;
  const double e8 = std::abs(area(s, 8) - exact), e16 = std::abs(area(s, 16) - exact);
  EXPECT_LT(e16 / exact, 1e-8);
  EXPECT_LT(e16 / e8, 1e-3);
}

TEST(Sphere, FramesAdjacencyOrientation) {
  const Surface s = make_sphere(2.0);
  expect_frames_consistent(s);
  expect_edges_shared(s);
  expect_outward(s, Vec3::Zero());
}

TEST(RoundedCube, CountsAreaAndFaceCenter) {
  const Surface s = make_rounded_cube(1.0, 0.01);
  EXPECT_EQ(s.size(), kRoundedBoxPatches);
  const double exact = 6 * 0.98 * 0.98 + 12 * (pi * 0.01 / 2) * 0.98 + 4 * pi * 0.01 * 0.01;
  EXPECT_NEAR(area(s, 16) / exact, 1.0, 1e-8);
  bool found = false;
  for (int p = 0; p < kRoundedBoxFaces; ++p)
    if ((s.patch(p).point(0, 0) - Vec3(0.5, 0, 0)).norm() < 1e-15) found = true;
  EXPECT_TRUE(found);
  EXPECT_THROW(make_rounded_cube(1.0, 0.5), DomainError);
  EXPECT_THROW(make_rounded_cube(1.0, 0.0), DomainError);
}

TEST(RoundedCube, FramesAdjacencyOrientation) {
  const Surface s = make_rounded_cube(1.0, 0.1);
  expect_frames_consistent(s);
  expect_edges_shared(s);
  expect_outward(s, Vec3::Zero());
}

TEST(RoundedCube, TangentPlaneContinuousAcrossEdges) {
  const Surface s = make_rounded_cube(1.0, 0.1);
  for (const Adjacency& a : s.adjacency())
    for (double t : {-1.0, -0.3, 0.5, 1.0}) {
      const Vec2 pa = edge_uv(a.a.edge, t), pb = edge_uv(a.b.edge, a.flip ? -t : t);
      const Vec3 na = eval_frame(s.patch(a.a.patch), pa[0], pa[1]).normal;
      const Vec3 nb = eval_frame(s.patch(a.b.patch), pb[0], pb[1]).normal;
      EXPECT_LT((na - nb).norm(), 1e-12);
    }
}

TEST(RoundedBoxRoles, Partition) {
  int counts[3] = {0, 0, 0};
  for (int p = 0; p < kRoundedBoxPatches; ++p) ++counts[static_cast<int>(rounded_box_role(p))];
  EXPECT_EQ(counts[0], kRoundedBoxFaces);
  EXPECT_EQ(counts[1], kRoundedBoxEdgePatches);
  EXPECT_EQ(counts[2], kRoundedBoxCornerPatches);
}

TEST(Dipole, ExtentAndDisjointArms) {
  const Surface s = make_dipole(0.025, 0.25, 0.04, 0.0025);
  EXPECT_EQ(s.size(), 2 * kRoundedBoxPatches);
  Discretization d(s, GridKind::closed, 5);
  double zmin = 1e9, zmax = -1e9, top_min = 1e9, bottom_max = -1e9;
  for (int i = 0; i < d.points(); ++i) {
    const double z = d.position(i)[2];
    zmin = std::min(zmin, z);
    zmax = std::max(zmax, z);
    if (d.patch_of(i) < kRoundedBoxPatches) top_min = std::min(top_min, z);
    else bottom_max = std::max(bottom_max, z);
  }
  EXPECT_NEAR(zmax - zmin, 0.54, 1e-12);
  EXPECT_GT(top_min, bottom_max);
  EXPECT_NEAR(top_min - bottom_max, 0.04, 1e-12);
  expect_edges_shared(s);
  EXPECT_THROW(make_dipole(0.025, 0.25, 0.0, 0.0025), DomainError);
  EXPECT_THROW(make_dipole(0.025, 0.25, 0.04, 0.02), DomainError);
}

TEST(Torus, Closed) {
  const Surface s = make_torus(1.0, 0.3, 4, 3);
  EXPECT_EQ(s.size(), 12);
  expect_frames_consistent(s);
  expect_edges_shared(s);
  EXPECT_NEAR(area(s, 14), 4 * pi * pi * 0.3, 1e-9);
}

TEST(Surface, RejectsOpenPatchSet) {
  const Surface s = make_sphere(2.0);
  std::vector<PatchPtr> five(s.patches().begin(), s.patches().begin() + 5);
  EXPECT_THROW(Surface::from_patches(five, s.medium()), ConformityError);
}

TEST(Surface, RigidTransform) {
  const Surface s = make_sphere(2.0);
  const Mat3 r = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  const Surface t = s.transformed(r, Vec3(1, 0, 0));
  EXPECT_LT((t.patch(2).point(0.3, 0.1) - (r * s.patch(2).point(0.3, 0.1) + Vec3(1, 0, 0))).norm(), 1e-14);
  EXPECT_EQ(t.adjacency().size(), s.adjacency().size());
}

TEST(Medium, FreeSpace) {
  const MediumParams m = MediumParams::free_space(1.0);
  EXPECT_NEAR(m.wavenumber, 2 * pi, 1e-15);
  EXPECT_NEAR(m.impedance, 376.730313, 1e-5);
  EXPECT_NEAR(m.angular_frequency * std::sqrt(m.permeability * m.permittivity), m.wavenumber, 1e-12);
  EXPECT_THROW(MediumParams::free_space(0.0), DomainError);
}

TEST(EvalFrame, RejectsOutsideSquare) {
  const Surface s = make_sphere(2.0);
  EXPECT_THROW(eval_frame(s.patch(0), 1.01, 0.0), DomainError);
}

TEST(SurfaceFile, RoundTripSphere) {
  const Surface s = make_sphere(2.0);
  const std::string text = format_surface(s, 20);
  const Surface r = parse_surface(text);
  ASSERT_EQ(r.size(), 6);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> d(-1, 1);
  double worst = 0.0, worst_d = 0.0;
  for (int p = 0; p < 6; ++p)
    for (int k = 0; k < 40; ++k) {
      const double u = d(rng), v = d(rng);
      const PatchPoint a = s.patch(p).eval(u, v), b = r.patch(p).eval(u, v);
      worst = std::max(worst, (a.r - b.r).norm());
      worst_d = std::max({worst_d, (a.ru - b.ru).norm(), (a.rv - b.rv).norm()});
    }
  EXPECT_LT(worst, 1e-9);
  EXPECT_LT(worst_d, 1e-7);
  EXPECT_EQ(format_surface(r, 20), text);
}

TEST(SurfaceFile, RoundedCubeBlocks) {
  const std::string text = format_surface(make_rounded_cube(1.0, 0.01), 20);
  std::size_t blocks = 0;
  for (std::size_t pos = text.find("\npatch "); pos != std::string::npos; pos = text.find("\npatch ", pos + 1)) ++blocks;
  EXPECT_EQ(blocks, static_cast<std::size_t>(kRoundedBoxPatches));
  EXPECT_EQ(parse_surface(text).size(), kRoundedBoxPatches);
}

TEST(SurfaceFile, TruncatedFileReportsOffset) {
  const std::string text = format_surface(make_sphere(2.0), 6);
  const std::string cut = text.substr(0, text.size() / 2);
  try {
    parse_surface(cut);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_LE(e.byte_offset(), cut.size());
    EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos);
  }
  try {
    parse_surface("PATCHSURF v1\nwavelength abc\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.byte_offset(), 24u);
  }
}

TEST(SurfaceFile, PerturbedEdgeIsNonConforming) {
  const Surface s = make_sphere(2.0);
  std::string text = format_surface(s, 6);
  // Shift the first sample of the second patch block, which lies on a shared edge.
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  int patch_lines = 0;
  bool next_is_sample = false;
  while (std::getline(in, line)) {
    if (line.rfind("patch ", 0) == 0) {
      ++patch_lines;
      next_is_sample = patch_lines == 2;
      out << line << "\n";
      continue;
    }
    if (next_is_sample) {
      std::istringstream ls(line);
      double x, y, z;
      ls >> x >> y >> z;
      char buf[128];
      std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", x + 1e-3, y, z);
      line = buf;
      next_is_sample = false;
    }
    out << line << "\n";
  }
  try {
    parse_surface(out.str());
    FAIL() << "expected ConformityError";
  } catch (const ConformityError& e) {
    EXPECT_NE(std::string(e.what()).find("patch 1"), std::string::npos) << e.what();
  }
}

TEST(SurfaceFile, MissingFileIsIoError) {
  EXPECT_THROW(load_surface("/nonexistent/dir/surface.txt"), IoError);
  EXPECT_THROW(save_surface(make_sphere(2.0), 4, "/nonexistent/dir/surface.txt"), IoError);
}
