#pragma once

#include <vector>

#include "cbie/geometry.hpp"

namespace cbie {

struct ClosestPoint {
  Vec2 uv;
  Vec3 point;
  double distance = 0.0;
};

/// Closest point of a patch to x: coarse sampling followed by projected
/// Gauss-Newton on the square.
ClosestPoint closest_point(const PatchParametrization& patch, const Vec3& x);

struct LocalRuleParams {
  int order = 12;          // Gauss points per panel
  double kappa = 1.0;      // panel length / singularity distance bound
  double max_len = 0.5;    // longest panel in either polar direction
  int max_depth = 40;      // bisection depth cap
};

/// Nodes in the parameter square with weights for du dv (no sqrt(g)).
struct LocalRule {
  std::vector<Vec2> uv;
  std::vector<double> w;
  int size() const noexcept { return static_cast<int>(w.size()); }
};

/// Quadrature over [-1,1]^2 for integrands behaving like 1/|r(u,v) - x| near
/// the apex: the square is fanned into triangles from the apex, each mapped
/// to polar-like (s, t) coordinates and integrated on panels graded toward
/// the nearest complex singularity. distance is |r(apex) - x| (0 when the
/// target lies on the patch at the apex). Each level divides the panel
/// length bounds by factor.
LocalRule polar_rule(const PatchParametrization& patch, const Vec2& apex, double distance,
                     const LocalRuleParams& params, int level = 0, double factor = 2.0);

/// Gauss panels on [0, 1] graded toward the complex point c + i h.
void graded_panels(double c, double h, double kappa, double max_len, int max_depth,
                   std::vector<std::pair<double, double>>& out);

}  // namespace cbie
