#include "cbie/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbie/spectral.hpp"

namespace cbie {

ClosestPoint closest_point(const PatchParametrization& patch, const Vec3& x) {
  constexpr int coarse = 9;
  Vec2 best(0.0, 0.0);
  double best_d2 = std::numeric_limits<double>::max();
  for (int i = 0; i < coarse; ++i)
    for (int j = 0; j < coarse; ++j) {
      const Vec2 uv(-1.0 + 2.0 * i / (coarse - 1), -1.0 + 2.0 * j / (coarse - 1));
      const double d2 = (patch.point(uv[0], uv[1]) - x).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = uv;
      }
    }
  Vec2 uv = best;
  for (int it = 0; it < 50; ++it) {
    const PatchPoint p = patch.eval(uv[0], uv[1]);
    const Vec3 r = p.r - x;
    const Vec2 grad(p.ru.dot(r), p.rv.dot(r));
    Mat2 h;
    h << p.ru.dot(p.ru), p.ru.dot(p.rv), p.ru.dot(p.rv), p.rv.dot(p.rv);
    Vec2 step = -h.ldlt().solve(grad);
    // Coordinates pinned at a bound by an outward-pointing gradient stay fixed.
    bool fixed[2] = {false, false};
    for (int c = 0; c < 2; ++c) {
      if ((uv[c] >= 1.0 && grad[c] < 0.0) || (uv[c] <= -1.0 && grad[c] > 0.0)) fixed[c] = true;
    }
    if (fixed[0] != fixed[1]) {
      const int f = fixed[0] ? 1 : 0;
      step.setZero();
      step[f] = -grad[f] / h(f, f);
    } else if (fixed[0]) {
      break;
    }
    Vec2 next = (uv + step).cwiseMax(Vec2(-1, -1)).cwiseMin(Vec2(1, 1));
    // Damp steps that increase the distance.
    double scale = 1.0;
    double d2 = (patch.point(next[0], next[1]) - x).squaredNorm();
    while (d2 > r.squaredNorm() && scale > 1e-6) {
      scale *= 0.5;
      next = (uv + scale * step).cwiseMax(Vec2(-1, -1)).cwiseMin(Vec2(1, 1));
      d2 = (patch.point(next[0], next[1]) - x).squaredNorm();
    }
    const double moved = (next - uv).norm();
    if (d2 <= r.squaredNorm()) uv = next;
    if (moved < 1e-15) break;
  }
  ClosestPoint cp;
  cp.uv = uv;
  cp.point = patch.point(uv[0], uv[1]);
  cp.distance = (cp.point - x).norm();
  return cp;
}

void graded_panels(double c, double h, double kappa, double max_len, int max_depth,
                   std::vector<std::pair<double, double>>& out) {
  out.clear();
  struct Item {
    double a, b;
    int depth;
  };
  std::vector<Item> stack{{0.0, 1.0, 0}};
  while (!stack.empty()) {
    const Item it = stack.back();
    stack.pop_back();
    const double len = it.b - it.a;
    const double nearest = std::clamp(c, it.a, it.b);
    const double dist = std::hypot(c - nearest, h);
    if (it.depth < max_depth && (len > max_len || len > kappa * dist)) {
      const double mid = 0.5 * (it.a + it.b);
      stack.push_back({mid, it.b, it.depth + 1});
      stack.push_back({it.a, mid, it.depth + 1});
    } else {
      out.emplace_back(it.a, it.b);
    }
  }
}

namespace {

double cross2(const Vec2& a, const Vec2& b) { return a[0] * b[1] - a[1] * b[0]; }

}  // namespace

LocalRule polar_rule(const PatchParametrization& patch, const Vec2& apex, double distance,
                     const LocalRuleParams& params, int level, double factor) {
  const GaussRule& g = gauss_legendre(params.order);
  const double scale = std::pow(factor, -level);
  const double kappa = params.kappa * scale;
  const double max_len = params.max_len * scale;
  const PatchPoint p0 = patch.eval(apex[0], apex[1]);
  Mat32 a;
  a.col(0) = p0.ru;
  a.col(1) = p0.rv;

  const Vec2 corners[4] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  LocalRule rule;
  std::vector<std::pair<double, double>> spanels, tpanels;
  for (int e = 0; e < 4; ++e) {
    const Vec2& b = corners[e];
    const Vec2& c = corners[(e + 1) % 4];
    const Vec2 d = b - apex, w = c - b;
    const double area2 = std::abs(cross2(d, w));
    if (area2 < 1e-14) continue;
    // |A (D + s W)|^2 = alpha s^2 + beta s + gamma.
    const Vec3 ad = a * d, aw = a * w;
    const double alpha = aw.squaredNorm(), beta = 2.0 * ad.dot(aw), gamma = ad.squaredNorm();
    const double s_star = -beta / (2.0 * alpha);
    const double h2 = std::max(gamma - beta * beta / (4.0 * alpha), 0.0);
    graded_panels(s_star, std::sqrt(h2 / alpha), kappa, max_len, params.max_depth, spanels);
    for (const auto& [s0, s1] : spanels) {
      const double hs = 0.5 * (s1 - s0);
      for (int i = 0; i < params.order; ++i) {
        const double s = s0 + hs * (g.x[i] + 1.0);
        const double ws = hs * g.w[i];
        const Vec2 dir = d + s * w;
        const double q = std::sqrt(alpha * s * s + beta * s + gamma);
        if (distance > 0.0) {
          graded_panels(0.0, distance / q, kappa, max_len, params.max_depth, tpanels);
        } else {
          const int np = static_cast<int>(std::ceil(1.0 / max_len - 1e-12));
          tpanels.clear();
          for (int k = 0; k < np; ++k) tpanels.emplace_back(double(k) / np, double(k + 1) / np);
        }
        for (const auto& [t0, t1] : tpanels) {
          const double ht = 0.5 * (t1 - t0);
          for (int j = 0; j < params.order; ++j) {
            const double t = t0 + ht * (g.x[j] + 1.0);
            rule.uv.push_back((apex + t * dir).cwiseMax(Vec2(-1, -1)).cwiseMin(Vec2(1, 1)));
            rule.w.push_back(ws * ht * g.w[j] * t * area2);
          }
        }
      }
    }
  }
  return rule;
}

}  // namespace cbie
