#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cbie/errors.hpp"
#include "cbie/spectral.hpp"
#include "cbie/types.hpp"

using namespace cbie;

namespace {

Eigen::MatrixXd sample(int n, auto f) {
  const auto x = cc_nodes(n);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = f(x[i], x[j]);
  return m;
}

double tensor_quad(int n, auto f) {
  const auto x = cc_nodes(n);
  const auto w = cc_weights(n);
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) s += w[i] * w[j] * f(x[i], x[j]);
  return s;
}

}  // namespace

TEST(CcNodes, SmallCases) {
  EXPECT_EQ(cc_nodes(2), (std::vector<double>{1.0, -1.0}));
  const auto x3 = cc_nodes(3);
  EXPECT_DOUBLE_EQ(x3[0], 1.0);
  EXPECT_EQ(x3[1], 0.0);
  EXPECT_DOUBLE_EQ(x3[2], -1.0);
  const auto x5 = cc_nodes(5);
  EXPECT_NEAR(x5[1], std::sqrt(0.5), 2e-16);
  EXPECT_EQ(x5[2], 0.0);
  EXPECT_NEAR(x5[3], -std::sqrt(0.5), 2e-16);
  EXPECT_THROW(cc_nodes(1), DomainError);
}

TEST(CcNodes, EndpointsAndOrdering) {
  for (int n = 2; n <= 30; ++n) {
    const auto x = cc_nodes(n);
    EXPECT_EQ(x.front(), 1.0);
    EXPECT_EQ(x.back(), -1.0);
    for (int i = 1; i < n; ++i) EXPECT_LT(x[i], x[i - 1]);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(x[i], std::cos(pi * i / (n - 1)), 1e-15);
  }
}

TEST(CcWeights, TrapezoidSimpsonAndSum) {
  const auto w2 = cc_weights(2);
  EXPECT_NEAR(w2[0], 1.0, 1e-15);
  EXPECT_NEAR(w2[1], 1.0, 1e-15);
  const auto w3 = cc_weights(3);
  EXPECT_NEAR(w3[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(w3[1], 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(w3[2], 1.0 / 3.0, 1e-15);
  const auto x3 = cc_nodes(3);
  double s = 0.0;
  for (int i = 0; i < 3; ++i) s += w3[i] * x3[i] * x3[i];
  EXPECT_NEAR(s, 2.0 / 3.0, 1e-15);
  for (int n = 2; n <= 40; ++n) {
    double sum = 0.0;
    for (double w : cc_weights(n)) sum += w;
    EXPECT_NEAR(sum, 2.0, 1e-14) << n;
  }
  EXPECT_THROW(cc_weights(1), DomainError);
}

TEST(CcWeights, TensorMonomialExactness) {
  for (int n : {4, 7, 10, 16}) {
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        const double exact = (p % 2 ? 0.0 : 2.0 / (p + 1)) * (q % 2 ? 0.0 : 2.0 / (q + 1));
        const double got = tensor_quad(n, [&](double u, double v) { return std::pow(u, p) * std::pow(v, q); });
        EXPECT_NEAR(got, exact, 1e-12) << n << " " << p << " " << q;
      }
  }
}

TEST(CcWeights, SpectralConvergence) {
  const double exact = (std::exp(1.0) - std::exp(-1.0)) * 2.0 * std::sin(1.0);
  double prev = 1.0;
  for (int n = 6; n <= 18; n += 2) {
    const double err = std::abs(tensor_quad(n, [](double u, double v) { return std::exp(u) * std::cos(v); }) - exact);
    if (prev > 1e-13) EXPECT_LT(err, 0.1 * prev) << n;
    prev = std::max(err, 1e-16);
  }
}

TEST(FejerWeights, IntegrateSmoothFunction) {
  const auto x = fejer_nodes(12);
  const auto w = fejer_weights(12);
  double s = 0.0;
  for (int i = 0; i < 12; ++i) s += w[i] * std::exp(x[i]);
  EXPECT_NEAR(s, std::exp(1.0) - std::exp(-1.0), 1e-12);
}

TEST(ChebTransform, BasisAndConstant) {
  const int n = 8;
  auto c = cheb_transform(sample(n, [](double u, double) { return 2 * u * u - 1; }));
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k) EXPECT_NEAR(c.a(m, k), (m == 2 && k == 0) ? 1.0 : 0.0, 1e-14);
  c = cheb_transform(Eigen::MatrixXd::Constant(n, n, 3.5));
  EXPECT_NEAR(c.a(0, 0), 3.5, 1e-14);
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      if (m || k) EXPECT_LT(std::abs(c.a(m, k)), 1e-14);
}

TEST(ChebTransform, RoundTripRandom) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> d(-1, 1);
  for (int n : {2, 5, 12, 21}) {
    Eigen::MatrixXd v(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v(i, j) = d(rng);
    const Eigen::MatrixXd back = cheb_inverse(cheb_transform(v), n, n);
    EXPECT_LT((back - v).norm() / v.norm(), 1e-13);
  }
  EXPECT_THROW(cheb_inverse(ChebCoeffs2D{Eigen::MatrixXd::Zero(3, 3)}, 4, 4), DomainError);
}

TEST(ChebEval, BilinearNodesAndExp) {
  const auto c = cheb_transform(sample(6, [](double u, double v) { return u * v; }));
  EXPECT_NEAR(cheb_eval(c, 0.3, -0.5), -0.15, 1e-14);
  const auto vals = sample(9, [](double u, double v) { return std::sin(u + 2 * v); });
  const auto c9 = cheb_transform(vals);
  const auto x = cc_nodes(9);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 9; ++j) EXPECT_NEAR(cheb_eval(c9, x[i], x[j]), vals(i, j), 1e-13);
  const auto ce = cheb_transform(sample(20, [](double u, double v) { return std::exp(u + v); }));
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> d(-1, 1);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double u = d(rng), v = d(rng);
    worst = std::max(worst, std::abs(cheb_eval(ce, u, v) - std::exp(u + v)));
  }
  EXPECT_LT(worst, 1e-12);
  EXPECT_THROW(cheb_eval(ce, 1.2, 0.0), DomainError);
}

TEST(ChebDiff, PolynomialsAndSine) {
  const int n = 7;
  const auto x = cc_nodes(n);
  const auto du = cheb_diff(sample(n, [](double u, double) { return u * u; }), Direction::u);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) EXPECT_NEAR(du(i, j), 2 * x[i], 1e-13);
  const auto dc = cheb_diff(Eigen::MatrixXd::Constant(n, n, 4.0), Direction::v);
  EXPECT_LT(dc.cwiseAbs().maxCoeff(), 1e-13);
  const auto ds = cheb_diff(sample(24, [](double u, double) { return std::sin(2 * u); }), Direction::u);
  const auto x24 = cc_nodes(24);
  double worst = 0.0;
  for (int i = 0; i < 24; ++i) worst = std::max(worst, std::abs(ds(i, 3) - 2 * std::cos(2 * x24[i])));
  EXPECT_LT(worst, 1e-10);
}

TEST(ChebDiff, ExactForAllPolynomialDegrees) {
  const int n = 10;
  const auto x = cc_nodes(n);
  for (int p = 0; p < n; ++p) {
    const auto d = cheb_diff(sample(n, [&](double, double v) { return std::pow(v, p); }), Direction::v);
    for (int j = 0; j < n; ++j) EXPECT_NEAR(d(0, j), p * std::pow(x[j], p - 1 < 0 ? 0 : p - 1) * (p ? 1 : 0), 1e-11);
  }
}

TEST(ChebDiff, FundamentalTheorem) {
  const int n = 16;
  auto f = [](double u, double v) { return std::exp(0.5 * u) * std::cos(u * v); };
  const auto d = cheb_diff(sample(n, f), Direction::u);
  const auto x = cc_nodes(n);
  const auto w = cc_weights(n);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += w[i] * d(i, j);
    EXPECT_NEAR(s, f(1.0, x[j]) - f(-1.0, x[j]), 1e-11);
  }
}

TEST(NodeSet, CardinalsInterpolateOnOpenGrid) {
  NodeSet s(GridKind::open, 11);
  std::vector<double> l(11);
  s.cardinals(0.37, l.data());
  double val = 0.0;
  for (int j = 0; j < 11; ++j) val += l[j] * std::cos(2 * s.node(j));
  EXPECT_NEAR(val, std::cos(0.74), 1e-8);
  EXPECT_FALSE(s.is_endpoint(0));
}

TEST(GaussLegendre, Exactness) {
  const auto& g = gauss_legendre(9);
  for (int p = 0; p < 18; ++p) {
    double s = 0.0;
    for (int i = 0; i < 9; ++i) s += g.w[i] * std::pow(g.x[i], p);
    EXPECT_NEAR(s, p % 2 ? 0.0 : 2.0 / (p + 1), 1e-14);
  }
}
