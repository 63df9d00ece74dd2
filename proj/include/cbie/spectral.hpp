#pragma once

#include <vector>

#include <Eigen/Dense>

namespace cbie {

/// Closed grids carry the interval endpoints (Clenshaw-Curtis); open grids are
/// the interior-only Fejer first-kind points.
enum class GridKind { closed, open };

/// Clenshaw-Curtis nodes x_i = cos(pi i / (n-1)), i = 0..n-1.
std::vector<double> cc_nodes(int n);
/// Clenshaw-Curtis weights on [-1, 1]; exact for degree <= n-1 (n for odd n).
std::vector<double> cc_weights(int n);
/// Fejer first-kind nodes x_i = cos(pi (2i+1) / (2n)).
std::vector<double> fejer_nodes(int n);
std::vector<double> fejer_weights(int n);

/// One-dimensional Chebyshev node set with quadrature weights, barycentric
/// interpolation and a spectral differentiation matrix.
class NodeSet {
 public:
  NodeSet(GridKind kind, int n);

  GridKind kind() const noexcept { return kind_; }
  int size() const noexcept { return static_cast<int>(x_.size()); }
  const std::vector<double>& nodes() const noexcept { return x_; }
  const std::vector<double>& weights() const noexcept { return w_; }
  double node(int i) const { return x_[static_cast<std::size_t>(i)]; }
  double weight(int i) const { return w_[static_cast<std::size_t>(i)]; }
  bool is_endpoint(int i) const;

  /// Lagrange cardinal functions l_j(x) for all nodes, written to out[0..n).
  void cardinals(double x, double* out) const;
  std::vector<double> cardinals(double x) const;

  /// D with (D f)_i = p'(x_i) for the interpolating polynomial p of f.
  const Eigen::MatrixXd& diff_matrix() const noexcept { return d_; }

 private:
  GridKind kind_;
  std::vector<double> x_, w_, bary_;
  Eigen::MatrixXd d_;
};

/// Tensor Chebyshev coefficients a(m, n) of sum a_mn T_m(u) T_n(v).
struct ChebCoeffs2D {
  Eigen::MatrixXd a;
};

/// Values on the closed tensor grid, values(i, j) = f(x_i, x_j).
ChebCoeffs2D cheb_transform(const Eigen::MatrixXd& values);
Eigen::MatrixXd cheb_inverse(const ChebCoeffs2D& coeffs, int nu, int nv);
double cheb_eval(const ChebCoeffs2D& coeffs, double u, double v);
/// Clenshaw evaluation of a one-dimensional series sum c_m T_m(x).
double cheb_eval_1d(const double* c, int n, double x);

enum class Direction { u, v };
/// Exact derivative of the interpolating polynomial, sampled on the closed grid.
Eigen::MatrixXd cheb_diff(const Eigen::MatrixXd& values, Direction dir);

/// Gauss-Legendre nodes and weights on [-1, 1] (cached per order).
struct GaussRule {
  std::vector<double> x, w;
};
const GaussRule& gauss_legendre(int n);

}  // namespace cbie
