#include "cbie/spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "cbie/errors.hpp"
#include "cbie/types.hpp"

namespace cbie {

namespace {

void require_points(int n, int min_n) {
  if (n < min_n) {
    throw DomainError("grid size " + std::to_string(n) + " is below the minimum of " +
                      std::to_string(min_n));
  }
}

}  // namespace

std::vector<double> cc_nodes(int n) {
  require_points(n, 2);
  std::vector<double> x(static_cast<std::size_t>(n));
  // The sine form is exactly antisymmetric and has zero midpoint.
  for (int i = 0; i < n; ++i) x[i] = std::sin(pi * (n - 1 - 2 * i) / (2.0 * (n - 1)));
  return x;
}

std::vector<double> cc_weights(int n) {
  require_points(n, 2);
  const int m = n - 1;
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k <= m; ++k) {
    const double theta = pi * k / m;
    double s = 1.0;
    for (int j = 1; j <= m / 2; ++j) {
      const double b = (2 * j == m) ? 1.0 : 2.0;
      s -= b * std::cos(2.0 * j * theta) / (4.0 * j * j - 1.0);
    }
    const double c = (k == 0 || k == m) ? 1.0 : 2.0;
    w[k] = c * s / m;
  }
  return w;
}

std::vector<double> fejer_nodes(int n) {
  require_points(n, 1);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[i] = std::sin(pi * (n - 1 - 2 * i) / (2.0 * n));
  return x;
}

std::vector<double> fejer_weights(int n) {
  require_points(n, 1);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double theta = pi * (2 * k + 1) / (2.0 * n);
    double s = 1.0;
    for (int j = 1; j <= n / 2; ++j) s -= 2.0 * std::cos(2.0 * j * theta) / (4.0 * j * j - 1.0);
    w[k] = 2.0 * s / n;
  }
  return w;
}

NodeSet::NodeSet(GridKind kind, int n) : kind_(kind) {
  if (kind == GridKind::closed) {
    x_ = cc_nodes(n);
    w_ = cc_weights(n);
    bary_.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      bary_[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0);
    }
  } else {
    x_ = fejer_nodes(n);
    w_ = fejer_weights(n);
    bary_.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      bary_[j] = (j % 2 == 0 ? 1.0 : -1.0) * std::sin(pi * (2 * j + 1) / (2.0 * n));
    }
  }
  d_ = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      d_(i, j) = (bary_[j] / bary_[i]) / (x_[i] - x_[j]);
      diag -= d_(i, j);
    }
    d_(i, i) = diag;
  }
}

bool NodeSet::is_endpoint(int i) const {
  return kind_ == GridKind::closed && (i == 0 || i == size() - 1);
}

void NodeSet::cardinals(double x, double* out) const {
  const int n = size();
  double denom = 0.0;
  for (int j = 0; j < n; ++j) {
    const double dx = x - x_[j];
    if (dx == 0.0) {
      for (int k = 0; k < n; ++k) out[k] = (k == j) ? 1.0 : 0.0;
      return;
    }
    out[j] = bary_[j] / dx;
    denom += out[j];
  }
  const double inv = 1.0 / denom;
  for (int j = 0; j < n; ++j) out[j] *= inv;
}

std::vector<double> NodeSet::cardinals(double x) const {
  std::vector<double> out(static_cast<std::size_t>(size()));
  cardinals(x, out.data());
  return out;
}

namespace {

// Maps closed-grid samples to Chebyshev coefficients: c = T f.
Eigen::MatrixXd dct1_matrix(int n) {
  const int m = n - 1;
  Eigen::MatrixXd t(n, n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      const double end = (j == 0 || j == m) ? 0.5 : 1.0;
      t(k, j) = (2.0 / m) * end * std::cos(pi * static_cast<double>(k * j % (2 * m)) / m);
    }
    if (k == 0 || k == m) t.row(k) *= 0.5;
  }
  return t;
}

Eigen::MatrixXd cheb_vandermonde(int n) {
  const int m = n - 1;
  Eigen::MatrixXd v(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) v(j, k) = std::cos(pi * static_cast<double>(k * j % (2 * m)) / m);
  return v;
}

}  // namespace

ChebCoeffs2D cheb_transform(const Eigen::MatrixXd& values) {
  if (values.rows() < 2 || values.cols() < 2) {
    throw DomainError("cheb_transform needs at least a 2x2 grid");
  }
  const Eigen::MatrixXd tu = dct1_matrix(static_cast<int>(values.rows()));
  const Eigen::MatrixXd tv = dct1_matrix(static_cast<int>(values.cols()));
  return ChebCoeffs2D{tu * values * tv.transpose()};
}

Eigen::MatrixXd cheb_inverse(const ChebCoeffs2D& coeffs, int nu, int nv) {
  if (coeffs.a.rows() != nu || coeffs.a.cols() != nv) {
    throw DomainError("cheb_inverse: coefficient array does not match the requested grid");
  }
  return cheb_vandermonde(nu) * coeffs.a * cheb_vandermonde(nv).transpose();
}

double cheb_eval_1d(const double* c, int n, double x) {
  double b1 = 0.0, b2 = 0.0;
  for (int k = n - 1; k >= 1; --k) {
    const double b0 = 2.0 * x * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return x * b1 - b2 + c[0];
}

double cheb_eval(const ChebCoeffs2D& coeffs, double u, double v) {
  if (std::abs(u) > 1.0 || std::abs(v) > 1.0) {
    throw DomainError("cheb_eval: parameters outside [-1,1]^2");
  }
  const int nu = static_cast<int>(coeffs.a.rows());
  const int nv = static_cast<int>(coeffs.a.cols());
  Eigen::VectorXd inner(nu);
  for (int m = 0; m < nu; ++m) {
    Eigen::VectorXd row = coeffs.a.row(m).transpose();
    inner[m] = cheb_eval_1d(row.data(), nv, v);
  }
  return cheb_eval_1d(inner.data(), nu, u);
}

Eigen::MatrixXd cheb_diff(const Eigen::MatrixXd& values, Direction dir) {
  if (values.rows() < 2 || values.cols() < 2) {
    throw DomainError("cheb_diff needs at least a 2x2 grid");
  }
  if (dir == Direction::u) {
    NodeSet nodes(GridKind::closed, static_cast<int>(values.rows()));
    return nodes.diff_matrix() * values;
  }
  NodeSet nodes(GridKind::closed, static_cast<int>(values.cols()));
  return values * nodes.diff_matrix().transpose();
}

namespace {

GaussRule compute_gauss(int n) {
  GaussRule rule;
  rule.x.resize(static_cast<std::size_t>(n));
  rule.w.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.x[i] = -x;
    rule.x[n - 1 - i] = x;
    rule.w[i] = w;
    rule.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.x[n / 2] = 0.0;
  return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: order must be positive");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss(n)).first;
  return it->second;
}

}  // namespace cbie
