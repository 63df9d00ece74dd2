#include "cbie/gmres.hpp"

#include <cmath>

#include "cbie/errors.hpp"

namespace cbie {

namespace {

void givens(Complex a, Complex b, double& c, Complex& s) {
  const double na = std::abs(a), nb = std::abs(b);
  if (nb == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  if (na == 0.0) {
    c = 0.0;
    s = std::conj(b) / nb;
    return;
  }
  const double r = std::hypot(na, nb);
  c = na / r;
  s = (a / na) * std::conj(b) / r;
}

}  // namespace

SolveReport gmres(const ApplyFn& apply, const VectorXc& rhs, const GmresOptions& options) {
  if (!(options.tol > 0.0 && options.tol < 1.0)) throw DomainError("gmres: tol must lie in (0, 1)");
  if (options.restart < 1) throw DomainError("gmres: restart must be positive");
  if (options.max_iter < 0) throw DomainError("gmres: max_iter must be non-negative");
  const Eigen::Index n = rhs.size();
  SolveReport rep;
  rep.solution = VectorXc::Zero(n);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) {
    rep.converged = true;
    rep.history.push_back(0.0);
    return rep;
  }
  const int m = options.restart;
  VectorXc x = VectorXc::Zero(n);
  VectorXc r = rhs;
  double beta = bnorm;
  rep.history.push_back(1.0);

  while (true) {
    if (beta / bnorm <= options.tol) {
      rep.converged = true;
      break;
    }
    if (rep.iterations >= options.max_iter) break;
    rep.restarts.push_back(rep.iterations);
    std::vector<VectorXc> v;
    v.reserve(static_cast<std::size_t>(m) + 1);
    v.push_back(r / beta);
    MatrixXc h = MatrixXc::Zero(m + 1, m);
    std::vector<double> cs(static_cast<std::size_t>(m));
    std::vector<Complex> sn(static_cast<std::size_t>(m));
    VectorXc g = VectorXc::Zero(m + 1);
    g[0] = beta;
    int j = 0;
    bool breakdown = false;
    for (; j < m && rep.iterations < options.max_iter; ++j) {
      VectorXc w = apply(v[j]);
      if (w.size() != n) throw DomainError("gmres: operator changed the vector size");
      const double wnorm0 = w.norm();
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const Complex hij = v[i].dot(w);
          h(i, j) += hij;
          w -= hij * v[i];
        }
      }
      const double hn = w.norm();
      h(j + 1, j) = hn;
      for (int i = 0; i < j; ++i) {
        const Complex t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
        h(i + 1, j) = -std::conj(sn[i]) * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = t;
      }
      givens(h(j, j), h(j + 1, j), cs[j], sn[j]);
      h(j, j) = cs[j] * h(j, j) + sn[j] * h(j + 1, j);
      h(j + 1, j) = 0.0;
      g[j + 1] = -std::conj(sn[j]) * g[j];
      g[j] = cs[j] * g[j];
      ++rep.iterations;
      rep.history.push_back(std::abs(g[j + 1]) / bnorm);
      if (hn <= 1e-14 * std::max(wnorm0, 1e-300)) {
        breakdown = true;
        ++j;
        break;
      }
      if (std::abs(g[j + 1]) / bnorm <= options.tol) {
        ++j;
        break;
      }
      v.push_back(w / hn);
    }
    if (j > 0) {
      const VectorXc y = h.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
      for (int i = 0; i < j; ++i) x += y[i] * v[i];
    }
    r = rhs - apply(x);
    beta = r.norm();
    if (breakdown && beta / bnorm > options.tol) break;
  }
  rep.solution = x;
  rep.residual = beta / bnorm;
  rep.converged = rep.residual <= options.tol;
  return rep;
}

}  // namespace cbie
