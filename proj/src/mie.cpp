#include "cbie/mie.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cbie/errors.hpp"

namespace cbie {

namespace {

Complex ipow(int n) {
  switch (n % 4) {
    case 1:
      return I;
    case 2:
      return -1.0;
    case 3:
      return -I;
    default:
      return 1.0;
  }
}

// j_0..j_nmax: downward recurrence normalised by j_0 or j_1.
std::vector<double> bessel_j(int nmax, double x) {
  std::vector<double> j(static_cast<std::size_t>(nmax) + 2);
  if (x < 1e-300) {
    j.assign(j.size(), 0.0);
    j[0] = 1.0;
    return j;
  }
  const int start = std::max(nmax, static_cast<int>(x)) + 20 + static_cast<int>(std::sqrt(40.0 * (nmax + x)));
  double next = 0.0, cur = 1e-300;
  std::vector<double> t(static_cast<std::size_t>(start) + 2, 0.0);
  for (int n = start; n >= 0; --n) {
    t[n] = cur;
    const double prev = (2.0 * n + 1.0) / x * cur - next;
    next = cur;
    cur = prev;
    if (std::abs(cur) > 1e250) {
      for (int m = n; m <= start; ++m) t[m] *= 1e-250;
      cur *= 1e-250;
      next *= 1e-250;
    }
  }
  const double j0 = std::sin(x) / x, j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  const double scale = std::abs(j0) > std::abs(j1) ? j0 / t[0] : j1 / t[1];
  for (int n = 0; n <= nmax + 1; ++n) j[n] = t[n] * scale;
  return j;
}

// y_0..y_nmax by upward recurrence.
std::vector<double> bessel_y(int nmax, double x) {
  std::vector<double> y(static_cast<std::size_t>(nmax) + 2);
  y[0] = -std::cos(x) / x;
  y[1] = -std::cos(x) / (x * x) - std::sin(x) / x;
  for (int n = 1; n <= nmax; ++n) y[n + 1] = (2.0 * n + 1.0) / x * y[n] - y[n - 1];
  return y;
}

std::vector<Complex> hankel(int nmax, double x) {
  const std::vector<double> j = bessel_j(nmax, x), y = bessel_y(nmax, x);
  std::vector<Complex> h(j.size());
  for (std::size_t n = 0; n < j.size(); ++n) h[n] = Complex(j[n], y[n]);
  return h;
}

}  // namespace

MieSeries::MieSeries(double diameter, const PlaneWave& pw, const Vec3& center, int max_order)
    : radius_(0.5 * diameter), k_(pw.medium.wavenumber), eta_(pw.medium.impedance), center_(center) {
  if (!(diameter > 0.0)) throw DomainError("Mie: diameter must be positive");
  if (max_order < 1) throw DomainError("Mie: max_order must be positive");
  pw.validate();

  // Pull a common phase out of the polarization so that it becomes real.
  int big = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(pw.polarization[i]) > std::abs(pw.polarization[big])) big = i;
  const Complex phase = pw.polarization[big] / std::abs(pw.polarization[big]);
  const CVec3 pr = pw.polarization / phase;
  if (pr.imag().norm() > 1e-12) throw DomainError("Mie: only linear polarization is supported");
  const Vec3 ex = pr.real().normalized();
  const Vec3 ez = pw.direction;
  rot_.row(0) = ex.transpose();
  rot_.row(1) = ez.cross(ex).transpose();
  rot_.row(2) = ez.transpose();
  e0_ = pw.amplitude * phase * std::polar(1.0, k_ * pw.direction.dot(center));

  const double x = k_ * radius_;
  const double wiscombe = x + 4.05 * std::cbrt(x) + 2.0;
  a_.assign(1, 0.0);
  b_.assign(1, 0.0);
  const std::vector<double> jx = bessel_j(max_order, x);
  const std::vector<Complex> hx = hankel(max_order, x);
  for (int n = 1;; ++n) {
    if (n > max_order) {
      std::ostringstream msg;
      msg << "Mie series did not converge within " << max_order << " terms (size parameter " << x << ")";
      throw ConvergenceError(msg.str());
    }
    const Complex h = hx[n], hm = hx[n - 1];
    const double j = jx[n], jm = jx[n - 1];
    const double psi = x * j, dpsi = x * jm - n * j;
    const Complex xi = x * h, dxi = x * hm - double(n) * h;
    a_.push_back(dpsi / dxi);
    b_.push_back(psi / xi);
    const double tail = (2.0 * n + 1.0) * n * n * (1.0 / std::abs(xi) + 1.0 / std::abs(dxi));
    if (n >= wiscombe && tail < 1e-15) break;
  }
}

void MieSeries::angular(double mu, std::vector<double>& p, std::vector<double>& t) const {
  const int nmax = order();
  p.assign(static_cast<std::size_t>(nmax) + 1, 0.0);
  t.assign(static_cast<std::size_t>(nmax) + 1, 0.0);
  if (nmax >= 1) p[1] = 1.0;
  for (int n = 2; n <= nmax; ++n) p[n] = ((2.0 * n - 1.0) * mu * p[n - 1] - n * p[n - 2]) / (n - 1.0);
  for (int n = 1; n <= nmax; ++n) t[n] = n * mu * p[n] - (n + 1.0) * p[n - 1];
}

MieFields MieSeries::fields(const Vec3& r, bool scattered) const {
  const Vec3 x = rot_ * (r - center_);
  const double rr = x.norm();
  if (!(rr > 0.0)) throw DomainError("Mie: field requested at the sphere centre");
  const double rho = k_ * rr;
  const double theta = std::acos(std::clamp(x[2] / rr, -1.0, 1.0));
  const double phi = std::atan2(x[1], x[0]);
  const double st = std::sin(theta), cp = std::cos(phi), sp = std::sin(phi);
  std::vector<double> pn, tn;
  angular(std::cos(theta), pn, tn);

  // Spherical components (r, theta, phi).
  Eigen::Vector3cd e = Eigen::Vector3cd::Zero(), h = Eigen::Vector3cd::Zero();
  std::vector<Complex> zs;
  if (scattered) {
    zs = hankel(order(), rho);
  } else {
    const std::vector<double> j = bessel_j(order(), rho);
    zs.assign(j.begin(), j.end());
  }
  for (int n = 1; n <= order(); ++n) {
    const Complex z = zs[n];
    const Complex dz = zs[n - 1] - double(n) * z / rho;
    const double nn = n * (n + 1.0);
    const Eigen::Vector3cd mo(0.0, cp * pn[n] * z, -sp * tn[n] * z);
    const Eigen::Vector3cd me(0.0, -sp * pn[n] * z, -cp * tn[n] * z);
    const Eigen::Vector3cd no(sp * nn * st * pn[n] * z / rho, sp * tn[n] * dz, cp * pn[n] * dz);
    const Eigen::Vector3cd ne(cp * nn * st * pn[n] * z / rho, cp * tn[n] * dz, -sp * pn[n] * dz);
    const Complex en = ipow(n) * (2.0 * n + 1.0) / nn;
    if (scattered) {
      e += en * (I * a_[n] * ne - b_[n] * mo);
      h += en * (I * b_[n] * no + a_[n] * me);
    } else {
      e += en * (mo - I * ne);
      h -= en * (me + I * no);
    }
  }
  const double ct = std::cos(theta);
  Mat3 basis;  // columns r-hat, theta-hat, phi-hat in the local frame
  basis.col(0) = Vec3(st * cp, st * sp, ct);
  basis.col(1) = Vec3(ct * cp, ct * sp, -st);
  basis.col(2) = Vec3(-sp, cp, 0.0);
  const Eigen::Matrix3cd to_global = (rot_.transpose() * basis).cast<Complex>();
  return {to_global * e * e0_, to_global * h * (e0_ / eta_)};
}

CVec3 MieSeries::surface_current(const Vec3& r) const {
  const Vec3 d = r - center_;
  if (!(d.norm() > 0.0)) throw DomainError("Mie: point at the sphere centre");
  const Vec3 n = d.normalized();
  const Vec3 rs = center_ + radius_ * n;
  const CVec3 h = fields(rs, false).h + fields(rs, true).h;
  return cross(n, h);
}

Complex MieSeries::s1(double theta) const {
  std::vector<double> pn, tn;
  angular(std::cos(theta), pn, tn);
  Complex s = 0.0;
  for (int n = 1; n <= order(); ++n) s += (2.0 * n + 1.0) / (n * (n + 1.0)) * (a_[n] * pn[n] + b_[n] * tn[n]);
  return s;
}

Complex MieSeries::s2(double theta) const {
  std::vector<double> pn, tn;
  angular(std::cos(theta), pn, tn);
  Complex s = 0.0;
  for (int n = 1; n <= order(); ++n) s += (2.0 * n + 1.0) / (n * (n + 1.0)) * (a_[n] * tn[n] + b_[n] * pn[n]);
  return s;
}

CVec3 MieSeries::far_field(const Vec3& direction) const {
  const Vec3 x = rot_ * direction.normalized();
  const double theta = std::acos(std::clamp(x[2], -1.0, 1.0));
  const double phi = std::atan2(x[1], x[0]);
  const double ct = std::cos(theta), st = std::sin(theta), cp = std::cos(phi), sp = std::sin(phi);
  const Vec3 th(ct * cp, ct * sp, -st), ph(-sp, cp, 0.0);
  const Complex ft = (I / k_) * cp * s2(theta), fp = -(I / k_) * sp * s1(theta);
  const CVec3 local = th.cast<Complex>() * ft + ph.cast<Complex>() * fp;
  // Phase of the incident wave at the centre is already in e0_; the far
  // field of a shifted sphere picks up e^{-ik r . c}.
  return (rot_.transpose().cast<Complex>() * local) * (e0_ * std::polar(1.0, -k_ * direction.normalized().dot(center_)));
}

double MieSeries::rcs(const Vec3& direction) const {
  return 4.0 * pi * far_field(direction).squaredNorm() / std::norm(e0_);
}

double MieSeries::scattering_cross_section() const {
  double s = 0.0;
  for (int n = 1; n <= order(); ++n) s += (2.0 * n + 1.0) * (std::norm(a_[n]) + std::norm(b_[n]));
  return 2.0 * pi / (k_ * k_) * s;
}

double MieSeries::extinction_cross_section() const {
  return 4.0 * pi / (k_ * k_) * s1(0.0).real();
}

}  // namespace cbie
