#pragma once

#include <string>

#include "cbie/geometry.hpp"
#include "cbie/spectral.hpp"

namespace cbie {

/// Patch defined by samples on the closed Chebyshev grid. Points and
/// derivatives are evaluated from the tensor interpolant; evaluation at a
/// grid node returns the stored sample exactly.
class InterpolatedPatch final : public PatchParametrization {
 public:
  /// samples[c] holds coordinate c as an nu x nv grid, rows indexed by u.
  InterpolatedPatch(const std::array<Eigen::MatrixXd, 3>& samples);
  PatchPoint eval(double u, double v) const override;
  int rows() const noexcept { return static_cast<int>(x_[0].rows()); }
  int cols() const noexcept { return static_cast<int>(x_[0].cols()); }

 private:
  std::array<Eigen::MatrixXd, 3> x_, xu_, xv_;
  NodeSet nodes_u_, nodes_v_;
};

/// Reads the PATCHSURF v1 text format. Throws ParseError (with byte offset)
/// for malformed input and ConformityError when shared edges disagree.
Surface load_surface(const std::string& path);
Surface parse_surface(const std::string& text);

/// Samples every patch on an n x n closed grid and writes PATCHSURF v1.
std::string format_surface(const Surface& surface, int n);
void save_surface(const Surface& surface, int n, const std::string& path);

}  // namespace cbie
