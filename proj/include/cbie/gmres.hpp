#pragma once

#include <functional>
#include <vector>

#include "cbie/types.hpp"

namespace cbie {

struct GmresOptions {
  double tol = 1e-6;
  int restart = 200;
  int max_iter = 1000;
};

struct SolveReport {
  VectorXc solution;
  int iterations = 0;
  /// Relative residual after every iteration, starting with the initial one (1).
  std::vector<double> history;
  /// Iteration indices at which a restart cycle began.
  std::vector<int> restarts;
  bool converged = false;
  /// True relative residual of the returned solution.
  double residual = 0.0;
};

using ApplyFn = std::function<VectorXc(const VectorXc&)>;

/// Restarted GMRES with modified Gram-Schmidt plus one reorthogonalization
/// pass, Givens rotations and a zero initial guess.
SolveReport gmres(const ApplyFn& apply, const VectorXc& rhs, const GmresOptions& options = {});

}  // namespace cbie
