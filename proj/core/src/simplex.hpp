#pragma once

#include <Eigen/Dense>

// Dense two-phase simplex for small equality-form programs with variable
// bounds:  minimize c'x  subject to  A x = b,  lo <= x <= hi.  Lower bounds
// must be finite; upper bounds may be +inf. Bland's rule on both the entering
// and leaving choices guarantees termination, and nonbasic variables rest on
// either bound with flips handled inside the ratio test. The basis is
// refactorized every iteration, which is cheap at the sizes used here (a few
// dozen rows at most) and keeps the iterates tight against the constraints.
//
// Internal to the library; the public surface exposes only the results.

namespace mtebounds::lp {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LinearProgram {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

struct LpSolution {
  LpStatus status = LpStatus::Optimal;
  Eigen::VectorXd x;         // structural variables (meaningful when Optimal)
  double objective = 0.0;    // c'x at the returned point
  double duality_gap = 0.0;  // |primal - dual| optimality certificate
  double max_violation = 0.0;  // worst equality residual of the final point
  int iterations = 0;
};

LpSolution solve_lp(const LinearProgram& lp);

}  // namespace mtebounds::lp
