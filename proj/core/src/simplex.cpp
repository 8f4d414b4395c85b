#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "mtebounds/errors.hpp"

namespace mtebounds::lp {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-8;
constexpr double kInfVal = std::numeric_limits<double>::infinity();

enum class VarState : signed char { Basic, AtLower, AtUpper };

struct Workspace {
  Eigen::MatrixXd A;   // structural plus artificial columns
  Eigen::VectorXd b;
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
  Eigen::VectorXd x;
  std::vector<int> basis;       // variable index per row
  std::vector<VarState> state;  // per variable
  int iterations = 0;

  Eigen::Index rows() const { return A.rows(); }
  Eigen::Index cols() const { return A.cols(); }
};

// Recomputes the basic values from the nonbasic bounds so roundoff never
// accumulates across pivots. Returns the LU factor of the basis for reuse.
Eigen::PartialPivLU<Eigen::MatrixXd> refresh_basics(Workspace& w) {
  const Eigen::Index m = w.rows();
  Eigen::MatrixXd basis_cols(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    basis_cols.col(r) = w.A.col(w.basis[static_cast<std::size_t>(r)]);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_cols);

  Eigen::VectorXd rhs = w.b;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    if (w.state[static_cast<std::size_t>(j)] == VarState::Basic) continue;
    if (w.x[j] != 0.0) rhs -= w.A.col(j) * w.x[j];
  }
  const Eigen::VectorXd xb = lu.solve(rhs);
  for (Eigen::Index r = 0; r < m; ++r)
    w.x[w.basis[static_cast<std::size_t>(r)]] = xb[r];
  return lu;
}

struct PhaseResult {
  bool optimal = false;    // false means unbounded in the phase objective
  double objective = 0.0;
  Eigen::VectorXd duals;   // y at the final basis
  Eigen::VectorXd reduced; // reduced costs at the final basis
};

// One simplex phase under Bland's rule. `cost` spans every column of the
// workspace including artificials.
PhaseResult run_phase(Workspace& w, const Eigen::VectorXd& cost,
                      int max_iterations) {
  const Eigen::Index m = w.rows();
  const Eigen::Index n = w.cols();

  for (;;) {
    if (++w.iterations > max_iterations)
      throw numeric_error("simplex iteration limit exceeded");

    Eigen::PartialPivLU<Eigen::MatrixXd> lu = refresh_basics(w);

    Eigen::VectorXd cb(m);
    for (Eigen::Index r = 0; r < m; ++r)
      cb[r] = cost[w.basis[static_cast<std::size_t>(r)]];
    const Eigen::VectorXd y = lu.transpose().solve(cb);

    Eigen::VectorXd reduced = cost - w.A.transpose() * y;

    // Bland: smallest improving nonbasic index enters.
    Eigen::Index entering = -1;
    bool from_lower = true;
    for (Eigen::Index j = 0; j < n; ++j) {
      const VarState st = w.state[static_cast<std::size_t>(j)];
      if (st == VarState::Basic) continue;
      if (w.lo[j] == w.hi[j]) continue;  // fixed, can never move
      if (st == VarState::AtLower && reduced[j] < -kCostTol) {
        entering = j;
        from_lower = true;
        break;
      }
      if (st == VarState::AtUpper && reduced[j] > kCostTol) {
        entering = j;
        from_lower = false;
        break;
      }
    }

    if (entering < 0) {
      PhaseResult out;
      out.optimal = true;
      out.objective = cost.dot(w.x);
      out.duals = y;
      out.reduced = reduced;
      return out;
    }

    // Basic values move along -dir * t when the entering variable rises by
    // t from its lower bound (sign flipped when descending from the upper).
    const Eigen::VectorXd dir = lu.solve(w.A.col(entering));
    const double sign = from_lower ? 1.0 : -1.0;

    // Ratio test. Ties within tolerance go to the smallest variable index
    // (Bland again); the entering variable's own far bound competes too and
    // wins as a bound flip.
    double best_t = kInfVal;
    Eigen::Index best_row = -1;  // -1 means bound flip
    bool leaving_to_lower = true;
    int best_var = std::numeric_limits<int>::max();

    if (std::isfinite(w.hi[entering])) {
      best_t = w.hi[entering] - w.lo[entering];
      best_var = static_cast<int>(entering);
    }

    for (Eigen::Index r = 0; r < m; ++r) {
      const int var = w.basis[static_cast<std::size_t>(r)];
      const double delta = -sign * dir[r];  // d x_var / d t
      double t = kInfVal;
      bool to_lower = true;
      if (delta < -kPivotTol) {
        t = std::max(w.x[var] - w.lo[var], 0.0) / (-delta);
      } else if (delta > kPivotTol && std::isfinite(w.hi[var])) {
        t = std::max(w.hi[var] - w.x[var], 0.0) / delta;
        to_lower = false;
      } else {
        continue;
      }
      if (t < best_t - 1e-12 || (t <= best_t + 1e-12 && var < best_var)) {
        best_t = std::min(best_t, t);
        best_row = r;
        leaving_to_lower = to_lower;
        best_var = var;
      }
    }

    if (!std::isfinite(best_t)) {
      PhaseResult out;
      out.optimal = false;
      out.objective = -kInfVal;
      out.duals = y;
      out.reduced = reduced;
      return out;
    }

    const double t = std::max(best_t, 0.0);
    w.x[entering] = from_lower ? w.lo[entering] + t : w.hi[entering] - t;
    for (Eigen::Index r = 0; r < m; ++r)
      w.x[w.basis[static_cast<std::size_t>(r)]] += -sign * dir[r] * t;

    if (best_row < 0) {
      // Bound flip: the entering variable crossed to its other bound.
      w.state[static_cast<std::size_t>(entering)] =
          from_lower ? VarState::AtUpper : VarState::AtLower;
      w.x[entering] = from_lower ? w.hi[entering] : w.lo[entering];
      continue;
    }

    const int leaving = w.basis[static_cast<std::size_t>(best_row)];
    w.x[leaving] = leaving_to_lower ? w.lo[leaving] : w.hi[leaving];
    w.state[static_cast<std::size_t>(leaving)] =
        leaving_to_lower ? VarState::AtLower : VarState::AtUpper;
    w.basis[static_cast<std::size_t>(best_row)] = static_cast<int>(entering);
    w.state[static_cast<std::size_t>(entering)] = VarState::Basic;
  }
}

void validate_program(const LinearProgram& lp) {
  const Eigen::Index m = lp.A.rows();
  const Eigen::Index n = lp.A.cols();
  if (m < 1 || n < 1) throw validation_error("empty linear program");
  if (lp.b.size() != m || lp.c.size() != n || lp.lo.size() != n ||
      lp.hi.size() != n)
    throw validation_error("linear program dimensions are inconsistent");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!std::isfinite(lp.lo[j]))
      throw validation_error("lower bounds must be finite");
    if (lp.hi[j] < lp.lo[j] - 1e-12)
      throw validation_error(
          fmt::format("variable {} has upper bound below lower bound", j));
  }
  for (Eigen::Index i = 0; i < m; ++i)
    if (!std::isfinite(lp.b[i]))
      throw validation_error("constraint right-hand side must be finite");
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp) {
  validate_program(lp);
  const Eigen::Index m = lp.A.rows();
  const Eigen::Index n = lp.A.cols();
  const int max_iterations = 50000 + 200 * static_cast<int>(n + m);

  // Start every structural variable on its lower bound and absorb the
  // residual into one artificial per row.
  Workspace w;
  w.A.resize(m, n + m);
  w.A.leftCols(n) = lp.A;
  w.b = lp.b;
  w.lo.resize(n + m);
  w.hi.resize(n + m);
  w.x.resize(n + m);
  w.lo.head(n) = lp.lo;
  w.hi.head(n) = lp.hi;
  w.state.assign(static_cast<std::size_t>(n + m), VarState::AtLower);
  w.basis.resize(static_cast<std::size_t>(m));

  Eigen::VectorXd residual = lp.b - lp.A * lp.lo;
  w.x.head(n) = lp.lo;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double s = residual[i] >= 0.0 ? 1.0 : -1.0;
    w.A.col(n + i) = Eigen::VectorXd::Unit(m, i) * s;
    w.lo[n + i] = 0.0;
    w.hi[n + i] = kInfVal;
    w.x[n + i] = std::abs(residual[i]);
    w.basis[static_cast<std::size_t>(i)] = static_cast<int>(n + i);
    w.state[static_cast<std::size_t>(n + i)] = VarState::Basic;
  }

  Eigen::VectorXd phase1_cost = Eigen::VectorXd::Zero(n + m);
  phase1_cost.tail(m).setOnes();
  const PhaseResult p1 = run_phase(w, phase1_cost, max_iterations);
  const double scale_b = std::max(1.0, lp.b.cwiseAbs().maxCoeff());

  if (!p1.optimal || p1.objective > kFeasTol * scale_b) {
    LpSolution out;
    out.status = LpStatus::Infeasible;
    out.x = w.x.head(n);
    out.objective = lp.c.dot(out.x);
    out.max_violation = (lp.A * out.x - lp.b).cwiseAbs().maxCoeff();
    out.iterations = w.iterations;
    return out;
  }

  // Pin artificials to zero for phase 2. Those still basic sit on redundant
  // rows and simply stay at zero.
  for (Eigen::Index i = 0; i < m; ++i) {
    w.lo[n + i] = 0.0;
    w.hi[n + i] = 0.0;
    w.x[n + i] = 0.0;
  }

  Eigen::VectorXd phase2_cost = Eigen::VectorXd::Zero(n + m);
  phase2_cost.head(n) = lp.c;
  const PhaseResult p2 = run_phase(w, phase2_cost, max_iterations);

  LpSolution out;
  out.iterations = w.iterations;
  out.x = w.x.head(n);
  out.objective = lp.c.dot(out.x);
  out.max_violation = (lp.A * out.x - lp.b).cwiseAbs().maxCoeff();

  if (!p2.optimal) {
    out.status = LpStatus::Unbounded;
    return out;
  }

  // Weak-duality certificate under variable bounds: nonbasic variables
  // contribute their reduced cost at the bound they rest on.
  double dual = p2.duals.dot(lp.b);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (w.state[static_cast<std::size_t>(j)] == VarState::AtLower &&
        p2.reduced[j] > 0.0)
      dual += p2.reduced[j] * lp.lo[j];
    else if (w.state[static_cast<std::size_t>(j)] == VarState::AtUpper &&
             p2.reduced[j] < 0.0)
      dual += p2.reduced[j] * lp.hi[j];
  }
  out.status = LpStatus::Optimal;
  out.duality_gap = std::abs(out.objective - dual);
  return out;
}

}  // namespace mtebounds::lp
