#include "mtebounds/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "mtebounds/errors.hpp"

namespace mtebounds {

std::string to_string(Variable v) {
  return v == Variable::Outcome ? "outcome" : "selection";
}

std::string to_string(FeasibleSet fs) {
  switch (fs) {
    case FeasibleSet::Nonnegative: return "nonnegative";
    case FeasibleSet::UnitBoxIncreasing: return "unit-box-increasing";
    case FeasibleSet::UnitBoxDecreasing: return "unit-box-decreasing";
    case FeasibleSet::UnitBox: return "unit-box";
    case FeasibleSet::Unrestricted: return "unrestricted";
  }
  return "?";
}

FeasibleSet default_feasible_set(Variable v, SelectionDirection dir) {
  if (v == Variable::Outcome) return FeasibleSet::Nonnegative;
  switch (dir) {
    case SelectionDirection::Increasing: return FeasibleSet::UnitBoxIncreasing;
    case SelectionDirection::Decreasing: return FeasibleSet::UnitBoxDecreasing;
    case SelectionDirection::Agnostic: return FeasibleSet::UnitBox;
  }
  return FeasibleSet::UnitBox;
}

namespace {

void check_unit_interval(double u, const char* what) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw validation_error(
        fmt::format("{} = {} outside [0, 1]", what, format_value(u)));
  }
}

void check_theta(const std::vector<double>& theta) {
  if (theta.empty()) {
    throw validation_error("coefficient vector is empty");
  }
}

}  // namespace

double bernstein_eval(const std::vector<double>& theta, double u) {
  check_theta(theta);
  check_unit_interval(u, "u");
  // de Casteljau: numerically stable convex combinations.
  std::vector<double> c(theta);
  for (std::size_t round = c.size() - 1; round > 0; --round) {
    for (std::size_t i = 0; i < round; ++i) {
      c[i] = (1.0 - u) * c[i] + u * c[i + 1];
    }
  }
  return c[0];
}

std::vector<double> bernstein_basis_integrals(int L, double p) {
  if (L < 1) throw validation_error("degree parameter L must be >= 1");
  check_unit_interval(p, "p");
  // Integral of basis element l of an L-coefficient curve over [0, p] equals
  // (1/L) * sum_{j > l} of the degree-(L) basis values at p.
  const int n1 = L;  // elevated degree
  std::vector<double> b(n1 + 1, 0.0);
  b[0] = 1.0;
  for (int deg = 1; deg <= n1; ++deg) {
    for (int j = deg; j >= 1; --j) {
      b[j] = p * b[j - 1] + (1.0 - p) * b[j];
    }
    b[0] *= (1.0 - p);
  }
  std::vector<double> integrals(L, 0.0);
  double suffix = 0.0;
  for (int l = L - 1; l >= 0; --l) {
    suffix += b[l + 1];
    integrals[l] = suffix / static_cast<double>(L);
  }
  return integrals;
}

double bernstein_integral(const std::vector<double>& theta, double p) {
  check_theta(theta);
  check_unit_interval(p, "p");
  // Antiderivative in elevated-degree form: coefficients are scaled prefix
  // sums, so the integral is itself a Bernstein evaluation.
  const std::size_t L = theta.size();
  std::vector<double> prefix(L + 1, 0.0);
  for (std::size_t l = 0; l < L; ++l) prefix[l + 1] = prefix[l] + theta[l];
  for (auto& v : prefix) v /= static_cast<double>(L);
  return bernstein_eval(prefix, p);
}

double bernstein_cell_mean(const std::vector<double>& theta, double p,
                           int arm) {
  check_theta(theta);
  check_unit_interval(p, "p");
  if (arm != 0 && arm != 1) {
    throw validation_error(fmt::format("arm must be 0 or 1, got {}", arm));
  }
  if (arm == 1) {
    if (p < kGuardEps) {
      throw validation_error(
          fmt::format("treated cell mean undefined at p = {}", format_value(p)));
    }
    return bernstein_integral(theta, p) / p;
  }
  if (1.0 - p < kGuardEps) {
    throw validation_error(
        fmt::format("untreated cell mean undefined at p = {}", format_value(p)));
  }
  double total = 0.0;
  for (double t : theta) total += t;
  total /= static_cast<double>(theta.size());
  return (total - bernstein_integral(theta, p)) / (1.0 - p);
}

ThetaPair map_ols_to_theta(const OlsCoefficients& ols) {
  ThetaPair pair;
  pair.theta0 = {ols.a0 - ols.b0, ols.a0 + ols.b0};
  pair.theta1 = {ols.a1, ols.a1 + 2.0 * ols.b1};
  return pair;
}

OlsCoefficients map_theta_to_ols(const ThetaPair& pair) {
  if (pair.theta0.size() != 2 || pair.theta1.size() != 2) {
    throw validation_error("linear reparameterization requires L = 2");
  }
  OlsCoefficients ols;
  ols.a0 = 0.5 * (pair.theta0[0] + pair.theta0[1]);
  ols.b0 = 0.5 * (pair.theta0[1] - pair.theta0[0]);
  ols.a1 = pair.theta1[0];
  ols.b1 = 0.5 * (pair.theta1[1] - pair.theta1[0]);
  return ols;
}

double BernsteinMTR::eval(int arm, double u) const {
  if (arm != 0 && arm != 1) {
    throw validation_error(fmt::format("arm must be 0 or 1, got {}", arm));
  }
  return bernstein_eval(arm == 0 ? theta0 : theta1, u);
}

double BernsteinMTR::cell_mean(int arm, double p) const {
  return bernstein_cell_mean(arm == 0 ? theta0 : theta1, p, arm);
}

double BernsteinMTR::average(int arm) const {
  if (arm != 0 && arm != 1) {
    throw validation_error(fmt::format("arm must be 0 or 1, got {}", arm));
  }
  const auto& theta = arm == 0 ? theta0 : theta1;
  check_theta(theta);
  double total = 0.0;
  for (double t : theta) total += t;
  return total / static_cast<double>(theta.size());
}

std::vector<CellMoment> cell_moments(const Sample& sample,
                                     const PropensityTable& propensity,
                                     Variable variable,
                                     CellWeighting weighting) {
  std::map<std::pair<int, double>, std::pair<double, double>> acc;
  for (const auto& r : sample.records) {
    const double p = propensity.p_for_z(r.z);
    const double a =
        variable == Variable::Outcome ? r.y : static_cast<double>(r.s);
    auto& [w_sum, wa_sum] = acc[{r.d, p}];
    w_sum += r.w;
    wa_sum += r.w * a;
  }
  double total_weight = 0.0;
  for (const auto& [key, sums] : acc) total_weight += sums.first;
  std::vector<CellMoment> cells;
  cells.reserve(acc.size());
  for (const auto& [key, sums] : acc) {
    CellMoment cell;
    cell.arm = key.first;
    cell.p = key.second;
    cell.mean = sums.second / sums.first;
    cell.weight = weighting == CellWeighting::SampleShare
                      ? sums.first / total_weight
                      : 1.0;
    cells.push_back(cell);
  }
  return cells;
}

namespace {

// One candidate active set, encoded per coordinate pair l as the equalities
// it pins: fix a coefficient at a box face and/or tie the arms together.
struct CoordinatePattern {
  int fix0 = -1;     // -1 free, otherwise the face value index (0 -> lo, 1 -> hi)
  int fix1 = -1;
  bool tie = false;  // theta1[l] == theta0[l]
};

std::vector<CoordinatePattern> coordinate_patterns(FeasibleSet fs) {
  std::vector<CoordinatePattern> out;
  switch (fs) {
    case FeasibleSet::Unrestricted:
      out.push_back({});
      break;
    case FeasibleSet::Nonnegative:
      out.push_back({});
      out.push_back({0, -1, false});
      out.push_back({-1, 0, false});
      out.push_back({0, 0, false});
      break;
    case FeasibleSet::UnitBox:
    case FeasibleSet::UnitBoxIncreasing:
    case FeasibleSet::UnitBoxDecreasing:
      for (int f0 : {-1, 0, 1}) {
        for (int f1 : {-1, 0, 1}) {
          if (fs == FeasibleSet::UnitBoxIncreasing && f0 == 1 && f1 == 0) {
            continue;  // contradicts the ordering, never an optimum
          }
          if (fs == FeasibleSet::UnitBoxDecreasing && f0 == 0 && f1 == 1) {
            continue;
          }
          out.push_back({f0, f1, false});
        }
      }
      if (fs != FeasibleSet::UnitBox) {
        out.push_back({-1, -1, true});
        out.push_back({0, -1, true});
        out.push_back({1, -1, true});
        out.push_back({-1, 0, true});
        out.push_back({-1, 1, true});
      }
      break;
  }
  return out;
}

double face_value(FeasibleSet fs, int face) {
  if (face == 0) return 0.0;
  // Nonnegative has no upper face; patterns never request one there.
  (void)fs;
  return 1.0;
}

bool feasible_point(const Eigen::VectorXd& x, int L, FeasibleSet fs) {
  const double tol = kActiveTol;
  switch (fs) {
    case FeasibleSet::Unrestricted:
      return true;
    case FeasibleSet::Nonnegative:
      return (x.array() >= -tol).all();
    case FeasibleSet::UnitBox:
    case FeasibleSet::UnitBoxIncreasing:
    case FeasibleSet::UnitBoxDecreasing: {
      if (!((x.array() >= -tol).all() && (x.array() <= 1.0 + tol).all())) {
        return false;
      }
      if (fs == FeasibleSet::UnitBox) return true;
      for (int l = 0; l < L; ++l) {
        const double gap = x[L + l] - x[l];
        if (fs == FeasibleSet::UnitBoxIncreasing && gap < -tol) return false;
        if (fs == FeasibleSet::UnitBoxDecreasing && gap > tol) return false;
      }
      return true;
    }
  }
  return false;
}

// Minimizes ||W^(1/2)(A x - b)|| subject to E x = f; among minimizers picks
// the one with the smallest Euclidean norm.
bool solve_pattern(const Eigen::MatrixXd& wa, const Eigen::VectorXd& wb,
                   const Eigen::MatrixXd& e, const Eigen::VectorXd& f,
                   Eigen::VectorXd& x_out) {
  const int dim = static_cast<int>(wa.cols());
  if (e.rows() == 0) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(wa);
    x_out = cod.solve(wb);
    return true;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(e);
  Eigen::VectorXd xp = lu.solve(f);
  if ((e * xp - f).cwiseAbs().maxCoeff() > 1e-9) return false;
  Eigen::MatrixXd kernel = lu.kernel();
  if (lu.rank() == dim) {
    x_out = xp;
    return true;
  }
  const Eigen::MatrixXd reduced = wa * kernel;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(reduced);
  Eigen::VectorXd xi = cod.solve(wb - wa * xp);
  Eigen::VectorXd x = xp + kernel * xi;
  if (cod.rank() < reduced.cols()) {
    // The reduced problem is itself degenerate; shift along its null space
    // to the minimum-norm representative.
    Eigen::FullPivLU<Eigen::MatrixXd> lu2(reduced);
    const Eigen::MatrixXd null2 = kernel * lu2.kernel();
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod2(null2);
    x -= null2 * cod2.solve(x);
  }
  x_out = x;
  return true;
}

}  // namespace

FitResult fit_constrained_cells(const std::vector<CellMoment>& cells,
                                Variable variable, int L, FeasibleSet fs) {
  if (L < 1) throw validation_error("degree parameter L must be >= 1");
  if (cells.empty()) {
    throw validation_error("no propensity cells to fit against");
  }
  std::set<double> distinct_p;
  std::set<double> per_arm_p[2];
  for (const auto& c : cells) {
    if (c.arm != 0 && c.arm != 1) {
      throw validation_error(fmt::format("cell arm must be 0 or 1, got {}", c.arm));
    }
    if (!(c.weight > 0.0)) {
      throw validation_error("cell weights must be strictly positive");
    }
    distinct_p.insert(c.p);
    per_arm_p[c.arm].insert(c.p);
  }
  const int n_points = static_cast<int>(distinct_p.size());
  if (n_points < 2) {
    throw validation_error(fmt::format(
        "insufficient variation: {} distinct propensity value(s), need >= 2",
        n_points));
  }
  if (L > n_points) {
    throw validation_error(
        fmt::format("degree L = {} exceeds the {} distinct propensity points",
                    L, n_points));
  }
  for (int arm = 0; arm < 2; ++arm) {
    if (static_cast<int>(per_arm_p[arm].size()) < L) {
      throw validation_error(fmt::format(
          "rank: arm {} has {} distinct propensity value(s), degree L = {} "
          "needs at least L",
          arm, per_arm_p[arm].size(), L));
    }
  }

  // Stacked weighted design over (theta0 | theta1).
  const int dim = 2 * L;
  const int n_cells = static_cast<int>(cells.size());
  Eigen::MatrixXd wa = Eigen::MatrixXd::Zero(n_cells, dim);
  Eigen::VectorXd wb(n_cells);
  for (int c = 0; c < n_cells; ++c) {
    const auto& cell = cells[c];
    const double sw = std::sqrt(cell.weight);
    const auto integrals = bernstein_basis_integrals(L, cell.p);
    for (int l = 0; l < L; ++l) {
      double coeff;
      if (cell.arm == 1) {
        coeff = integrals[l] / cell.p;
      } else {
        coeff = (1.0 / L - integrals[l]) / (1.0 - cell.p);
      }
      wa(c, (cell.arm == 0 ? 0 : L) + l) = sw * coeff;
    }
    wb(c) = sw * cell.mean;
  }

  const auto patterns = coordinate_patterns(fs);
  const double per_coord = static_cast<double>(patterns.size());
  if (std::pow(per_coord, L) > 1e7) {
    throw numeric_error(fmt::format(
        "degree L = {} with feasible set {} needs {:.0f} active-set "
        "candidates; reduce L",
        L, to_string(fs), std::pow(per_coord, L)));
  }

  // Candidate enumeration: every combination of per-coordinate patterns.
  std::vector<std::size_t> counter(L, 0);
  bool have_best = false;
  double best_obj = 0.0, best_norm = 0.0;
  Eigen::VectorXd best_x;

  auto consider = [&](const Eigen::VectorXd& x) {
    if (!feasible_point(x, L, fs)) return;
    const double obj = (wa * x - wb).squaredNorm();
    const double norm = x.squaredNorm();
    const double tol = 1e-12 * std::max(1.0, std::abs(best_obj));
    if (!have_best || obj < best_obj - tol ||
        (obj <= best_obj + tol && norm < best_norm - 1e-15)) {
      have_best = true;
      best_obj = obj;
      best_norm = norm;
      best_x = x;
    }
  };

  // Unconstrained first: when feasible it is the global optimum and the
  // enumeration can stop immediately (the objective is convex).
  {
    Eigen::VectorXd x;
    Eigen::MatrixXd e(0, dim);
    Eigen::VectorXd f(0);
    if (solve_pattern(wa, wb, e, f, x) && feasible_point(x, L, fs)) {
      consider(x);
    }
  }

  if (!have_best) {
    while (true) {
      // Assemble E x = f for this combination.
      int k = 0;
      for (int l = 0; l < L; ++l) {
        const auto& pat = patterns[counter[l]];
        k += (pat.fix0 >= 0) + (pat.fix1 >= 0) + (pat.tie ? 1 : 0);
      }
      if (k > 0) {
        Eigen::MatrixXd e = Eigen::MatrixXd::Zero(k, dim);
        Eigen::VectorXd f = Eigen::VectorXd::Zero(k);
        int row = 0;
        for (int l = 0; l < L; ++l) {
          const auto& pat = patterns[counter[l]];
          if (pat.fix0 >= 0) {
            e(row, l) = 1.0;
            f(row) = face_value(fs, pat.fix0);
            ++row;
          }
          if (pat.fix1 >= 0) {
            e(row, L + l) = 1.0;
            f(row) = face_value(fs, pat.fix1);
            ++row;
          }
          if (pat.tie) {
            e(row, L + l) = 1.0;
            e(row, l) = -1.0;
            ++row;
          }
        }
        Eigen::VectorXd x;
        if (solve_pattern(wa, wb, e, f, x)) consider(x);
      }
      // Advance the mixed-radix counter.
      int pos = 0;
      while (pos < L) {
        if (++counter[pos] < patterns.size()) break;
        counter[pos] = 0;
        ++pos;
      }
      if (pos == L) break;
    }
  }

  if (!have_best) {
    throw numeric_error("constrained fit found no feasible candidate");
  }

  FitResult result;
  result.mtr.L = L;
  result.mtr.variable = variable;
  result.mtr.feasible_set = fs;
  result.mtr.theta0.assign(best_x.data(), best_x.data() + L);
  result.mtr.theta1.assign(best_x.data() + L, best_x.data() + dim);
  result.objective = best_obj;

  // Report which shape constraints are active at the solution.
  auto mark = [&result](bool active, const std::string& what) {
    if (active) {
      ++result.n_active;
      result.active.push_back(what);
    }
  };
  for (int l = 0; l < L; ++l) {
    const double t0 = result.mtr.theta0[l];
    const double t1 = result.mtr.theta1[l];
    switch (fs) {
      case FeasibleSet::Unrestricted:
        break;
      case FeasibleSet::Nonnegative:
        mark(std::abs(t0) <= kActiveTol, fmt::format("theta0[{}] == 0", l));
        mark(std::abs(t1) <= kActiveTol, fmt::format("theta1[{}] == 0", l));
        break;
      case FeasibleSet::UnitBox:
      case FeasibleSet::UnitBoxIncreasing:
      case FeasibleSet::UnitBoxDecreasing:
        mark(std::abs(t0) <= kActiveTol, fmt::format("theta0[{}] == 0", l));
        mark(std::abs(t0 - 1.0) <= kActiveTol, fmt::format("theta0[{}] == 1", l));
        mark(std::abs(t1) <= kActiveTol, fmt::format("theta1[{}] == 0", l));
        mark(std::abs(t1 - 1.0) <= kActiveTol, fmt::format("theta1[{}] == 1", l));
        if (fs != FeasibleSet::UnitBox) {
          mark(std::abs(t1 - t0) <= kActiveTol,
               fmt::format("theta1[{}] == theta0[{}]", l, l));
        }
        break;
    }
  }
  return result;
}

FitResult fit_constrained(const Sample& sample,
                          const PropensityTable& propensity, Variable variable,
                          int L, FeasibleSet fs, CellWeighting weighting) {
  return fit_constrained_cells(cell_moments(sample, propensity, variable, weighting),
                               variable, L, fs);
}

}  // namespace mtebounds
