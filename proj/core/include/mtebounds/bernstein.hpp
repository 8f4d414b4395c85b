#pragma once

#include <string>
#include <vector>

#include "mtebounds/sample.hpp"
#include "mtebounds/types.hpp"

// Bernstein-basis marginal treatment response curves: evaluation, exact
// integrals, the bijection with arm-wise linear regressions at L = 2, and the
// shape-constrained least squares fit against propensity-cell means.

namespace mtebounds {

enum class Variable { Outcome, Selection };

enum class FeasibleSet {
  Nonnegative,         // coefficients >= 0 (outcome scale with y >= 0)
  UnitBoxIncreasing,   // coefficients in [0,1], treated >= untreated per index
  UnitBoxDecreasing,   // coefficients in [0,1], untreated >= treated per index
  UnitBox,             // coefficients in [0,1], arms unordered
  Unrestricted,
};

std::string to_string(Variable);
std::string to_string(FeasibleSet);

// Natural feasible set: outcome curves are nonnegative, selection curves live
// in the unit box ordered by the assumed selection direction.
FeasibleSet default_feasible_set(Variable, SelectionDirection);

// Value of sum_l theta_l * C(L-1, l) u^l (1-u)^(L-1-l); de Casteljau
// evaluation. Domain error outside [0, 1].
double bernstein_eval(const std::vector<double>& theta, double u);

// Exact integral over [0, p] via degree elevation of the antiderivative.
double bernstein_integral(const std::vector<double>& theta, double p);

// Integrals of the L basis polynomials over [0, p], exact closed form.
std::vector<double> bernstein_basis_integrals(int L, double p);

// Average over a propensity cell: untreated arm (d = 0) integrates over
// (p, 1], treated arm (d = 1) over [0, p]. Domain error when the cell is
// empty (p == 1 untreated, p == 0 treated).
double bernstein_cell_mean(const std::vector<double>& theta, double p, int arm);

struct OlsCoefficients {
  double a0 = 0.0, b0 = 0.0;  // untreated-arm intercept and slope in p
  double a1 = 0.0, b1 = 0.0;  // treated-arm intercept and slope in p
};

struct ThetaPair {
  std::vector<double> theta0, theta1;
};

// Exact L = 2 reparameterization between arm-wise linear cell-mean
// regressions and Bernstein coefficients, and its inverse.
ThetaPair map_ols_to_theta(const OlsCoefficients&);
OlsCoefficients map_theta_to_ols(const ThetaPair&);

struct BernsteinMTR {
  int L = 0;
  std::vector<double> theta0, theta1;
  Variable variable = Variable::Outcome;
  FeasibleSet feasible_set = FeasibleSet::Unrestricted;

  double eval(int arm, double u) const;
  double cell_mean(int arm, double p) const;
  // Integral over [0, 1]; equals the coefficient average.
  double average(int arm) const;
};

// A pair of curves for the same population: outcome-scale (selection-weighted
// outcome level) and selection-scale (observation probability).
struct MTRSet {
  BernsteinMTR outcome;
  BernsteinMTR selection;
};

// One regression target: the weighted mean of a variable over a propensity
// cell (arm, p) with its weight in the least squares objective.
struct CellMoment {
  int arm = 0;
  double p = 0.0;
  double mean = 0.0;
  double weight = 1.0;
};

enum class CellWeighting {
  SampleShare,  // cells weighted by their total sampling weight
  Equal,        // every (arm, p) cell counts once
};

// Propensity-cell means of the chosen variable (outcome level y or selection
// indicator s), one row per (arm, distinct p).
std::vector<CellMoment> cell_moments(const Sample&, const PropensityTable&,
                                     Variable, CellWeighting);

struct FitResult {
  BernsteinMTR mtr;
  double objective = 0.0;           // weighted cell-mean SSR at the solution
  int n_active = 0;                 // active inequality constraints
  std::vector<std::string> active;  // their descriptions
};

// Weighted least squares over cell means subject to the feasible set, solved
// exactly by enumerating candidate active sets of the shape constraints.
// Ties at the optimum resolve to the minimum-norm coefficient vector.
// Preconditions: L <= number of distinct propensity values, at least 2 cells
// per arm.
FitResult fit_constrained_cells(const std::vector<CellMoment>& cells,
                                Variable, int L, FeasibleSet);

FitResult fit_constrained(const Sample&, const PropensityTable&, Variable,
                          int L, FeasibleSet,
                          CellWeighting weighting = CellWeighting::SampleShare);

}  // namespace mtebounds
