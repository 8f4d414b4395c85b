#include "mtebounds/outer_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "mtebounds/bounds.hpp"
#include "mtebounds/errors.hpp"
#include "simplex.hpp"

namespace mtebounds {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Values of the L Bernstein basis polynomials of degree L-1 at u.
Eigen::VectorXd basis_values(int L, double u) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(L);
  b[0] = 1.0;
  for (int deg = 1; deg < L; ++deg) {
    for (int i = deg; i >= 1; --i) b[i] = b[i - 1] * u + b[i] * (1.0 - u);
    b[0] *= 1.0 - u;
  }
  return b;
}

lp::LinearProgram assemble_lp(const MTRPolytope& poly,
                              const Eigen::VectorXd& objective) {
  const int L = poly.L;
  const Eigen::Index n_theta = 2 * L;
  const Eigen::Index n_slack = poly.ordering == 0 ? 0 : L;
  const Eigen::Index n = n_theta + n_slack;
  const Eigen::Index m_eq = poly.eq_rows.rows();
  const Eigen::Index m = m_eq + n_slack;

  lp::LinearProgram out;
  out.A = Eigen::MatrixXd::Zero(m, n);
  out.A.topLeftCorner(m_eq, n_theta) = poly.eq_rows;
  out.b.resize(m);
  out.b.head(m_eq) = poly.eq_rhs;
  for (Eigen::Index l = 0; l < n_slack; ++l) {
    const double s = poly.ordering > 0 ? 1.0 : -1.0;
    out.A(m_eq + l, L + l) = s;              // theta1[l]
    out.A(m_eq + l, l) = -s;                 // theta0[l]
    out.A(m_eq + l, n_theta + l) = -1.0;     // slack
    out.b[m_eq + l] = 0.0;
  }
  out.c = Eigen::VectorXd::Zero(n);
  out.c.head(n_theta) = objective;
  out.lo.resize(n);
  out.hi.resize(n);
  out.lo.head(n_theta).setConstant(poly.box_lo);
  out.hi.head(n_theta).setConstant(poly.box_hi);
  out.lo.tail(n_slack).setZero();
  out.hi.tail(n_slack).setConstant(kInf);
  return out;
}

double solve_one(const MTRPolytope& poly, const Eigen::VectorXd& objective,
                 Eigen::VectorXd& arg, double& gap) {
  lp::LinearProgram program = assemble_lp(poly, objective);
  const lp::LpSolution sol = lp::solve_lp(program);
  if (sol.status == lp::LpStatus::Infeasible) {
    throw numeric_error(fmt::format(
        "the moment constraints admit no curve pair (worst equality "
        "residual {:.3g}); the response model looks misspecified",
        sol.max_violation));
  }
  if (sol.status == lp::LpStatus::Unbounded)
    throw numeric_error("curve-value extreme is unbounded");
  const double scale = std::max(1.0, std::abs(sol.objective));
  if (sol.duality_gap > 1e-7 * scale)
    throw numeric_error(fmt::format(
        "optimality certificate failed (duality gap {:.3g})",
        sol.duality_gap));
  arg = sol.x.head(2 * poly.L);
  gap = sol.duality_gap;
  return sol.objective;
}

ExtremeResult extremize(const MTRPolytope& poly,
                        const Eigen::VectorXd& objective) {
  if (poly.L < 1) throw validation_error("polytope has no basis functions");
  if (poly.eq_rows.rows() < 1)
    throw validation_error("polytope has no moment constraints");
  if (poly.eq_rows.cols() != 2 * poly.L)
    throw validation_error("polytope rows do not match 2L coefficients");

  ExtremeResult out;
  double gap_min = 0.0, gap_max = 0.0;
  out.min_value = solve_one(poly, objective, out.argmin, gap_min);
  out.max_value = -solve_one(poly, -objective, out.argmax, gap_max);
  out.duality_gap = std::max(gap_min, gap_max);
  return out;
}

}  // namespace

std::vector<IVLikeSpec> saturated_ivlike_family(const Sample& sample,
                                                Variable variable) {
  // Keyed by (d, z) in a sorted map so the family order is reproducible.
  std::map<std::pair<int, int>, double> cell_sums;
  double total_w = 0.0;
  for (const auto& rec : sample.records) {
    total_w += rec.w;
    const double a = variable == Variable::Outcome ? rec.y : rec.s;
    cell_sums[{rec.d, rec.z}] += rec.w * a;
  }
  if (cell_sums.empty()) throw validation_error("sample is empty");

  std::vector<IVLikeSpec> family;
  family.reserve(cell_sums.size());
  for (const auto& [key, sum] : cell_sums) {
    const auto [d, z] = key;
    IVLikeSpec spec;
    spec.name = fmt::format("cell(d={},z={})", d, z);
    spec.g = [d, z](int dd, int zz) {
      return (dd == d && zz == z) ? 1.0 : 0.0;
    };
    spec.beta = sum / total_w;
    family.push_back(std::move(spec));
  }
  return family;
}

Eigen::RowVectorXd build_gamma_row(const IVLikeSpec& spec,
                                   const PropensityTable& prop, int L) {
  if (L < 1) throw validation_error("need at least one basis function");
  if (!spec.g) throw validation_error("moment spec has no g function");
  if (prop.entries.empty()) throw validation_error("propensity table is empty");

  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(2 * L);
  for (const auto& entry : prop.entries) {
    const std::vector<double> ints = bernstein_basis_integrals(L, entry.p);
    const double g0 = spec.g(0, entry.z);
    const double g1 = spec.g(1, entry.z);
    for (int l = 0; l < L; ++l) {
      // Untreated arm integrates the basis over (p, 1]; each basis function
      // integrates to 1/L over the whole interval.
      row[l] += entry.mass * g0 * (1.0 / L - ints[static_cast<std::size_t>(l)]);
      row[L + l] += entry.mass * g1 * ints[static_cast<std::size_t>(l)];
    }
  }
  return row;
}

std::vector<IVLikeSpec> model_implied_ivlike_family(
    std::vector<IVLikeSpec> family, const BernsteinMTR& mtr,
    const PropensityTable& prop) {
  Eigen::VectorXd stacked(2 * mtr.L);
  for (int l = 0; l < mtr.L; ++l) {
    stacked[l] = mtr.theta0[static_cast<std::size_t>(l)];
    stacked[mtr.L + l] = mtr.theta1[static_cast<std::size_t>(l)];
  }
  for (auto& spec : family)
    spec.beta = build_gamma_row(spec, prop, mtr.L).dot(stacked);
  return family;
}

MTRPolytope build_polytope(const std::vector<IVLikeSpec>& family,
                           const PropensityTable& prop, int L,
                           FeasibleSet fs) {
  if (family.empty()) throw validation_error("moment family is empty");
  if (L < 1) throw validation_error("need at least one basis function");

  MTRPolytope poly;
  poly.L = L;
  switch (fs) {
    case FeasibleSet::Nonnegative:
      poly.box_lo = 0.0;
      poly.box_hi = kInf;
      poly.ordering = 0;
      break;
    case FeasibleSet::UnitBox:
      poly.box_lo = 0.0;
      poly.box_hi = 1.0;
      poly.ordering = 0;
      break;
    case FeasibleSet::UnitBoxIncreasing:
      poly.box_lo = 0.0;
      poly.box_hi = 1.0;
      poly.ordering = 1;
      break;
    case FeasibleSet::UnitBoxDecreasing:
      poly.box_lo = 0.0;
      poly.box_hi = 1.0;
      poly.ordering = -1;
      break;
    case FeasibleSet::Unrestricted:
      throw validation_error(
          "the outer set needs a bounded-below coefficient box");
  }

  poly.eq_rows.resize(static_cast<Eigen::Index>(family.size()), 2 * L);
  poly.eq_rhs.resize(static_cast<Eigen::Index>(family.size()));
  poly.eq_names.reserve(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) {
    poly.eq_rows.row(static_cast<Eigen::Index>(i)) =
        build_gamma_row(family[i], prop, L);
    poly.eq_rhs[static_cast<Eigen::Index>(i)] = family[i].beta;
    poly.eq_names.push_back(family[i].name);
  }
  return poly;
}

ExtremeResult extremize_value(const MTRPolytope& poly, int arm, double u) {
  if (arm != 0 && arm != 1)
    throw validation_error(fmt::format("arm must be 0 or 1, got {}", arm));
  if (!(u >= 0.0 && u <= 1.0))
    throw validation_error(fmt::format("u={:.6g} is outside [0, 1]", u));
  Eigen::VectorXd objective = Eigen::VectorXd::Zero(2 * poly.L);
  objective.segment(arm * poly.L, poly.L) = basis_values(poly.L, u);
  return extremize(poly, objective);
}

ExtremeResult extremize_contrast(const MTRPolytope& poly, double u) {
  if (!(u >= 0.0 && u <= 1.0))
    throw validation_error(fmt::format("u={:.6g} is outside [0, 1]", u));
  const Eigen::VectorXd basis = basis_values(poly.L, u);
  Eigen::VectorXd objective(2 * poly.L);
  objective.head(poly.L) = -basis;
  objective.tail(poly.L) = basis;
  return extremize(poly, objective);
}

BoundCurve outer_set_mte_oo(const MTRPolytope& outcome,
                            const MTRPolytope& selection,
                            const SupportSpec& support,
                            const AssumptionProfile& profile,
                            const std::vector<double>& grid) {
  if (grid.empty()) throw validation_error("evaluation grid is empty");
  if (profile.dominance != MeanDominance::None &&
      profile.direction != SelectionDirection::Increasing) {
    throw validation_error(
        "mean dominance requires the increasing selection direction");
  }

  BoundCurve curve;
  curve.profile = profile;
  curve.support = support;
  curve.u = grid;
  curve.lower.reserve(grid.size());
  curve.upper.reserve(grid.size());
  curve.flags.reserve(grid.size());

  for (double u : grid) {
    const ExtremeResult m0y = extremize_value(outcome, 0, u);
    const ExtremeResult m1y = extremize_value(outcome, 1, u);
    const ExtremeResult m0s = extremize_value(selection, 0, u);
    const ExtremeResult ds = extremize_contrast(selection, u);

    double lo = kInf;
    double hi = -kInf;
    bool guarded = false;
    bool all_point = true;
    for (int corner = 0; corner < 16; ++corner) {
      const double c_m0y = (corner & 1) ? m0y.max_value : m0y.min_value;
      const double c_m1y = (corner & 2) ? m1y.max_value : m1y.min_value;
      const double c_m0s = (corner & 4) ? m0s.max_value : m0s.min_value;
      const double c_ds = (corner & 8) ? ds.max_value : ds.min_value;
      const PointBounds b = mte_oo_point_bounds(
          c_m0y, c_m1y, c_m0s, c_m0s + c_ds, support, profile);
      if (b.flags & kFlagDenominatorGuard) {
        guarded = true;
        break;
      }
      if (!(b.flags & kFlagPointIdentified)) all_point = false;
      lo = std::min(lo, b.lower);
      hi = std::max(hi, b.upper);
    }

    if (guarded) {
      curve.lower.push_back(kNaN);
      curve.upper.push_back(kNaN);
      curve.flags.push_back(kFlagDenominatorGuard);
      continue;
    }
    std::uint8_t flags = 0;
    if (all_point) flags |= kFlagPointIdentified;
    if (lo > hi) flags |= kFlagEmptyInterval;
    curve.lower.push_back(lo);
    curve.upper.push_back(hi);
    curve.flags.push_back(flags);
  }
  return curve;
}

}  // namespace mtebounds
