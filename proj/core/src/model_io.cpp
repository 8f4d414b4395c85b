#include "mtebounds/model_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "mtebounds/csv.hpp"
#include "mtebounds/errors.hpp"

namespace mtebounds {

namespace {

int parse_int_field(const std::string& text, std::size_t row,
                    const char* what) {
  const double value = parse_value(text);
  const int as_int = static_cast<int>(value);
  if (!std::isfinite(value) || value != as_int)
    throw validation_error(
        fmt::format("row {}: {} '{}' is not an integer", row, what, text));
  return as_int;
}

void append_arm(std::vector<std::vector<std::string>>& rows,
                const std::string& variable, int arm,
                const std::vector<double>& theta) {
  for (std::size_t l = 0; l < theta.size(); ++l)
    rows.push_back({variable, fmt::format("{}", arm), fmt::format("{}", l),
                    format_value(theta[l])});
}

std::vector<double> collect_arm(
    const std::map<int, double>& coeffs, const std::string& variable,
    int arm) {
  if (coeffs.empty())
    throw validation_error(
        fmt::format("model file has no rows for {} arm {}", variable, arm));
  std::vector<double> theta;
  theta.reserve(coeffs.size());
  int expected = 0;
  for (const auto& [l, value] : coeffs) {
    if (l != expected)
      throw validation_error(fmt::format(
          "model file: {} arm {} is missing coefficient l={}", variable, arm,
          expected));
    theta.push_back(value);
    ++expected;
  }
  return theta;
}

using ArmCoefficients = std::map<int, std::map<int, double>>;

BernsteinMTR assemble_mtr(const ArmCoefficients& by_arm, Variable variable,
                          const std::string& name) {
  BernsteinMTR mtr;
  mtr.variable = variable;
  mtr.feasible_set = FeasibleSet::Unrestricted;
  const std::map<int, double> empty;
  mtr.theta0 = collect_arm(by_arm.count(0) ? by_arm.at(0) : empty, name, 0);
  mtr.theta1 = collect_arm(by_arm.count(1) ? by_arm.at(1) : empty, name, 1);
  if (mtr.theta0.size() != mtr.theta1.size())
    throw validation_error(fmt::format(
        "model file: {} arms have {} and {} coefficients; they must match",
        name, mtr.theta0.size(), mtr.theta1.size()));
  mtr.L = static_cast<int>(mtr.theta0.size());
  return mtr;
}

}  // namespace

void save_model_csv(const MTRSet& mtr, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(2 * (mtr.outcome.theta0.size() + mtr.selection.theta0.size()));
  append_arm(rows, "outcome", 0, mtr.outcome.theta0);
  append_arm(rows, "outcome", 1, mtr.outcome.theta1);
  append_arm(rows, "selection", 0, mtr.selection.theta0);
  append_arm(rows, "selection", 1, mtr.selection.theta1);
  write_csv(path, {"variable", "arm", "l", "theta"}, rows);
}

MTRSet load_model_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const std::size_t c_var = table.column("variable");
  const std::size_t c_arm = table.column("arm");
  const std::size_t c_l = table.column("l");
  const std::size_t c_theta = table.column("theta");

  // Keyed by arm then coefficient index, split per variable.
  ArmCoefficients outcome, selection;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t file_row = r + 2;
    const std::string& variable = row[c_var];
    const int arm = parse_int_field(row[c_arm], file_row, "arm");
    const int l = parse_int_field(row[c_l], file_row, "l");
    const double theta = parse_value(row[c_theta]);
    if (arm != 0 && arm != 1)
      throw validation_error(
          fmt::format("row {}: arm must be 0 or 1, got {}", file_row, arm));
    if (l < 0)
      throw validation_error(
          fmt::format("row {}: negative coefficient index", file_row));

    auto* target = &outcome;
    if (variable == "selection") {
      target = &selection;
    } else if (variable != "outcome") {
      throw validation_error(fmt::format(
          "row {}: variable must be outcome or selection, got '{}'",
          file_row, variable));
    }
    auto& coeffs = (*target)[arm];
    if (!coeffs.emplace(l, theta).second)
      throw validation_error(fmt::format(
          "row {}: duplicate coefficient {} arm {} l={}", file_row, variable,
          arm, l));
  }

  MTRSet mtr;
  mtr.outcome = assemble_mtr(outcome, Variable::Outcome, "outcome");
  mtr.selection = assemble_mtr(selection, Variable::Selection, "selection");
  return mtr;
}

void save_propensity_csv(const PropensityTable& prop,
                         const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(prop.entries.size());
  for (const auto& entry : prop.entries)
    rows.push_back({fmt::format("{}", entry.z), format_value(entry.p),
                    format_value(entry.mass)});
  write_csv(path, {"z", "p", "mass"}, rows);
}

PropensityTable load_propensity_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const std::size_t c_z = table.column("z");
  const std::size_t c_p = table.column("p");
  const std::size_t c_mass = table.column("mass");

  PropensityTable prop;
  double total_mass = 0.0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::size_t file_row = r + 2;
    PropensityTable::Entry entry;
    entry.z = parse_int_field(row[c_z], file_row, "z");
    entry.p = parse_value(row[c_p]);
    entry.mass = parse_value(row[c_mass]);
    if (!(entry.p >= 0.0 && entry.p <= 1.0))
      throw validation_error(fmt::format(
          "row {}: propensity {:.6g} is outside [0, 1]", file_row, entry.p));
    if (!(entry.mass > 0.0))
      throw validation_error(
          fmt::format("row {}: mass must be positive", file_row));
    total_mass += entry.mass;
    prop.entries.push_back(entry);
  }
  if (prop.entries.empty())
    throw validation_error("propensity file has no rows");
  std::sort(prop.entries.begin(), prop.entries.end(),
            [](const auto& a, const auto& b) { return a.z < b.z; });
  for (std::size_t i = 1; i < prop.entries.size(); ++i)
    if (prop.entries[i].z == prop.entries[i - 1].z)
      throw validation_error(fmt::format(
          "propensity file lists z={} twice", prop.entries[i].z));
  if (std::abs(total_mass - 1.0) > 1e-6)
    throw validation_error(fmt::format(
        "propensity masses sum to {:.8g}, expected 1", total_mass));
  return prop;
}

void save_bound_curve_csv(const BoundCurve& curve, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(curve.u.size());
  for (std::size_t i = 0; i < curve.u.size(); ++i)
    rows.push_back({format_value(curve.u[i]), format_value(curve.lower[i]),
                    format_value(curve.upper[i]),
                    format_flags(curve.flags[i])});
  write_csv(path, {"u", "lower", "upper", "flags"}, rows);
}

BoundCurve load_bound_curve_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const std::size_t c_u = table.column("u");
  const std::size_t c_lower = table.column("lower");
  const std::size_t c_upper = table.column("upper");
  const std::size_t c_flags = table.column("flags");

  BoundCurve curve;
  for (const auto& row : table.rows) {
    curve.u.push_back(parse_value(row[c_u]));
    curve.lower.push_back(parse_value(row[c_lower]));
    curve.upper.push_back(parse_value(row[c_upper]));
    curve.flags.push_back(parse_flags(row[c_flags]));
  }
  return curve;
}

}  // namespace mtebounds
