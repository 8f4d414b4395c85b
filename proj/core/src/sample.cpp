#include "mtebounds/sample.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "mtebounds/csv.hpp"
#include "mtebounds/errors.hpp"
#include "mtebounds/types.hpp"

namespace mtebounds {

namespace {

int parse_int_field(const std::string& text, const char* field,
                    std::size_t row) {
  try {
    const double v = parse_value(text);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
      throw validation_error("");
    }
    return i;
  } catch (const validation_error&) {
    throw validation_error(
        fmt::format("row {}: field '{}' is not an integer: '{}'", row, field,
                    text));
  }
}

double parse_double_field(const std::string& text, const char* field,
                          std::size_t row) {
  try {
    return parse_value(text);
  } catch (const validation_error&) {
    throw validation_error(fmt::format(
        "row {}: field '{}' is not a number: '{}'", row, field, text));
  }
}

void validate_record(const ObservationRecord& r, std::size_t row) {
  auto fail = [row](const std::string& what) {
    throw validation_error(fmt::format("row {}: {}", row, what));
  };
  if (r.s != 0 && r.s != 1) fail(fmt::format("s must be 0 or 1, got {}", r.s));
  if (r.d != 0 && r.d != 1) fail(fmt::format("d must be 0 or 1, got {}", r.d));
  if (!(r.w > 0.0) || std::isinf(r.w)) {
    fail(fmt::format("weight must be strictly positive and finite, got {}",
                     format_value(r.w)));
  }
  if (r.s == 0 && r.y != 0.0) {
    fail(fmt::format("y must be 0 when s is 0, got {}", format_value(r.y)));
  }
  if (!std::isfinite(r.y)) fail("y must be finite");
}

std::vector<int> distinct_z(const std::vector<ObservationRecord>& records) {
  std::set<int> seen;
  for (const auto& r : records) seen.insert(r.z);
  return {seen.begin(), seen.end()};
}

}  // namespace

Sample make_sample(std::vector<ObservationRecord> records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    // Rows are reported 1-based with no header offset for in-memory samples.
    validate_record(records[i], i + 1);
  }
  Sample sample;
  sample.records = std::move(records);
  sample.support_z = distinct_z(sample.records);
  if (sample.support_z.size() < 2) {
    throw validation_error(fmt::format(
        "instrument must take at least 2 distinct values, found {}",
        sample.support_z.size()));
  }
  return sample;
}

Sample load_sample(const std::string& path, const ColumnSchema& schema) {
  const CsvTable table = read_csv(path);
  const std::size_t iy = table.column(schema.y);
  const std::size_t is = table.column(schema.s);
  const std::size_t id = table.column(schema.d);
  const std::size_t iz = table.column(schema.z);
  const std::size_t iw = table.column(schema.w);
  const bool has_cell = !schema.cell.empty();
  const std::size_t icell = has_cell ? table.column(schema.cell) : 0;

  std::vector<ObservationRecord> records;
  records.reserve(table.rows.size());
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& fields = table.rows[i];
    const std::size_t row = i + 2;  // 1-based, header is row 1
    if (fields[id].empty()) {
      ++dropped;
      continue;
    }
    ObservationRecord r;
    r.d = parse_int_field(fields[id], "d", row);
    r.s = parse_int_field(fields[is], "s", row);
    r.z = parse_int_field(fields[iz], "z", row);
    r.w = parse_double_field(fields[iw], "weight", row);
    if (fields[iy].empty()) {
      if (r.s != 0) {
        throw validation_error(
            fmt::format("row {}: y is missing but s is 1", row));
      }
      r.y = 0.0;
    } else {
      r.y = parse_double_field(fields[iy], "y", row);
    }
    if (has_cell) r.cell = fields[icell];
    validate_record(r, row);
    records.push_back(std::move(r));
  }

  Sample sample = make_sample(std::move(records));
  sample.dropped_missing_d = dropped;
  return sample;
}

void save_sample(const Sample& sample, const std::string& path,
                 const ColumnSchema& schema) {
  const bool has_cell = !schema.cell.empty();
  std::vector<std::string> header = {schema.y, schema.s, schema.d, schema.z,
                                     schema.w};
  if (has_cell) header.push_back(schema.cell);
  std::vector<std::vector<std::string>> rows;
  rows.reserve(sample.records.size());
  for (const auto& r : sample.records) {
    std::vector<std::string> row = {format_value(r.y), std::to_string(r.s),
                                    std::to_string(r.d), std::to_string(r.z),
                                    format_value(r.w)};
    if (has_cell) row.push_back(r.cell);
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

double PropensityTable::mean_p() const {
  double total = 0.0;
  for (const auto& e : entries) total += e.mass * e.p;
  return total;
}

double PropensityTable::p_for_z(int z) const {
  for (const auto& e : entries) {
    if (e.z == z) return e.p;
  }
  throw validation_error(
      fmt::format("instrument value {} not in propensity table", z));
}

std::vector<double> PropensityTable::support_p() const {
  std::set<double> seen;
  for (const auto& e : entries) seen.insert(e.p);
  return {seen.begin(), seen.end()};
}

std::vector<PropensityTable::Atom> PropensityTable::p_atoms() const {
  std::map<double, double> mass_by_p;
  for (const auto& e : entries) mass_by_p[e.p] += e.mass;
  std::vector<Atom> atoms;
  atoms.reserve(mass_by_p.size());
  for (const auto& [p, mass] : mass_by_p) atoms.push_back({p, mass});
  return atoms;
}

PropensityTable estimate_propensity(const Sample& sample) {
  std::map<int, std::pair<double, double>> acc;  // z -> (sum w, sum w*d)
  double total_weight = 0.0;
  for (const auto& r : sample.records) {
    auto& [w_sum, wd_sum] = acc[r.z];
    w_sum += r.w;
    wd_sum += r.w * static_cast<double>(r.d);
    total_weight += r.w;
  }
  if (acc.size() < 2) {
    throw validation_error(fmt::format(
        "propensity estimation needs at least 2 instrument values, found {}",
        acc.size()));
  }
  PropensityTable table;
  for (const auto& [z, sums] : acc) {
    const auto& [w_sum, wd_sum] = sums;
    if (!(w_sum > 0.0)) {
      throw validation_error(
          fmt::format("degenerate group: z = {} has zero total weight", z));
    }
    table.entries.push_back({z, wd_sum / w_sum, w_sum / total_weight});
  }
  return table;
}

std::vector<SummaryRow> weighted_summary(const Sample& sample,
                                         const std::vector<GroupKey>& by) {
  using Key = std::tuple<int, int, int, std::string>;
  auto key_of = [&by](const ObservationRecord& r) {
    Key key{0, 0, 0, std::string{}};
    for (GroupKey k : by) {
      switch (k) {
        case GroupKey::Z: std::get<0>(key) = r.z; break;
        case GroupKey::D: std::get<1>(key) = r.d; break;
        case GroupKey::S: std::get<2>(key) = r.s; break;
        case GroupKey::Cell: std::get<3>(key) = r.cell; break;
      }
    }
    return key;
  };

  struct Accumulator {
    std::size_t n = 0;
    double w = 0.0, w2 = 0.0;
    double wy = 0.0, ws = 0.0, wd = 0.0;
    double wyy = 0.0, wss = 0.0, wdd = 0.0;
  };
  std::map<Key, Accumulator> groups;
  for (const auto& r : sample.records) {
    Accumulator& a = groups[key_of(r)];
    a.n += 1;
    a.w += r.w;
    a.w2 += r.w * r.w;
    a.wy += r.w * r.y;
    a.ws += r.w * r.s;
    a.wd += r.w * r.d;
    a.wyy += r.w * r.y * r.y;
    a.wss += r.w * r.s * r.s;
    a.wdd += r.w * r.d * r.d;
  }

  auto mean_se = [](double w, double w2, double wx, double wxx, double& mean,
                    double& se) {
    mean = wx / w;
    const double variance = std::max(0.0, wxx / w - mean * mean);
    const double n_eff = w * w / w2;
    se = n_eff > 1.0 ? std::sqrt(variance / n_eff) : std::sqrt(variance);
  };

  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, a] : groups) {
    SummaryRow row;
    row.z = std::get<0>(key);
    row.d = std::get<1>(key);
    row.s = std::get<2>(key);
    row.cell = std::get<3>(key);
    row.n = a.n;
    row.weight_sum = a.w;
    mean_se(a.w, a.w2, a.wy, a.wyy, row.mean_y, row.se_y);
    mean_se(a.w, a.w2, a.ws, a.wss, row.mean_s, row.se_s);
    mean_se(a.w, a.w2, a.wd, a.wdd, row.mean_d, row.se_d);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mtebounds
