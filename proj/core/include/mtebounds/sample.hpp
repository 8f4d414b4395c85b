#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Observation container, CSV loading with schema mapping, propensity
// estimation per instrument value, and weighted group summaries.

namespace mtebounds {

struct ObservationRecord {
  double y = 0.0;    // observed outcome, 0 whenever s == 0
  int s = 0;         // selection indicator (outcome observed)
  int d = 0;         // treatment indicator
  int z = 0;         // instrument value, small integer code
  double w = 1.0;    // sampling weight, strictly positive
  std::string cell;  // optional stratum label
};

struct Sample {
  std::vector<ObservationRecord> records;
  std::vector<int> support_z;           // sorted distinct instrument values
  std::size_t dropped_missing_d = 0;    // rows discarded for an empty d field
};

// Maps file column names onto record fields. An empty cell name means the
// file has no stratum column.
struct ColumnSchema {
  std::string y = "y";
  std::string s = "s";
  std::string d = "d";
  std::string z = "z";
  std::string w = "weight";
  std::string cell;
};

// Validates records and computes the instrument support. Requirements: s and
// d binary, w > 0, y == 0 whenever s == 0, at least two distinct z values.
Sample make_sample(std::vector<ObservationRecord> records);

// Loads a CSV sample. Rows with an empty d field are dropped and counted;
// any other malformed field is a validation error naming the row.
Sample load_sample(const std::string& path, const ColumnSchema& schema = {});

// Writes records in schema order with shortest-round-trip numbers, so that
// load_sample(save_sample(x)) reproduces x bit for bit.
void save_sample(const Sample&, const std::string& path,
                 const ColumnSchema& schema = {});

struct PropensityTable {
  struct Entry {
    int z = 0;
    double p = 0.0;     // weighted treated share given z
    double mass = 0.0;  // weighted share of rows with this z
  };
  struct Atom {
    double p = 0.0;
    double mass = 0.0;
  };

  std::vector<Entry> entries;  // sorted by z

  double mean_p() const;                 // E[P]
  double p_for_z(int z) const;           // validation error for unknown z
  std::vector<double> support_p() const; // sorted distinct propensity values
  // Distribution of P: distinct propensity values with aggregated mass,
  // sorted ascending.
  std::vector<Atom> p_atoms() const;
};

// Weighted treated share and mass per instrument value. Needs at least two
// support points; each group must carry positive weight.
PropensityTable estimate_propensity(const Sample&);

enum class GroupKey { Z, D, S, Cell };

struct SummaryRow {
  // Key fields; only those named in the grouping are meaningful.
  int z = 0;
  int d = 0;
  int s = 0;
  std::string cell;

  std::size_t n = 0;
  double weight_sum = 0.0;
  double mean_y = 0.0, se_y = 0.0;
  double mean_s = 0.0, se_s = 0.0;
  double mean_d = 0.0, se_d = 0.0;
};

// Weighted means with standard errors per group. The standard error uses the
// effective sample size (sum w)^2 / sum w^2, so uniform weight rescaling
// leaves every column unchanged.
std::vector<SummaryRow> weighted_summary(const Sample&,
                                         const std::vector<GroupKey>& by);

}  // namespace mtebounds
