#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "mtebounds/csv.hpp"
#include "mtebounds/errors.hpp"
#include "mtebounds/sample.hpp"
#include "oracles.hpp"

using namespace mtebounds;

namespace {

ObservationRecord rec(double y, int s, int d, int z, double w,
                      std::string cell = "") {
  ObservationRecord r;
  r.y = y;
  r.s = s;
  r.d = d;
  r.z = z;
  r.w = w;
  r.cell = std::move(cell);
  return r;
}

Sample two_arm_sample() {
  return make_sample({
      rec(2.5, 1, 0, 0, 1.0),
      rec(0.0, 0, 0, 0, 2.0),
      rec(4.0, 1, 1, 0, 1.5),
      rec(3.0, 1, 0, 1, 1.0),
      rec(5.5, 1, 1, 1, 2.5),
      rec(0.0, 0, 1, 1, 1.0),
  });
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("make_sample validates fields and collects instrument support") {
  const Sample s = two_arm_sample();
  CHECK(s.records.size() == 6);
  CHECK(s.support_z == std::vector<int>{0, 1});

  CHECK_THROWS_AS(make_sample({rec(1.0, 2, 0, 0, 1.0), rec(1.0, 1, 0, 1, 1.0)}),
                  validation_error);
  CHECK_THROWS_AS(make_sample({rec(1.0, 1, 3, 0, 1.0), rec(1.0, 1, 0, 1, 1.0)}),
                  validation_error);
  CHECK_THROWS_AS(make_sample({rec(1.0, 1, 0, 0, 0.0), rec(1.0, 1, 0, 1, 1.0)}),
                  validation_error);
  CHECK_THROWS_AS(
      make_sample({rec(1.0, 1, 0, 0, -1.0), rec(1.0, 1, 0, 1, 1.0)}),
      validation_error);
  // A nonzero outcome on an unselected row contradicts y = s * y_latent.
  CHECK_THROWS_AS(make_sample({rec(1.0, 0, 0, 0, 1.0), rec(1.0, 1, 0, 1, 1.0)}),
                  validation_error);
  // A single instrument value cannot identify anything downstream.
  CHECK_THROWS_AS(make_sample({rec(1.0, 1, 0, 0, 1.0), rec(2.0, 1, 1, 0, 1.0)}),
                  validation_error);
}

TEST_CASE("weighted_summary means match hand-computed values") {
  SUBCASE("unit weights") {
    const Sample s = make_sample({
        rec(1.0, 1, 0, 0, 1.0),
        rec(3.0, 1, 0, 1, 1.0),
    });
    const auto rows = weighted_summary(s, {});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_y == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rows[0].n == 2);
  }
  SUBCASE("weights tilt the mean toward the heavy row") {
    const Sample s = make_sample({
        rec(0.0, 1, 0, 0, 1.0),
        rec(4.0, 1, 0, 1, 3.0),
    });
    const auto rows = weighted_summary(s, {});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].mean_y == doctest::Approx(3.0).epsilon(1e-12));
  }
  SUBCASE("grouping by z splits the file") {
    const auto rows = weighted_summary(two_arm_sample(), {GroupKey::Z});
    REQUIRE(rows.size() == 2);
    // z = 0: y means over weights 1, 2, 1.5 -> (2.5 + 0 + 6) / 4.5
    CHECK(rows[0].mean_y == doctest::Approx(8.5 / 4.5).epsilon(1e-12));
    CHECK(rows[0].weight_sum == doctest::Approx(4.5));
    // z = 1: (3 + 13.75 + 0) / 4.5
    CHECK(rows[1].mean_y == doctest::Approx(16.75 / 4.5).epsilon(1e-12));
  }
  SUBCASE("standard errors are invariant to uniform weight rescaling") {
    std::vector<ObservationRecord> base = {
        rec(1.0, 1, 0, 0, 1.0), rec(2.0, 1, 0, 0, 2.0),
        rec(4.0, 1, 1, 1, 1.5), rec(8.0, 1, 1, 1, 0.5),
    };
    auto scaled = base;
    for (auto& r : scaled) r.w *= 7.25;
    const auto a = weighted_summary(make_sample(base), {GroupKey::D});
    const auto b = weighted_summary(make_sample(scaled), {GroupKey::D});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].mean_y == doctest::Approx(b[i].mean_y).epsilon(1e-12));
      CHECK(a[i].se_y == doctest::Approx(b[i].se_y).epsilon(1e-12));
    }
  }
}

TEST_CASE("estimate_propensity computes weighted treated shares per z") {
  const Sample s = two_arm_sample();
  const PropensityTable table = estimate_propensity(s);
  REQUIRE(table.entries.size() == 2);

  // z = 0: treated weight 1.5 of total 4.5; group is half the total weight.
  CHECK(table.entries[0].z == 0);
  CHECK(table.entries[0].p == doctest::Approx(1.5 / 4.5).epsilon(1e-12));
  CHECK(table.entries[0].mass == doctest::Approx(0.5).epsilon(1e-12));
  // z = 1: treated weight 3.5 of total 4.5.
  CHECK(table.entries[1].p == doctest::Approx(3.5 / 4.5).epsilon(1e-12));

  CHECK(table.mean_p() ==
        doctest::Approx(0.5 * (1.5 / 4.5) + 0.5 * (3.5 / 4.5)).epsilon(1e-12));
  CHECK(table.p_for_z(1) == doctest::Approx(3.5 / 4.5));
  CHECK_THROWS_AS(table.p_for_z(7), validation_error);

  SUBCASE("row order does not matter") {
    auto shuffled = s.records;
    std::reverse(shuffled.begin(), shuffled.end());
    const PropensityTable other = estimate_propensity(make_sample(shuffled));
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
      CHECK(other.entries[i].p == doctest::Approx(table.entries[i].p));
      CHECK(other.entries[i].mass == doctest::Approx(table.entries[i].mass));
    }
  }
  SUBCASE("uniform weight rescaling does not matter") {
    auto scaled = s.records;
    for (auto& r : scaled) r.w *= 0.125;
    const PropensityTable other = estimate_propensity(make_sample(scaled));
    for (std::size_t i = 0; i < table.entries.size(); ++i) {
      CHECK(other.entries[i].p ==
            doctest::Approx(table.entries[i].p).epsilon(1e-12));
      CHECK(other.entries[i].mass ==
            doctest::Approx(table.entries[i].mass).epsilon(1e-12));
    }
  }
  SUBCASE("atoms merge duplicate propensity values") {
    const Sample merged = make_sample({
        rec(1.0, 1, 0, 0, 1.0),
        rec(2.0, 1, 1, 0, 1.0),
        rec(1.5, 1, 0, 1, 1.0),
        rec(2.5, 1, 1, 1, 1.0),
    });
    const auto atoms = estimate_propensity(merged).p_atoms();
    REQUIRE(atoms.size() == 1);  // both groups are exactly half treated
    CHECK(atoms[0].p == doctest::Approx(0.5));
    CHECK(atoms[0].mass == doctest::Approx(1.0));
  }
}

TEST_CASE("sample CSV round trip is bit exact") {
  oracle::TempDir dir("sample_roundtrip");
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> yd(0.0, 20.0);
  std::uniform_real_distribution<double> wd(0.25, 4.0);
  std::vector<ObservationRecord> rows;
  for (int i = 0; i < 200; ++i) {
    const int s = i % 3 == 0 ? 0 : 1;
    rows.push_back(rec(s == 0 ? 0.0 : yd(gen), s, i % 2, i % 4 < 2 ? 0 : 1,
                       wd(gen), i % 5 == 0 ? "a" : "b"));
  }
  const Sample original = make_sample(rows);

  ColumnSchema schema;
  schema.cell = "stratum";
  const std::string path = dir.file("sample.csv");
  save_sample(original, path, schema);
  const Sample loaded = load_sample(path, schema);

  REQUIRE(loaded.records.size() == original.records.size());
  for (std::size_t i = 0; i < loaded.records.size(); ++i) {
    CHECK(loaded.records[i].y == original.records[i].y);
    CHECK(loaded.records[i].w == original.records[i].w);
    CHECK(loaded.records[i].s == original.records[i].s);
    CHECK(loaded.records[i].d == original.records[i].d);
    CHECK(loaded.records[i].z == original.records[i].z);
    CHECK(loaded.records[i].cell == original.records[i].cell);
  }
}

TEST_CASE("load_sample maps columns by name and reports problems precisely") {
  oracle::TempDir dir("sample_load");

  SUBCASE("custom column names") {
    const std::string path = dir.file("custom.csv");
    write_text(path,
               "wage,employed,train,assign,pw\n"
               "3.5,1,0,0,1.25\n"
               "0,0,1,1,0.75\n");
    ColumnSchema schema;
    schema.y = "wage";
    schema.s = "employed";
    schema.d = "train";
    schema.z = "assign";
    schema.w = "pw";
    const Sample s = load_sample(path, schema);
    CHECK(s.records.size() == 2);
    CHECK(s.records[0].y == 3.5);
    CHECK(s.records[1].w == 0.75);
  }

  SUBCASE("missing column error names the column") {
    const std::string path = dir.file("missing.csv");
    write_text(path, "y,s,d,weight\n1,1,0,1\n");
    try {
      load_sample(path);
      FAIL("expected a validation error");
    } catch (const validation_error& e) {
      CHECK(std::string(e.what()).find("z") != std::string::npos);
    }
  }

  SUBCASE("rows with an empty treatment field are dropped and counted") {
    const std::string path = dir.file("missing_d.csv");
    write_text(path,
               "y,s,d,z,weight\n"
               "1.0,1,0,0,1\n"
               "2.0,1,,1,1\n"
               "3.0,1,1,1,1\n"
               "0,0,,0,1\n");
    const Sample s = load_sample(path);
    CHECK(s.records.size() == 2);
    CHECK(s.dropped_missing_d == 2);
  }

  SUBCASE("malformed numeric field is an error naming the row") {
    const std::string path = dir.file("bad_y.csv");
    write_text(path,
               "y,s,d,z,weight\n"
               "1.0,1,0,0,1\n"
               "oops,1,1,1,1\n");
    try {
      load_sample(path);
      FAIL("expected a validation error");
    } catch (const validation_error& e) {
      const std::string what = e.what();
      CHECK(what.find("3") != std::string::npos);  // 1-based file line
    }
  }

  SUBCASE("nonexistent file") {
    CHECK_THROWS_AS(load_sample(dir.file("does_not_exist.csv")),
                    validation_error);
  }
}

TEST_CASE("csv layer round trips tables") {
  oracle::TempDir dir("csv");
  const std::string path = dir.file("table.csv");
  const std::vector<std::string> header = {"a", "b", "c"};
  const std::vector<std::vector<std::string>> rows = {
      {"1", "x", "2.5"},
      {"-3", "", "inf"},
  };
  write_csv(path, header, rows);
  const CsvTable table = read_csv(path);
  CHECK(table.header == header);
  CHECK(table.rows == rows);
  CHECK(table.column("b") == 1);
  CHECK_THROWS_AS(table.column("nope"), validation_error);
}
