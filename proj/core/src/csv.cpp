#include "mtebounds/csv.hpp"

#include <fstream>

#include <fmt/format.h>

#include "mtebounds/errors.hpp"

namespace mtebounds {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw validation_error(fmt::format("missing column '{}'", name));
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw validation_error(fmt::format("cannot open '{}'", path));
  }
  CsvTable table;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!saw_header) {
      table.header = split_line(line);
      saw_header = true;
      continue;
    }
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != table.header.size()) {
      throw validation_error(
          fmt::format("{}: row {} has {} fields, header has {}", path,
                      table.rows.size() + 2, fields.size(), table.header.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (!saw_header) {
    throw validation_error(fmt::format("{}: empty file, no header row", path));
  }
  return table;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw validation_error(fmt::format("cannot write '{}'", path));
  }
  auto write_row = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out << ',';
      out << fields[i];
    }
    out << '\n';
  };
  write_row(header);
  for (const auto& row : rows) write_row(row);
  if (!out) {
    throw validation_error(fmt::format("write to '{}' failed", path));
  }
}

}  // namespace mtebounds
