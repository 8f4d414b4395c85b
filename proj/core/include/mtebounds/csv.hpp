#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Small CSV layer shared by the sample loader, the model serializers and the
// command line tool. Comma separated, UTF-8, first row is the header, '.'
// decimal separator, no quoting (field values must not contain commas).

namespace mtebounds {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a named column; validation error naming the column if absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

}  // namespace mtebounds
