#pragma once

#include <istream>
#include <string>
#include <vector>

#include "hck/design.hpp"

namespace hck::cli {

// RFC 4180 table: a header row followed by records of the same width.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Throws ErrorKind::kData on unterminated quotes or ragged records.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

struct ColumnRoles {
  std::string y;
  std::vector<std::string> x;
  std::vector<std::string> w;
  // Each factor expands to one dummy per observed level except the first.
  std::vector<std::string> factors;
  // "a:b" expands to products of the non-reference dummies of a and b.
  std::vector<std::string> interactions;
  // Prepend a column of ones to W.
  bool intercept = false;
};

struct ParsedData {
  RegressionData data;
  std::vector<std::string> x_names;
  std::vector<std::string> w_names;
  Index rows_read = 0;
  Index rows_dropped = 0;  // rows with a missing value in a used column
};

// Empty cells and NA, N/A, NaN, "." count as missing.
bool is_missing(const std::string& cell);

// Assembles numeric y, X and W from a table. Throws kUsage for inconsistent
// roles, kData for unknown columns, non-numeric cells (naming row and
// column), empty data after filtering, or a unit-identifying factor.
ParsedData build_regression_data(const CsvTable& table, const ColumnRoles& roles);

ParsedData parse_csv(const std::string& path, const ColumnRoles& roles);

}  // namespace hck::cli
