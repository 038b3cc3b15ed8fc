#include "hck/cli/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hck/error.hpp"

namespace hck::cli {
namespace {

Error data_error(const std::string& what) { return Error(ErrorKind::kData, what); }

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_double(const std::string& cell, double& out) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size() && std::isfinite(out);
}

// Levels in order of first appearance.
struct Levels {
  std::vector<std::string> order;
  std::map<std::string, std::size_t> index;

  std::size_t add(const std::string& v) {
    auto [it, inserted] = index.emplace(v, order.size());
    if (inserted) order.push_back(v);
    return it->second;
  }
};

std::pair<std::string, std::string> split_interaction(const std::string& spec) {
  const auto pos = spec.find(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 == spec.size() ||
      spec.find(':', pos + 1) != std::string::npos) {
    throw Error(ErrorKind::kUsage, "interaction '" + spec + "' must have the form colA:colB");
  }
  return {spec.substr(0, pos), spec.substr(pos + 1)};
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    // A bare newline (e.g. trailing blank line) is not a record.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };

  // Skip a UTF-8 byte order mark.
  static constexpr char kBom[] = "\xEF\xBB\xBF";
  char ch;
  for (int i = 0; i < 3 && in.peek() == static_cast<unsigned char>(kBom[i]); ++i) in.get(ch);
  while (in.get(ch)) {
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started && !field.empty()) {
          throw data_error("csv: stray quote on line " + std::to_string(line));
        }
        in_quotes = true;
        field_started = true;
        break;
      case ',': end_field(); break;
      case '\r':
        if (in.peek() == '\n') in.get(ch);
        end_record();
        ++line;
        break;
      case '\n':
        end_record();
        ++line;
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (in_quotes) throw data_error("csv: unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();

  if (records.empty()) throw data_error("csv: missing header row");
  CsvTable table;
  table.header = std::move(records.front());
  for (auto& h : table.header) h = trim(h);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw data_error("csv: record " + std::to_string(r) + " has " +
                       std::to_string(records[r].size()) + " fields, header has " +
                       std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open input file '" + path + "'");
  return read_csv(in);
}

bool is_missing(const std::string& cell) {
  const std::string t = trim(cell);
  return t.empty() || t == "NA" || t == "N/A" || t == "NaN" || t == "nan" || t == "na" ||
         t == ".";
}

ParsedData build_regression_data(const CsvTable& table, const ColumnRoles& roles) {
  if (roles.y.empty()) throw Error(ErrorKind::kUsage, "exactly one outcome column (--y) is required");
  if (roles.x.empty()) throw Error(ErrorKind::kUsage, "at least one regressor (--x) is required");

  std::vector<std::pair<std::string, std::string>> interactions;
  for (const auto& spec : roles.interactions) interactions.push_back(split_interaction(spec));

  // Roles must be disjoint across y, x and the nuisance side.
  std::set<std::string> nuisance(roles.w.begin(), roles.w.end());
  nuisance.insert(roles.factors.begin(), roles.factors.end());
  for (const auto& [a, b] : interactions) {
    nuisance.insert(a);
    nuisance.insert(b);
  }
  std::set<std::string> seen_x;
  for (const auto& name : roles.x) {
    if (name == roles.y) throw Error(ErrorKind::kUsage, "column '" + name + "' is both y and x");
    if (nuisance.count(name)) {
      throw Error(ErrorKind::kUsage, "column '" + name + "' is both x and a nuisance covariate");
    }
    if (!seen_x.insert(name).second) throw Error(ErrorKind::kUsage, "x column '" + name + "' repeated");
  }
  if (nuisance.count(roles.y)) {
    throw Error(ErrorKind::kUsage, "column '" + roles.y + "' is both y and a nuisance covariate");
  }

  auto column = [&](const std::string& name) {
    const auto it = std::find(table.header.begin(), table.header.end(), name);
    if (it == table.header.end()) throw data_error("column '" + name + "' not found in header");
    return static_cast<std::size_t>(it - table.header.begin());
  };
  const std::size_t y_col = column(roles.y);
  std::vector<std::size_t> x_cols, w_cols, f_cols;
  for (const auto& n : roles.x) x_cols.push_back(column(n));
  for (const auto& n : roles.w) w_cols.push_back(column(n));
  for (const auto& n : roles.factors) f_cols.push_back(column(n));
  std::vector<std::pair<std::size_t, std::size_t>> i_cols;
  for (const auto& [a, b] : interactions) i_cols.emplace_back(column(a), column(b));

  std::vector<std::size_t> used{y_col};
  used.insert(used.end(), x_cols.begin(), x_cols.end());
  used.insert(used.end(), w_cols.begin(), w_cols.end());
  used.insert(used.end(), f_cols.begin(), f_cols.end());
  for (const auto& [a, b] : i_cols) {
    used.push_back(a);
    used.push_back(b);
  }

  ParsedData out;
  out.rows_read = static_cast<Index>(table.rows.size());
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const bool missing =
        std::any_of(used.begin(), used.end(), [&](std::size_t c) { return is_missing(row[c]); });
    if (missing) {
      ++out.rows_dropped;
    } else {
      kept.push_back(r);
    }
  }
  if (kept.empty()) throw data_error("no complete rows remain after dropping missing values");
  const auto n = static_cast<Index>(kept.size());

  auto numeric = [&](std::size_t r, std::size_t c) {
    double v;
    if (!parse_double(table.rows[r][c], v)) {
      throw data_error("row " + std::to_string(r + 1) + ", column '" + table.header[c] +
                       "': value '" + table.rows[r][c] + "' is not numeric");
    }
    return v;
  };

  // Dummy columns from factors and interactions, as (name, values).
  std::vector<std::pair<std::string, Vector>> dummies;
  auto factor_codes = [&](std::size_t c, Levels& levels) {
    std::vector<std::size_t> codes(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) codes[i] = levels.add(trim(table.rows[kept[i]][c]));
    if (static_cast<Index>(levels.order.size()) == n && n > 1) {
      throw data_error("factor '" + table.header[c] + "' is unit-identifying (" +
                       std::to_string(n) + " levels for " + std::to_string(n) + " rows)");
    }
    return codes;
  };
  for (std::size_t f = 0; f < f_cols.size(); ++f) {
    Levels levels;
    const auto codes = factor_codes(f_cols[f], levels);
    for (std::size_t l = 1; l < levels.order.size(); ++l) {
      Vector col(n);
      for (Index i = 0; i < n; ++i) col(i) = codes[static_cast<std::size_t>(i)] == l ? 1.0 : 0.0;
      dummies.emplace_back(roles.factors[f] + "=" + levels.order[l], std::move(col));
    }
  }
  for (std::size_t k = 0; k < i_cols.size(); ++k) {
    Levels la, lb;
    const auto ca = factor_codes(i_cols[k].first, la);
    const auto cb = factor_codes(i_cols[k].second, lb);
    for (std::size_t a = 1; a < la.order.size(); ++a) {
      for (std::size_t b = 1; b < lb.order.size(); ++b) {
        Vector col(n);
        for (Index i = 0; i < n; ++i) {
          const auto ii = static_cast<std::size_t>(i);
          col(i) = (ca[ii] == a && cb[ii] == b) ? 1.0 : 0.0;
        }
        dummies.emplace_back(interactions[k].first + "=" + la.order[a] + ":" +
                                 interactions[k].second + "=" + lb.order[b],
                             std::move(col));
      }
    }
  }

  RegressionData& data = out.data;
  const Index k_total = (roles.intercept ? 1 : 0) + static_cast<Index>(w_cols.size()) +
                        static_cast<Index>(dummies.size());
  data.y.resize(n);
  data.x.resize(n, static_cast<Index>(x_cols.size()));
  data.w.resize(n, k_total);
  for (Index i = 0; i < n; ++i) {
    const std::size_t r = kept[static_cast<std::size_t>(i)];
    data.y(i) = numeric(r, y_col);
    for (std::size_t j = 0; j < x_cols.size(); ++j) data.x(i, static_cast<Index>(j)) = numeric(r, x_cols[j]);
    Index c = 0;
    if (roles.intercept) data.w(i, c++) = 1.0;
    for (std::size_t j = 0; j < w_cols.size(); ++j) data.w(i, c++) = numeric(r, w_cols[j]);
  }
  Index c = (roles.intercept ? 1 : 0) + static_cast<Index>(w_cols.size());
  for (auto& [name, values] : dummies) data.w.col(c++) = values;

  out.x_names = roles.x;
  if (roles.intercept) out.w_names.push_back("(intercept)");
  out.w_names.insert(out.w_names.end(), roles.w.begin(), roles.w.end());
  for (const auto& [name, values] : dummies) out.w_names.push_back(name);
  return out;
}

ParsedData parse_csv(const std::string& path, const ColumnRoles& roles) {
  return build_regression_data(read_csv_file(path), roles);
}

}  // namespace hck::cli
