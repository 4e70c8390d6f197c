#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>

#include "ribound/cli.hpp"

namespace ribound::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_line(const std::string& line, std::size_t line_no, const std::string& source) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"' && trim(cur).empty()) {
      quoted = true;
      was_quoted = true;
      cur.clear();
    } else if (c == ',') {
      cells.push_back(was_quoted ? cur : trim(cur));
      cur.clear();
      was_quoted = false;
    } else {
      cur += c;
    }
  }
  if (quoted) throw Error(Errc::ParseError, source + " line " + std::to_string(line_no) + ": unterminated quote");
  cells.push_back(was_quoted ? cur : trim(cur));
  return cells;
}

[[noreturn]] void cell_error(const CsvTable& t, std::size_t row, const std::string& column, const std::string& what) {
  throw Error(Errc::ParseError, "row " + std::to_string(row + 1) + " (line " + std::to_string(t.line_numbers[row]) +
                                    "), column '" + column + "': " + what);
}

double parse_decimal(const CsvTable& t, std::size_t row, const std::string& column, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (text.empty() || ec != std::errc() || ptr != last) cell_error(t, row, column, "not a decimal number: '" + text + "'");
  return v;
}

}  // namespace

int exit_code_for(Errc code) noexcept {
  switch (category(code)) {
    case ErrorCategory::Usage: return kUsage;
    case ErrorCategory::Data: return kData;
    case ErrorCategory::Computation: return kComputation;
  }
  return kComputation;
}

bool CsvTable::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(Errc::ParseError, "header has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line, line_no, source);
    if (!have_header) {
      if (line_no == 1 && cells[0].rfind("\xEF\xBB\xBF", 0) == 0) cells[0].erase(0, 3);
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size())
      throw Error(Errc::ParseError, source + " line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(t.header.size()) + " fields, found " +
                                        std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
    t.line_numbers.push_back(line_no);
  }
  if (!have_header) throw Error(Errc::ParseError, source + ": missing header row");
  return t;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::FileNotFound, "cannot open '" + path + "'");
  return read_csv(in, path);
}

Dataset to_dataset(const CsvTable& t, const ColumnMapping& m) {
  const std::size_t id_col = t.column(m.id);
  const std::size_t w_col = t.column(m.w);
  const std::size_t y_col = t.column(m.y);
  std::optional<std::size_t> block_col;
  if (m.block) block_col = t.column(*m.block);
  else if (t.has_column("block")) block_col = t.column("block");

  bool any_block = false;
  if (block_col)
    for (const auto& r : t.rows) any_block = any_block || !r[*block_col].empty();

  std::vector<RawRow> rows;
  rows.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    RawRow raw;
    raw.id = r[id_col];
    if (r[w_col] == "0") raw.w = 0;
    else if (r[w_col] == "1") raw.w = 1;
    else cell_error(t, i, t.header[w_col], "treatment must be 0 or 1, found '" + r[w_col] + "'");
    raw.y = parse_decimal(t, i, t.header[y_col], r[y_col]);
    if (any_block && !r[*block_col].empty()) raw.block = r[*block_col];
    rows.push_back(std::move(raw));
  }
  return validate_dataset(rows);
}

Dataset ingest_csv(const std::string& path, const ColumnMapping& mapping) {
  return to_dataset(read_csv(path), mapping);
}

std::vector<double> numeric_column(const CsvTable& t, const std::string& name) {
  const std::size_t col = t.column(name);
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) out.push_back(parse_decimal(t, i, name, t.rows[i][col]));
  return out;
}

}  // namespace ribound::cli
