#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ribound/core.hpp"

namespace ribound::cli {

inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kComputation = 4 };

int exit_code_for(Errc code) noexcept;

struct ColumnMapping {
  std::string id = "id";
  std::string w = "w";
  std::string y = "y";
  /// Unset: use a column named "block" when the header has one.
  std::optional<std::string> block;
};

/// Header plus rows of raw text cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;

  /// Errors: ParseError when the column is absent.
  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

/// Errors: FileNotFound, ParseError.
CsvTable read_csv(const std::string& path);
CsvTable read_csv(std::istream& in, const std::string& source = "<stream>");

/// w must read 0 or 1 and y a finite decimal; a block column whose cells are
/// all blank means no blocks. Errors: ParseError(row, column) and the
/// validation errors of validate_dataset.
Dataset to_dataset(const CsvTable& table, const ColumnMapping& mapping);
Dataset ingest_csv(const std::string& path, const ColumnMapping& mapping = {});

/// Decimal column, e.g. a per-unit null. Errors: ParseError.
std::vector<double> numeric_column(const CsvTable& table, const std::string& name);

/// Full command line without the program name. Results go to `out` as JSON
/// (or to --output); diagnostics go to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ribound::cli
