#pragma once

#include "pcaqs/types.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcaqs {

struct CsvTable {
  std::vector<std::string> column_names;  // feature columns, file order
  Matrix values;                          // numeric feature values
  std::optional<Vector> y;                // split-off response column
  std::optional<std::size_t> y_column;    // its position in the original header
  std::string header_line;                // first line, verbatim (LF-normalized)
  std::vector<std::string> row_lines;     // data lines, verbatim (LF-normalized)
};

/// Parses a numeric CSV with a mandatory header row. When `split_y` is set and
/// a column is named "y" (case-insensitive), it is returned separately. Parse
/// errors name the data row (1-based) and the column. `keep_lines` retains the
/// raw text lines so subsets can be re-emitted byte-for-byte.
CsvTable ingest_csv(const std::string& path, bool split_y = true, bool keep_lines = true);

/// Feature values with the split-off y column re-inserted at its original
/// position (the plain values when no y was split).
Matrix with_response_column(const CsvTable& table);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// Writes `content` to a temporary sibling and renames it over `path`, so a
/// failed run never leaves a partial file.
void write_file_atomic(const std::string& path, std::string_view content);

std::string read_file(const std::string& path);

}  // namespace pcaqs
