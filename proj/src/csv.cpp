#include "pcaqs/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace pcaqs {

namespace {

std::string_view trimmed(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  return text;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return fields;
}

bool is_response_name(std::string_view name) {
  const std::string_view t = trimmed(name);
  return t.size() == 1 && (t[0] == 'y' || t[0] == 'Y');
}

double parse_field(std::string_view field, const std::string& path, std::size_t row,
                   const std::string& column) {
  const std::string_view body = trimmed(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
  if (ec != std::errc{} || ptr != body.data() + body.size() || body.empty()) {
    throw std::runtime_error(path + ": row " + std::to_string(row) + ", column '" + column +
                             "': cannot parse '" + std::string(field) + "' as a number");
  }
  if (!std::isfinite(value)) {
    throw std::runtime_error(path + ": row " + std::to_string(row) + ", column '" + column +
                             "': non-finite value '" + std::string(field) + "'");
  }
  return value;
}

}  // namespace

CsvTable ingest_csv(const std::string& path, bool split_y, bool keep_lines) {
  const std::string content = read_file(path);

  std::vector<std::string> lines;
  {
    std::size_t pos = 0;
    while (pos <= content.size()) {
      std::size_t nl = content.find('\n', pos);
      if (nl == std::string::npos) nl = content.size();
      std::string line = content.substr(pos, nl - pos);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) lines.push_back(std::move(line));
      if (nl == content.size()) break;
      pos = nl + 1;
    }
  }
  if (lines.empty()) throw std::runtime_error(path + ": empty file");

  CsvTable table;
  table.header_line = lines.front();
  const std::vector<std::string_view> header = split_fields(table.header_line);
  const std::size_t total_cols = header.size();

  std::size_t y_at = total_cols;  // sentinel: no response column
  if (split_y) {
    for (std::size_t j = 0; j < total_cols; ++j) {
      if (!is_response_name(header[j])) continue;
      if (y_at != total_cols) {
        throw std::runtime_error(path + ": multiple columns named 'y'");
      }
      y_at = j;
    }
  }

  for (std::size_t j = 0; j < total_cols; ++j) {
    const std::string_view name = trimmed(header[j]);
    if (name.empty()) {
      throw std::runtime_error(path + ": empty name for header column " +
                               std::to_string(j + 1));
    }
    if (j != y_at) table.column_names.emplace_back(name);
  }
  const std::size_t feature_cols = total_cols - (y_at != total_cols ? 1 : 0);
  if (feature_cols == 0) {
    throw std::runtime_error(path + ": no feature columns besides the response");
  }

  const std::size_t data_rows = lines.size() - 1;
  if (data_rows == 0) throw std::runtime_error(path + ": no data rows");

  table.values.resize(static_cast<Index>(data_rows), static_cast<Index>(feature_cols));
  Vector y;
  if (y_at != total_cols) y.resize(static_cast<Index>(data_rows));

  for (std::size_t r = 0; r < data_rows; ++r) {
    const std::string& line = lines[r + 1];
    const std::vector<std::string_view> fields = split_fields(line);
    if (fields.size() != total_cols) {
      throw std::runtime_error(path + ": row " + std::to_string(r + 1) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(total_cols));
    }
    Index feature_at = 0;
    for (std::size_t j = 0; j < total_cols; ++j) {
      const std::string column(trimmed(header[j]));
      const double value = parse_field(fields[j], path, r + 1, column);
      if (j == y_at) {
        y(static_cast<Index>(r)) = value;
      } else {
        table.values(static_cast<Index>(r), feature_at++) = value;
      }
    }
  }

  if (y_at != total_cols) {
    table.y = std::move(y);
    table.y_column = y_at;
  }
  if (keep_lines) {
    table.row_lines.assign(lines.begin() + 1, lines.end());
  }
  return table;
}

Matrix with_response_column(const CsvTable& table) {
  if (!table.y.has_value()) return table.values;
  const Index rows = table.values.rows();
  const auto y_at = static_cast<Index>(*table.y_column);
  Matrix full(rows, table.values.cols() + 1);
  full.leftCols(y_at) = table.values.leftCols(y_at);
  full.col(y_at) = *table.y;
  full.rightCols(full.cols() - y_at - 1) = table.values.rightCols(table.values.cols() - y_at);
  return full;
}

std::string format_double(double v) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), v);
  if (ec != std::errc{}) throw std::logic_error("format_double: conversion failed");
  return std::string(buffer, ptr);
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file '" + tmp + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      throw std::runtime_error("cannot write file '" + tmp + "'");
    }
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot replace file '" + path + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace pcaqs
