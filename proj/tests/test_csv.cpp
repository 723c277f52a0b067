#include "doctest.h"

#include "pcaqs/csv.hpp"

#include <unistd.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>

using namespace pcaqs;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("csvt-" + std::to_string(::getpid()) + "-" +
            std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_text(const TempDir& dir, const std::string& name, const std::string& text) {
  const std::string p = dir.file(name);
  std::ofstream out(p, std::ios::binary);
  out << text;
  return p;
}

}  // namespace

TEST_SUITE("csv") {

TEST_CASE("ingest splits the response column and keeps raw lines") {
  TempDir dir;
  const std::string p = write_text(dir, "basic.csv",
                                   "a,Y,b\n"
                                   "1,10,2.5\n"
                                   "3,20,-4\n");
  const CsvTable table = ingest_csv(p);
  CHECK(table.column_names == std::vector<std::string>{"a", "b"});
  REQUIRE(table.y.has_value());
  REQUIRE(table.y_column.has_value());
  CHECK(*table.y_column == 1);  // case-insensitive match on "Y"
  CHECK(table.values.rows() == 2);
  CHECK(table.values.cols() == 2);
  CHECK(table.values(0, 0) == 1.0);
  CHECK(table.values(0, 1) == 2.5);
  CHECK((*table.y)(0) == 10.0);
  CHECK((*table.y)(1) == 20.0);
  CHECK(table.header_line == "a,Y,b");
  REQUIRE(table.row_lines.size() == 2);
  CHECK(table.row_lines[0] == "1,10,2.5");
  CHECK(table.row_lines[1] == "3,20,-4");
}

TEST_CASE("with_response_column restores the original layout") {
  TempDir dir;
  const std::string p = write_text(dir, "restore.csv",
                                   "a,y,b\n"
                                   "1,10,2\n"
                                   "3,20,4\n");
  const CsvTable table = ingest_csv(p);
  const Matrix full = with_response_column(table);
  CHECK(full.rows() == 2);
  CHECK(full.cols() == 3);
  CHECK(full(0, 0) == 1.0);
  CHECK(full(0, 1) == 10.0);
  CHECK(full(0, 2) == 2.0);
  CHECK(full(1, 1) == 20.0);
}

TEST_CASE("split_y can be disabled so y stays a plain feature") {
  TempDir dir;
  const std::string p = write_text(dir, "noy.csv",
                                   "a,y\n"
                                   "1,2\n");
  const CsvTable table = ingest_csv(p, /*split_y=*/false);
  CHECK_FALSE(table.y.has_value());
  CHECK(table.column_names == std::vector<std::string>{"a", "y"});
  CHECK(table.values.cols() == 2);
  const Matrix full = with_response_column(table);
  CHECK(full.cols() == 2);
}

TEST_CASE("keep_lines can be disabled") {
  TempDir dir;
  const std::string p = write_text(dir, "nolines.csv", "a\n1\n2\n");
  const CsvTable table = ingest_csv(p, true, /*keep_lines=*/false);
  CHECK(table.row_lines.empty());
  CHECK(table.values.rows() == 2);
}

TEST_CASE("windows line endings and trailing blank lines are tolerated") {
  TempDir dir;
  const std::string p = write_text(dir, "crlf.csv", "a,b\r\n1,2\r\n3,4\r\n\r\n");
  const CsvTable table = ingest_csv(p);
  CHECK(table.header_line == "a,b");
  CHECK(table.values.rows() == 2);
  CHECK(table.values(1, 1) == 4.0);
  CHECK(table.row_lines[1] == "3,4");
}

TEST_CASE("fields are trimmed before parsing") {
  TempDir dir;
  const std::string p = write_text(dir, "spaces.csv", " a , b \n 1 , 2.5 \n");
  const CsvTable table = ingest_csv(p);
  CHECK(table.column_names == std::vector<std::string>{"a", "b"});
  CHECK(table.values(0, 1) == 2.5);
}

TEST_CASE("parse errors name the data row and the column") {
  TempDir dir;
  const std::string p = write_text(dir, "bad.csv",
                                   "a,b\n"
                                   "1,2\n"
                                   "3,4\n"
                                   "5,6\n"
                                   "7,8\n"
                                   "9,oops\n");
  CHECK_THROWS_WITH_AS(ingest_csv(p),
                       (p + ": row 5, column 'b': cannot parse 'oops' as a number").c_str(),
                       std::runtime_error);
}

TEST_CASE("structural problems are rejected with clear messages") {
  TempDir dir;
  CHECK_THROWS_AS(ingest_csv(write_text(dir, "empty.csv", "")), std::runtime_error);
  CHECK_THROWS_AS(ingest_csv(write_text(dir, "nodata.csv", "a,b\n")), std::runtime_error);
  CHECK_THROWS_AS(ingest_csv(write_text(dir, "twoy.csv", "y,Y\n1,2\n")), std::runtime_error);
  CHECK_THROWS_AS(ingest_csv(write_text(dir, "onlyy.csv", "y\n1\n")), std::runtime_error);
  CHECK_THROWS_AS(ingest_csv(write_text(dir, "noname.csv", "a,,b\n1,2,3\n")),
                  std::runtime_error);
  CHECK_THROWS_AS(ingest_csv(write_text(dir, "ragged.csv", "a,b\n1,2\n3\n")),
                  std::runtime_error);
  CHECK_THROWS_AS(ingest_csv(dir.file("missing.csv")), std::runtime_error);
  CHECK_THROWS_AS(ingest_csv(write_text(dir, "inf.csv", "a\ninf\n")), std::runtime_error);
}

TEST_CASE("format_double round trips exactly") {
  const double cases[] = {0.0,        1.0,     -1.0,         0.1,
                          1.0 / 3.0,  1e-300,  -2.5e222,     3.141592653589793,
                          1234567.0,  1e17,    -0.0001,      5e-324};
  for (const double v : cases) {
    const std::string text = format_double(v);
    double back = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), back);
    CHECK(ec == std::errc{});
    CHECK(ptr == text.data() + text.size());
    CHECK(back == v);
  }
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("atomic writes replace the target completely or not at all") {
  TempDir dir;
  const std::string p = dir.file("out.txt");
  write_file_atomic(p, "first\n");
  CHECK(read_file(p) == "first\n");
  write_file_atomic(p, "second\n");
  CHECK(read_file(p) == "second\n");
  // no stray temporary left behind
  std::size_t entries = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir.path)) {
    (void)entry;
    ++entries;
  }
  CHECK(entries == 1);
  CHECK_THROWS_AS(write_file_atomic((dir.path / "nodir" / "x.txt").string(), "z"),
                  std::runtime_error);
  CHECK_THROWS_AS(read_file(dir.file("absent.txt")), std::runtime_error);
}

}  // TEST_SUITE
