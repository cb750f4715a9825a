#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace desflow {

/// Error raised by the CSV and config readers; message carries file:line.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A parsed CSV file: header row plus data rows, with source line numbers
/// retained so errors can point at the offending row.
class CsvTable {
 public:
  static CsvTable read_file(const std::string& path);
  static CsvTable from_string(const std::string& text, const std::string& name);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return header_.size(); }

  bool has_column(const std::string& name) const;
  /// Column index for a header name; throws ParseError if absent.
  std::size_t column(const std::string& name) const;

  const std::string& cell(std::size_t row, std::size_t col) const;
  const std::string& cell(std::size_t row, const std::string& col) const;
  double num(std::size_t row, const std::string& col) const;
  int line_of(std::size_t row) const { return line_no_[row]; }

  /// "file.csv:12" for error messages.
  std::string where(std::size_t row) const;

 private:
  std::string name_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<int> line_no_;
};

std::vector<std::string> split_csv_line(const std::string& line);
std::string trim(const std::string& s);

/// Flat key = value config file (# comments, blank lines ignored).
class KeyValueConfig {
 public:
  static KeyValueConfig read_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& dflt) const;
  double num(const std::string& key) const;
  double num_or(const std::string& key, double dflt) const;
  const std::map<std::string, std::string>& entries() const { return kv_; }

 private:
  std::string path_;
  std::map<std::string, std::string> kv_;
};

/// Full-precision float formatting for CSV writers (round-trips doubles).
std::string fmt_full(double v);

}  // namespace desflow
