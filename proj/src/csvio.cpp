#include "desflow/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace desflow {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

CsvTable CsvTable::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("missing file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str(), path);
}

CsvTable CsvTable::from_string(const std::string& text, const std::string& name) {
  CsvTable t;
  t.name_ = name;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto cells = split_csv_line(s);
    if (t.header_.empty()) {
      t.header_ = cells;
    } else {
      if (cells.size() != t.header_.size())
        throw ParseError(name + ":" + std::to_string(lineno) + ": expected " +
                         std::to_string(t.header_.size()) + " fields, got " +
                         std::to_string(cells.size()));
      t.rows_.push_back(std::move(cells));
      t.line_no_.push_back(lineno);
    }
  }
  if (t.header_.empty()) throw ParseError(name + ": empty file (no header row)");
  return t;
}

bool CsvTable::has_column(const std::string& name) const {
  for (const auto& h : header_)
    if (h == name) return true;
  return false;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  throw ParseError(name_ + ": missing column '" + name + "'");
}

const std::string& CsvTable::cell(std::size_t row, std::size_t col) const {
  return rows_.at(row).at(col);
}

const std::string& CsvTable::cell(std::size_t row, const std::string& col) const {
  return rows_.at(row).at(column(col));
}

double CsvTable::num(std::size_t row, const std::string& col) const {
  const std::string& s = cell(row, col);
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where(row) + ": '" + s + "' in column '" + col +
                     "' is not a number");
  }
}

std::string CsvTable::where(std::size_t row) const {
  return name_ + ":" + std::to_string(line_no_.at(row));
}

KeyValueConfig KeyValueConfig::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("missing file: " + path);
  KeyValueConfig cfg;
  cfg.path_ = path;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty())
      throw ParseError(path + ":" + std::to_string(lineno) + ": empty key");
    cfg.kv_[key] = val;
  }
  return cfg;
}

bool KeyValueConfig::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string KeyValueConfig::str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ParseError(path_ + ": missing key '" + key + "'");
  return it->second;
}

std::string KeyValueConfig::str_or(const std::string& key, const std::string& dflt) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? dflt : it->second;
}

double KeyValueConfig::num(const std::string& key) const {
  const std::string s = str(key);
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(path_ + ": key '" + key + "' = '" + s + "' is not a number");
  }
}

double KeyValueConfig::num_or(const std::string& key, double dflt) const {
  return has(key) ? num(key) : dflt;
}

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // prefer the shortest representation that round-trips
  for (int prec = 1; prec <= 16; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof probe, "%.*g", prec, v);
    if (std::stod(probe) == v) return probe;
  }
  return buf;
}

}  // namespace desflow
