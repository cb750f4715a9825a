#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace desflow {

/// Minimal JSON value with insertion-ordered object keys and a fixed
/// %.6g float format, so identical runs serialize byte-identically.
class JValue {
 public:
  enum class Kind { Null, Bool, Int, Num, Str, Arr, Obj };

  JValue() : kind_(Kind::Null) {}
  static JValue boolean(bool b);
  static JValue integer(long long v);
  static JValue number(double v);
  static JValue str(std::string s);
  static JValue array();
  static JValue object();

  JValue& push(JValue v);                       // arrays
  JValue& set(const std::string& k, JValue v);  // objects

  Kind kind() const { return kind_; }
  void write(std::ostream& os, int indent = 0) const;
  std::string dump() const;

 private:
  Kind kind_;
  bool b_ = false;
  long long i_ = 0;
  double n_ = 0;
  std::string s_;
  std::vector<JValue> arr_;
  std::vector<std::pair<std::string, JValue>> obj_;
};

std::string json_escape(const std::string& s);
std::string fmt_sig6(double v);

}  // namespace desflow
