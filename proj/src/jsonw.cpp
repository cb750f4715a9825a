#include "desflow/jsonw.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace desflow {

JValue JValue::boolean(bool b) {
  JValue v;
  v.kind_ = Kind::Bool;
  v.b_ = b;
  return v;
}
JValue JValue::integer(long long i) {
  JValue v;
  v.kind_ = Kind::Int;
  v.i_ = i;
  return v;
}
JValue JValue::number(double n) {
  JValue v;
  v.kind_ = Kind::Num;
  v.n_ = n;
  return v;
}
JValue JValue::str(std::string s) {
  JValue v;
  v.kind_ = Kind::Str;
  v.s_ = std::move(s);
  return v;
}
JValue JValue::array() {
  JValue v;
  v.kind_ = Kind::Arr;
  return v;
}
JValue JValue::object() {
  JValue v;
  v.kind_ = Kind::Obj;
  return v;
}

JValue& JValue::push(JValue v) {
  arr_.push_back(std::move(v));
  return *this;
}

JValue& JValue::set(const std::string& k, JValue v) {
  for (auto& kv : obj_)
    if (kv.first == k) {
      kv.second = std::move(v);
      return *this;
    }
  obj_.emplace_back(k, std::move(v));
  return *this;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string fmt_sig6(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "1e308" : "-1e308";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void JValue::write(std::ostream& os, int indent) const {
  const std::string pad(indent * 2, ' ');
  const std::string pad1((indent + 1) * 2, ' ');
  switch (kind_) {
    case Kind::Null: os << "null"; break;
    case Kind::Bool: os << (b_ ? "true" : "false"); break;
    case Kind::Int: os << i_; break;
    case Kind::Num: os << fmt_sig6(n_); break;
    case Kind::Str: os << '"' << json_escape(s_) << '"'; break;
    case Kind::Arr: {
      if (arr_.empty()) {
        os << "[]";
        break;
      }
      os << "[\n";
      for (std::size_t i = 0; i < arr_.size(); ++i) {
        os << pad1;
        arr_[i].write(os, indent + 1);
        os << (i + 1 < arr_.size() ? ",\n" : "\n");
      }
      os << pad << "]";
      break;
    }
    case Kind::Obj: {
      if (obj_.empty()) {
        os << "{}";
        break;
      }
      os << "{\n";
      for (std::size_t i = 0; i < obj_.size(); ++i) {
        os << pad1 << '"' << json_escape(obj_[i].first) << "\": ";
        obj_[i].second.write(os, indent + 1);
        os << (i + 1 < obj_.size() ? ",\n" : "\n");
      }
      os << pad << "}";
      break;
    }
  }
}

std::string JValue::dump() const {
  std::ostringstream ss;
  write(ss, 0);
  ss << "\n";
  return ss.str();
}

}  // namespace desflow
