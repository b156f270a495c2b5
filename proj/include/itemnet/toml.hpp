#pragma once

#include <string>
#include <utility>
#include <vector>

namespace itemnet::toml {

// Minimal TOML subset for run configs: [table] and [dotted.table] headers,
// string/integer/float/boolean scalars, single-line arrays, "..." strings
// with the usual escapes plus """multi-line""" strings, and # comments.
// Declaration order is preserved because attribute order is meaningful.

struct Value {
  enum class Type { kString, kInteger, kFloat, kBoolean, kArray };
  Type type = Type::kString;
  std::string str;
  long long integer = 0;
  double real = 0.0;
  bool boolean = false;
  std::vector<Value> array;

  // Checked accessors; a type mismatch raises SchemaError naming the key.
  const std::string& as_string(const std::string& key) const;
  long long as_integer(const std::string& key) const;
  double as_float(const std::string& key) const;  // accepts integers too
  bool as_boolean(const std::string& key) const;
  std::vector<std::string> as_string_array(const std::string& key) const;
};

class Table {
 public:
  void set(const std::string& key, Value value);
  const Value* find(const std::string& key) const;
  bool contains(const std::string& key) const { return find(key) != nullptr; }

  // Entries whose dotted key starts with `prefix + '.'`, with the prefix
  // stripped, in declaration order.
  std::vector<std::pair<std::string, Value>> section(const std::string& prefix) const;

  const std::vector<std::pair<std::string, Value>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<std::string, Value>> entries_;
};

Table parse(const std::string& text);
Table parse_file(const std::string& path);

}  // namespace itemnet::toml
