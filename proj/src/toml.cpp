#include "itemnet/toml.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "itemnet/errors.hpp"

namespace itemnet::toml {

const std::string& Value::as_string(const std::string& key) const {
  if (type != Type::kString)
    throw SchemaError("config key '" + key + "' must be a string");
  return str;
}

long long Value::as_integer(const std::string& key) const {
  if (type != Type::kInteger)
    throw SchemaError("config key '" + key + "' must be an integer");
  return integer;
}

double Value::as_float(const std::string& key) const {
  if (type == Type::kFloat) return real;
  if (type == Type::kInteger) return static_cast<double>(integer);
  throw SchemaError("config key '" + key + "' must be a number");
}

bool Value::as_boolean(const std::string& key) const {
  if (type != Type::kBoolean)
    throw SchemaError("config key '" + key + "' must be a boolean");
  return boolean;
}

std::vector<std::string> Value::as_string_array(const std::string& key) const {
  if (type != Type::kArray)
    throw SchemaError("config key '" + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& v : array) out.push_back(v.as_string(key));
  return out;
}

void Table::set(const std::string& key, Value value) {
  for (auto& [k, v] : entries_) {
    if (k == key) throw SchemaError("duplicate config key '" + key + "'");
  }
  entries_.emplace_back(key, std::move(value));
}

const Value* Table::find(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return &v;
  return nullptr;
}

std::vector<std::pair<std::string, Value>> Table::section(
    const std::string& prefix) const {
  std::vector<std::pair<std::string, Value>> out;
  const std::string dotted = prefix + ".";
  for (const auto& [k, v] : entries_)
    if (k.rfind(dotted, 0) == 0) out.emplace_back(k.substr(dotted.size()), v);
  return out;
}

namespace {

struct Cursor {
  const std::string& text;
  size_t pos = 0;
  int line = 1;

  bool done() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char take() {
    const char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw SchemaError("config line " + std::to_string(line) + ": " + what);
  }
};

void skip_spaces(Cursor& c) {
  while (!c.done() && (c.peek() == ' ' || c.peek() == '\t')) c.take();
}

void skip_to_eol(Cursor& c) {
  while (!c.done() && c.peek() != '\n') c.take();
  if (!c.done()) c.take();
}

void expect_line_end(Cursor& c) {
  skip_spaces(c);
  if (c.done() || c.peek() == '\n' || c.peek() == '#') {
    skip_to_eol(c);
    return;
  }
  c.fail("unexpected trailing characters");
}

std::string parse_bare_key(Cursor& c) {
  std::string key;
  while (!c.done()) {
    const char ch = c.peek();
    if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' ||
        ch == '-' || ch == '.') {
      key += c.take();
    } else {
      break;
    }
  }
  if (key.empty()) c.fail("expected a key");
  return key;
}

std::string parse_basic_string(Cursor& c) {
  // Opening quote already consumed by caller? No: caller leaves it.
  c.take();  // opening "
  // """ multi-line form
  if (!c.done() && c.peek() == '"') {
    c.take();
    if (c.done() || c.peek() != '"') return "";  // empty "" string
    c.take();
    // Per TOML, a newline right after the opening delimiter is trimmed.
    if (!c.done() && c.peek() == '\n') c.take();
    std::string out;
    while (true) {
      if (c.done()) c.fail("unterminated multi-line string");
      if (c.peek() == '"' && c.pos + 2 < c.text.size() + 1 &&
          c.text.compare(c.pos, 3, "\"\"\"") == 0) {
        c.pos += 3;
        return out;
      }
      out += c.take();
    }
  }
  std::string out;
  while (true) {
    if (c.done() || c.peek() == '\n') c.fail("unterminated string");
    char ch = c.take();
    if (ch == '"') return out;
    if (ch == '\\') {
      if (c.done()) c.fail("dangling escape");
      const char esc = c.take();
      switch (esc) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: c.fail(std::string("unsupported escape \\") + esc);
      }
    } else {
      out += ch;
    }
  }
}

Value parse_value(Cursor& c);

Value parse_array(Cursor& c) {
  c.take();  // [
  Value out;
  out.type = Value::Type::kArray;
  skip_spaces(c);
  if (!c.done() && c.peek() == ']') {
    c.take();
    return out;
  }
  while (true) {
    skip_spaces(c);
    out.array.push_back(parse_value(c));
    skip_spaces(c);
    if (c.done()) c.fail("unterminated array");
    const char ch = c.take();
    if (ch == ']') return out;
    if (ch != ',') c.fail("expected ',' or ']' in array");
  }
}

Value parse_scalar(Cursor& c) {
  std::string token;
  while (!c.done()) {
    const char ch = c.peek();
    if (ch == '\n' || ch == '#' || ch == ',' || ch == ']' || ch == ' ' ||
        ch == '\t')
      break;
    token += c.take();
  }
  Value out;
  if (token == "true" || token == "false") {
    out.type = Value::Type::kBoolean;
    out.boolean = token == "true";
    return out;
  }
  if (token.empty()) c.fail("expected a value");
  const bool looks_float = token.find_first_of(".eE") != std::string::npos &&
                           token.find("0x") != 0;
  char* end = nullptr;
  if (!looks_float) {
    const long long v = std::strtoll(token.c_str(), &end, 10);
    if (end && *end == '\0') {
      out.type = Value::Type::kInteger;
      out.integer = v;
      return out;
    }
  }
  const double d = std::strtod(token.c_str(), &end);
  if (end && *end == '\0') {
    out.type = Value::Type::kFloat;
    out.real = d;
    return out;
  }
  c.fail("cannot parse value '" + token + "'");
}

Value parse_value(Cursor& c) {
  if (c.done()) c.fail("expected a value");
  if (c.peek() == '"') {
    Value out;
    out.type = Value::Type::kString;
    out.str = parse_basic_string(c);
    return out;
  }
  if (c.peek() == '[') return parse_array(c);
  return parse_scalar(c);
}

}  // namespace

Table parse(const std::string& text) {
  Table table;
  Cursor c{text};
  std::string prefix;
  while (!c.done()) {
    skip_spaces(c);
    if (c.done()) break;
    const char ch = c.peek();
    if (ch == '\n' || ch == '#') {
      skip_to_eol(c);
      continue;
    }
    if (ch == '[') {
      c.take();
      skip_spaces(c);
      prefix = parse_bare_key(c);
      skip_spaces(c);
      if (c.done() || c.take() != ']') c.fail("unterminated table header");
      expect_line_end(c);
      continue;
    }
    const std::string key = parse_bare_key(c);
    skip_spaces(c);
    if (c.done() || c.take() != '=') c.fail("expected '=' after key '" + key + "'");
    skip_spaces(c);
    Value value = parse_value(c);
    expect_line_end(c);
    table.set(prefix.empty() ? key : prefix + "." + key, std::move(value));
  }
  return table;
}

Table parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

}  // namespace itemnet::toml
