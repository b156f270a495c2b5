#include "itemnet/items.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "itemnet/csv.hpp"
#include "itemnet/errors.hpp"

namespace itemnet {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

AttributeSpec::AttributeSpec(
    std::vector<std::pair<std::string, std::vector<std::string>>> types)
    : types_(std::move(types)) {
  std::set<std::string> seen_types;
  for (auto& [type, attrs] : types_) {
    if (!seen_types.insert(type).second)
      throw InputError("attribute spec: duplicate item type '" + type + "'");
    std::set<std::string> seen_attrs;
    for (const auto& a : attrs) {
      if (!seen_attrs.insert(a).second)
        throw InputError("attribute spec: duplicate attribute '" + a +
                         "' under type '" + type + "'");
    }
  }
}

bool AttributeSpec::has_type(const std::string& type) const {
  for (const auto& [name, _] : types_)
    if (name == type) return true;
  return false;
}

const std::vector<std::string>& AttributeSpec::attributes_of(
    const std::string& type) const {
  for (const auto& [name, attrs] : types_)
    if (name == type) return attrs;
  throw InputError("attribute spec: unknown item type '" + type + "'");
}

std::vector<std::string> AttributeSpec::type_names() const {
  std::vector<std::string> out;
  out.reserve(types_.size());
  for (const auto& [name, _] : types_) out.push_back(name);
  return out;
}

std::vector<std::string> ItemPool::ids() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.id);
  return out;
}

std::vector<std::string> ItemPool::statements() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.statement);
  return out;
}

const Item* ItemPool::find(const std::string& id) const {
  for (const auto& it : items)
    if (it.id == id) return &it;
  return nullptr;
}

ItemPool ItemPool::subset_by_type(const std::string& type) const {
  ItemPool out;
  out.provenance = provenance;
  for (const auto& it : items)
    if (it.item_type == type) out.items.push_back(it);
  return out;
}

ItemPool ItemPool::subset_by_ids(const std::vector<std::string>& keep) const {
  std::unordered_set<std::string> wanted(keep.begin(), keep.end());
  ItemPool out;
  out.provenance = provenance;
  for (const auto& it : items)
    if (wanted.count(it.id)) out.items.push_back(it);
  return out;
}

void ValidationReport::add_error(std::string code, std::string message,
                                 std::string item_id) {
  violations_.push_back({Violation::Severity::kError, std::move(code),
                         std::move(message), std::move(item_id)});
}

void ValidationReport::add_warning(std::string code, std::string message,
                                   std::string item_id) {
  violations_.push_back({Violation::Severity::kWarning, std::move(code),
                         std::move(message), std::move(item_id)});
}

bool ValidationReport::has_errors() const {
  return std::any_of(violations_.begin(), violations_.end(), [](const Violation& v) {
    return v.severity == Violation::Severity::kError;
  });
}

std::string ValidationReport::to_string() const {
  std::string out;
  for (const auto& v : violations_) {
    out += v.severity == Violation::Severity::kError ? "error" : "warning";
    out += " [" + v.code + "] " + v.message;
    if (!v.item_id.empty()) out += " (item " + v.item_id + ")";
    out += "\n";
  }
  return out;
}

ValidationReport validate_pool(const ItemPool& pool, const AttributeSpec& spec) {
  ValidationReport report;

  for (const auto& [type, attrs] : spec.types()) {
    if (attrs.size() < 2)
      report.add_error("too-few-attributes",
                       "item type '" + type + "' declares " +
                           std::to_string(attrs.size()) +
                           " attribute(s); at least two are required");
  }

  std::unordered_map<std::string, int> id_count;
  std::unordered_map<std::string, std::string> statement_first_id;
  for (const auto& item : pool.items) ++id_count[item.id];

  std::unordered_set<std::string> reported_dup_ids;
  for (const auto& item : pool.items) {
    if (id_count[item.id] > 1 && reported_dup_ids.insert(item.id).second)
      report.add_error("duplicate-id",
                       "id '" + item.id + "' appears " +
                           std::to_string(id_count[item.id]) + " times",
                       item.id);
    if (trim(item.statement).empty())
      report.add_error("empty-statement", "statement is empty", item.id);
    if (!spec.has_type(item.item_type)) {
      report.add_error("unknown-type",
                       "item type '" + item.item_type + "' is not declared",
                       item.id);
    } else {
      const auto& attrs = spec.attributes_of(item.item_type);
      if (std::find(attrs.begin(), attrs.end(), item.attribute) == attrs.end())
        report.add_error("unknown-attribute",
                         "attribute '" + item.attribute +
                             "' is not declared for type '" + item.item_type + "'",
                         item.id);
    }
    const std::string key = item.item_type + "\x1f" + trim(item.statement);
    auto [it, inserted] = statement_first_id.emplace(key, item.id);
    if (!inserted && it->second != item.id)
      report.add_warning("duplicate-statement",
                         "statement duplicates item '" + it->second +
                             "'; redundancy analysis will arbitrate",
                         item.id);
  }
  return report;
}

AttributeSpec derive_attribute_spec(const ItemPool& pool) {
  std::vector<std::pair<std::string, std::vector<std::string>>> types;
  for (const auto& item : pool.items) {
    auto it = std::find_if(types.begin(), types.end(),
                           [&](const auto& t) { return t.first == item.item_type; });
    if (it == types.end()) {
      types.push_back({item.item_type, {item.attribute}});
    } else if (std::find(it->second.begin(), it->second.end(), item.attribute) ==
               it->second.end()) {
      it->second.push_back(item.attribute);
    }
  }
  return AttributeSpec(std::move(types));
}

namespace {

ItemPool finish_pool(ItemPool pool) {
  ValidationReport report = validate_pool(pool, derive_attribute_spec(pool));
  if (report.has_errors())
    throw InputError("item pool failed validation:\n" + report.to_string());
  return pool;
}

}  // namespace

ItemPool pool_from_csv(const std::string& text, Provenance provenance) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw SchemaError("item table: file is empty, no header row");

  const csv::Row& header = rows.front();
  int col_statement = -1, col_attribute = -1, col_type = -1, col_id = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    const std::string name = lower(trim(header[j]));
    if (name == "statement") col_statement = static_cast<int>(j);
    else if (name == "attribute") col_attribute = static_cast<int>(j);
    else if (name == "type") col_type = static_cast<int>(j);
    else if (name == "id") col_id = static_cast<int>(j);
  }
  for (auto [col, name] : {std::pair{col_statement, "statement"},
                           {col_attribute, "attribute"},
                           {col_type, "type"},
                           {col_id, "ID"}}) {
    if (col < 0)
      throw SchemaError(std::string("item table: missing column '") + name + "'");
  }

  ItemPool pool;
  pool.provenance = provenance;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const csv::Row& row = rows[r];
    if (row.size() == 1 && trim(row[0]).empty()) continue;
    auto cell = [&](int col) -> std::string {
      return static_cast<std::size_t>(col) < row.size() ? row[col] : "";
    };
    Item item;
    item.id = trim(cell(col_id));
    item.statement = trim(cell(col_statement));
    item.attribute = trim(cell(col_attribute));
    item.item_type = trim(cell(col_type));
    pool.items.push_back(std::move(item));
  }
  return finish_pool(std::move(pool));
}

ItemPool pool_from_json(const nlohmann::json& arr, Provenance provenance) {
  if (!arr.is_array()) throw SchemaError("item table: JSON root must be an array");
  ItemPool pool;
  pool.provenance = provenance;
  for (const auto& obj : arr) {
    if (!obj.is_object())
      throw SchemaError("item table: JSON array entries must be objects");
    for (const char* key : {"statement", "attribute", "type", "ID"}) {
      if (!obj.contains(key))
        throw SchemaError(std::string("item table: missing field '") + key + "'");
    }
    Item item;
    item.id = trim(obj.at("ID").is_string() ? obj.at("ID").get<std::string>()
                                            : obj.at("ID").dump());
    item.statement = trim(obj.at("statement").get<std::string>());
    item.attribute = trim(obj.at("attribute").get<std::string>());
    item.item_type = trim(obj.at("type").get<std::string>());
    pool.items.push_back(std::move(item));
  }
  return finish_pool(std::move(pool));
}

ItemPool load_pool(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open item table: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[')
    return pool_from_json(nlohmann::json::parse(text), Provenance::kUserSupplied);
  return pool_from_csv(text, Provenance::kUserSupplied);
}

std::string pool_to_csv(const ItemPool& pool) {
  std::vector<csv::Row> rows;
  rows.push_back({"ID", "statement", "attribute", "type"});
  for (const auto& item : pool.items)
    rows.push_back({item.id, item.statement, item.attribute, item.item_type});
  return csv::emit(rows);
}

nlohmann::json pool_to_json(const ItemPool& pool) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& item : pool.items) {
    arr.push_back({{"ID", item.id},
                   {"statement", item.statement},
                   {"attribute", item.attribute},
                   {"type", item.item_type}});
  }
  return arr;
}

void write_pool(const ItemPool& pool, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write item table: " + path);
  out << pool_to_csv(pool);
}

Eigen::Index EmbeddingMatrix::column_of(const std::string& id) const {
  for (std::size_t j = 0; j < item_ids.size(); ++j)
    if (item_ids[j] == id) return static_cast<Eigen::Index>(j);
  return -1;
}

EmbeddingMatrix EmbeddingMatrix::subset(const std::vector<std::string>& keep) const {
  EmbeddingMatrix out;
  out.kind = kind;
  out.values.resize(values.rows(), static_cast<Eigen::Index>(keep.size()));
  std::string missing;
  Eigen::Index col = 0;
  for (const auto& id : keep) {
    const Eigen::Index src = column_of(id);
    if (src < 0) {
      missing += missing.empty() ? id : ", " + id;
      continue;
    }
    out.values.col(col++) = values.col(src);
    out.item_ids.push_back(id);
  }
  if (!missing.empty())
    throw InputError("embedding matrix is missing columns for items: " + missing);
  return out;
}

void EmbeddingMatrix::check() const {
  if (values.cols() != static_cast<Eigen::Index>(item_ids.size()))
    throw InputError("embedding matrix: column count (" +
                     std::to_string(values.cols()) + ") != item id count (" +
                     std::to_string(item_ids.size()) + ")");
  if (!values.allFinite())
    throw InputError("embedding matrix contains non-finite entries");
}

int Partition::label_of(const std::string& id) const {
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] == id) return labels[i];
  return -1;
}

int Partition::n_communities() const {
  std::set<int> distinct(labels.begin(), labels.end());
  return static_cast<int>(distinct.size());
}

Partition Partition::canonicalized() const {
  Partition out;
  out.ids = ids;
  out.labels.resize(labels.size());
  std::unordered_map<int, int> remap;
  int next = 1;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = remap.emplace(labels[i], next);
    if (inserted) ++next;
    out.labels[i] = it->second;
  }
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

EmbeddingMatrix embeddings_from_csv(const std::string& text) {
  auto rows = csv::parse(text);
  if (rows.empty()) throw SchemaError("embedding table: file is empty");
  EmbeddingMatrix emb;
  emb.item_ids = rows.front();
  const std::size_t p = emb.item_ids.size();
  const std::size_t dims = rows.size() - 1;
  emb.values.resize(static_cast<Eigen::Index>(dims), static_cast<Eigen::Index>(p));
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != p)
      throw SchemaError("embedding table: row " + std::to_string(r) + " has " +
                        std::to_string(rows[r].size()) + " values, expected " +
                        std::to_string(p));
    for (std::size_t j = 0; j < p; ++j) {
      try {
        emb.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(j)) =
            std::stod(rows[r][j]);
      } catch (const std::exception&) {
        throw SchemaError("embedding table: non-numeric value '" + rows[r][j] +
                          "' at row " + std::to_string(r));
      }
    }
  }
  emb.check();
  return emb;
}

EmbeddingMatrix load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding table: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return embeddings_from_csv(buf.str());
}

std::string embeddings_to_csv(const EmbeddingMatrix& emb) {
  std::vector<csv::Row> rows;
  rows.push_back(emb.item_ids);
  for (Eigen::Index r = 0; r < emb.values.rows(); ++r) {
    csv::Row row;
    row.reserve(static_cast<std::size_t>(emb.values.cols()));
    for (Eigen::Index j = 0; j < emb.values.cols(); ++j)
      row.push_back(format_double(emb.values(r, j)));
    rows.push_back(std::move(row));
  }
  return csv::emit(rows);
}

void write_embeddings(const EmbeddingMatrix& emb, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write embedding table: " + path);
  out << embeddings_to_csv(emb);
}

}  // namespace itemnet
