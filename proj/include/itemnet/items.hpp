#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace itemnet {

// One candidate scale item. Items are immutable values after construction;
// ega_community is only set once the final network has been estimated.
struct Item {
  std::string id;
  std::string statement;
  std::string attribute;
  std::string item_type;
  std::optional<int> ega_community;

  bool operator==(const Item& other) const {
    return id == other.id && statement == other.statement &&
           attribute == other.attribute && item_type == other.item_type &&
           ega_community == other.ega_community;
  }
};

// Declares, per item type, the ordered facet labels items may carry.
// Type names and the labels within a type must be unique; the minimum of two
// attributes per type is a pool-validation concern, not a construction one.
class AttributeSpec {
 public:
  AttributeSpec() = default;
  AttributeSpec(std::vector<std::pair<std::string, std::vector<std::string>>> types);

  const std::vector<std::pair<std::string, std::vector<std::string>>>& types() const {
    return types_;
  }
  bool has_type(const std::string& type) const;
  const std::vector<std::string>& attributes_of(const std::string& type) const;
  std::vector<std::string> type_names() const;

 private:
  std::vector<std::pair<std::string, std::vector<std::string>>> types_;
};

enum class Provenance { kGenerated, kUserSupplied };

struct ItemPool {
  std::vector<Item> items;
  Provenance provenance = Provenance::kUserSupplied;

  std::size_t size() const { return items.size(); }
  std::vector<std::string> ids() const;
  std::vector<std::string> statements() const;
  const Item* find(const std::string& id) const;
  // Items of one type, preserving pool order.
  ItemPool subset_by_type(const std::string& type) const;
  // Items whose ids appear in `keep`, preserving pool order.
  ItemPool subset_by_ids(const std::vector<std::string>& keep) const;
};

struct Violation {
  enum class Severity { kError, kWarning };
  Severity severity;
  std::string code;     // e.g. "duplicate-id"
  std::string message;
  std::string item_id;  // empty when not item-specific
};

class ValidationReport {
 public:
  void add_error(std::string code, std::string message, std::string item_id = "");
  void add_warning(std::string code, std::string message, std::string item_id = "");

  const std::vector<Violation>& violations() const { return violations_; }
  bool has_errors() const;
  bool empty() const { return violations_.empty(); }
  std::string to_string() const;

 private:
  std::vector<Violation> violations_;
};

// dims x items matrix of embedding values; columns are keyed by item id.
struct EmbeddingMatrix {
  enum class Kind { kFull, kSparse };

  Eigen::MatrixXd values;  // rows = embedding dimensions, columns = items
  std::vector<std::string> item_ids;
  Kind kind = Kind::kFull;

  Eigen::Index dims() const { return values.rows(); }
  Eigen::Index n_items() const { return values.cols(); }
  Eigen::Index column_of(const std::string& id) const;  // -1 when absent
  // Columns for the given ids, in the given order. Throws InputError listing
  // any missing ids.
  EmbeddingMatrix subset(const std::vector<std::string>& keep) const;
  void check() const;  // column/id count match, finite entries
};

// Community labels (>= 1) per item id, in item order.
struct Partition {
  std::vector<std::string> ids;
  std::vector<int> labels;

  std::size_t size() const { return ids.size(); }
  int label_of(const std::string& id) const;  // -1 when absent
  int n_communities() const;
  // Relabels so that labels appear as 1,2,3,... in first-appearance order.
  Partition canonicalized() const;
};

// Reports every violation instead of throwing: duplicate ids, empty
// statements, unknown types, attributes missing from the spec, and types
// declaring fewer than two attributes. Duplicate statements under distinct
// ids are legal but flagged as warnings.
ValidationReport validate_pool(const ItemPool& pool, const AttributeSpec& spec);

// Builds the spec implied by a pool: one entry per type, attributes in first
// appearance order.
AttributeSpec derive_attribute_spec(const ItemPool& pool);

// Reads a CSV (header: statement, attribute, type, ID in any order and case;
// extra columns ignored) or a JSON array of objects with those field names.
// Validates against the derived spec and throws InputError on any error.
ItemPool load_pool(const std::string& path);
ItemPool pool_from_csv(const std::string& text, Provenance provenance);
ItemPool pool_from_json(const nlohmann::json& arr, Provenance provenance);

std::string pool_to_csv(const ItemPool& pool);
nlohmann::json pool_to_json(const ItemPool& pool);
void write_pool(const ItemPool& pool, const std::string& path);

// Embedding CSV layout: header row = item ids, each subsequent row = one
// embedding dimension. Values round-trip exactly.
EmbeddingMatrix load_embeddings(const std::string& path);
std::string embeddings_to_csv(const EmbeddingMatrix& emb);
EmbeddingMatrix embeddings_from_csv(const std::string& text);
void write_embeddings(const EmbeddingMatrix& emb, const std::string& path);

// Exact double formatting used by every artifact writer ("%.17g").
std::string format_double(double v);

}  // namespace itemnet
