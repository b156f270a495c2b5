#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "itemnet/items.hpp"

namespace itemnet {

// Everything describing what to generate. Custom mode is active exactly when
// main_prompts is non-empty; then there must be one prompt per item type and
// each prompt must mention every attribute of its type verbatim.
struct GenerationSpec {
  AttributeSpec attribute_spec;
  std::optional<std::string> domain;
  std::optional<std::string> scale_title;
  std::optional<std::string> audience;
  std::map<std::string, std::string> item_type_definitions;
  std::vector<std::string> response_options;
  std::vector<Item> item_examples;
  std::optional<std::string> prompt_notes;
  std::optional<std::string> system_role;
  std::map<std::string, std::string> main_prompts;
  int target_n = 0;  // per item type
  bool adaptive = true;

  bool custom_mode() const { return !main_prompts.empty(); }
};

// Fixed structured-output instruction appended to every generation prompt;
// the parser below expects exactly this grammar.
extern const char* const kFormatInstruction;

// Sharper reminder appended after a response yields zero parsable lines.
extern const char* const kStrictReminder;

// Even split of batch_n across the attributes, remainder round-robin in
// declaration order.
std::vector<int> allocate_counts(int batch_n, int n_attributes);

// Assembles the built-in prompt: task framing, type definition, attribute
// list, count instructions, response options, examples, anti-repetition block
// over prior_items, prompt_notes last. Pure function of its arguments.
std::string build_builtin_prompt(const GenerationSpec& spec,
                                 const std::string& item_type,
                                 const std::vector<std::string>& prior_items,
                                 int batch_n);

// Checks custom prompts: type keys must match the attribute spec exactly and
// every attribute label must appear verbatim (case-sensitive substring).
ValidationReport validate_custom_prompts(const GenerationSpec& spec);

struct ParseOutcome {
  std::vector<Item> items;
  int skipped = 0;  // lines that failed the grammar or named a bad attribute
};

// Parses `attribute | statement` lines (list markers tolerated) into Items
// with sequential ids; attribute matching is case-insensitive against the
// declared list. Zero parsable lines in a non-empty response → ParseError.
ParseOutcome parse_generated_items(const std::string& response,
                                   const std::string& item_type,
                                   const std::vector<std::string>& attributes,
                                   int& next_id);

using ChatFn = std::function<std::string(const std::string& prompt)>;

// Batches generation per type until target_n unique items accumulate.
// Batch size = min(remaining, 2 × attribute count); adaptive mode threads all
// prior statements into each subsequent prompt; duplicate statements
// (case-insensitive) are discarded; five consecutive parse failures abort
// with a GenerationError naming the shortfall.
ItemPool generate_item_pool(const GenerationSpec& spec, const ChatFn& chat);

}  // namespace itemnet
