#include "itemnet/prompt.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "itemnet/errors.hpp"

namespace itemnet {

const char* const kFormatInstruction =
    "Output format: write one item per line as\n"
    "attribute | statement\n"
    "using exactly one attribute name from the list above on each line. "
    "Do not number the lines and do not add any other text.";

const char* const kStrictReminder =
    "Reminder: every line of your reply must match `attribute | statement` "
    "exactly, with a literal `|` between the attribute name and the item "
    "text. Output nothing else.";

namespace {

std::string trim(const std::string& s) {
  size_t a = 0;
  size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Drops leading list markers: bullets, dashes, "3." / "3)" style numbering.
std::string strip_list_marker(const std::string& line) {
  size_t i = 0;
  while (i < line.size() && (line[i] == '-' || line[i] == '*' ||
                             std::isspace(static_cast<unsigned char>(line[i]))))
    ++i;
  size_t digits = i;
  while (digits < line.size() &&
         std::isdigit(static_cast<unsigned char>(line[digits])))
    ++digits;
  if (digits > i && digits < line.size() &&
      (line[digits] == '.' || line[digits] == ')'))
    i = digits + 1;
  while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])))
    ++i;
  return line.substr(i);
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::vector<int> allocate_counts(int batch_n, int n_attributes) {
  std::vector<int> counts(static_cast<size_t>(n_attributes),
                          batch_n / n_attributes);
  for (int r = 0; r < batch_n % n_attributes; ++r)
    ++counts[static_cast<size_t>(r)];
  return counts;
}

std::string build_builtin_prompt(const GenerationSpec& spec,
                                 const std::string& item_type,
                                 const std::vector<std::string>& prior_items,
                                 int batch_n) {
  if (!spec.attribute_spec.has_type(item_type))
    throw InputError("unknown item type: " + item_type);
  if (batch_n < 1) throw InputError("batch_n must be positive");
  const std::vector<std::string>& attrs =
      spec.attribute_spec.attributes_of(item_type);

  std::ostringstream out;
  out << "You are writing items for a psychometric measurement scale.\n";
  if (spec.domain) out << "Domain: " << *spec.domain << "\n";
  if (spec.scale_title) out << "Scale title: " << *spec.scale_title << "\n";
  if (spec.audience) out << "Intended audience: " << *spec.audience << "\n";
  out << "Item type: " << item_type << "\n";
  if (auto it = spec.item_type_definitions.find(item_type);
      it != spec.item_type_definitions.end())
    out << "Definition of " << item_type << ": " << it->second << "\n";
  out << "The items must cover these attributes: " << join(attrs, ", ")
      << "\n";

  const std::vector<int> counts =
      allocate_counts(batch_n, static_cast<int>(attrs.size()));
  out << "Write " << batch_n << " item" << (batch_n == 1 ? "" : "s")
      << " in total, spread across the attributes as evenly as possible: ";
  std::vector<std::string> parts;
  for (size_t i = 0; i < attrs.size(); ++i)
    parts.push_back(std::to_string(counts[i]) + " for " + attrs[i]);
  out << join(parts, ", ") << ".\n";

  if (!spec.response_options.empty())
    out << "Respondents will answer on these response options: "
        << join(spec.response_options, "; ") << "\n";
  if (!spec.item_examples.empty()) {
    out << "Examples of the desired item style:\n";
    for (const auto& ex : spec.item_examples)
      out << "- " << ex.statement << "\n";
  }
  if (!prior_items.empty()) {
    out << "Do not repeat or rephrase any of these existing items:\n";
    for (const auto& prior : prior_items) out << "- " << prior << "\n";
  }
  if (spec.prompt_notes) out << *spec.prompt_notes << "\n";

  std::string text = out.str();
  text.pop_back();  // no trailing newline
  return text;
}

ValidationReport validate_custom_prompts(const GenerationSpec& spec) {
  if (!spec.custom_mode())
    throw InputError("validate_custom_prompts requires custom prompts");
  ValidationReport report;
  for (const auto& type : spec.attribute_spec.type_names()) {
    auto it = spec.main_prompts.find(type);
    if (it == spec.main_prompts.end()) {
      report.add_error("missing-type",
                       "no custom prompt for item type '" + type + "'");
      continue;
    }
    for (const auto& attr : spec.attribute_spec.attributes_of(type)) {
      if (it->second.find(attr) == std::string::npos)
        report.add_error("missing-attribute",
                         "custom prompt for '" + type +
                             "' does not mention attribute '" + attr + "'",
                         type);
    }
  }
  for (const auto& [name, prompt] : spec.main_prompts) {
    if (!spec.attribute_spec.has_type(name))
      report.add_error("extra-type",
                       "custom prompt for unknown item type '" + name + "'");
  }
  return report;
}

ParseOutcome parse_generated_items(const std::string& response,
                                   const std::string& item_type,
                                   const std::vector<std::string>& attributes,
                                   int& next_id) {
  std::map<std::string, std::string> canonical;  // lowercase -> declared label
  for (const auto& attr : attributes) canonical[lower(attr)] = attr;

  ParseOutcome out;
  std::istringstream lines(response);
  std::string raw;
  bool saw_content = false;
  while (std::getline(lines, raw)) {
    const std::string line = trim(strip_list_marker(raw));
    if (line.empty()) continue;
    saw_content = true;
    const size_t bar = line.find('|');
    if (bar == std::string::npos) {
      ++out.skipped;
      continue;
    }
    const std::string attr = trim(line.substr(0, bar));
    const std::string statement = trim(line.substr(bar + 1));
    auto it = canonical.find(lower(attr));
    if (it == canonical.end() || statement.empty()) {
      ++out.skipped;
      continue;
    }
    Item item;
    item.id = std::to_string(next_id++);
    item.statement = statement;
    item.attribute = it->second;
    item.item_type = item_type;
    out.items.push_back(std::move(item));
  }
  if (out.items.empty() && saw_content)
    throw ParseError("no parsable `attribute | statement` lines in response");
  if (out.items.empty())
    throw ParseError("empty generation response");
  return out;
}

ItemPool generate_item_pool(const GenerationSpec& spec, const ChatFn& chat) {
  if (spec.target_n < 1) throw InputError("target_n must be positive");
  if (spec.custom_mode()) {
    const ValidationReport report = validate_custom_prompts(spec);
    if (report.has_errors())
      throw InputError("invalid custom prompts:\n" + report.to_string());
  }

  ItemPool pool;
  pool.provenance = Provenance::kGenerated;
  int next_id = 1;

  for (const auto& type : spec.attribute_spec.type_names()) {
    const std::vector<std::string>& attrs =
        spec.attribute_spec.attributes_of(type);
    std::vector<Item> collected;
    std::set<std::string> seen_statements;  // lowercased, for dedup
    std::vector<std::string> priors;
    int consecutive_failures = 0;
    bool strict = false;

    while (static_cast<int>(collected.size()) < spec.target_n) {
      const int remaining = spec.target_n - static_cast<int>(collected.size());
      const int batch_n =
          std::min(remaining, 2 * static_cast<int>(attrs.size()));
      std::string prompt;
      if (spec.custom_mode()) {
        prompt = spec.main_prompts.at(type);
        if (spec.adaptive && !priors.empty()) {
          prompt += "\n\nDo not repeat or rephrase any of these existing items:";
          for (const auto& prior : priors) prompt += "\n- " + prior;
        }
      } else {
        prompt = build_builtin_prompt(
            spec, type, spec.adaptive ? priors : std::vector<std::string>{},
            batch_n);
      }
      prompt += "\n\n";
      prompt += kFormatInstruction;
      if (strict) {
        prompt += "\n";
        prompt += kStrictReminder;
      }

      ParseOutcome parsed;
      try {
        parsed = parse_generated_items(chat(prompt), type, attrs, next_id);
      } catch (const ParseError&) {
        ++consecutive_failures;
        strict = true;
        if (consecutive_failures >= 5)
          throw GenerationError(
              "generation for item type '" + type + "' stalled at " +
              std::to_string(collected.size()) + " of " +
              std::to_string(spec.target_n) + " items (5 consecutive parse failures)");
        continue;
      }
      strict = false;
      const size_t before = collected.size();
      for (auto& item : parsed.items) {
        if (static_cast<int>(collected.size()) >= spec.target_n) break;
        const std::string key = lower(item.statement);
        if (!seen_statements.insert(key).second) continue;  // duplicate
        priors.push_back(item.statement);
        collected.push_back(std::move(item));
      }
      // A batch of nothing but duplicates stalls generation just like a
      // parse failure; without this the loop could spin forever.
      if (collected.size() == before) {
        ++consecutive_failures;
        if (consecutive_failures >= 5)
          throw GenerationError(
              "generation for item type '" + type + "' stalled at " +
              std::to_string(collected.size()) + " of " +
              std::to_string(spec.target_n) +
              " items (5 consecutive unproductive batches)");
      } else {
        consecutive_failures = 0;
      }
    }
    for (auto& item : collected) pool.items.push_back(std::move(item));
  }

  const ValidationReport report =
      validate_pool(pool, derive_attribute_spec(pool));
  if (report.has_errors())
    throw GenerationError("generated pool failed validation:\n" +
                          report.to_string());
  return pool;
}

}  // namespace itemnet
