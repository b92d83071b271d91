#pragma once

// Ligand abbreviation resolution (HxLx / LxHx / Lx) from definitional
// patterns, filtered by grammar, metal content and co-occurrence.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mofh6/domain.hpp"
#include "mofh6/gateway.hpp"

namespace mofh6::abbrev {

/// Where the full name sits relative to a pattern match.
enum class NameSide {
  Before,    // name ends where the match starts: "NAME (H2L)"
  After,     // name starts where the match ends: "H2L = NAME"
  Enclosed,  // match ends just inside an opening bracket: "H2L (NAME)"
};

struct Pattern {
  int id = 0;
  std::string description;
  std::string regex;  // "{ABBR}" marks the abbreviation capture
  NameSide side = NameSide::Before;
};

/// Ordered by id; earlier patterns win when two claim the same abbreviation occurrence.
class PatternRegistry {
 public:
  static PatternRegistry builtin();
  /// [{"id", "description", "regex", "name_side": "before"|"after"|"enclosed"}]
  static PatternRegistry from_json(const json& doc);
  json to_json() const;
  const std::vector<Pattern>& patterns() const { return patterns_; }

 private:
  std::vector<Pattern> patterns_;
};

/// `^(H\d*L\d*|L\d*H\d*|L\d*)$` on the subscript-flattened token.
bool is_ligand_abbreviation(std::string_view token);

/// True when the text names a metal ("copper", "cupric") or contains a
/// formula-like token with a metal symbol ("Zn(NO3)2").
bool contains_metal_token(std::string_view name);

/// All pattern hits; spans refer to `text`, the abbreviation is flattened.
/// Repeated (abbreviation, name) pairs keep the earliest occurrence.
std::vector<AbbreviationMapping> scan_mappings(std::string_view text,
                                               const PatternRegistry& registry = PatternRegistry::builtin());

/// Grammar, no-metal and same-sentence filters.
std::vector<AbbreviationMapping> triple_filter(std::string_view text, std::vector<AbbreviationMapping> candidates);

enum class ResolveMode { RegexOnly, RegexPlusLlm };

struct ResolveResult {
  std::vector<AbbreviationMapping> mappings;
  std::vector<std::string> unresolved;  // abbreviations without a confirmed name
  std::vector<std::string> warnings;
};

struct ResolveOptions {
  ResolveMode mode = ResolveMode::RegexOnly;
  llm::Gateway* gateway = nullptr;  // required for RegexPlusLlm
  std::string model_id = "gpt-4o-mini";
  std::string doc_id;
};

ResolveResult resolve(std::string_view text, const ResolveOptions& options = {},
                      const PatternRegistry& registry = PatternRegistry::builtin());

json to_json(const ResolveResult& r);

}  // namespace mofh6::abbrev
