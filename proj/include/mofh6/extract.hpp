#pragma once

// Stage-1 agents: synthesis-paragraph extraction and crystal-table extraction.

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mofh6/domain.hpp"
#include "mofh6/gateway.hpp"

namespace mofh6::extract {

/// Removes whole sentences that carry characterization data (elemental
/// analysis, IR/FT-IR, NMR, percentage runs). Kept sentences retain their
/// original separators; text without such sentences is returned unchanged.
std::string strip_characterization(std::string_view text);

/// True when one sentence matches any characterization pattern.
bool is_characterization_sentence(std::string_view sentence);

/// Keeps the entries missing at most one of the 8 key parameters.
std::vector<CrystalTableEntry> dual_threshold_filter(std::vector<CrystalTableEntry> entries);

/// Table-header aliases -> canonical CrystalTableEntry field
/// (compound_name, empirical_formula, molecular_weight, crystal_system,
/// space_group, a, b, c, alpha, beta, gamma, color).
class SynonymMap {
 public:
  static SynonymMap builtin();
  /// {"a": ["cell length a", "a (Å)", ...], ...}; merged over nothing.
  static SynonymMap from_json(const json& doc);
  /// Adds aliases from `doc` on top of the current ones.
  void extend(const json& doc);
  json to_json() const;

  /// Canonical field for a raw header, or empty when unknown.
  std::string canonical(std::string_view header) const;
  std::size_t size() const { return aliases_.size(); }

  /// Lowercase, Greek letters spelled out, units and non-alphanumerics removed.
  static std::string normalize(std::string_view header);

 private:
  std::map<std::string, std::string> aliases_;  // normalized alias -> field
};

/// Multiplier to Å for a unit mentioned in a header or value: nm -> 10,
/// pm -> 0.01, otherwise 1.
double length_factor(std::string_view header_or_value);

/// Maps one reply object (raw header -> value) to an entry. Unknown headers are
/// ignored; values that fail to parse or violate the length/angle invariants
/// become absent.
CrystalTableEntry map_table_row(const json& row, const SynonymMap& synonyms);

struct ExtractConfig {
  std::string synthesis_model = "ft:gpt-4o-mini:mofh6-synthesis";
  std::string table_model = "gpt-4o-mini";
};

/// Paragraphs from the "synthesis" agent with ligand syntheses dropped,
/// characterization stripped and source spans located in `cleaned_text`.
/// Throws SchemaViolation when the reply stays invalid.
std::vector<SynthesisParagraph> parse_synthesis(const std::string& doc_id, const std::string& cleaned_text,
                                                llm::Gateway& gateway, const ExtractConfig& config = {});

/// Entries from the "tables" agent after synonym mapping and dual-threshold filtering.
std::vector<CrystalTableEntry> parse_tables(const std::string& doc_id, const std::string& cleaned_text,
                                            llm::Gateway& gateway, const SynonymMap& synonyms,
                                            const ExtractConfig& config = {});

}  // namespace mofh6::extract
