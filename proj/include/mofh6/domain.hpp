#pragma once

// Records exchanged between pipeline stages and persisted as JSON.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mofh6/chem.hpp"
#include "mofh6/json_schema.hpp"
#include "mofh6/text.hpp"

namespace mofh6 {

enum class CrystalSystem { Triclinic, Monoclinic, Orthorhombic, Tetragonal, Trigonal, Hexagonal, Cubic };

std::string_view to_string(CrystalSystem cs);
/// Case-insensitive; "rhombohedral" maps to trigonal.
std::optional<CrystalSystem> parse_crystal_system(std::string_view s);

struct SynthesisParagraph {
  std::string compound_hint;
  std::string text;
  std::optional<text::Span> source_span;
};

struct CrystalTableEntry {
  std::string compound_name;
  std::optional<std::string> empirical_formula;
  std::optional<double> molecular_weight;
  std::optional<CrystalSystem> crystal_system;
  std::optional<std::string> space_group;
  std::optional<double> a, b, c;
  std::optional<double> alpha, beta, gamma;
  std::optional<std::string> color;

  /// How many of the 8 key parameters (system, space group, a, b, c, alpha,
  /// beta, gamma) are absent.
  int missing_key_parameters() const;
};

struct CellParameters {
  std::optional<CrystalSystem> crystal_system;
  std::optional<std::string> space_group_canonical;
  std::optional<double> a, b, c;
  std::optional<double> alpha, beta, gamma;
  chem::Composition elements;
  std::string formula;
};

enum class MatchLevel { Lattice, Composition, None };
std::string_view to_string(MatchLevel level);

struct MatchResult {
  std::string query_id;
  std::string candidate_id;
  MatchLevel level = MatchLevel::None;
  double degree = 0.0;
  std::optional<double> formula_sim;
  bool matched = false;
};

struct AbbreviationMapping {
  std::string abbreviation;  // subscripts flattened
  std::string full_name;
  int pattern_id = 0;
  text::Span evidence_span;  // covers both abbreviation and full name
  text::Span abbreviation_span;
  text::Span name_span;
  bool confirmed = false;
};

struct PoreProperties {
  double pld = 0, lcd = 0, density = 0, vsa = 0, gsa = 0, void_fraction = 0;
};

struct MofRecord {
  std::string ccdc_code;
  std::optional<std::string> ccdc_number;
  std::string chemical_name;
  std::optional<std::string> abbreviation;
  std::optional<std::string> doi;
  std::optional<std::string> url;
  std::string space_group;
  CrystalSystem crystal_system = CrystalSystem::Triclinic;
  double a = 0, b = 0, c = 0;
  double alpha = 90, beta = 90, gamma = 90;
  chem::Composition elements;
  double molecular_weight = 0;
  PoreProperties pore;
};

/// The thirteen structured synthesis fields, in table order.
struct StructuredRecord {
  std::optional<std::string> metal_source;
  std::optional<std::string> organic_linkers_source;
  std::optional<std::string> modulator_source;
  std::optional<std::string> solvent_source;
  std::optional<std::string> quantity_of_metal;
  std::optional<std::string> quantity_of_organic_linkers;
  std::optional<std::string> quantity_of_modulator;
  std::optional<std::string> quantity_of_solvent;
  std::optional<std::string> synthesis_temperature;
  std::optional<std::string> synthesis_time;
  std::optional<std::string> crystal_morphology;
  std::optional<std::string> yield;
  std::optional<std::string> equipment;

  struct FieldInfo {
    std::string_view key;    // JSON key
    std::string_view label;  // Markdown label
    bool source_field;       // chemical-source fields use the chemical embedder
  };
  static const std::vector<FieldInfo>& fields();
  std::optional<std::string>& field(std::string_view key);
  const std::optional<std::string>& field(std::string_view key) const;
};

struct CompoundDossier {
  std::string ccdc_code;
  std::optional<std::string> ccdc_number;
  std::string compound_name;
  std::optional<std::string> common_abbreviation;
  std::string synthesis_text;
  std::string compound_hint;
  CellParameters crystal;
  std::vector<AbbreviationMapping> abbreviation_glossary;
  std::vector<std::string> unresolved_abbreviations;
  std::string source_doc;
};

void to_json(json& j, const SynthesisParagraph& p);
void from_json(const json& j, SynthesisParagraph& p);
void to_json(json& j, const CrystalTableEntry& e);
void to_json(json& j, const CellParameters& c);
void to_json(json& j, const MatchResult& m);
void to_json(json& j, const AbbreviationMapping& m);
void to_json(json& j, const PoreProperties& p);
void to_json(json& j, const MofRecord& r);
/// Strict: throws Error(InvariantViolation) with a reason on bad fields.
MofRecord mof_record_from_json(const json& j);
void to_json(json& j, const StructuredRecord& r);
StructuredRecord structured_record_from_json(const json& j);
void to_json(json& j, const CompoundDossier& d);

}  // namespace mofh6
