#pragma once

// Two-level crystal matcher: lattice comparison under a joint tolerance, with a
// metal-composition plus formula-similarity fallback.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mofh6/domain.hpp"
#include "mofh6/gateway.hpp"

namespace mofh6::match {

/// "P 2₁/c" -> "P21/c", "P1̄" -> "P-1", "P2_1/c" -> "P21/c". Idempotent.
std::string canonical_space_group(std::string_view s);

/// Locale-independent decimal with the uncertainty stripped; throws UnparseableNumber.
double parse_cell_number(std::string_view s);

/// Cell data as written in a table, before any parsing.
struct RawCell {
  std::optional<std::string> crystal_system;
  std::optional<std::string> space_group;
  std::optional<std::string> a, b, c, alpha, beta, gamma;
  std::optional<std::string> formula;
};

/// Throws UnparseableNumber or UnparseableFormula.
CellParameters canonicalize(const RawCell& raw);
CellParameters canonicalize(const CrystalTableEntry& entry);
CellParameters canonicalize(const MofRecord& record);

struct MatchConfig {
  double length_tolerance = 0.05;  // relative to the candidate's length
  double angle_tolerance = 2.0;    // degrees
  double lattice_threshold = 0.90;
  double formula_threshold = 0.30;
  double gray_band_low = 0.85;     // adjudicator consulted for degree in [low, threshold)
  bool per_field_strict = false;   // also require every field score >= threshold
};

struct FieldScores {
  std::vector<double> scores;  // one per field present on both sides
  double mean() const;
  double min() const;
};

/// Throws NoComparableFields when nothing is present on both sides.
FieldScores field_scores(const CellParameters& q, const CellParameters& c, const MatchConfig& config = {});
double match_degree(const CellParameters& q, const CellParameters& c, const MatchConfig& config = {});

/// Sørensen–Dice over element-count multisets. Throws EmptyFormula.
double formula_similarity(const CellParameters& q, const CellParameters& c);

/// Consulted only for gray-band degrees that passed the composition rule;
/// returning false vetoes the match.
using Adjudicator = std::function<bool(const CellParameters& q, const CellParameters& c, double degree)>;

/// Composition is not evaluated when either side lacks a formula; such pairs
/// fall to level none.
MatchResult match(const CellParameters& q, const CellParameters& c, const MatchConfig& config = {},
                  const Adjudicator& adjudicator = {});

/// Adjudicator backed by the "crystal_adjudicate" template.
Adjudicator llm_adjudicator(llm::Gateway& gateway, std::string model_id, std::string doc_id);

/// One result per (target, entry) pair, targets outermost. candidate_id is the
/// entry's compound name, or "#<index>" when the name is empty.
std::vector<MatchResult> compare_targets(const std::vector<MofRecord>& targets,
                                         const std::vector<CrystalTableEntry>& entries,
                                         const MatchConfig& config = {}, const Adjudicator& adjudicator = {});

std::string candidate_id(const CrystalTableEntry& entry, std::size_t index);

}  // namespace mofh6::match
