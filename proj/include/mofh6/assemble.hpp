#pragma once

// Stage-3 fusion: BM25 pairing of synthesis paragraphs with matched compounds,
// per-compound dossiers, output files and structured conversion.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mofh6/domain.hpp"
#include "mofh6/gateway.hpp"
#include "mofh6/state_graph.hpp"

namespace mofh6::assemble {

/// Lowercase ASCII alphanumeric runs; everything else separates tokens, so
/// "H2L" stays one token.
std::vector<std::string> tokenize(std::string_view s);

class Bm25Index {
 public:
  explicit Bm25Index(std::vector<std::vector<std::string>> documents, double k1 = 1.2, double b = 0.75);

  /// Sum over query tokens as given (repeated tokens count again).
  /// Throws IndexOutOfRange.
  double score(const std::vector<std::string>& query, std::size_t doc_index) const;
  std::vector<double> scores(const std::vector<std::string>& query) const;

  std::size_t size() const { return docs_.size(); }
  double avgdl() const { return avgdl_; }
  std::size_t df(const std::string& token) const;
  double idf(const std::string& token) const;

 private:
  std::vector<std::vector<std::string>> docs_;
  std::vector<std::map<std::string, std::size_t>> tf_;
  std::map<std::string, std::size_t> df_;
  double k1_, b_, avgdl_ = 0;
};

struct AssembleConfig {
  double k1 = 1.2;
  double b = 0.75;
  std::string structured_model = "gpt-4o-mini";
};

struct DossierResult {
  std::vector<CompoundDossier> dossiers;
  std::vector<NodeError> errors;       // NoParagraphForCompound, one per compound
  std::vector<std::string> warnings;   // targets without a matched table entry
};

/// One dossier per target that has a matched table entry, in target order.
DossierResult generate_dossiers(const PipelineState& state, const AssembleConfig& config = {});

/// One block: identifier line, name, CCDC number, abbreviation, crystal data,
/// abbreviation glossary and the synthesis procedure.
std::string render_block(const CompoundDossier& dossier);

/// Blocks separated by two blank lines, newline-terminated; empty input gives "".
std::string render_final_output(const std::vector<CompoundDossier>& dossiers);

struct SplitReport {
  std::string timestamp;
  std::vector<std::string> files;
  std::vector<std::string> skipped;  // reasons for blocks without an identifier
  json to_json() const;
};

/// Splits on two or more blank lines.
std::vector<std::string> split_blocks(std::string_view merged);

/// Six-letter CCDC refcode with optional two digits found on the first line.
std::optional<std::string> block_identifier(std::string_view block);

/// Writes identifier_<CCDC>.txt per block into out_dir.
SplitReport split_outputs(std::string_view merged, const std::filesystem::path& out_dir);

/// "5 mL and 5 mL" -> "5 mL + 5 mL (total 10 mL)" when at least two volumes
/// share a unit; text with fewer volumes is returned unchanged.
std::string accumulate_volumes(std::string_view quantity);

struct StructuredResult {
  StructuredRecord record;
  std::string markdown;
  std::vector<std::string> warnings;
};

std::string render_markdown(const std::string& ccdc_code, const StructuredRecord& record);

/// Gateway extraction with the deterministic solvent total applied.
StructuredResult to_structured(const CompoundDossier& dossier, llm::Gateway& gateway,
                               const AssembleConfig& config = {});

}  // namespace mofh6::assemble
