#pragma once

// The seven-node extraction graph wired over the stage modules, plus helpers
// that turn corpus entries into initial pipeline states.

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mofh6/abbrev.hpp"
#include "mofh6/assemble.hpp"
#include "mofh6/dataset.hpp"
#include "mofh6/extract.hpp"
#include "mofh6/gateway.hpp"
#include "mofh6/ingest.hpp"
#include "mofh6/match.hpp"
#include "mofh6/state_graph.hpp"

namespace mofh6::pipeline {

namespace node {
inline constexpr const char* kSynthesisParse = "synthesis-parse";
inline constexpr const char* kTableParse = "table-parse";
inline constexpr const char* kCrystalCompare = "crystal-compare";
inline constexpr const char* kAbbrevResolve = "abbrev-resolve";
inline constexpr const char* kResultGenerate = "result-generate";
inline constexpr const char* kPostProcess = "post-process";
inline constexpr const char* kStructuredConvert = "structured-convert";
}  // namespace node

struct PipelineConfig {
  extract::ExtractConfig extract;
  match::MatchConfig match;
  bool llm_adjudicator = false;
  std::string adjudicator_model = "gpt-4o-mini";
  abbrev::ResolveMode abbrev_mode = abbrev::ResolveMode::RegexOnly;
  std::string abbrev_model = "gpt-4o-mini";
  assemble::AssembleConfig assemble;
  /// Per-document artifacts go to out_dir/<doc_id>/; nothing is written when empty.
  std::filesystem::path out_dir;
  std::shared_ptr<const extract::SynonymMap> synonyms;      // builtin when null
  std::shared_ptr<const abbrev::PatternRegistry> patterns;  // builtin when null
};

/// Stage 1: synthesis-parse, table-parse. Stage 2: crystal-compare (after
/// table-parse), abbrev-resolve. Stage 3: result-generate (after the three
/// analysis nodes), post-process and structured-convert (after result-generate).
ProcessingGraph build_pipeline(std::shared_ptr<llm::Gateway> gateway, PipelineConfig config);

/// File-system safe id: "10.1021/ja00001" -> "10.1021_ja00001".
std::string doc_id_for(std::string_view doi);

/// Requested codes found in the store, else every store record citing the DOI.
std::vector<MofRecord> resolve_targets(const dataset::Store& store, const std::vector<std::string>& codes,
                                       const std::optional<std::string>& doi);

PipelineState initial_state(const ingest::DocumentRecord& doc, const dataset::Store& store);

/// Fetches and cleans one corpus entry (main text plus SI).
ingest::DocumentRecord load_entry(const ingest::CorpusEntry& entry, const ingest::FetcherRegistry& fetchers,
                                  const std::vector<ingest::PublisherRoute>& routes);

/// Artifacts a finished state left in out_dir/<doc_id>/, sorted by file name.
std::vector<std::filesystem::path> artifacts(const std::filesystem::path& out_dir, const std::string& doc_id);

}  // namespace mofh6::pipeline
