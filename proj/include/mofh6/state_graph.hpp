#pragma once

// Directed state graph: declarative nodes grouped in three stages, executed in
// dependency order with by-value state snapshots. A failing node records an
// error and only its downstream dependents are skipped.

#include <chrono>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "mofh6/domain.hpp"

namespace mofh6 {

struct NodeError {
  std::string node;
  std::string kind;
  std::string message;
  bool operator==(const NodeError&) const = default;
};

struct NodeTrace {
  std::string node;
  std::chrono::steady_clock::time_point start;
  std::chrono::steady_clock::time_point end;
};

struct PipelineState {
  std::string doc_id;
  std::string source_text;
  std::optional<std::string> doi;
  std::vector<MofRecord> targets;  // crystal records the document is searched for

  std::vector<SynthesisParagraph> synthesis_paragraphs;
  std::vector<CrystalTableEntry> table_entries;
  std::vector<MatchResult> match_results;
  std::vector<AbbreviationMapping> abbreviations;
  std::vector<std::string> unresolved_abbreviations;
  std::vector<CompoundDossier> dossiers;
  std::vector<std::pair<std::string, StructuredRecord>> structured;  // ccdc code -> record
  std::vector<std::string> output_paths;
  std::vector<NodeError> errors;
  std::vector<std::string> warnings;
  std::map<std::string, double> timings;  // node -> milliseconds
  std::vector<NodeTrace> trace;
  std::vector<std::string> skipped;
};

/// Appends every list in `delta` to `state` and merges its maps.
void merge_delta(PipelineState& state, PipelineState&& delta);

/// A node reads the snapshot it is given and writes only into `delta`.
using NodeHandler = std::function<void(const PipelineState& snapshot, PipelineState& delta)>;

struct NodeSpec {
  std::string name;
  int stage = 1;
  std::vector<std::string> dependencies;
  NodeHandler handler;
};

class ProcessingGraph {
 public:
  const std::vector<NodeSpec>& nodes() const { return nodes_; }  // topological order
  const std::vector<std::vector<std::size_t>>& dependency_indices() const { return deps_; }
  bool empty() const { return nodes_.empty(); }
  bool contains(const std::string& name) const;

 private:
  friend ProcessingGraph build_graph(std::vector<NodeSpec> specs);
  std::vector<NodeSpec> nodes_;
  std::vector<std::vector<std::size_t>> deps_;
};

/// Throws DuplicateNode, UnknownDependency, CycleDetected or StageOrder.
/// The order is topological with ties broken by (stage, declaration order).
ProcessingGraph build_graph(std::vector<NodeSpec> specs);

struct ExecuteOptions {
  /// Run dependency-free nodes of one wave on separate threads.
  bool concurrent_nodes = true;
};

PipelineState execute(const ProcessingGraph& graph, PipelineState initial, ExecuteOptions options = {});

struct DocReport {
  std::string status;  // "succeeded" or "failed"
  std::map<std::string, double> timings;
  std::vector<NodeError> errors;
  std::vector<std::string> skipped;
  std::string started_at;
  std::string finished_at;
};

struct RunReport {
  int doc_count = 0;
  int succeeded = 0;
  int failed = 0;
  std::map<std::string, DocReport> per_doc;
  std::string generated_at;
  json to_json() const;
};

struct CorpusResult {
  RunReport report;
  std::vector<PipelineState> states;  // same order as the input
};

/// Executes each document on a pool of `parallelism` workers. Throws
/// InvalidRequest on duplicate or empty doc ids.
CorpusResult run_corpus(const ProcessingGraph& graph, std::vector<PipelineState> docs, int parallelism,
                        ExecuteOptions options = {});
CorpusResult run_corpus(const ProcessingGraph& graph,
                        const std::vector<std::pair<std::string, std::string>>& docs, int parallelism,
                        ExecuteOptions options = {});

}  // namespace mofh6
