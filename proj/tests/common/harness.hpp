#pragma once

// Runs the fixture corpus through the pipeline the same way the CLI does.

#include <filesystem>
#include <string>
#include <vector>

#include "mofh6/error.hpp"
#include "mofh6/pipeline.hpp"
#include "mofh6/service.hpp"
#include "mofh6/state_graph.hpp"
#include "support.hpp"

namespace testing {

inline std::filesystem::path manifest() { return fixture_dir() / "corpus" / "manifest.json"; }
inline constexpr const char* kGoldenDoi = "10.1021/acs.cgd.9b00001";
inline constexpr const char* kGoldenDocId = "10.1021_acs.cgd.9b00001";

inline std::shared_ptr<const mofh6::dataset::Store> fixture_store() {
  static auto store = std::make_shared<const mofh6::dataset::Store>(
      mofh6::dataset::Store::load(data_dir() / "dataset.jsonl").store);
  return store;
}

inline mofh6::service::GatewaySetup replay_setup() {
  mofh6::service::GatewaySetup g;
  g.mode = mofh6::llm::Mode::Replay;
  g.fixture_dir = fixture_dir() / "llm";
  return g;
}

// Loaded documents for the given DOIs (all corpus entries when empty).
inline std::vector<mofh6::ingest::DocumentRecord> load_docs(std::vector<std::string> dois = {}) {
  using namespace mofh6;
  auto corpus = std::make_shared<const ingest::LocalCorpus>(ingest::LocalCorpus::load(manifest()));
  ingest::FetcherRegistry fetchers;
  fetchers.add("local", std::make_shared<ingest::LocalCorpusFetcher>(corpus));
  if (dois.empty())
    for (const auto& e : corpus->entries()) dois.push_back(e.doi);
  std::vector<ingest::DocumentRecord> out;
  for (const auto& d : dois) {
    const auto* e = corpus->find_doi(d);
    if (!e) throw Error(ErrorKind::NotInCorpus, d);
    out.push_back(pipeline::load_entry(*e, fetchers, ingest::default_routes()));
  }
  return out;
}

inline mofh6::CorpusResult run_docs(const std::vector<mofh6::ingest::DocumentRecord>& docs,
                                    const std::filesystem::path& out_dir, int parallelism,
                                    std::shared_ptr<mofh6::llm::Gateway> gateway = nullptr) {
  using namespace mofh6;
  if (!gateway) gateway = service::make_gateway(replay_setup());
  std::vector<PipelineState> states;
  for (const auto& d : docs) states.push_back(pipeline::initial_state(d, *fixture_store()));
  pipeline::PipelineConfig cfg;
  cfg.out_dir = out_dir;
  auto graph = pipeline::build_pipeline(std::move(gateway), cfg);
  return run_corpus(graph, std::move(states), parallelism);
}

// Every golden file compared byte-for-byte with the run's document dir; returns mismatching names.
inline std::vector<std::string> golden_mismatches(const std::filesystem::path& doc_dir) {
  std::vector<std::string> bad;
  for (const auto& f : std::filesystem::directory_iterator(fixture_dir() / "golden")) {
    auto other = doc_dir / f.path().filename();
    if (!std::filesystem::exists(other) ||
        mofh6::text::read_file(other) != mofh6::text::read_file(f.path()))
      bad.push_back(f.path().filename().string());
  }
  return bad;
}

}  // namespace testing
