#include "mofh6/pipeline.hpp"

#include <algorithm>

#include "mofh6/error.hpp"
#include "mofh6/text.hpp"

namespace mofh6::pipeline {

namespace {

struct Shared {
  std::shared_ptr<llm::Gateway> gateway;
  PipelineConfig config;
  std::shared_ptr<const extract::SynonymMap> synonyms;
  std::shared_ptr<const abbrev::PatternRegistry> patterns;

  std::filesystem::path dir(const std::string& doc_id) const { return config.out_dir / doc_id; }

  // Writes one artifact when an output directory is configured.
  void emit(PipelineState& delta, const std::string& doc_id, const std::string& name, std::string_view body) const {
    if (config.out_dir.empty()) return;
    auto path = dir(doc_id) / name;
    text::write_file(path, body);
    delta.output_paths.push_back(path.string());
  }
};

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

ProcessingGraph build_pipeline(std::shared_ptr<llm::Gateway> gateway, PipelineConfig config) {
  if (!gateway) throw Error(ErrorKind::InvalidConfig, "pipeline needs a gateway");
  auto s = std::make_shared<Shared>();
  s->gateway = std::move(gateway);
  s->synonyms = config.synonyms ? config.synonyms : std::make_shared<extract::SynonymMap>(extract::SynonymMap::builtin());
  s->patterns =
      config.patterns ? config.patterns : std::make_shared<abbrev::PatternRegistry>(abbrev::PatternRegistry::builtin());
  s->config = std::move(config);

  std::vector<NodeSpec> specs;

  specs.push_back({node::kSynthesisParse, 1, {}, [s](const PipelineState& in, PipelineState& out) {
                     out.synthesis_paragraphs =
                         extract::parse_synthesis(in.doc_id, in.source_text, *s->gateway, s->config.extract);
                     s->emit(out, in.doc_id, "synthesis_" + in.doc_id + ".json", dump(json(out.synthesis_paragraphs)));
                   }});

  specs.push_back({node::kTableParse, 1, {}, [s](const PipelineState& in, PipelineState& out) {
                     out.table_entries = extract::parse_tables(in.doc_id, in.source_text, *s->gateway, *s->synonyms,
                                                               s->config.extract);
                     s->emit(out, in.doc_id, "tables_" + in.doc_id + ".json", dump(json(out.table_entries)));
                   }});

  specs.push_back({node::kCrystalCompare, 2, {node::kTableParse}, [s](const PipelineState& in, PipelineState& out) {
                     match::Adjudicator adj;
                     if (s->config.llm_adjudicator)
                       adj = match::llm_adjudicator(*s->gateway, s->config.adjudicator_model, in.doc_id);
                     if (in.targets.empty()) out.warnings.push_back("no target records to compare against");
                     out.match_results = match::compare_targets(in.targets, in.table_entries, s->config.match, adj);
                     s->emit(out, in.doc_id, "comparison_" + in.doc_id + ".json", dump(json(out.match_results)));
                   }});

  specs.push_back({node::kAbbrevResolve, 2, {}, [s](const PipelineState& in, PipelineState& out) {
                     abbrev::ResolveOptions opts;
                     opts.mode = s->config.abbrev_mode;
                     opts.gateway = s->gateway.get();
                     opts.model_id = s->config.abbrev_model;
                     opts.doc_id = in.doc_id;
                     auto r = abbrev::resolve(in.source_text, opts, *s->patterns);
                     s->emit(out, in.doc_id, "acronym_results_" + in.doc_id + ".json", dump(abbrev::to_json(r)));
                     out.abbreviations = std::move(r.mappings);
                     out.unresolved_abbreviations = std::move(r.unresolved);
                     out.warnings = std::move(r.warnings);
                   }});

  specs.push_back({node::kResultGenerate,
                   3,
                   {node::kSynthesisParse, node::kCrystalCompare, node::kAbbrevResolve},
                   [s](const PipelineState& in, PipelineState& out) {
                     auto r = assemble::generate_dossiers(in, s->config.assemble);
                     out.dossiers = std::move(r.dossiers);
                     out.errors = std::move(r.errors);
                     out.warnings = std::move(r.warnings);
                     s->emit(out, in.doc_id, "final_output_" + in.doc_id + ".txt",
                             assemble::render_final_output(out.dossiers));
                   }});

  specs.push_back({node::kPostProcess, 3, {node::kResultGenerate}, [s](const PipelineState& in, PipelineState& out) {
                     if (s->config.out_dir.empty()) return;
                     auto dir = s->dir(in.doc_id);
                     auto report = assemble::split_outputs(assemble::render_final_output(in.dossiers), dir);
                     for (const auto& f : report.files) out.output_paths.push_back((dir / f).string());
                     for (const auto& skip : report.skipped) out.warnings.push_back(skip);
                     s->emit(out, in.doc_id, "split_report_" + in.doc_id + ".json", dump(report.to_json()));
                   }});

  specs.push_back({node::kStructuredConvert, 3, {node::kResultGenerate},
                   [s](const PipelineState& in, PipelineState& out) {
                     for (const auto& d : in.dossiers) {
                       auto r = assemble::to_structured(d, *s->gateway, s->config.assemble);
                       s->emit(out, in.doc_id, "structure_" + d.ccdc_code + ".md", r.markdown);
                       for (auto& w : r.warnings) out.warnings.push_back(d.ccdc_code + ": " + w);
                       out.structured.emplace_back(d.ccdc_code, std::move(r.record));
                     }
                   }});

  return build_graph(std::move(specs));
}

std::string doc_id_for(std::string_view doi) {
  std::string id;
  for (char c : text::trim(doi)) {
    bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-';
    id += keep ? c : '_';
  }
  return id;
}

std::vector<MofRecord> resolve_targets(const dataset::Store& store, const std::vector<std::string>& codes,
                                       const std::optional<std::string>& doi) {
  std::vector<MofRecord> out;
  for (const auto& code : codes)
    if (const auto* r = store.find(code)) out.push_back(*r);
  if (out.empty() && doi)
    for (const auto* r : store.find_by_doi(*doi)) out.push_back(*r);
  return out;
}

PipelineState initial_state(const ingest::DocumentRecord& doc, const dataset::Store& store) {
  PipelineState s;
  s.doc_id = doc.doc_id;
  s.source_text = doc.cleaned_text;
  s.doi = doc.doi;
  s.targets = resolve_targets(store, doc.ccdc_codes_requested, doc.doi);
  return s;
}

ingest::DocumentRecord load_entry(const ingest::CorpusEntry& entry, const ingest::FetcherRegistry& fetchers,
                                  const std::vector<ingest::PublisherRoute>& routes) {
  auto route = ingest::route_doi(entry.doi, routes);
  auto fetched = ingest::fetch_document(route, entry.doi, fetchers);
  return ingest::make_document(doc_id_for(entry.doi), std::move(fetched.bytes), ingest::Provenance::LocalFile,
                               entry.doi, entry.ccdc_codes);
}

std::vector<std::filesystem::path> artifacts(const std::filesystem::path& out_dir, const std::string& doc_id) {
  std::vector<std::filesystem::path> out;
  std::error_code ec;
  for (const auto& e : std::filesystem::directory_iterator(out_dir / doc_id, ec))
    if (e.is_regular_file()) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mofh6::pipeline
