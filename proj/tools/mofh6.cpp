// mofh6: command-line front end over the library (ingest, pipeline, Q&A,
// CIF access, statistics, evaluation, cost projection, HTTP service).

#include <CLI11.hpp>
#include <httplib.h>

#include <csignal>
#include <fstream>
#include <iostream>

#include "mofh6/error.hpp"
#include "mofh6/eval.hpp"
#include "mofh6/pipeline.hpp"
#include "mofh6/query.hpp"
#include "mofh6/service.hpp"
#include "mofh6/text.hpp"

namespace fs = std::filesystem;
using namespace mofh6;

namespace {

struct Flags {
  std::string config;
  std::string corpus, dataset, cif_dir, out = "out", fixtures, canned, prices;
  std::string llm_mode = "replay", parser = "rules", answer = "template";
  std::string host = "127.0.0.1";
  int port = 8080;
  int workers = 2;
};

// Flags override whatever the optional --config file sets.
service::ApiConfig api_config(const Flags& f, const CLI::App& app) {
  service::ApiConfig c;
  if (!f.config.empty())
    c = service::ApiConfig::from_json(json::parse(text::read_file(f.config)), fs::path(f.config).parent_path());
  auto set = [&](const char* flag, auto& dst, const auto& v) {
    if (app.count(flag) || f.config.empty()) dst = v;
  };
  set("--corpus", c.corpus_manifest, fs::path(f.corpus));
  set("--dataset", c.dataset, fs::path(f.dataset));
  set("--cif-dir", c.cif_dir, fs::path(f.cif_dir));
  set("--out", c.out_dir, fs::path(f.out));
  set("--fixtures", c.gateway.fixture_dir, fs::path(f.fixtures));
  set("--canned", c.gateway.canned_replies, fs::path(f.canned));
  set("--prices", c.gateway.prices, fs::path(f.prices));
  if (app.count("--llm-mode") || f.config.empty()) c.gateway.mode = llm::parse_mode(f.llm_mode);
  if (app.count("--parser") || f.config.empty())
    c.engine.parse_mode = f.parser == "llm" ? query::ParseMode::LlmPrimary : query::ParseMode::RulesOnly;
  if (app.count("--answer") || f.config.empty())
    c.engine.compose_mode = f.answer == "llm" ? query::ComposeMode::Llm : query::ComposeMode::Template;
  set("--host", c.host, f.host);
  set("--port", c.port, f.port);
  set("--workers", c.workers, f.workers);
  return c;
}

std::shared_ptr<const dataset::Store> load_store(const fs::path& path) {
  if (path.empty()) throw Error(ErrorKind::InvalidConfig, "--dataset is required");
  auto loaded = dataset::Store::load(path);
  for (const auto& e : loaded.errors)
    std::cerr << "dataset line " << e.line << " rejected (" << e.kind << "): " << e.message << "\n";
  return std::make_shared<const dataset::Store>(std::move(loaded.store));
}

void write_or_print(const std::string& bytes, const std::string& out) {
  if (out.empty()) {
    std::cout << bytes;
    return;
  }
  text::write_file(out, bytes);
}

int cmd_ingest(const service::ApiConfig& cfg, const std::string& doi, const std::string& file, bool text_only) {
  ingest::DocumentRecord doc;
  if (!file.empty()) {
    doc = ingest::make_document(fs::path(file).stem().string(), text::read_file(file), ingest::Provenance::LocalFile);
  } else {
    if (cfg.corpus_manifest.empty()) throw Error(ErrorKind::InvalidConfig, "--corpus is required with --doi");
    auto corpus = std::make_shared<const ingest::LocalCorpus>(ingest::LocalCorpus::load(cfg.corpus_manifest));
    const auto* entry = corpus->find_doi(doi);
    if (!entry) throw Error(ErrorKind::NotInCorpus, "DOI " + doi + " is not in the corpus");
    ingest::FetcherRegistry fetchers;
    fetchers.add("local", std::make_shared<ingest::LocalCorpusFetcher>(corpus));
    doc = pipeline::load_entry(*entry, fetchers, ingest::default_routes());
  }
  if (text_only) {
    std::cout << doc.cleaned_text;
    return 0;
  }
  json j = {{"doc_id", doc.doc_id},
            {"doi", doc.doi ? json(*doc.doi) : json(nullptr)},
            {"ccdc_codes_requested", doc.ccdc_codes_requested},
            {"cleaned_text", doc.cleaned_text}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_pipeline(const service::ApiConfig& cfg, std::vector<std::string> dois, const std::vector<std::string>& codes,
                 int parallelism) {
  if (cfg.corpus_manifest.empty()) throw Error(ErrorKind::InvalidConfig, "--corpus is required");
  auto store = load_store(cfg.dataset);
  auto corpus = std::make_shared<const ingest::LocalCorpus>(ingest::LocalCorpus::load(cfg.corpus_manifest));
  ingest::FetcherRegistry fetchers;
  fetchers.add("local", std::make_shared<ingest::LocalCorpusFetcher>(corpus));
  auto routes = ingest::default_routes();

  std::vector<std::pair<const ingest::CorpusEntry*, std::vector<std::string>>> selected;
  for (const auto& code : codes) {
    auto c = text::to_upper(code);
    const auto* e = corpus->find_ccdc(c);
    if (!e) throw Error(ErrorKind::NotInCorpus, "no corpus document reports " + c);
    selected.push_back({e, {c}});
  }
  if (dois.empty() && codes.empty())
    for (const auto& e : corpus->entries()) dois.push_back(e.doi);
  for (const auto& d : dois) {
    const auto* e = corpus->find_doi(d);
    if (!e) throw Error(ErrorKind::NotInCorpus, "DOI " + d + " is not in the corpus");
    selected.push_back({e, {}});
  }

  std::vector<PipelineState> states;
  for (auto& [entry, requested] : selected) {
    auto doc = pipeline::load_entry(*entry, fetchers, routes);
    if (!requested.empty()) doc.ccdc_codes_requested = requested;
    states.push_back(pipeline::initial_state(doc, *store));
  }
  auto pcfg = cfg.pipeline;
  pcfg.out_dir = cfg.out_dir;
  auto graph = pipeline::build_pipeline(service::make_gateway(cfg.gateway), pcfg);
  auto result = run_corpus(graph, std::move(states), parallelism);
  fs::create_directories(cfg.out_dir);
  text::write_file(cfg.out_dir / "run_report.json", result.report.to_json().dump(2) + "\n");
  for (const auto& s : result.states) {
    std::cout << s.doc_id << ": " << (s.errors.empty() ? "succeeded" : "failed") << "\n";
    for (const auto& e : s.errors) std::cout << "  " << e.node << " " << e.kind << ": " << e.message << "\n";
  }
  return result.report.failed == 0 ? 0 : 1;
}

int cmd_ask(const service::ApiConfig& cfg, const std::string& session, const std::vector<std::string>& questions,
            bool as_json) {
  auto store = load_store(cfg.dataset);
  std::shared_ptr<llm::Gateway> gateway;
  if (cfg.engine.parse_mode == query::ParseMode::LlmPrimary || cfg.engine.compose_mode == query::ComposeMode::Llm)
    gateway = service::make_gateway(cfg.gateway);
  query::Engine engine(store, cfg.engine, gateway.get());

  auto one = [&](const std::string& q) {
    auto a = engine.ask(session, q);
    if (as_json)
      std::cout << json({{"answer_text", a.answer_text},
                         {"structured_result", a.structured_result},
                         {"parsed_query", a.parsed_query}})
                       .dump()
                << "\n";
    else
      std::cout << a.answer_text << "\n";
  };
  if (!questions.empty()) {
    for (const auto& q : questions) one(q);
    return 0;
  }
  std::string line;
  while (std::getline(std::cin, line)) {
    if (text::trim(line).empty()) continue;
    try {
      one(line);
    } catch (const Error& e) {
      std::cout << e.kind_name() << ": " << e.what() << "\n";
    }
  }
  return 0;
}

int cmd_cif(const service::ApiConfig& cfg, const std::string& code, bool viz, const std::string& out) {
  if (cfg.cif_dir.empty()) throw Error(ErrorKind::InvalidConfig, "--cif-dir is required");
  dataset::CifStore cifs(cfg.cif_dir);
  auto path = cifs.find(code);
  if (!path) {
    std::cerr << "no CIF for " << code << "\n";
    return 2;
  }
  auto bytes = text::read_file(*path);
  write_or_print(viz ? dataset::viz_payload(dataset::parse_cif(bytes)).dump(2) + "\n" : bytes, out);
  return 0;
}

int cmd_stats(const service::ApiConfig& cfg, const std::string& property, double bin_width) {
  auto store = load_store(cfg.dataset);
  if (property.empty()) {
    std::cout << "records: " << store->size() << "\n";
    for (const auto& p : dataset::properties()) {
      auto a = store->aggregate(p.key, dataset::AggregateOp::Mean);
      std::cout << p.display << ": mean " << text::format_number(a.value) << " over " << a.count << "\n";
    }
    return 0;
  }
  auto key = dataset::canonical_property(property);
  if (!key) throw Error(ErrorKind::UnknownProperty, "unknown property '" + property + "'");
  for (const auto& b : store->histogram(*key, bin_width))
    std::cout << text::format_number(b.lo) << "\t" << text::format_number(b.hi) << "\t" << b.count << "\n";
  return 0;
}

int cmd_eval(const std::string& gold, const std::string& pred, const std::string& csv, const std::string& out) {
  eval::HashingEmbedder chem, general;
  auto report = eval::compute_metrics(
      eval::evaluate(eval::load_gold(gold), eval::load_predictions(pred), {&chem, &general}));
  write_or_print(report.to_json().dump(2) + "\n", out);
  if (!csv.empty()) text::write_file(csv, report.per_field_csv());
  return 0;
}

int cmd_cost(const std::string& profile, const std::string& prices, int papers, bool as_json) {
  auto table = llm::price_table_from_json(json::parse(text::read_file(prices)));
  auto ledger = service::project_cost(service::cost_profile_from_json(json::parse(text::read_file(profile))), table,
                                      papers);
  if (as_json) {
    std::cout << ledger->to_json().dump(2) << "\n";
    return 0;
  }
  std::cout << "papers: " << papers << "\n";
  for (const auto& [node, usd] : ledger->by_node()) std::cout << node << ": $" << usd.to_string() << "\n";
  std::cout << "total: $" << ledger->total().to_string() << "\n";
  return 0;
}

httplib::Server* g_server = nullptr;

int cmd_serve(const service::ApiConfig& cfg) {
  service::Service svc(cfg);
  httplib::Server server;
  svc.install(server);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cerr << "listening on " << cfg.host << ":" << cfg.port << "\n";
  if (!server.listen(cfg.host, cfg.port)) {
    std::cerr << "cannot listen on " << cfg.host << ":" << cfg.port << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MOF literature mining, dataset Q&A and evaluation"};
  app.require_subcommand(1);
  Flags f;
  app.add_option("--config", f.config, "JSON file with ApiConfig keys")->check(CLI::ExistingFile);
  app.add_option("--corpus", f.corpus, "corpus manifest");
  app.add_option("--dataset", f.dataset, "dataset JSON lines");
  app.add_option("--cif-dir", f.cif_dir, "directory of <CODE>.cif files");
  app.add_option("--out", f.out, "output directory");
  app.add_option("--fixtures", f.fixtures, "LLM fixture directory");
  app.add_option("--canned", f.canned, "canned replies (record mode without network)");
  app.add_option("--prices", f.prices, "model price table");
  app.add_option("--llm-mode", f.llm_mode, "live, record or replay")
      ->check(CLI::IsMember({"live", "record", "replay"}));
  app.add_option("--parser", f.parser, "query parser")->check(CLI::IsMember({"rules", "llm"}));
  app.add_option("--answer", f.answer, "answer composer")->check(CLI::IsMember({"template", "llm"}));
  app.add_option("--host", f.host);
  app.add_option("--port", f.port);
  app.add_option("--workers", f.workers, "job worker threads");

  std::string doi, file;
  bool text_only = false;
  auto* ingest_cmd = app.add_subcommand("ingest", "fetch and clean one document");
  auto* doi_opt = ingest_cmd->add_option("--doi", doi);
  auto* file_opt = ingest_cmd->add_option("--file", file)->check(CLI::ExistingFile);
  doi_opt->excludes(file_opt);
  ingest_cmd->add_flag("--text", text_only, "print only the cleaned text");
  ingest_cmd->callback([&] {
    if (doi.empty() && file.empty()) throw CLI::ValidationError("ingest", "--doi or --file is required");
  });

  std::vector<std::string> run_dois, run_codes;
  int parallelism = 1;
  auto* pipeline_cmd = app.add_subcommand("pipeline", "extraction pipeline");
  pipeline_cmd->require_subcommand(1);
  auto* run_cmd = pipeline_cmd->add_subcommand("run", "run the pipeline over corpus documents (all by default)");
  run_cmd->add_option("--doi", run_dois);
  run_cmd->add_option("--ccdc", run_codes);
  run_cmd->add_option("--parallel", parallelism)->check(CLI::PositiveNumber);

  std::string session = "cli";
  std::vector<std::string> questions;
  bool ask_json = false;
  auto* ask_cmd = app.add_subcommand("ask", "question the dataset; reads stdin lines without arguments");
  ask_cmd->add_option("questions", questions);
  ask_cmd->add_option("--session", session);
  ask_cmd->add_flag("--json", ask_json);

  std::string code, out_file;
  bool viz = false;
  auto* cif_cmd = app.add_subcommand("cif", "crystal structure files");
  cif_cmd->require_subcommand(1);
  auto* cif_get = cif_cmd->add_subcommand("get", "print a CIF or its viz payload");
  cif_get->add_option("code", code)->required();
  cif_get->add_flag("--viz", viz);
  cif_get->add_option("-o,--output", out_file);

  std::string gold, pred, csv;
  auto* eval_cmd = app.add_subcommand("eval", "extraction-quality evaluation");
  eval_cmd->require_subcommand(1);
  auto* eval_run = eval_cmd->add_subcommand("run", "score predictions against a gold set");
  eval_run->add_option("--gold", gold)->required()->check(CLI::ExistingFile);
  eval_run->add_option("--pred", pred)->required()->check(CLI::ExistingDirectory);
  eval_run->add_option("--csv", csv, "per-field CSV output");
  eval_run->add_option("-o,--output", out_file);

  std::string property;
  double bin_width = 1.0;
  auto* stats_cmd = app.add_subcommand("stats", "dataset summary or property histogram");
  stats_cmd->add_option("--property", property);
  stats_cmd->add_option("--bin-width", bin_width)->check(CLI::PositiveNumber);

  std::string profile, price_file;
  int papers = 100;
  bool cost_json = false;
  auto* cost_cmd = app.add_subcommand("cost", "project LLM spend from a per-paper token profile");
  cost_cmd->add_option("--profile", profile)->required()->check(CLI::ExistingFile);
  cost_cmd->add_option("--price-table", price_file)->required()->check(CLI::ExistingFile);
  cost_cmd->add_option("--papers", papers)->check(CLI::PositiveNumber);
  cost_cmd->add_flag("--json", cost_json);

  auto* serve_cmd = app.add_subcommand("serve", "HTTP API");

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = api_config(f, app);
    if (*ingest_cmd) return cmd_ingest(cfg, doi, file, text_only);
    if (*run_cmd) return cmd_pipeline(cfg, run_dois, run_codes, parallelism);
    if (*ask_cmd) return cmd_ask(cfg, session, questions, ask_json);
    if (*cif_get) return cmd_cif(cfg, code, viz, out_file);
    if (*eval_run) return cmd_eval(gold, pred, csv, out_file);
    if (*stats_cmd) return cmd_stats(cfg, property, bin_width);
    if (*cost_cmd) return cmd_cost(profile, price_file, papers, cost_json);
    if (*serve_cmd) return cmd_serve(cfg);
  } catch (const Error& e) {
    std::cerr << e.kind_name() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
