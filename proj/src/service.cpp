#include "mofh6/service.hpp"

#include <httplib.h>

#include <cstdio>

#include "mofh6/error.hpp"
#include "mofh6/eval.hpp"
#include "mofh6/prompts.hpp"
#include "mofh6/text.hpp"

namespace mofh6::service {

namespace fs = std::filesystem;

std::shared_ptr<llm::Gateway> make_gateway(const GatewaySetup& setup) {
  llm::Gateway::Options opts;
  opts.mode = setup.mode;
  if (setup.mode != llm::Mode::Live) {
    if (setup.fixture_dir.empty()) throw Error(ErrorKind::InvalidConfig, "replay and record modes need a fixture dir");
    if (setup.mode == llm::Mode::Replay && !fs::is_directory(setup.fixture_dir))
      throw Error(ErrorKind::InvalidConfig, "fixture dir " + setup.fixture_dir.string() + " does not exist");
    opts.fixtures = std::make_shared<llm::FixtureStore>(setup.fixture_dir);
  }
  if (setup.mode != llm::Mode::Replay) {
    if (!setup.canned_replies.empty()) {
      auto doc = json::parse(text::read_file(setup.canned_replies));
      opts.provider = std::make_shared<llm::CannedProvider>(llm::CannedProvider::rules_from_json(doc));
    } else {
      opts.provider = std::make_shared<llm::HttpProvider>(setup.base_url, setup.api_key_env);
    }
  }
  if (!setup.prices.empty())
    opts.ledger =
        std::make_shared<llm::CostLedger>(llm::price_table_from_json(json::parse(text::read_file(setup.prices))));
  if (setup.requests_per_minute > 0)
    opts.limiter = std::make_shared<llm::RateLimiter>(setup.requests_per_minute,
                                                      std::max(1.0, setup.requests_per_minute / 60.0));
  return std::make_shared<llm::Gateway>(prompts::builtin_registry(), std::move(opts));
}

std::vector<NodeTokens> cost_profile_from_json(const json& doc) {
  std::vector<NodeTokens> out;
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array())
    throw Error(ErrorKind::InvalidConfig, "cost profile needs a nodes array");
  for (const auto& n : doc["nodes"]) {
    NodeTokens t;
    t.node = n.at("node").get<std::string>();
    t.model_id = n.at("model").get<std::string>();
    t.input_tokens = n.at("input_tokens").get<std::int64_t>();
    t.output_tokens = n.at("output_tokens").get<std::int64_t>();
    t.calls = n.value("calls", std::int64_t{1});
    if (t.input_tokens < 0 || t.output_tokens < 0 || t.calls < 0)
      throw Error(ErrorKind::InvalidConfig, "negative token count for node " + t.node);
    out.push_back(std::move(t));
  }
  return out;
}

std::shared_ptr<llm::CostLedger> project_cost(const std::vector<NodeTokens>& profile, const llm::PriceTable& prices,
                                              int papers) {
  auto ledger = std::make_shared<llm::CostLedger>(prices);
  for (int p = 1; p <= papers; ++p) {
    char id[32];
    std::snprintf(id, sizeof id, "paper-%04d", p);
    for (const auto& n : profile)
      for (std::int64_t c = 0; c < n.calls; ++c) ledger->add(id, n.node, n.model_id, n.input_tokens, n.output_tokens);
  }
  return ledger;
}

// ---- config ----

void ApiConfig::validate() const {
  auto need = [](const fs::path& p, const char* what, bool dir) {
    if (p.empty()) throw Error(ErrorKind::InvalidConfig, std::string(what) + " is not set");
    if (dir ? !fs::is_directory(p) : !fs::is_regular_file(p))
      throw Error(ErrorKind::InvalidConfig, std::string(what) + " " + p.string() + " does not exist");
  };
  need(corpus_manifest, "corpus manifest", false);
  need(dataset, "dataset", false);
  need(cif_dir, "CIF directory", true);
  if (gateway.mode == llm::Mode::Replay) need(gateway.fixture_dir, "fixture directory", true);
  if (!gateway.canned_replies.empty()) need(gateway.canned_replies, "canned replies", false);
  if (!gateway.prices.empty()) need(gateway.prices, "price table", false);
  if (out_dir.empty()) throw Error(ErrorKind::InvalidConfig, "output directory is not set");
  if (workers < 1) throw Error(ErrorKind::InvalidConfig, "workers must be positive");
}

ApiConfig ApiConfig::from_json(const json& j, const fs::path& base) {
  ApiConfig c;
  auto path = [&](const char* key) -> fs::path {
    if (!j.contains(key)) return {};
    fs::path p = j[key].get<std::string>();
    return p.is_absolute() ? p : base / p;
  };
  c.host = j.value("host", c.host);
  c.port = j.value("port", c.port);
  c.corpus_manifest = path("corpus");
  c.dataset = path("dataset");
  c.cif_dir = path("cif_dir");
  c.out_dir = path("out");
  c.gateway.fixture_dir = path("fixtures");
  c.gateway.canned_replies = path("canned");
  c.gateway.prices = path("prices");
  c.gateway.mode = llm::parse_mode(j.value("llm_mode", std::string("replay")));
  c.workers = j.value("workers", c.workers);
  std::string parser = j.value("parser", std::string("rules"));
  if (parser != "rules" && parser != "llm") throw Error(ErrorKind::InvalidConfig, "parser must be rules or llm");
  c.engine.parse_mode = parser == "llm" ? query::ParseMode::LlmPrimary : query::ParseMode::RulesOnly;
  std::string answer = j.value("answer", std::string("template"));
  if (answer != "template" && answer != "llm") throw Error(ErrorKind::InvalidConfig, "answer must be template or llm");
  c.engine.compose_mode = answer == "llm" ? query::ComposeMode::Llm : query::ComposeMode::Template;
  return c;
}

// ---- service ----

namespace {

json error_body(std::string_view kind, const std::string& message) {
  return {{"error", std::string(kind)}, {"message", message}};
}

HttpReply error_reply(int status, const Error& e) { return {status, error_body(e.kind_name(), e.what())}; }

}  // namespace

Service::Service(ApiConfig config) : config_(std::move(config)), cifs_(config_.cif_dir) {
  config_.validate();
  auto loaded = dataset::Store::load(config_.dataset);
  for (const auto& e : loaded.errors)
    std::fprintf(stderr, "dataset line %zu rejected (%s): %s\n", e.line, e.kind.c_str(), e.message.c_str());
  store_ = std::make_shared<const dataset::Store>(std::move(loaded.store));
  corpus_ = std::make_shared<const ingest::LocalCorpus>(ingest::LocalCorpus::load(config_.corpus_manifest));
  fetchers_.add("local", std::make_shared<ingest::LocalCorpusFetcher>(corpus_));
  routes_ = ingest::default_routes();
  gateway_ = make_gateway(config_.gateway);
  engine_ = std::make_unique<query::Engine>(store_, config_.engine, gateway_.get());
  fs::create_directories(config_.out_dir);
  for (int i = 0; i < config_.workers; ++i) workers_.emplace_back([this] { worker_loop(); });
}

Service::~Service() {
  {
    std::lock_guard lock(jobs_mutex_);
    stopping_ = true;
  }
  jobs_cv_.notify_all();
  for (auto& t : workers_) t.join();
}

HttpReply Service::submit_job(const json& body) {
  if (!body.is_object()) return {400, error_body("InvalidRequest", "body must be a JSON object")};
  int forms = 0;
  for (const char* k : {"doi", "ccdc_code", "raw_text"})
    if (body.contains(k)) {
      if (!body[k].is_string() || text::trim(body[k].get<std::string>()).empty())
        return {400, error_body("InvalidRequest", std::string(k) + " must be a non-empty string")};
      ++forms;
    }
  if (forms != 1)
    return {400, error_body("InvalidRequest", "exactly one of doi, ccdc_code, raw_text is required")};
  if (body.contains("doi") && !ingest::is_valid_doi(body["doi"].get<std::string>()))
    return {400, error_body("MalformedDoi", "'" + body["doi"].get<std::string>() + "' is not a DOI")};

  std::string id;
  {
    std::lock_guard lock(jobs_mutex_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "job-%06d", next_id_++);
    id = buf;
    Job job;
    job.id = id;
    job.input = body;
    job.dir = config_.out_dir / "jobs" / id;
    jobs_.emplace(id, std::move(job));
    queue_.push_back(id);
  }
  jobs_cv_.notify_one();
  return {202, {{"job_id", id}, {"status", "queued"}}};
}

void Service::worker_loop() {
  while (true) {
    std::string id;
    {
      std::unique_lock lock(jobs_mutex_);
      jobs_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_ && queue_.empty()) return;
      id = queue_.front();
      queue_.pop_front();
      jobs_.at(id).status = "running";
      ++active_;
    }
    run_job(id);
    {
      std::lock_guard lock(jobs_mutex_);
      --active_;
    }
    idle_cv_.notify_all();
  }
}

void Service::run_job(const std::string& id) {
  json input;
  fs::path dir;
  {
    std::lock_guard lock(jobs_mutex_);
    input = jobs_.at(id).input;
    dir = jobs_.at(id).dir;
  }
  std::string status = "failed", doc_id;
  std::vector<std::string> outputs;
  json errors = json::array();
  std::optional<std::string> error;
  try {
    ingest::DocumentRecord doc;
    if (input.contains("raw_text")) {
      doc = ingest::make_document("upload-" + id, input["raw_text"].get<std::string>(), ingest::Provenance::UserUpload);
    } else {
      const ingest::CorpusEntry* entry = nullptr;
      std::string code;
      if (input.contains("ccdc_code")) {
        code = text::to_upper(text::trim(input["ccdc_code"].get<std::string>()));
        entry = corpus_->find_ccdc(code);
        if (!entry) throw Error(ErrorKind::NotInCorpus, "no corpus document reports " + code);
      } else {
        auto doi = input["doi"].get<std::string>();
        entry = corpus_->find_doi(doi);
        if (!entry) throw Error(ErrorKind::NotInCorpus, "DOI " + doi + " is not in the corpus");
      }
      doc = pipeline::load_entry(*entry, fetchers_, routes_);
      if (!code.empty()) doc.ccdc_codes_requested = {code};
    }
    doc_id = doc.doc_id;
    auto cfg = config_.pipeline;
    cfg.out_dir = dir;
    auto graph = pipeline::build_pipeline(gateway_, cfg);
    auto state = execute(graph, pipeline::initial_state(doc, *store_));
    for (const auto& p : pipeline::artifacts(dir, doc_id)) outputs.push_back(p.filename().string());
    for (const auto& e : state.errors) errors.push_back({{"node", e.node}, {"kind", e.kind}, {"message", e.message}});
    status = state.errors.empty() ? "done" : "failed";
  } catch (const Error& e) {
    errors.push_back({{"node", nullptr}, {"kind", std::string(e.kind_name())}, {"message", e.what()}});
    error = std::string(e.kind_name());
  } catch (const std::exception& e) {
    errors.push_back({{"node", nullptr}, {"kind", "Exception"}, {"message", e.what()}});
    error = "Exception";
  }
  std::lock_guard lock(jobs_mutex_);
  auto& job = jobs_.at(id);
  job.status = status;
  job.doc_id = doc_id;
  job.outputs = std::move(outputs);
  job.errors = std::move(errors);
  job.error = error;
}

void Service::wait_idle() {
  std::unique_lock lock(jobs_mutex_);
  idle_cv_.wait(lock, [&] { return queue_.empty() && active_ == 0; });
}

HttpReply Service::job_status(const std::string& id) const {
  std::lock_guard lock(jobs_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return {404, error_body("NotFound", "unknown job " + id)};
  const Job& j = it->second;
  json body = {{"job_id", j.id},   {"status", j.status}, {"doc_id", j.doc_id},
               {"outputs", j.outputs}, {"errors", j.errors}};
  body["error"] = j.error ? json(*j.error) : json(nullptr);
  return {200, body};
}

std::optional<fs::path> Service::job_file(const std::string& id, const std::string& name) const {
  std::lock_guard lock(jobs_mutex_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  const Job& j = it->second;
  if (std::find(j.outputs.begin(), j.outputs.end(), name) == j.outputs.end()) return std::nullopt;
  return j.dir / j.doc_id / name;
}

HttpReply Service::ask(const std::string& session_id, const json& body) {
  if (!body.is_object() || !body.contains("question") || !body["question"].is_string() ||
      text::trim(body["question"].get<std::string>()).empty())
    return {400, error_body("InvalidRequest", "body needs a non-empty question")};
  try {
    auto a = engine_->ask(session_id, body["question"].get<std::string>());
    json out = {{"session_id", session_id},
                {"answer_text", a.answer_text},
                {"structured_result", a.structured_result},
                {"parsed_query", a.parsed_query}};
    if (a.clarification) {
      out["error"] = "ContextUnavailable";
      out["message"] = a.structured_result.value("message", "");
      return {422, out};
    }
    return {200, out};
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::UnknownMaterial) return error_reply(404, e);
    return error_reply(400, e);
  }
}

std::optional<std::string> Service::cif_bytes(const std::string& code) const {
  auto p = cifs_.find(code);
  if (!p) return std::nullopt;
  return text::read_file(*p);
}

HttpReply Service::cif_viz(const std::string& code) const {
  auto bytes = cif_bytes(code);
  if (!bytes) return {404, error_body("NotFound", "no CIF for " + code)};
  try {
    return {200, dataset::viz_payload(dataset::parse_cif(*bytes))};
  } catch (const Error& e) {
    return error_reply(500, e);
  }
}

HttpReply Service::stats(const std::optional<std::string>& property, double bin_width) const {
  json body = {{"records", store_->size()}};
  if (!property) {
    json props = json::array();
    for (const auto& p : dataset::properties()) props.push_back(p.display);
    body["properties"] = props;
    std::map<std::string, int> systems;
    for (const auto& r : store_->records()) ++systems[std::string(to_string(r.crystal_system))];
    body["crystal_systems"] = systems;
    return {200, body};
  }
  try {
    auto key = dataset::canonical_property(*property);
    if (!key) throw Error(ErrorKind::UnknownProperty, "unknown property '" + *property + "'");
    json bins = json::array();
    for (const auto& b : store_->histogram(*key, bin_width))
      bins.push_back({{"lo", b.lo}, {"hi", b.hi}, {"count", b.count}});
    body["property"] = dataset::property(*key).display;
    body["bin_width"] = bin_width;
    body["bins"] = bins;
    return {200, body};
  } catch (const Error& e) {
    return error_reply(400, e);
  }
}

HttpReply Service::run_eval(const json& body) const {
  if (!body.is_object() || !body.contains("gold") || !body.contains("pred") || !body["gold"].is_string() ||
      !body["pred"].is_string())
    return {400, error_body("InvalidRequest", "body needs gold (file) and pred (directory) paths")};
  try {
    eval::HashingEmbedder chem, general;
    auto gold = eval::load_gold(body["gold"].get<std::string>());
    auto pred = eval::load_predictions(body["pred"].get<std::string>());
    auto report = eval::compute_metrics(eval::evaluate(gold, pred, {&chem, &general}));
    return {200, report.to_json()};
  } catch (const Error& e) {
    return error_reply(400, e);
  }
}

void Service::install(httplib::Server& svr) {
  auto send = [](httplib::Response& res, const HttpReply& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto parse_body = [](const httplib::Request& req) {
    return json::parse(req.body, nullptr, false);
  };

  svr.Get("/health", [send](const httplib::Request&, httplib::Response& res) {
    send(res, {200, {{"status", "ok"}}});
  });
  svr.Post("/jobs", [this, send, parse_body](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    if (body.is_discarded()) return send(res, {400, error_body("InvalidRequest", "body is not JSON")});
    send(res, submit_job(body));
  });
  svr.Get(R"(/jobs/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, job_status(req.matches[1]));
  });
  svr.Get(R"(/jobs/([^/]+)/files/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    auto p = job_file(req.matches[1], req.matches[2]);
    if (!p) return send(res, {404, error_body("NotFound", "no such output")});
    res.set_content(text::read_file(*p), p->extension() == ".json" ? "application/json" : "text/plain");
  });
  svr.Post(R"(/sessions/([^/]+)/ask)", [this, send, parse_body](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    if (body.is_discarded()) return send(res, {400, error_body("InvalidRequest", "body is not JSON")});
    send(res, ask(req.matches[1], body));
  });
  svr.Get(R"(/cif/([^/]+)/viz)", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, cif_viz(req.matches[1]));
  });
  svr.Get(R"(/cif/([^/]+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    auto bytes = cif_bytes(req.matches[1]);
    if (!bytes) return send(res, {404, error_body("NotFound", "no CIF for " + std::string(req.matches[1]))});
    res.set_content(*bytes, "chemical/x-cif");
  });
  svr.Get("/stats", [this, send](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> prop;
    if (req.has_param("property")) prop = req.get_param_value("property");
    double bin = 1.0;
    if (req.has_param("bin_width")) {
      auto v = text::parse_decimal(req.get_param_value("bin_width"));
      if (!v || *v <= 0) return send(res, {400, error_body("InvalidRequest", "bin_width must be positive")});
      bin = *v;
    }
    send(res, stats(prop, bin));
  });
  svr.Post("/eval", [this, send, parse_body](const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req);
    if (body.is_discarded()) return send(res, {400, error_body("InvalidRequest", "body is not JSON")});
    send(res, run_eval(body));
  });
  svr.Get("/schema", [send](const httplib::Request&, httplib::Response& res) { send(res, {200, schemas()}); });
  svr.Get(R"(/schema/([^/]+))", [send](const httplib::Request& req, httplib::Response& res) {
    std::string name = req.matches[1];
    if (!schemas().contains(name)) return send(res, {404, error_body("NotFound", "no schema " + name)});
    send(res, {200, schemas()[name]});
  });
}

// ---- schemas ----

const json& schemas() {
  static const json kSchemas = [] {
    json str = {{"type", "string"}};
    json num = {{"type", "number"}};
    json nat = {{"type", "integer"}, {"minimum", 0}};
    json str_list = {{"type", "array"}, {"items", str}};
    auto object = [](json props, std::vector<std::string> required) {
      return json{{"type", "object"}, {"properties", std::move(props)}, {"required", required}};
    };
    json s;
    s["error"] = object({{"error", str}, {"message", str}}, {"error", "message"});
    s["job_created"] = object({{"job_id", str}, {"status", {{"enum", {"queued"}}}}}, {"job_id", "status"});
    s["job_status"] = object(
        {{"job_id", str},
         {"status", {{"enum", {"queued", "running", "done", "failed"}}}},
         {"doc_id", str},
         {"outputs", str_list},
         {"errors",
          {{"type", "array"},
           {"items", object({{"node", {{"type", json::array({"string", "null"})}}}, {"kind", str}, {"message", str}},
                            {"kind", "message"})}}},
         {"error", {{"type", json::array({"string", "null"})}}}},
        {"job_id", "status", "outputs", "errors"});
    s["ask_response"] = object({{"session_id", str},
                                {"answer_text", str},
                                {"structured_result", {{"type", "object"}}},
                                {"parsed_query", prompts::parsed_query_schema()}},
                               {"session_id", "answer_text", "structured_result", "parsed_query"});
    json vec3 = {{"type", "array"}, {"items", num}, {"minItems", 3}};
    s["viz_payload"] = object(
        {{"cell",
          object({{"a", num}, {"b", num}, {"c", num}, {"alpha", num}, {"beta", num}, {"gamma", num},
                  {"vectors", {{"type", "array"}, {"items", vec3}, {"minItems", 3}}}},
                 {"a", "b", "c", "alpha", "beta", "gamma", "vectors"})},
         {"space_group", {{"type", json::array({"string", "null"})}}},
         {"title", {{"type", json::array({"string", "null"})}}},
         {"atoms", {{"type", "array"},
                    {"items", object({{"element", str}, {"label", str}, {"x", num}, {"y", num}, {"z", num}},
                                     {"element", "x", "y", "z"})}}},
         {"bonds", {{"type", "array"}, {"items", {{"type", "array"}, {"items", nat}, {"minItems", 2}}}}}},
        {"cell", "atoms", "bonds"});
    s["stats"] = object({{"records", nat},
                         {"properties", str_list},
                         {"crystal_systems", {{"type", "object"}, {"additionalProperties", nat}}},
                         {"property", str},
                         {"bin_width", num},
                         {"bins", {{"type", "array"},
                                   {"items", object({{"lo", num}, {"hi", num}, {"count", nat}}, {"lo", "hi", "count"})}}}},
                        {"records"});
    json metric = object({{"tp", nat}, {"fp", nat}, {"fn", nat}, {"tn", nat}, {"accuracy", num}, {"precision", num},
                          {"recall", num}, {"f1", num}},
                         {"tp", "fp", "fn", "tn", "accuracy", "precision", "recall", "f1"});
    s["metric_report"] = metric;
    s["metric_report"]["properties"]["per_field"] = {{"type", "object"}, {"additionalProperties", metric}};
    s["health"] = object({{"status", str}}, {"status"});
    return s;
  }();
  return kSchemas;
}

}  // namespace mofh6::service
