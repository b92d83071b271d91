#pragma once

// Runtime wiring shared by the HTTP service and the CLI: gateway construction,
// the asynchronous job store, Q&A sessions, CIF access, statistics and
// evaluation runs.

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mofh6/dataset.hpp"
#include "mofh6/gateway.hpp"
#include "mofh6/ingest.hpp"
#include "mofh6/pipeline.hpp"
#include "mofh6/query.hpp"

namespace httplib {
class Server;
}

namespace mofh6::service {

struct GatewaySetup {
  llm::Mode mode = llm::Mode::Replay;
  std::filesystem::path fixture_dir;
  std::filesystem::path canned_replies;  // Record mode: replies come from this file instead of the network
  std::filesystem::path prices;          // enables the cost ledger
  std::string base_url = "https://api.openai.com";
  std::string api_key_env = "OPENAI_API_KEY";
  double requests_per_minute = 0;        // 0 disables rate limiting
};

/// Throws InvalidConfig when a required path is missing.
std::shared_ptr<llm::Gateway> make_gateway(const GatewaySetup& setup);

/// Per-paper token usage of each node, used to project costs from prices.
struct NodeTokens {
  std::string node;
  std::string model_id;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  std::int64_t calls = 1;
};

/// {"nodes": [{"node", "model", "input_tokens", "output_tokens", "calls"}]}
std::vector<NodeTokens> cost_profile_from_json(const json& doc);

/// Ledger of `papers` simulated documents ("paper-0001", ...) following the profile.
std::shared_ptr<llm::CostLedger> project_cost(const std::vector<NodeTokens>& profile, const llm::PriceTable& prices,
                                              int papers);

struct ApiConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path corpus_manifest;
  std::filesystem::path dataset;
  std::filesystem::path cif_dir;
  std::filesystem::path out_dir;
  GatewaySetup gateway;
  query::EngineConfig engine;
  pipeline::PipelineConfig pipeline;
  int workers = 2;

  /// Fails fast (InvalidConfig) when an input path does not exist.
  void validate() const;
  /// Keys mirror the CLI flags; relative paths resolve against `base`.
  static ApiConfig from_json(const json& j, const std::filesystem::path& base);
};

struct HttpReply {
  int status = 200;
  json body;
};

class Service {
 public:
  explicit Service(ApiConfig config);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Body with exactly one of doi, ccdc_code, raw_text. 202 with a job id, or 400.
  HttpReply submit_job(const json& body);
  HttpReply job_status(const std::string& id) const;
  /// Path of a finished job's artifact, when it belongs to the job.
  std::optional<std::filesystem::path> job_file(const std::string& id, const std::string& name) const;
  /// Blocks until no job is queued or running.
  void wait_idle();

  HttpReply ask(const std::string& session_id, const json& body);
  std::optional<std::string> cif_bytes(const std::string& code) const;
  HttpReply cif_viz(const std::string& code) const;
  HttpReply stats(const std::optional<std::string>& property, double bin_width) const;
  HttpReply run_eval(const json& body) const;

  /// Registers every endpoint on `server`.
  void install(httplib::Server& server);

  const ApiConfig& config() const { return config_; }
  const dataset::Store& store() const { return *store_; }
  const std::shared_ptr<llm::Gateway>& gateway() const { return gateway_; }

 private:
  struct Job {
    std::string id;
    std::string status = "queued";
    json input;
    std::string doc_id;
    std::vector<std::string> outputs;
    json errors = json::array();
    std::optional<std::string> error;
    std::filesystem::path dir;
  };

  void worker_loop();
  void run_job(const std::string& id);

  ApiConfig config_;
  std::shared_ptr<const dataset::Store> store_;
  std::shared_ptr<const ingest::LocalCorpus> corpus_;
  ingest::FetcherRegistry fetchers_;
  std::vector<ingest::PublisherRoute> routes_;
  dataset::CifStore cifs_;
  std::shared_ptr<llm::Gateway> gateway_;
  std::unique_ptr<query::Engine> engine_;

  mutable std::mutex jobs_mutex_;
  std::condition_variable jobs_cv_;
  std::condition_variable idle_cv_;
  std::map<std::string, Job> jobs_;
  std::deque<std::string> queue_;
  int active_ = 0;
  int next_id_ = 1;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

/// Published response schemas keyed by name.
const json& schemas();

}  // namespace mofh6::service
