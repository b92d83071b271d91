#pragma once

// Chat-completion gateway: prompt templates, JSON-constrained completion with a
// single repair retry, content-addressed record/replay fixtures, a token-bucket
// rate limiter and an exact-decimal cost ledger.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "mofh6/json_schema.hpp"

namespace mofh6::llm {

struct Message {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
  bool operator==(const Message&) const = default;
};

struct Shot {
  std::string input;
  json expected;
};

struct PromptTemplate {
  std::string name;
  std::string role_instruction;
  std::vector<Shot> shots;
  json output_schema;
};

/// [system: role instruction + schema] ++ (user shot, assistant answer)* ++ [user: payload]
std::vector<Message> render_prompt(const PromptTemplate& tmpl, std::string_view payload);

class TemplateRegistry {
 public:
  /// Rejects duplicate names and shots whose expected output fails the schema.
  void add(PromptTemplate tmpl);
  const PromptTemplate& get(const std::string& name) const;
  bool contains(const std::string& name) const { return templates_.count(name) > 0; }
  std::vector<Message> render(const std::string& name, std::string_view payload) const;

 private:
  std::map<std::string, PromptTemplate> templates_;
};

struct ChatRequest {
  std::string model_id;
  std::string template_name;
  std::string user_payload;
  double temperature = 0.0;
  int max_output_tokens = 4096;
};

struct ChatResponse {
  std::string raw_text;
  std::optional<json> parsed_json;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  std::int64_t latency_ms = 0;
  int attempts = 0;
  /// Set when both the first reply and the repair reply failed the schema.
  std::optional<std::string> schema_violation;

  /// parsed_json, or throws Error(SchemaViolation) carrying raw_text.
  const json& require() const;
};

struct ProviderReply {
  std::string text;
  std::optional<std::int64_t> input_tokens;
  std::optional<std::int64_t> output_tokens;
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual ProviderReply complete(const std::vector<Message>& messages, const ChatRequest& request) = 0;
};

/// OpenAI-compatible /v1/chat/completions client. The credential is read from
/// the named environment variable at call time.
class HttpProvider : public Provider {
 public:
  HttpProvider(std::string base_url, std::string api_key_env, std::chrono::seconds timeout = std::chrono::seconds(60));
  ProviderReply complete(const std::vector<Message>& messages, const ChatRequest& request) override;

 private:
  std::string base_url_;
  std::string api_key_env_;
  std::chrono::seconds timeout_;
};

/// Returns pre-authored replies selected by template name and a substring of
/// the rendered conversation. Used to author fixtures and in tests.
class CannedProvider : public Provider {
 public:
  struct Rule {
    std::string template_name;
    std::string contains;  // empty matches anything
    std::string reply;
  };
  explicit CannedProvider(std::vector<Rule> rules) : rules_(std::move(rules)) {}
  /// Reads [{"template", "contains", "reply"}]; a non-string reply is dumped as JSON.
  static std::vector<Rule> rules_from_json(const json& doc);
  ProviderReply complete(const std::vector<Message>& messages, const ChatRequest& request) override;
  std::size_t calls() const;

 private:
  std::vector<Rule> rules_;
  mutable std::mutex mutex_;
  std::size_t calls_ = 0;
};

/// SHA-256 (hex) of the rendered message sequence.
std::string fixture_key(const std::vector<Message>& messages);

/// One file per key; file name is the key, content the raw reply bytes.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::optional<std::string> get(const std::string& key) const;
  void put(const std::string& key, std::string_view reply);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mutex_;
};

/// Token bucket: `capacity` requests of burst, refilled at requests_per_minute.
class RateLimiter {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;
  using Sleeper = std::function<void(std::chrono::steady_clock::duration)>;

  RateLimiter(double requests_per_minute, double capacity, Clock clock = {}, Sleeper sleeper = {});
  bool try_acquire();
  void acquire();

 private:
  void refill();
  double rate_per_sec_;
  double capacity_;
  double tokens_;
  Clock clock_;
  Sleeper sleeper_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mutex_;
};

/// Exact USD amount in units of 1e-12 dollars.
class Usd {
 public:
  constexpr Usd() = default;
  static constexpr Usd from_pico(std::int64_t pico) { return Usd(pico); }
  std::int64_t pico() const { return pico_; }
  double to_double() const { return static_cast<double>(pico_) / 1e12; }
  std::string to_string() const;  // fixed 12 decimals
  Usd operator+(Usd o) const { return Usd(pico_ + o.pico_); }
  Usd& operator+=(Usd o) { pico_ += o.pico_; return *this; }
  auto operator<=>(const Usd&) const = default;

 private:
  constexpr explicit Usd(std::int64_t p) : pico_(p) {}
  std::int64_t pico_ = 0;
};

/// Price in micro-dollars per million tokens, so tokens * price is exact in pico-dollars.
struct ModelPrice {
  std::int64_t input_micro_usd_per_m = 0;
  std::int64_t output_micro_usd_per_m = 0;
};

/// Parses a decimal USD string with at most 6 fractional digits ("0.15") into micro-dollars.
std::int64_t parse_micro_usd(std::string_view s);

using PriceTable = std::map<std::string, ModelPrice>;
/// {"model": {"input": 0.15, "output": "0.60"}} prices in USD per 1M tokens.
PriceTable price_table_from_json(const json& doc);

struct LedgerEntry {
  std::string doc_id;
  std::string node;
  std::string model_id;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  Usd cost;
};

class CostLedger {
 public:
  explicit CostLedger(PriceTable prices) : prices_(std::move(prices)) {}
  CostLedger(const CostLedger& other);
  CostLedger& operator=(const CostLedger&) = delete;

  LedgerEntry add(const std::string& doc_id, const std::string& node, const std::string& model_id,
                  std::int64_t input_tokens, std::int64_t output_tokens);
  std::vector<LedgerEntry> entries() const;
  Usd total() const;
  std::map<std::string, Usd> by_doc() const;
  std::map<std::string, Usd> by_node() const;
  json to_json() const;

 private:
  PriceTable prices_;
  mutable std::mutex mutex_;
  std::vector<LedgerEntry> entries_;
};

/// Appends one entry for `response` and returns the ledger.
CostLedger& ledger_add(CostLedger& ledger, const std::string& doc_id, const std::string& node,
                       const ChatResponse& response, const std::string& model_id);

enum class Mode { Live, Record, Replay };
Mode parse_mode(std::string_view s);

/// Deterministic token estimate used when the transport reports no usage
/// (replayed fixtures store the reply bytes only).
std::int64_t estimate_tokens(std::string_view s);

struct CallContext {
  std::string doc_id;
  std::string node;
};

class Gateway {
 public:
  struct Options {
    Mode mode = Mode::Replay;
    std::shared_ptr<Provider> provider;        // required for Live and Record
    std::shared_ptr<FixtureStore> fixtures;    // required for Record and Replay
    std::shared_ptr<CostLedger> ledger;        // optional
    std::shared_ptr<RateLimiter> limiter;      // optional, applied to provider calls
  };

  Gateway(std::shared_ptr<const TemplateRegistry> registry, Options options);

  /// Throws UnknownTemplate, ProviderUnavailable, FixtureMissing, InvalidRequest
  /// or UnknownModelPrice. A reply that stays invalid after the repair retry is
  /// returned with schema_violation set rather than thrown.
  ChatResponse complete_json(const ChatRequest& request, const CallContext& ctx = {});

  const TemplateRegistry& registry() const { return *registry_; }
  Mode mode() const { return options_.mode; }
  const std::shared_ptr<CostLedger>& ledger() const { return options_.ledger; }

 private:
  ProviderReply transport(const std::vector<Message>& messages, const ChatRequest& request);

  std::shared_ptr<const TemplateRegistry> registry_;
  Options options_;
};

}  // namespace mofh6::llm
