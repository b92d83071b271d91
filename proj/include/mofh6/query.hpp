#pragma once

// Natural-language questions over the dataset store: an LLM parser with a
// rule-based backup, per-session context with paging, execution and answer
// composition with a numeric post-check.

#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mofh6/dataset.hpp"
#include "mofh6/gateway.hpp"

namespace mofh6::query {

enum class QueryType { Property, Range, Comparison, Statistical, Paging, Reset, Greeting, Chat };
std::string_view to_string(QueryType t);
std::optional<QueryType> parse_query_type(std::string_view s);

enum class OpType { Mean, Max, Min, Count, None };
std::string_view to_string(OpType t);

struct ParsedQuery {
  QueryType query_type = QueryType::Chat;
  bool uses_context = false;
  std::vector<std::string> materials;
  std::vector<std::string> properties;    // display names: "PLD (Å)"
  std::map<std::string, double> range_min;  // range keys: "PLD"
  std::map<std::string, double> range_max;
  OpType operation = OpType::None;
  std::optional<double> operation_value;
  std::vector<std::string> reasoning;
  std::optional<int> page_size;
  std::optional<int> paged_index;

  /// Field-wise equality ignoring the free-text reasoning.
  bool same_as(const ParsedQuery& o) const;
};

json to_json(const ParsedQuery& q);
/// Canonicalizes property names and range keys. Throws SchemaViolation on
/// unknown enum values and UnknownProperty on unmapped names.
ParsedQuery parsed_query_from_json(const json& j);

inline constexpr int kDefaultPageSize = 10;
inline constexpr std::size_t kLastResultBound = 500;

struct HistoryEntry {
  std::string question;
  ParsedQuery parsed;
  std::vector<std::string> materials;
  std::vector<std::string> properties;
};

struct SessionContext {
  explicit SessionContext(std::size_t capacity = 20);

  std::optional<std::string> last_query;
  std::vector<std::string> last_materials;
  std::vector<std::string> last_properties;
  std::vector<std::string> last_result;  // record codes, at most kLastResultBound
  std::size_t cursor = 0;                // next paging offset into last_result
  int page_size = kDefaultPageSize;
  std::deque<HistoryEntry> history;      // oldest first

  std::size_t capacity() const { return capacity_; }
  void remember(HistoryEntry entry);  // evicts oldest beyond capacity
  void clear();
  bool empty() const { return !last_query && history.empty(); }

 private:
  std::size_t capacity_;
};

/// Deterministic keyword and regex parser.
ParsedQuery parse_rules(std::string_view text);

enum class ParseMode { LlmPrimary, RulesOnly };

struct ParseOptions {
  ParseMode mode = ParseMode::RulesOnly;
  llm::Gateway* gateway = nullptr;
  std::string model_id = "gpt-4o-mini";
  std::string session_id;
};

/// LLM parse with the rule parser as fallback on any gateway or schema failure.
ParsedQuery parse_query(std::string_view text, const SessionContext& ctx, const ParseOptions& options = {});

/// Fills materials/properties from the session. Throws ContextUnavailable.
ParsedQuery apply_context(ParsedQuery q, const SessionContext& ctx);

struct ResultRow {
  std::string code;
  std::string name;
  std::vector<std::optional<double>> values;  // aligned with QueryResult::properties
};

struct Aggregate {
  OpType op = OpType::None;
  std::string property;  // display name
  double value = 0;
  std::size_t count = 0;
  std::vector<std::string> witnesses;
};

struct QueryResult {
  QueryType type = QueryType::Chat;
  std::vector<std::string> properties;  // display names, column order
  std::vector<ResultRow> rows;
  std::size_t total = 0;   // rows in the full (unpaged) result
  std::size_t offset = 0;  // index of rows[0] in the full result
  std::optional<Aggregate> aggregate;
  std::string message;     // greeting/chat/reset text
};

json to_json(const QueryResult& r);

/// Runs the query and updates the session on success. Throws UnknownMaterial,
/// UnknownProperty or ContextUnavailable.
QueryResult execute(const ParsedQuery& q, SessionContext& ctx, const dataset::Store& store,
                    const std::string& question = {});

enum class ComposeMode { Template, Llm };

/// Deterministic text rendering of a result.
std::string render_template(const QueryResult& r);

/// True when every number in `answer` also occurs in the result summary.
bool numbers_faithful(std::string_view answer, const QueryResult& r);

struct Composed {
  std::string text;
  bool fell_back = false;
};

Composed compose_response(const QueryResult& r, std::string_view question, ComposeMode mode,
                          llm::Gateway* gateway = nullptr, const std::string& model_id = "gpt-4o-mini",
                          const std::string& session_id = {});

struct EngineConfig {
  ParseMode parse_mode = ParseMode::RulesOnly;
  ComposeMode compose_mode = ComposeMode::Template;
  std::string model_id = "gpt-4o-mini";
  std::size_t context_capacity = 20;
};

struct Answer {
  std::string answer_text;
  json structured_result;
  json parsed_query;
  bool clarification = false;  // ContextUnavailable: answer_text is a clarifying question
};

/// Sessions keyed by client-chosen ids; each session is serialized by its own lock.
class Engine {
 public:
  Engine(std::shared_ptr<const dataset::Store> store, EngineConfig config, llm::Gateway* gateway = nullptr);

  /// Throws UnknownMaterial / UnknownProperty; context gaps come back as clarifications.
  Answer ask(const std::string& session_id, const std::string& question);

  std::size_t session_count() const;
  const dataset::Store& store() const { return *store_; }

 private:
  struct Session {
    std::mutex mutex;
    SessionContext ctx;
    explicit Session(std::size_t cap) : ctx(cap) {}
  };
  Session& session(const std::string& id);

  std::shared_ptr<const dataset::Store> store_;
  EngineConfig config_;
  llm::Gateway* gateway_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
};

}  // namespace mofh6::query
