#include "mofh6/gateway.hpp"

#include <openssl/evp.h>

#include <array>
#include <cctype>
#include <thread>

#include "mofh6/error.hpp"
#include "mofh6/text.hpp"

namespace mofh6::llm {

namespace {
constexpr std::string_view kRepairPrefix = "Your previous reply was rejected: ";
}  // namespace

std::vector<Message> render_prompt(const PromptTemplate& tmpl, std::string_view payload) {
  std::vector<Message> out;
  out.reserve(2 + 2 * tmpl.shots.size());
  std::string system = tmpl.role_instruction;
  if (!tmpl.output_schema.is_null()) {
    system += "\n\nReply with a single JSON document that validates against this schema:\n";
    system += tmpl.output_schema.dump();
  }
  out.push_back({"system", std::move(system)});
  for (const auto& shot : tmpl.shots) {
    out.push_back({"user", shot.input});
    out.push_back({"assistant", shot.expected.dump()});
  }
  out.push_back({"user", std::string(payload)});
  return out;
}

void TemplateRegistry::add(PromptTemplate tmpl) {
  if (templates_.count(tmpl.name))
    throw Error(ErrorKind::InvalidConfig, "duplicate template '" + tmpl.name + "'");
  for (std::size_t i = 0; i < tmpl.shots.size(); ++i) {
    if (auto err = validate_json(tmpl.output_schema, tmpl.shots[i].expected))
      throw Error(ErrorKind::InvalidConfig,
                  "template '" + tmpl.name + "' shot " + std::to_string(i) + " violates schema: " + *err);
  }
  std::string name = tmpl.name;
  templates_.emplace(std::move(name), std::move(tmpl));
}

const PromptTemplate& TemplateRegistry::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw Error(ErrorKind::UnknownTemplate, "unknown template '" + name + "'");
  return it->second;
}

std::vector<Message> TemplateRegistry::render(const std::string& name, std::string_view payload) const {
  return render_prompt(get(name), payload);
}

const json& ChatResponse::require() const {
  if (!parsed_json)
    throw Error(ErrorKind::SchemaViolation,
                (schema_violation ? *schema_violation : std::string("no JSON reply")) +
                    "; raw reply: " + raw_text.substr(0, 500));
  return *parsed_json;
}

std::vector<CannedProvider::Rule> CannedProvider::rules_from_json(const json& doc) {
  std::vector<Rule> rules;
  for (const auto& r : doc) {
    Rule rule;
    rule.template_name = r.value("template", "");
    rule.contains = r.value("contains", "");
    const json& reply = r.at("reply");
    rule.reply = reply.is_string() ? reply.get<std::string>() : reply.dump();
    rules.push_back(std::move(rule));
  }
  return rules;
}

ProviderReply CannedProvider::complete(const std::vector<Message>& messages, const ChatRequest& request) {
  {
    std::lock_guard lock(mutex_);
    ++calls_;
  }
  // Only the payload turn is searched; shots appear in every rendering. For a
  // repair turn the payload sits two messages earlier.
  std::string haystack = messages.empty() ? std::string() : messages.back().content;
  if (haystack.rfind(kRepairPrefix, 0) == 0 && messages.size() >= 3)
    haystack = messages[messages.size() - 3].content;
  for (const auto& rule : rules_) {
    if (!rule.template_name.empty() && rule.template_name != request.template_name) continue;
    if (!rule.contains.empty() && haystack.find(rule.contains) == std::string::npos) continue;
    return {rule.reply, std::nullopt, std::nullopt};
  }
  throw Error(ErrorKind::ProviderUnavailable,
              "no canned reply for template '" + request.template_name + "'");
}

std::size_t CannedProvider::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::string fixture_key(const std::vector<Message>& messages) {
  json doc = json::array();
  for (const auto& m : messages) doc.push_back({{"role", m.role}, {"content", m.content}});
  std::string canonical = doc.dump();
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(canonical.data(), canonical.size(), digest.data(), &len, EVP_sha256(), nullptr);
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::optional<std::string> FixtureStore::get(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto path = dir_ / key;
  if (!std::filesystem::exists(path)) return std::nullopt;
  return text::read_file(path);
}

void FixtureStore::put(const std::string& key, std::string_view reply) {
  std::unique_lock lock(mutex_);
  text::write_file(dir_ / key, reply);
}

RateLimiter::RateLimiter(double requests_per_minute, double capacity, Clock clock, Sleeper sleeper)
    : rate_per_sec_(requests_per_minute / 60.0),
      capacity_(capacity),
      tokens_(capacity),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](std::chrono::steady_clock::duration d) { std::this_thread::sleep_for(d); })),
      last_(clock_()) {
  if (requests_per_minute <= 0 || capacity < 1)
    throw Error(ErrorKind::InvalidConfig, "rate limiter needs positive rate and capacity >= 1");
}

void RateLimiter::refill() {
  auto now = clock_();
  double elapsed = std::chrono::duration<double>(now - last_).count();
  if (elapsed > 0) {
    tokens_ = std::min(capacity_, tokens_ + elapsed * rate_per_sec_);
    last_ = now;
  }
}

bool RateLimiter::try_acquire() {
  std::lock_guard lock(mutex_);
  refill();
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

void RateLimiter::acquire() {
  while (true) {
    std::chrono::steady_clock::duration wait{};
    {
      std::lock_guard lock(mutex_);
      refill();
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>((1.0 - tokens_) / rate_per_sec_));
    }
    sleeper_(wait);
  }
}

std::string Usd::to_string() const {
  std::int64_t p = pico_;
  bool neg = p < 0;
  if (neg) p = -p;
  std::string frac = std::to_string(p % 1'000'000'000'000LL);
  frac.insert(0, 12 - frac.size(), '0');
  return (neg ? "-" : "") + std::to_string(p / 1'000'000'000'000LL) + "." + frac;
}

std::int64_t parse_micro_usd(std::string_view s) {
  std::string t(text::trim(s));
  auto bad = [&] { return Error(ErrorKind::InvalidConfig, "bad price '" + t + "'"); };
  if (t.empty()) throw bad();
  std::size_t dot = t.find('.');
  std::string whole = t.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : t.substr(dot + 1);
  if (whole.empty()) whole = "0";
  auto digits = [](const std::string& d) {
    for (char c : d)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  if (!digits(whole) || !digits(frac)) throw bad();
  while (frac.size() > 6 && frac.back() == '0') frac.pop_back();
  if (frac.size() > 6) throw bad();
  frac.append(6 - frac.size(), '0');
  return std::stoll(whole) * 1'000'000 + std::stoll(frac);
}

PriceTable price_table_from_json(const json& doc) {
  PriceTable table;
  auto to_micro = [](const json& v) {
    if (v.is_string()) return parse_micro_usd(v.get<std::string>());
    if (v.is_number()) return parse_micro_usd(text::format_number(v.get<double>()));
    throw Error(ErrorKind::InvalidConfig, "price must be a number or decimal string");
  };
  for (const auto& [model, prices] : doc.items()) {
    table[model] = ModelPrice{to_micro(prices.at("input")), to_micro(prices.at("output"))};
  }
  return table;
}

CostLedger::CostLedger(const CostLedger& other) : prices_(other.prices_), entries_(other.entries()) {}

LedgerEntry CostLedger::add(const std::string& doc_id, const std::string& node, const std::string& model_id,
                            std::int64_t input_tokens, std::int64_t output_tokens) {
  auto it = prices_.find(model_id);
  if (it == prices_.end()) throw Error(ErrorKind::UnknownModelPrice, "no price for model '" + model_id + "'");
  if (input_tokens < 0 || output_tokens < 0)
    throw Error(ErrorKind::InvalidRequest, "negative token count");
  LedgerEntry e{doc_id, node, model_id, input_tokens, output_tokens,
                Usd::from_pico(input_tokens * it->second.input_micro_usd_per_m +
                               output_tokens * it->second.output_micro_usd_per_m)};
  std::lock_guard lock(mutex_);
  entries_.push_back(e);
  return e;
}

std::vector<LedgerEntry> CostLedger::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

Usd CostLedger::total() const {
  Usd sum;
  for (const auto& e : entries()) sum += e.cost;
  return sum;
}

std::map<std::string, Usd> CostLedger::by_doc() const {
  std::map<std::string, Usd> out;
  for (const auto& e : entries()) out[e.doc_id] += e.cost;
  return out;
}

std::map<std::string, Usd> CostLedger::by_node() const {
  std::map<std::string, Usd> out;
  for (const auto& e : entries()) out[e.node] += e.cost;
  return out;
}

json CostLedger::to_json() const {
  json doc;
  doc["entries"] = json::array();
  for (const auto& e : entries()) {
    doc["entries"].push_back({{"doc_id", e.doc_id},
                              {"node", e.node},
                              {"model_id", e.model_id},
                              {"input_tokens", e.input_tokens},
                              {"output_tokens", e.output_tokens},
                              {"cost_usd", e.cost.to_string()}});
  }
  doc["total_usd"] = total().to_string();
  for (const auto& [k, v] : by_doc()) doc["by_doc"][k] = v.to_string();
  for (const auto& [k, v] : by_node()) doc["by_node"][k] = v.to_string();
  return doc;
}

CostLedger& ledger_add(CostLedger& ledger, const std::string& doc_id, const std::string& node,
                       const ChatResponse& response, const std::string& model_id) {
  ledger.add(doc_id, node, model_id, response.input_tokens, response.output_tokens);
  return ledger;
}

Mode parse_mode(std::string_view s) {
  if (s == "live") return Mode::Live;
  if (s == "record") return Mode::Record;
  if (s == "replay") return Mode::Replay;
  throw Error(ErrorKind::InvalidConfig, "unknown llm mode '" + std::string(s) + "'");
}

std::int64_t estimate_tokens(std::string_view s) {
  return static_cast<std::int64_t>((s.size() + 3) / 4);
}

Gateway::Gateway(std::shared_ptr<const TemplateRegistry> registry, Options options)
    : registry_(std::move(registry)), options_(std::move(options)) {
  if (!registry_) throw Error(ErrorKind::InvalidConfig, "gateway needs a template registry");
  bool needs_provider = options_.mode != Mode::Replay;
  bool needs_store = options_.mode != Mode::Live;
  if (needs_provider && !options_.provider)
    throw Error(ErrorKind::InvalidConfig, "live/record mode needs a provider");
  if (needs_store && !options_.fixtures)
    throw Error(ErrorKind::InvalidConfig, "record/replay mode needs a fixture store");
}

ProviderReply Gateway::transport(const std::vector<Message>& messages, const ChatRequest& request) {
  if (options_.mode == Mode::Replay) {
    std::string key = fixture_key(messages);
    auto stored = options_.fixtures->get(key);
    if (!stored)
      throw Error(ErrorKind::FixtureMissing,
                  "no fixture " + key + " for template '" + request.template_name + "'");
    return {*stored, std::nullopt, std::nullopt};
  }
  if (options_.limiter) options_.limiter->acquire();
  ProviderReply reply = options_.provider->complete(messages, request);
  if (options_.mode == Mode::Record) options_.fixtures->put(fixture_key(messages), reply.text);
  return reply;
}

namespace {

std::string strip_code_fence(std::string_view raw) {
  std::string_view t = text::trim(raw);
  if (t.substr(0, 3) == "```") {
    auto nl = t.find('\n');
    auto end = t.rfind("```");
    if (nl != std::string_view::npos && end != std::string_view::npos && end > nl)
      return std::string(text::trim(t.substr(nl + 1, end - nl - 1)));
  }
  return std::string(t);
}

}  // namespace

ChatResponse Gateway::complete_json(const ChatRequest& request, const CallContext& ctx) {
  if (request.user_payload.empty()) throw Error(ErrorKind::InvalidRequest, "empty user payload");
  if (request.temperature < 0) throw Error(ErrorKind::InvalidRequest, "negative temperature");
  if (request.max_output_tokens <= 0) throw Error(ErrorKind::InvalidRequest, "max_output_tokens must be positive");
  const PromptTemplate& tmpl = registry_->get(request.template_name);
  std::vector<Message> messages = render_prompt(tmpl, request.user_payload);

  ChatResponse response;
  auto started = std::chrono::steady_clock::now();
  auto attempt = [&](const std::vector<Message>& msgs) -> std::optional<std::string> {
    ProviderReply reply = transport(msgs, request);
    ++response.attempts;
    response.raw_text = reply.text;
    std::int64_t in = 0;
    if (reply.input_tokens) {
      in = *reply.input_tokens;
    } else {
      for (const auto& m : msgs) in += estimate_tokens(m.content);
    }
    response.input_tokens += in;
    response.output_tokens += reply.output_tokens.value_or(estimate_tokens(reply.text));
    json parsed = json::parse(strip_code_fence(reply.text), nullptr, false);
    if (parsed.is_discarded()) return "reply is not valid JSON";
    if (auto err = validate_json(tmpl.output_schema, parsed)) return "schema violation at " + *err;
    response.parsed_json = std::move(parsed);
    return std::nullopt;
  };

  std::optional<std::string> problem = attempt(messages);
  if (problem) {
    std::vector<Message> repair = messages;
    repair.push_back({"assistant", response.raw_text});
    repair.push_back({"user", std::string(kRepairPrefix) + *problem +
                                  ". Reply again with only a JSON document that satisfies the schema."});
    problem = attempt(repair);
    if (problem) response.schema_violation = *problem;
  }
  response.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - started)
                            .count();
  if (options_.ledger) ledger_add(*options_.ledger, ctx.doc_id, ctx.node, response, request.model_id);
  return response;
}

}  // namespace mofh6::llm
