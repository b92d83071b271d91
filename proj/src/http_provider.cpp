#include <httplib.h>

#include <cstdlib>

#include "mofh6/error.hpp"
#include "mofh6/gateway.hpp"

namespace mofh6::llm {

HttpProvider::HttpProvider(std::string base_url, std::string api_key_env, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), api_key_env_(std::move(api_key_env)), timeout_(timeout) {}

ProviderReply HttpProvider::complete(const std::vector<Message>& messages, const ChatRequest& request) {
  json body;
  body["model"] = request.model_id;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;
  body["response_format"] = {{"type", "json_object"}};
  body["messages"] = json::array();
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

  httplib::Headers headers;
  if (!api_key_env_.empty()) {
    if (const char* key = std::getenv(api_key_env_.c_str()))
      headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Client client(base_url_);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
  if (!res)
    throw Error(ErrorKind::ProviderUnavailable,
                "cannot reach " + base_url_ + ": " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error(ErrorKind::ProviderUnavailable,
                "provider returned HTTP " + std::to_string(res->status));
  json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty())
    throw Error(ErrorKind::ProviderUnavailable, "provider returned a malformed completion");
  ProviderReply out;
  out.text = reply["choices"][0]["message"].value("content", "");
  if (reply.contains("usage")) {
    out.input_tokens = reply["usage"].value("prompt_tokens", 0);
    out.output_tokens = reply["usage"].value("completion_tokens", 0);
  }
  return out;
}

}  // namespace mofh6::llm
