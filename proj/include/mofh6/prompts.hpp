#pragma once

// Built-in prompt templates for every LLM-backed step.

#include <memory>

#include "mofh6/gateway.hpp"

namespace mofh6::prompts {

// Template names.
inline constexpr const char* kSynthesis = "synthesis";
inline constexpr const char* kTables = "tables";
inline constexpr const char* kCrystalAdjudicate = "crystal_adjudicate";
inline constexpr const char* kAbbrevAdjudicate = "abbrev_adjudicate";
inline constexpr const char* kStructured = "structured";
inline constexpr const char* kQueryParse = "query_parse";
inline constexpr const char* kQueryAnswer = "query_answer";

json synthesis_schema();
json tables_schema();
json structured_schema();
json parsed_query_schema();

void register_builtin(llm::TemplateRegistry& registry);
std::shared_ptr<const llm::TemplateRegistry> builtin_registry();

}  // namespace mofh6::prompts
