#pragma once

// Validator for the JSON Schema subset used by prompt templates and the HTTP
// API: type (string or array, including "null"), properties, required,
// additionalProperties (bool), items, enum, minimum, maximum,
// exclusiveMinimum, minItems, minLength.

#include <optional>
#include <string>

#include <json.hpp>

namespace mofh6 {

using json = nlohmann::json;

/// Returns the first violation as "<json-pointer>: <reason>", or nullopt.
std::optional<std::string> validate_json(const json& schema, const json& value);

}  // namespace mofh6
