#include "mofh6/json_schema.hpp"

namespace mofh6 {

namespace {

bool has_type(const json& value, const std::string& type) {
  if (type == "null") return value.is_null();
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "integer") return value.is_number_integer() || value.is_number_unsigned();
  if (type == "number") return value.is_number();
  return false;
}

std::optional<std::string> check(const json& schema, const json& value, const std::string& path) {
  auto where = [&](const std::string& why) { return (path.empty() ? "/" : path) + ": " + why; };
  if (!schema.is_object()) return std::nullopt;

  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_string()) {
      ok = has_type(value, it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& t : *it) ok = ok || has_type(value, t.get<std::string>());
    }
    if (!ok) return where("expected type " + it->dump() + ", got " + value.type_name());
  }
  if (auto it = schema.find("enum"); it != schema.end()) {
    bool found = false;
    for (const auto& candidate : *it) found = found || candidate == value;
    if (!found) return where("value " + value.dump() + " not in enum");
  }
  if (value.is_number()) {
    double v = value.get<double>();
    if (auto it = schema.find("minimum"); it != schema.end() && v < it->get<double>())
      return where("below minimum " + it->dump());
    if (auto it = schema.find("maximum"); it != schema.end() && v > it->get<double>())
      return where("above maximum " + it->dump());
    if (auto it = schema.find("exclusiveMinimum"); it != schema.end() && v <= it->get<double>())
      return where("not above exclusiveMinimum " + it->dump());
  }
  if (value.is_string()) {
    if (auto it = schema.find("minLength");
        it != schema.end() && value.get_ref<const std::string&>().size() < it->get<std::size_t>())
      return where("shorter than minLength " + it->dump());
  }
  if (value.is_array()) {
    if (auto it = schema.find("minItems"); it != schema.end() && value.size() < it->get<std::size_t>())
      return where("fewer than minItems " + it->dump());
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < value.size(); ++i)
        if (auto err = check(*it, value[i], path + "/" + std::to_string(i))) return err;
    }
  }
  if (value.is_object()) {
    const json empty = json::object();
    const json& props = schema.contains("properties") ? schema["properties"] : empty;
    if (auto it = schema.find("required"); it != schema.end()) {
      for (const auto& key : *it)
        if (!value.contains(key.get<std::string>()))
          return where("missing required property '" + key.get<std::string>() + "'");
    }
    bool closed = schema.contains("additionalProperties") &&
                  schema["additionalProperties"].is_boolean() &&
                  !schema["additionalProperties"].get<bool>();
    for (const auto& [key, member] : value.items()) {
      if (auto p = props.find(key); p != props.end()) {
        if (auto err = check(*p, member, path + "/" + key)) return err;
      } else if (closed) {
        return where("unexpected property '" + key + "'");
      } else if (auto ap = schema.find("additionalProperties"); ap != schema.end() && ap->is_object()) {
        if (auto err = check(*ap, member, path + "/" + key)) return err;
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> validate_json(const json& schema, const json& value) {
  return check(schema, value, "");
}

}  // namespace mofh6
