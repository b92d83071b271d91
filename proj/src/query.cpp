#include "mofh6/query.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "mofh6/error.hpp"
#include "mofh6/prompts.hpp"
#include "mofh6/text.hpp"

namespace mofh6::query {

std::string_view to_string(QueryType t) {
  switch (t) {
    case QueryType::Property: return "property";
    case QueryType::Range: return "range";
    case QueryType::Comparison: return "comparison";
    case QueryType::Statistical: return "statistical";
    case QueryType::Paging: return "paging";
    case QueryType::Reset: return "reset";
    case QueryType::Greeting: return "greeting";
    case QueryType::Chat: return "chat";
  }
  return "chat";
}

std::optional<QueryType> parse_query_type(std::string_view s) {
  for (auto t : {QueryType::Property, QueryType::Range, QueryType::Comparison, QueryType::Statistical,
                 QueryType::Paging, QueryType::Reset, QueryType::Greeting, QueryType::Chat})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

std::string_view to_string(OpType t) {
  switch (t) {
    case OpType::Mean: return "mean";
    case OpType::Max: return "max";
    case OpType::Min: return "min";
    case OpType::Count: return "count";
    case OpType::None: return "none";
  }
  return "none";
}

namespace {

std::optional<OpType> parse_op(std::string_view s) {
  for (auto t : {OpType::Mean, OpType::Max, OpType::Min, OpType::Count, OpType::None})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

std::string display_of(std::string_view name) {
  auto key = dataset::canonical_property(name);
  if (!key) throw Error(ErrorKind::UnknownProperty, "unknown property '" + std::string(name) + "'");
  return dataset::property(*key).display;
}

std::string range_key_of(std::string_view name) {
  auto key = dataset::canonical_property(name);
  if (!key) throw Error(ErrorKind::UnknownProperty, "unknown property '" + std::string(name) + "'");
  return dataset::property(*key).range_key;
}

std::string key_of(std::string_view name) {
  auto key = dataset::canonical_property(name);
  if (!key) throw Error(ErrorKind::UnknownProperty, "unknown property '" + std::string(name) + "'");
  return *key;
}

void push_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

}  // namespace

bool ParsedQuery::same_as(const ParsedQuery& o) const {
  return query_type == o.query_type && uses_context == o.uses_context && materials == o.materials &&
         properties == o.properties && range_min == o.range_min && range_max == o.range_max &&
         operation == o.operation && operation_value == o.operation_value && page_size == o.page_size &&
         paged_index == o.paged_index;
}

json to_json(const ParsedQuery& q) {
  json j;
  j["query_type"] = to_string(q.query_type);
  j["uses_context"] = q.uses_context;
  j["materials"] = q.materials;
  j["properties"] = q.properties;
  j["range"] = {{"min", json(q.range_min)}, {"max", json(q.range_max)}};
  j["operation"] = {{"type", to_string(q.operation)},
                    {"value", q.operation_value ? json(*q.operation_value) : json(nullptr)}};
  j["reasoning"] = q.reasoning;
  j["page_size"] = q.page_size ? json(*q.page_size) : json(nullptr);
  j["paged_index"] = q.paged_index ? json(*q.paged_index) : json(nullptr);
  return j;
}

ParsedQuery parsed_query_from_json(const json& j) {
  if (auto err = validate_json(prompts::parsed_query_schema(), j))
    throw Error(ErrorKind::SchemaViolation, "parsed query: " + *err);
  ParsedQuery q;
  q.query_type = *parse_query_type(j.at("query_type").get<std::string>());
  q.uses_context = j.at("uses_context").get<bool>();
  for (const auto& m : j.at("materials")) {
    std::string s(text::trim(m.get<std::string>()));
    if (!s.empty()) push_unique(q.materials, s);
  }
  for (const auto& p : j.at("properties")) push_unique(q.properties, display_of(p.get<std::string>()));
  if (auto r = j.find("range"); r != j.end()) {
    if (auto mn = r->find("min"); mn != r->end())
      for (const auto& [k, v] : mn->items()) q.range_min[range_key_of(k)] = v.get<double>();
    if (auto mx = r->find("max"); mx != r->end())
      for (const auto& [k, v] : mx->items()) q.range_max[range_key_of(k)] = v.get<double>();
  }
  if (auto op = j.find("operation"); op != j.end()) {
    if (auto t = op->find("type"); t != op->end()) q.operation = *parse_op(t->get<std::string>());
    if (auto v = op->find("value"); v != op->end() && v->is_number()) q.operation_value = v->get<double>();
  }
  if (auto r = j.find("reasoning"); r != j.end())
    for (const auto& s : *r) q.reasoning.push_back(s.get<std::string>());
  if (auto p = j.find("page_size"); p != j.end() && p->is_number_integer()) q.page_size = p->get<int>();
  if (auto p = j.find("paged_index"); p != j.end() && p->is_number_integer()) q.paged_index = p->get<int>();
  return q;
}

SessionContext::SessionContext(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw Error(ErrorKind::InvalidConfig, "context capacity must be positive");
}

void SessionContext::remember(HistoryEntry entry) {
  history.push_back(std::move(entry));
  while (history.size() > capacity_) history.pop_front();
}

void SessionContext::clear() {
  last_query.reset();
  last_materials.clear();
  last_properties.clear();
  last_result.clear();
  cursor = 0;
  page_size = kDefaultPageSize;
  history.clear();
}

// ---- rule parser ----

namespace {

struct Mention {
  std::size_t start, end;
  std::string key;
};

const std::vector<std::pair<std::regex, std::string>>& property_phrases() {
  static const std::vector<std::pair<std::regex, std::string>> kPhrases = [] {
    std::vector<std::pair<std::regex, std::string>> v;
    auto add = [&](const char* re, const char* key) {
      v.emplace_back(std::regex(std::string("\\b(?:") + re + ")\\b", std::regex::icase), key);
    };
    add("pore[- ]limiting diameters?|limiting pore diameters?|plds?", "pld");
    add("largest cavity diameters?|cavity diameters?|largest included spheres?|lcds?", "lcd");
    add("crystal density|densit(?:y|ies)", "density");
    add("gravimetric (?:accessible )?surface areas?|gsa", "gsa");
    add("volumetric (?:accessible )?surface areas?|accessible surface areas?|surface areas?|vsa|asa", "vsa");
    add("void[ _]fractions?|porosit(?:y|ies)", "void_fraction");
    add("molecular weights?|molecular mass(?:es)?|formula weights?|mw", "molecular_weight");
    return v;
  }();
  return kPhrases;
}

std::vector<Mention> find_properties(const std::string& s) {
  std::vector<Mention> all;
  for (const auto& [re, key] : property_phrases())
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it)
      all.push_back({static_cast<std::size_t>(it->position()),
                     static_cast<std::size_t>(it->position() + it->length()), key});
  std::sort(all.begin(), all.end(), [](const Mention& a, const Mention& b) {
    return a.start != b.start ? a.start < b.start : a.end > b.end;
  });
  std::vector<Mention> out;
  for (const auto& m : all)
    if (out.empty() || m.start >= out.back().end) out.push_back(m);
  return out;
}

const char* kNum = "(\\d+(?:\\.\\d+)?)";

std::optional<double> num(const std::ssub_match& m) { return text::parse_decimal(m.str()); }

// Bounds stated in the text that follows one property mention.
void bounds_in(const std::string& seg, std::optional<double>& lo, std::optional<double>& hi) {
  static const std::regex kBetween(std::string("(?:between|from)\\s+") + kNum +
                                       "(?:\\s*[^\\d\\s,;]+)?\\s*(?:and|to|-|–|—)\\s*" + kNum,
                                   std::regex::icase);
  static const std::regex kSpan(std::string("^[^\\d]{0,12}?") + kNum + "\\s*(?:-|–|—|to)\\s*" + kNum,
                                std::regex::icase);
  static const std::regex kMax(
      std::string("(?:under|below|less than|smaller than|lower than|at most|no more than|up to|<=?|≤)\\s*") + kNum,
      std::regex::icase);
  static const std::regex kMin(
      std::string("(?:over|above|greater than|larger than|higher than|more than|at least|exceeding|>=?|≥)\\s*") +
          kNum,
      std::regex::icase);
  std::smatch m;
  if (std::regex_search(seg, m, kBetween) || std::regex_search(seg, m, kSpan)) {
    lo = num(m[1]);
    hi = num(m[2]);
    if (lo && hi && *lo > *hi) std::swap(lo, hi);
    return;
  }
  if (std::regex_search(seg, m, kMax)) hi = num(m[1]);
  if (std::regex_search(seg, m, kMin)) lo = num(m[1]);
}

std::vector<std::string> find_materials(const std::string& s) {
  static const std::regex kCode("\\b[A-Z]{6}(?:\\d{2})?\\b");
  static const std::regex kNamed("\\b[A-Za-z][A-Za-z]*-\\d+[A-Za-z0-9]*(?:\\([A-Za-z]+\\))?");
  std::vector<std::pair<std::size_t, std::string>> hits;
  for (const auto* re : {&kCode, &kNamed})
    for (auto it = std::sregex_iterator(s.begin(), s.end(), *re); it != std::sregex_iterator(); ++it)
      hits.emplace_back(static_cast<std::size_t>(it->position()), it->str());
  std::sort(hits.begin(), hits.end());
  std::vector<std::string> out;
  for (auto& [pos, name] : hits) push_unique(out, name);
  return out;
}

bool search(const std::string& s, const char* re) { return std::regex_search(s, std::regex(re, std::regex::icase)); }

}  // namespace

ParsedQuery parse_rules(std::string_view input) {
  ParsedQuery q;
  std::string s(text::trim(input));
  if (s.empty()) {
    q.reasoning.push_back("empty question");
    return q;
  }

  if (search(s, "\\b(?:reset|start over|clear (?:the )?(?:context|history|session|conversation)|"
                "new (?:session|conversation)|forget (?:everything|that))\\b")) {
    q.query_type = QueryType::Reset;
    q.reasoning.push_back("reset keyword");
    return q;
  }

  std::smatch m;
  static const std::regex kPaging(
      "\\b(?:show|give|list|display|get)(?:\\s+me)?(?:\\s+(\\d+))?\\s+more\\b|\\bnext\\s+(\\d+)\\b|\\bnext page\\b|"
      "^\\s*(\\d+\\s+)?more\\b",
      std::regex::icase);
  if (std::regex_search(s, m, kPaging)) {
    q.query_type = QueryType::Paging;
    q.uses_context = true;
    for (int g : {1, 2, 3})
      if (m[g].matched) q.page_size = std::stoi(m[g].str());
    q.reasoning.push_back("request for further results of the previous answer");
    return q;
  }

  auto mentions = find_properties(s);
  for (const auto& mn : mentions) push_unique(q.properties, dataset::property(mn.key).display);

  for (std::size_t i = 0; i < mentions.size(); ++i) {
    std::size_t end = i + 1 < mentions.size() ? mentions[i + 1].start : s.size();
    std::optional<double> lo, hi;
    bounds_in(s.substr(mentions[i].end, end - mentions[i].end), lo, hi);
    const auto& rk = dataset::property(mentions[i].key).range_key;
    if (lo) q.range_min[rk] = *lo;
    if (hi) q.range_max[rk] = *hi;
  }

  // Operation keywords are looked for outside property phrases ("largest cavity diameter").
  std::string blanked = s;
  for (const auto& mn : mentions) std::fill(blanked.begin() + mn.start, blanked.begin() + mn.end, ' ');
  if (search(blanked, "\\b(?:average|mean|avg)\\b")) q.operation = OpType::Mean;
  else if (search(blanked, "\\b(?:maximum|max|highest|largest|biggest|greatest)\\b")) q.operation = OpType::Max;
  else if (search(blanked, "\\b(?:minimum|min|lowest|smallest)\\b")) q.operation = OpType::Min;
  else if (search(blanked, "\\b(?:how many|count|number of)\\b")) q.operation = OpType::Count;

  q.materials = find_materials(blanked);
  q.uses_context = search(blanked,
                          "\\b(?:its|it|this material|that material|this mof|that mof|this one|that one|they|them|"
                          "their|these|those|the same)\\b") ||
                   (q.materials.empty() && search(s, "^\\s*(?:what|how) about\\b"));

  bool compare = search(blanked, "\\b(?:compare|comparison|versus|vs\\.?|difference between|differ)\\b");
  bool greeting = search(s, "^\\s*(?:hi|hello|hey|greetings|howdy|good (?:morning|afternoon|evening))\\b");

  if (q.operation != OpType::None) {
    q.query_type = QueryType::Statistical;
    q.reasoning.push_back(std::string("operation ") + std::string(to_string(q.operation)));
  } else if (!q.range_min.empty() || !q.range_max.empty()) {
    q.query_type = QueryType::Range;
    q.reasoning.push_back("numeric bounds on " + std::to_string(q.properties.size()) + " properties");
  } else if (compare || (q.materials.size() >= 2 && !q.properties.empty())) {
    q.query_type = QueryType::Comparison;
    q.reasoning.push_back("several materials side by side");
  } else if (!q.properties.empty() || !q.materials.empty()) {
    q.query_type = QueryType::Property;
    q.reasoning.push_back("property lookup");
  } else if (greeting) {
    q.query_type = QueryType::Greeting;
    q.uses_context = false;
    q.reasoning.push_back("greeting");
  } else {
    q.query_type = QueryType::Chat;
    q.uses_context = false;
    q.reasoning.push_back("no property, material or operation recognized");
  }
  if (!q.properties.empty()) q.reasoning.push_back("properties: " + text::join(q.properties, ", "));
  if (!q.materials.empty()) q.reasoning.push_back("materials: " + text::join(q.materials, ", "));
  return q;
}

namespace {

bool well_formed(const ParsedQuery& q) {
  if (q.query_type == QueryType::Range && q.range_min.empty() && q.range_max.empty()) return false;
  if (q.query_type == QueryType::Statistical && q.operation == OpType::None) return false;
  return true;
}

}  // namespace

ParsedQuery parse_query(std::string_view text, const SessionContext&, const ParseOptions& options) {
  if (options.mode == ParseMode::RulesOnly || !options.gateway) return parse_rules(text);
  std::string why;
  try {
    llm::ChatRequest req;
    req.model_id = options.model_id;
    req.template_name = prompts::kQueryParse;
    req.user_payload = std::string(text::trim(text));
    auto resp = options.gateway->complete_json(req, {options.session_id, "query-parse"});
    if (resp.schema_violation) {
      why = "schema violation: " + *resp.schema_violation;
    } else {
      auto q = parsed_query_from_json(*resp.parsed_json);
      if (well_formed(q)) return q;
      why = "reply breaks the query invariants";
    }
  } catch (const Error& e) {
    why = std::string(e.kind_name()) + ": " + e.what();
  }
  auto q = parse_rules(text);
  q.reasoning.insert(q.reasoning.begin(), "rule parser used (" + why + ")");
  return q;
}

ParsedQuery apply_context(ParsedQuery q, const SessionContext& ctx) {
  switch (q.query_type) {
    case QueryType::Reset:
    case QueryType::Greeting:
    case QueryType::Chat:
      return q;
    case QueryType::Paging:
      if (!ctx.last_query) throw Error(ErrorKind::ContextUnavailable, "there is no earlier result to page through");
      return q;
    default:
      break;
  }
  bool needs_material = q.query_type == QueryType::Property || q.query_type == QueryType::Comparison;
  if (q.materials.empty() && (needs_material || q.uses_context)) {
    if (!ctx.last_materials.empty()) {
      q.materials = ctx.last_materials;
    } else if (q.uses_context && !needs_material && !ctx.last_result.empty()) {
      q.materials = ctx.last_result;
    } else {
      throw Error(ErrorKind::ContextUnavailable, "the question refers to a material that has not been named");
    }
    q.uses_context = true;
  }
  bool needs_property = q.query_type == QueryType::Statistical && q.operation != OpType::Count;
  if (q.properties.empty() && (needs_property || q.uses_context) && q.query_type != QueryType::Range) {
    if (!ctx.last_properties.empty()) {
      q.properties = ctx.last_properties;
      q.uses_context = true;
    } else if (needs_property) {
      throw Error(ErrorKind::ContextUnavailable, "the question does not say which property to aggregate");
    }
  }
  return q;
}

// ---- execution ----

namespace {

const std::vector<std::string>& default_properties() {
  static const std::vector<std::string> kDefault = [] {
    std::vector<std::string> v;
    for (const char* k : {"pld", "lcd", "density", "vsa", "gsa", "void_fraction"})
      v.push_back(dataset::property(k).display);
    return v;
  }();
  return kDefault;
}

ResultRow make_row(const MofRecord& r, const std::vector<std::string>& props) {
  ResultRow row{r.ccdc_code, r.chemical_name, {}};
  for (const auto& p : props) row.values.push_back(dataset::property_value(r, key_of(p)));
  return row;
}

std::vector<const MofRecord*> resolve_materials(const std::vector<std::string>& names, const dataset::Store& store) {
  std::vector<const MofRecord*> out;
  std::set<std::string> seen;
  for (const auto& n : names) {
    auto hits = store.find_by_name(n);
    if (hits.empty()) throw Error(ErrorKind::UnknownMaterial, "no material named '" + n + "' in the dataset");
    for (const auto* r : hits)
      if (seen.insert(r->ccdc_code).second) out.push_back(r);
  }
  return out;
}

dataset::PropertyFilter filter_of(const ParsedQuery& q) {
  dataset::PropertyFilter f;
  for (const auto& [k, v] : q.range_min) f.bounds[k].first = v;
  for (const auto& [k, v] : q.range_max) f.bounds[k].second = v;
  return f;
}

std::vector<std::string> codes_of(const std::vector<const MofRecord*>& recs) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < recs.size() && i < kLastResultBound; ++i) out.push_back(recs[i]->ccdc_code);
  return out;
}

}  // namespace

QueryResult execute(const ParsedQuery& q, SessionContext& ctx, const dataset::Store& store,
                    const std::string& question) {
  QueryResult r;
  r.type = q.query_type;
  std::vector<std::string> result_codes;
  bool keeps_result = false;

  switch (q.query_type) {
    case QueryType::Reset:
      ctx.clear();
      r.message = "Context cleared. Ask a new question whenever you are ready.";
      return r;
    case QueryType::Greeting:
      r.message =
          "Hello! Ask about pore properties of a material, ranges such as PLD between 7.5 and 10 Å, "
          "comparisons or averages over the dataset.";
      break;
    case QueryType::Chat:
      r.message =
          "I answer questions about the MOF dataset, for example \"What is the PLD of MOF-5?\" or "
          "\"Find MOFs with LCD between 10 and 16 Å\".";
      break;
    case QueryType::Property:
    case QueryType::Comparison: {
      auto recs = resolve_materials(q.materials, store);
      r.properties = q.properties.empty() ? default_properties() : q.properties;
      for (const auto* rec : recs) r.rows.push_back(make_row(*rec, r.properties));
      r.total = r.rows.size();
      result_codes = codes_of(recs);
      keeps_result = true;
      break;
    }
    case QueryType::Range: {
      auto recs = store.query(filter_of(q));
      r.properties = q.properties;
      for (const auto& [k, v] : q.range_min) push_unique(r.properties, display_of(k));
      for (const auto& [k, v] : q.range_max) push_unique(r.properties, display_of(k));
      std::size_t size = static_cast<std::size_t>(q.page_size.value_or(kDefaultPageSize));
      for (std::size_t i = 0; i < recs.size() && i < size; ++i) r.rows.push_back(make_row(*recs[i], r.properties));
      r.total = recs.size();
      result_codes = codes_of(recs);
      keeps_result = true;
      ctx.page_size = q.page_size.value_or(kDefaultPageSize);
      break;
    }
    case QueryType::Statistical: {
      std::vector<const MofRecord*> subset;
      if (!q.materials.empty()) {
        subset = resolve_materials(q.materials, store);
      } else if (!q.range_min.empty() || !q.range_max.empty()) {
        subset = store.query(filter_of(q));
      } else {
        for (const auto& rec : store.records()) subset.push_back(&rec);
      }
      if (store.empty()) throw Error(ErrorKind::EmptyStore, "the dataset is empty");
      r.properties = q.properties;
      r.total = subset.size();
      Aggregate agg;
      agg.op = q.operation;
      agg.count = subset.size();
      if (q.operation == OpType::Count) {
        agg.value = static_cast<double>(subset.size());
        if (!q.properties.empty()) agg.property = q.properties.front();
        r.aggregate = agg;
      } else if (!subset.empty()) {
        agg.property = q.properties.front();
        auto op = q.operation == OpType::Mean  ? dataset::AggregateOp::Mean
                  : q.operation == OpType::Max ? dataset::AggregateOp::Max
                                               : dataset::AggregateOp::Min;
        auto a = store.aggregate_over(subset, key_of(agg.property), op);
        agg.value = a.value;
        agg.witnesses = a.witnesses;
        for (const auto& code : a.witnesses) r.rows.push_back(make_row(*store.find(code), {agg.property}));
        r.properties = {agg.property};
        r.aggregate = agg;
      }
      result_codes = codes_of(subset);
      keeps_result = true;
      break;
    }
    case QueryType::Paging: {
      std::size_t offset = q.paged_index ? static_cast<std::size_t>(*q.paged_index) : ctx.cursor;
      std::size_t size = static_cast<std::size_t>(q.page_size.value_or(ctx.page_size));
      r.properties = ctx.last_properties.empty() ? default_properties() : ctx.last_properties;
      r.total = ctx.last_result.size();
      r.offset = std::min(offset, r.total);
      for (std::size_t i = r.offset; i < r.total && i < r.offset + size; ++i)
        if (const auto* rec = store.find(ctx.last_result[i])) r.rows.push_back(make_row(*rec, r.properties));
      ctx.cursor = std::min(r.offset + size, r.total);
      break;
    }
  }

  if (keeps_result) {
    ctx.last_result = std::move(result_codes);
    ctx.cursor = std::min(r.rows.size(), ctx.last_result.size());
    if (!q.materials.empty()) ctx.last_materials = q.materials;
    if (!r.properties.empty()) ctx.last_properties = r.properties;
  }
  ctx.last_query = question;
  ctx.remember({question, q, q.materials, q.properties});
  return r;
}

json to_json(const QueryResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json values = json::object();
    for (std::size_t i = 0; i < r.properties.size() && i < row.values.size(); ++i)
      values[r.properties[i]] = row.values[i] ? json(*row.values[i]) : json(nullptr);
    rows.push_back({{"ccdc_code", row.code}, {"chemical_name", row.name}, {"values", values}});
  }
  json j = {{"type", to_string(r.type)}, {"properties", r.properties}, {"rows", rows},
            {"total", r.total},         {"offset", r.offset},         {"message", r.message}};
  if (r.aggregate) {
    j["aggregate"] = {{"op", to_string(r.aggregate->op)},
                      {"property", r.aggregate->property},
                      {"value", r.aggregate->value},
                      {"count", r.aggregate->count},
                      {"witnesses", r.aggregate->witnesses}};
  } else {
    j["aggregate"] = nullptr;
  }
  return j;
}

// ---- composition ----

namespace {

std::string fmt(double v) { return text::format_number(v); }

std::string row_line(const ResultRow& row, const std::vector<std::string>& props) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < props.size(); ++i)
    parts.push_back(props[i] + " = " + (row.values[i] ? fmt(*row.values[i]) : "N/A"));
  return row.code + ": " + text::join(parts, "; ");
}

std::vector<double> numbers_in(std::string_view s) {
  static const std::regex kNumber("\\d+(?:\\.\\d+)?");
  std::vector<double> out;
  std::string str(s);
  for (auto it = std::sregex_iterator(str.begin(), str.end(), kNumber); it != std::sregex_iterator(); ++it)
    if (auto v = text::parse_decimal(it->str())) out.push_back(*v);
  return out;
}

}  // namespace

std::string render_template(const QueryResult& r) {
  if (!r.message.empty()) return r.message;
  std::string out;
  auto lines = [&] {
    for (const auto& row : r.rows) out += "\n" + row_line(row, r.properties);
  };
  switch (r.type) {
    case QueryType::Property:
    case QueryType::Comparison:
      out = r.rows.size() == 1 ? "Result:" : "Results for " + std::to_string(r.rows.size()) + " materials:";
      lines();
      return out;
    case QueryType::Range:
      if (r.total == 0) return "No materials matched the query.";
      out = "Found " + std::to_string(r.total) + " materials. Showing " + std::to_string(r.offset + 1) + "-" +
            std::to_string(r.offset + r.rows.size()) + ":";
      lines();
      return out;
    case QueryType::Paging:
      if (r.rows.empty()) return "No more results.";
      out = "Showing " + std::to_string(r.offset + 1) + "-" + std::to_string(r.offset + r.rows.size()) + " of " +
            std::to_string(r.total) + ":";
      lines();
      return out;
    case QueryType::Statistical: {
      if (!r.aggregate) return "No materials matched the query.";
      const auto& a = *r.aggregate;
      if (a.op == OpType::Count) return std::to_string(a.count) + " materials match.";
      std::string label = a.op == OpType::Mean ? "Mean" : a.op == OpType::Max ? "Maximum" : "Minimum";
      out = label + " " + a.property + " over " + std::to_string(a.count) + " materials: " + fmt(a.value);
      if (!a.witnesses.empty()) out += " (" + text::join(a.witnesses, ", ") + ")";
      return out;
    }
    default:
      return out;
  }
}

bool numbers_faithful(std::string_view answer, const QueryResult& r) {
  auto allowed = numbers_in(to_json(r).dump());
  for (const auto& row : r.rows)
    for (const auto& v : row.values)
      if (v) allowed.push_back(*v);
  if (r.aggregate) allowed.push_back(r.aggregate->value);
  // Page bounds quoted by the template ("Showing 6-10") are derived values.
  allowed.push_back(static_cast<double>(r.offset + 1));
  allowed.push_back(static_cast<double>(r.offset + r.rows.size()));
  for (double v : numbers_in(answer))
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) return false;
  return true;
}

Composed compose_response(const QueryResult& r, std::string_view question, ComposeMode mode, llm::Gateway* gateway,
                          const std::string& model_id, const std::string& session_id) {
  if (mode == ComposeMode::Template || !gateway || !r.message.empty()) return {render_template(r), false};
  try {
    llm::ChatRequest req;
    req.model_id = model_id;
    req.template_name = prompts::kQueryAnswer;
    req.user_payload = json{{"question", std::string(question)}, {"result", to_json(r)}}.dump();
    auto resp = gateway->complete_json(req, {session_id, "query-answer"});
    if (resp.parsed_json && !resp.schema_violation) {
      auto answer = resp.parsed_json->at("answer").get<std::string>();
      if (numbers_faithful(answer, r)) return {answer, false};
    }
  } catch (const Error&) {
  }
  return {render_template(r), true};
}

// ---- engine ----

Engine::Engine(std::shared_ptr<const dataset::Store> store, EngineConfig config, llm::Gateway* gateway)
    : store_(std::move(store)), config_(std::move(config)), gateway_(gateway) {
  if (!store_) throw Error(ErrorKind::InvalidConfig, "query engine needs a store");
  if ((config_.parse_mode == ParseMode::LlmPrimary || config_.compose_mode == ComposeMode::Llm) && !gateway_)
    throw Error(ErrorKind::InvalidConfig, "LLM modes need a gateway");
}

Engine::Session& Engine::session(const std::string& id) {
  std::lock_guard lock(sessions_mutex_);
  auto& slot = sessions_[id];
  if (!slot) slot = std::make_unique<Session>(config_.context_capacity);
  return *slot;
}

std::size_t Engine::session_count() const {
  std::lock_guard lock(sessions_mutex_);
  return sessions_.size();
}

Answer Engine::ask(const std::string& session_id, const std::string& question) {
  if (text::trim(question).empty()) throw Error(ErrorKind::InvalidRequest, "question is empty");
  Session& s = session(session_id);
  std::lock_guard lock(s.mutex);
  ParseOptions opts{config_.parse_mode, gateway_, config_.model_id, session_id};
  ParsedQuery parsed = parse_query(question, s.ctx, opts);
  Answer a;
  try {
    parsed = apply_context(std::move(parsed), s.ctx);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ContextUnavailable) throw;
    a.clarification = true;
    a.answer_text = std::string("Which material or result do you mean? ") + e.what() +
                    ". Please name it, for example by its CCDC code.";
    a.parsed_query = to_json(parsed);
    a.structured_result = {{"error", "ContextUnavailable"}, {"message", e.what()}};
    return a;
  }
  auto result = execute(parsed, s.ctx, *store_, question);
  auto composed = compose_response(result, question, config_.compose_mode, gateway_, config_.model_id, session_id);
  a.answer_text = composed.text;
  a.structured_result = to_json(result);
  a.parsed_query = to_json(parsed);
  return a;
}

}  // namespace mofh6::query
