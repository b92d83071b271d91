#include "mofh6/extract.hpp"

#include <regex>

#include "mofh6/error.hpp"
#include "mofh6/text.hpp"

namespace mofh6::extract {

namespace {

const std::vector<std::regex>& characterization_patterns() {
  static const std::vector<std::regex> kPatterns = [] {
    std::vector<std::string> raw = {
        R"(\bAnal\.?\s*[Cc]alc(d|ulated)?\b)",
        R"(\b[Ee]lemental\s+[Aa]nalys[ie]s\b)",
        R"(\bFound\s*:?\s*C\s*,?\s*\d+\.\d+)",
        R"(\bC\s*,?\s*\d+\.\d+\s*;\s*H\s*,?\s*\d+\.\d+)",
        R"(\bIR\s*\()",
        R"(\bIR\s*:)",
        R"(\bFT-?IR\b)",
        R"(\b\d+\s*[A-Z][a-z]?\s*\{?\s*NMR\b)",
        R"(\bNMR\s*\()",
        R"(\bNMR\s*:)",
    };
    std::vector<std::regex> out;
    for (const auto& r : raw) out.emplace_back(r);
    return out;
  }();
  return kPatterns;
}

struct FieldAliases {
  const char* field;
  std::vector<const char*> aliases;
};

const std::vector<FieldAliases>& builtin_aliases() {
  static const std::vector<FieldAliases> kAliases = {
      {"compound_name", {"compound", "compound name", "name", "complex", "identification code", "material", "sample"}},
      {"empirical_formula", {"empirical formula", "formula", "chemical formula", "molecular formula", "sum formula"}},
      {"molecular_weight", {"formula weight", "fw", "mw", "molecular weight", "formula mass", "Mr", "molar mass"}},
      {"crystal_system", {"crystal system", "system", "cryst. system"}},
      {"space_group", {"space group", "sg", "sp. gr.", "space group (No.)"}},
      {"a", {"a", "a (Å)", "a/Å", "cell length a", "length a", "unit cell a"}},
      {"b", {"b", "b (Å)", "b/Å", "cell length b", "length b", "unit cell b"}},
      {"c", {"c", "c (Å)", "c/Å", "cell length c", "length c", "unit cell c"}},
      {"alpha", {"alpha", "α", "α (°)", "α/deg", "cell angle alpha", "angle alpha"}},
      {"beta", {"beta", "β", "β (°)", "β/deg", "cell angle beta", "angle beta"}},
      {"gamma", {"gamma", "γ", "γ (°)", "γ/deg", "cell angle gamma", "angle gamma"}},
      {"color", {"color", "colour", "crystal color", "crystal colour"}},
  };
  return kAliases;
}

bool is_unit_word(std::string_view w) {
  static const std::vector<std::string_view> kUnits = {"å",  "angstrom", "angstroms", "nm",     "pm",
                                                       "°",  "deg",      "degree",    "degrees", "g/mol"};
  for (auto u : kUnits)
    if (w == u) return true;
  return false;
}

std::optional<std::string> as_text(const json& v) {
  if (v.is_null()) return std::nullopt;
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  auto t = text::trim(s);
  if (t.empty() || t == "-" || text::iequals(t, "n/a") || text::iequals(t, "null")) return std::nullopt;
  return std::string(t);
}

std::optional<double> as_number(const json& v) {
  if (v.is_number()) return v.get<double>();
  auto s = as_text(v);
  if (!s) return std::nullopt;
  std::string t = *s;
  for (const char* unit : {"Å", "°", "angstroms", "angstrom", "degrees", "deg", "nm", "pm", "g/mol", "g mol-1"})
    t = text::replace_all(std::move(t), unit, "");
  return text::parse_decimal(t);
}

}  // namespace

bool is_characterization_sentence(std::string_view sentence) {
  std::string s(sentence);
  for (const auto& re : characterization_patterns())
    if (std::regex_search(s, re)) return true;
  return false;
}

std::string strip_characterization(std::string_view text) {
  auto sentences = text::split_sentences(text);
  std::vector<bool> keep(sentences.size(), true);
  bool removed = false;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto sv = text.substr(sentences[i].start, sentences[i].end - sentences[i].start);
    if (is_characterization_sentence(sv)) {
      keep[i] = false;
      removed = true;
    }
  }
  if (!removed) return std::string(text);
  std::string out;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (!keep[i]) continue;
    if (!out.empty()) {
      std::size_t gap_start = i == 0 ? 0 : sentences[i - 1].end;
      auto gap = text.substr(gap_start, sentences[i].start - gap_start);
      out += gap.find('\n') != std::string_view::npos ? "\n" : " ";
    }
    out += text.substr(sentences[i].start, sentences[i].end - sentences[i].start);
  }
  return out;
}

std::vector<CrystalTableEntry> dual_threshold_filter(std::vector<CrystalTableEntry> entries) {
  std::vector<CrystalTableEntry> out;
  for (auto& e : entries)
    if (e.missing_key_parameters() <= 1) out.push_back(std::move(e));
  return out;
}

std::string SynonymMap::normalize(std::string_view header) {
  std::string s = text::to_lower(text::trim(header));
  s = text::replace_all(std::move(s), "α", " alpha ");
  s = text::replace_all(std::move(s), "β", " beta ");
  s = text::replace_all(std::move(s), "γ", " gamma ");
  s = text::replace_all(std::move(s), "Å", "å");

  // Drop bracketed parts and anything after a slash or comma: these carry units.
  std::string cut;
  int depth = 0;
  for (char c : s) {
    if (c == '(' || c == '[') { ++depth; continue; }
    if (c == ')' || c == ']') { depth = std::max(0, depth - 1); continue; }
    if (depth > 0) continue;
    if (c == '/' || c == ',') break;
    cut += c;
  }
  auto words = text::split(cut, ' ');
  while (!words.empty() && (words.back().empty() || is_unit_word(words.back()))) words.pop_back();
  std::string out;
  for (const auto& w : words)
    for (char c : w)
      if (std::isalnum(static_cast<unsigned char>(c))) out += c;
  return out;
}

SynonymMap SynonymMap::builtin() {
  SynonymMap m;
  for (const auto& fa : builtin_aliases())
    for (const char* a : fa.aliases) m.aliases_.emplace(normalize(a), fa.field);
  return m;
}

SynonymMap SynonymMap::from_json(const json& doc) {
  SynonymMap m;
  m.extend(doc);
  return m;
}

void SynonymMap::extend(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::InvalidConfig, "synonym map must be an object of arrays");
  static const std::vector<std::string> kFields = {"compound_name", "empirical_formula", "molecular_weight",
                                                   "crystal_system", "space_group", "a", "b", "c",
                                                   "alpha", "beta", "gamma", "color"};
  for (const auto& [field, aliases] : doc.items()) {
    if (std::find(kFields.begin(), kFields.end(), field) == kFields.end())
      throw Error(ErrorKind::InvalidConfig, "synonym map names unknown field '" + field + "'");
    for (const auto& a : aliases) {
      std::string key = normalize(a.get<std::string>());
      if (key.empty()) throw Error(ErrorKind::InvalidConfig, "alias normalizes to nothing: " + a.dump());
      aliases_[key] = field;
    }
  }
}

json SynonymMap::to_json() const {
  json out = json::object();
  for (const auto& [alias, field] : aliases_) out[field].push_back(alias);
  return out;
}

std::string SynonymMap::canonical(std::string_view header) const {
  auto it = aliases_.find(normalize(header));
  return it == aliases_.end() ? std::string() : it->second;
}

double length_factor(std::string_view s) {
  static const std::regex kNm(R"((^|[^A-Za-z])nm([^A-Za-z]|$))");
  static const std::regex kPm(R"((^|[^A-Za-z])pm([^A-Za-z]|$))");
  std::string t(s);
  if (std::regex_search(t, kNm)) return 10.0;
  if (std::regex_search(t, kPm)) return 0.01;
  return 1.0;
}

CrystalTableEntry map_table_row(const json& row, const SynonymMap& synonyms) {
  CrystalTableEntry e;
  if (!row.is_object()) return e;
  auto length = [](const std::string& header, const json& v) -> std::optional<double> {
    auto x = as_number(v);
    if (!x) return std::nullopt;
    double scale = length_factor(header);
    if (v.is_string() && scale == 1.0) scale = length_factor(v.get<std::string>());
    double value = *x * scale;
    if (!(value > 0)) return std::nullopt;
    return value;
  };
  auto angle = [](const json& v) -> std::optional<double> {
    auto x = as_number(v);
    if (!x || !(*x > 0 && *x < 180)) return std::nullopt;
    return x;
  };
  for (const auto& [header, value] : row.items()) {
    std::string field = synonyms.canonical(header);
    if (field.empty() || value.is_null()) continue;
    if (field == "compound_name") {
      if (e.compound_name.empty()) e.compound_name = as_text(value).value_or("");
    } else if (field == "empirical_formula") {
      if (!e.empirical_formula) e.empirical_formula = as_text(value);
    } else if (field == "molecular_weight") {
      if (!e.molecular_weight) {
        auto w = as_number(value);
        if (w && *w > 0) e.molecular_weight = w;
      }
    } else if (field == "crystal_system") {
      if (!e.crystal_system)
        if (auto s = as_text(value)) e.crystal_system = parse_crystal_system(*s);
    } else if (field == "space_group") {
      if (!e.space_group) e.space_group = as_text(value);
    } else if (field == "a") {
      if (!e.a) e.a = length(header, value);
    } else if (field == "b") {
      if (!e.b) e.b = length(header, value);
    } else if (field == "c") {
      if (!e.c) e.c = length(header, value);
    } else if (field == "alpha") {
      if (!e.alpha) e.alpha = angle(value);
    } else if (field == "beta") {
      if (!e.beta) e.beta = angle(value);
    } else if (field == "gamma") {
      if (!e.gamma) e.gamma = angle(value);
    } else if (field == "color") {
      if (!e.color) e.color = as_text(value);
    }
  }
  return e;
}

std::vector<SynthesisParagraph> parse_synthesis(const std::string& doc_id, const std::string& cleaned_text,
                                                llm::Gateway& gateway, const ExtractConfig& config) {
  if (text::trim(cleaned_text).empty()) return {};
  llm::ChatRequest req;
  req.model_id = config.synthesis_model;
  req.template_name = "synthesis";
  req.user_payload = cleaned_text;
  auto resp = gateway.complete_json(req, {doc_id, "synthesis-parse"});
  const json& reply = resp.require();

  std::vector<SynthesisParagraph> out;
  for (const auto& p : reply.at("paragraphs")) {
    std::string kind = p.value("kind", "mof");
    if (kind != "mof") continue;
    std::string raw = p.at("text").get<std::string>();
    SynthesisParagraph para;
    para.compound_hint = std::string(text::trim(p.value("compound_hint", "")));
    para.text = std::string(text::trim(strip_characterization(raw)));
    if (para.text.empty()) continue;
    for (const std::string* needle : {&para.text, &raw}) {
      auto pos = cleaned_text.find(*needle);
      if (pos != std::string::npos) {
        para.source_span = text::Span{pos, pos + needle->size()};
        break;
      }
    }
    out.push_back(std::move(para));
  }
  return out;
}

std::vector<CrystalTableEntry> parse_tables(const std::string& doc_id, const std::string& cleaned_text,
                                            llm::Gateway& gateway, const SynonymMap& synonyms,
                                            const ExtractConfig& config) {
  if (text::trim(cleaned_text).empty()) return {};
  llm::ChatRequest req;
  req.model_id = config.table_model;
  req.template_name = "tables";
  req.user_payload = cleaned_text;
  auto resp = gateway.complete_json(req, {doc_id, "table-parse"});
  const json& reply = resp.require();
  std::vector<CrystalTableEntry> entries;
  for (const auto& row : reply.at("entries")) entries.push_back(map_table_row(row, synonyms));
  return dual_threshold_filter(std::move(entries));
}

}  // namespace mofh6::extract
