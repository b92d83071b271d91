#include "mofh6/abbrev.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>

#include "mofh6/chem.hpp"
#include "mofh6/error.hpp"
#include "mofh6/prompts.hpp"
#include "mofh6/text.hpp"

namespace mofh6::abbrev {

namespace {

constexpr const char* kAbbrCapture = "([A-Z][A-Za-z0-9']{0,9})";
constexpr std::size_t kMaxNameWords = 8;

const std::set<std::string>& stopwords() {
  static const std::set<std::string> kWords = {
      "a", "an", "the", "of", "and", "or", "with", "in", "on", "to", "from", "by", "for", "as", "at", "into",
      "was", "were", "is", "are", "be", "been", "being", "has", "have", "had", "we", "our", "it", "its",
      "this", "these", "that", "those", "which", "where", "while", "whereas", "then", "also", "both", "respectively",
      "ligand", "ligands", "linker", "linkers", "coligand", "co-ligand", "auxiliary", "bridging", "ditopic",
      "tritopic", "tetratopic", "flexible", "rigid", "pillar", "pillaring", "organic", "compound", "reagent",
      "precursor", "starting", "material", "materials", "mixture", "solution", "suspension", "containing",
      "using", "use", "used", "employed", "selected", "chosen", "designed", "purchased", "commercially",
      "available", "prepared", "synthesized", "obtained", "reacted", "dissolved", "added", "mixed", "combined",
      "heated", "called", "named", "namely", "denoted", "i.e.", "e.g.", "new", "novel", "via", "between",
      "mmol", "mol", "mg", "g", "ml", "l", "equiv", "here", "herein", "reaction", "solvothermal", "hydrothermal",
      "treatment", "stands", "represents", "denotes", "refers", "abbreviated", "hereafter", "hereinafter",
      "referred", "designated", "than", "not", "but", "after", "before", "under", "over",
  };
  return kWords;
}

std::string core_word(std::string_view tok) {
  auto is_trim = [](char c) {
    return c == ',' || c == ';' || c == ':' || c == '.' || c == '"' || c == '\'' || c == '(' || c == ')' ||
           c == '[' || c == ']';
  };
  std::size_t b = 0, e = tok.size();
  while (b < e && is_trim(tok[b])) ++b;
  while (e > b && is_trim(tok[e - 1])) --e;
  std::string w = text::to_lower(tok.substr(b, e - b));
  if (w == "i.e" || w == "e.g") w += '.';
  return w;
}

int paren_balance(std::string_view tok) {
  int bal = 0;
  for (char c : tok) {
    if (c == '(' || c == '[') ++bal;
    if (c == ')' || c == ']') --bal;
  }
  return bal;
}

std::vector<text::Span> tokens_in(std::string_view s, std::size_t from, std::size_t to) {
  std::vector<text::Span> out;
  std::size_t i = from;
  auto space = [](char c) { return c == ' ' || c == '\n' || c == '\t'; };
  while (i < to) {
    while (i < to && space(s[i])) ++i;
    std::size_t st = i;
    while (i < to && !space(s[i])) ++i;
    if (i > st) out.push_back({st, i});
  }
  return out;
}

bool is_clause_end(char c) { return c == ',' || c == ';' || c == ':'; }

bool plausible_name(std::string_view name) {
  static const std::regex kAmount(
      R"(^\s*[0-9.]+\s*(mmol|mol|mg|g|mL|ml|L|µL|μL|%|equiv|eq|M|mM)\b)");
  std::size_t run = 0, best = 0;
  bool lower = false;
  for (char c : name) {
    bool letter = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    lower = lower || (c >= 'a' && c <= 'z');
    run = letter ? run + 1 : 0;
    best = std::max(best, run);
  }
  if (best < 4 || !lower) return false;
  std::string n(name);
  return !std::regex_search(n, kAmount);
}

std::optional<text::Span> name_before(std::string_view s, std::size_t sent_start, std::size_t p) {
  auto toks = tokens_in(s, sent_start, p);
  std::vector<text::Span> kept;
  for (auto it = toks.rbegin(); it != toks.rend() && kept.size() < kMaxNameWords; ++it) {
    auto t = s.substr(it->start, it->end - it->start);
    if (is_clause_end(t.back()) || t.back() == '.') break;
    if (stopwords().count(core_word(t))) break;
    if (paren_balance(t) != 0) break;
    kept.push_back(*it);
  }
  if (kept.empty()) return std::nullopt;
  return text::Span{kept.back().start, kept.front().end};
}

std::optional<text::Span> name_after(std::string_view s, std::size_t p, std::size_t sent_end) {
  auto toks = tokens_in(s, p, sent_end);
  std::optional<text::Span> span;
  for (std::size_t i = 0; i < toks.size() && i < kMaxNameWords; ++i) {
    auto t = s.substr(toks[i].start, toks[i].end - toks[i].start);
    if (stopwords().count(core_word(t))) break;
    std::size_t end = toks[i].end;
    bool stop = false;
    if (is_clause_end(t.back()) || (t.back() == '.' && i + 1 == toks.size())) {
      --end;
      stop = true;
    } else if (t.back() == ')' && paren_balance(t) < 0) {
      --end;
      stop = true;
    } else if (paren_balance(t) != 0) {
      break;
    }
    if (end > toks[i].start) span = text::Span{span ? span->start : toks[i].start, end};
    if (stop) break;
  }
  return span;
}

std::optional<text::Span> name_enclosed(std::string_view s, std::size_t p) {
  char open = s[p - 1];
  char close = open == '(' ? ')' : ']';
  int depth = 1;
  std::size_t i = p;
  for (; i < s.size(); ++i) {
    if (s[i] == open) ++depth;
    else if (s[i] == close && --depth == 0) break;
    else if (s[i] == '\n') return std::nullopt;
  }
  if (i >= s.size()) return std::nullopt;
  std::size_t end = i;
  for (std::size_t k = p; k + 1 < i; ++k) {
    if ((s[k] == ',' || s[k] == ';') && (s[k + 1] == ' ' || s[k + 1] == '\t')) {
      end = k;
      break;
    }
  }
  std::size_t b = p;
  while (b < end && s[b] == ' ') ++b;
  while (end > b && s[end - 1] == ' ') --end;
  if (end <= b) return std::nullopt;
  return text::Span{b, end};
}

bool formula_like(std::string_view tok) {
  static const std::regex kFormula(R"(^(?:[A-Z][a-z]?\d*|[()\[\]·]\d*)+$)");
  std::string t(tok);
  while (!t.empty() && (t.back() == '+' || t.back() == '-' || std::isdigit(static_cast<unsigned char>(t.back()))))
    t.pop_back();
  return !t.empty() && std::regex_match(t, kFormula);
}

bool has_metal_symbol(std::string_view tok) {
  for (std::size_t i = 0; i < tok.size(); ++i) {
    if (!(tok[i] >= 'A' && tok[i] <= 'Z')) continue;
    std::string sym(1, tok[i]);
    if (i + 1 < tok.size() && tok[i + 1] >= 'a' && tok[i + 1] <= 'z') sym += tok[i + 1];
    if (chem::is_element(sym) && chem::is_metal(sym)) return true;
  }
  return false;
}

std::string normalized_name(std::string_view name) {
  std::string out;
  for (char c : text::to_lower(name)) {
    if (c == ' ' || c == '\t' || c == '\n') {
      if (!out.empty() && out.back() != ' ') out += ' ';
    } else {
      out += c;
    }
  }
  return std::string(text::trim(out));
}

const char* side_name(NameSide s) {
  switch (s) {
    case NameSide::Before: return "before";
    case NameSide::After: return "after";
    case NameSide::Enclosed: return "enclosed";
  }
  return "before";
}

}  // namespace

PatternRegistry PatternRegistry::builtin() {
  PatternRegistry r;
  const std::string as_kw = R"((?:referred\s+to\s+as|called|denoted(?:\s+as)?|abbreviated\s+as))";
  r.patterns_ = {
      {1, "NAME (ABBR)", R"(\(\s*{ABBR}\s*\))", NameSide::Before},
      {2, "NAME [ABBR]", R"(\[\s*{ABBR}\s*\])", NameSide::Before},
      {3, "NAME (ABBR, amounts)", R"(\(\s*{ABBR}\s*[,;][^)]*\))", NameSide::Before},
      {4, "NAME (abbreviated as ABBR)", R"(\(\s*abbreviated\s+as\s+{ABBR}\s*\))", NameSide::Before},
      {5, "NAME (denoted as ABBR)", R"(\(\s*denoted\s+(?:as\s+)?{ABBR}\s*\))", NameSide::Before},
      {6, "NAME (hereinafter referred to as ABBR)", R"(\(\s*hereinafter\s+)" + as_kw + R"(\s+{ABBR}\s*\))",
       NameSide::Before},
      {7, "NAME (hereafter ABBR)", R"(\(\s*hereafter\s+(?:)" + as_kw + R"(\s+)?{ABBR}\s*\))", NameSide::Before},
      {8, "NAME, hereafter ABBR", R"(,\s*hereafter\s+(?:)" + as_kw + R"(\s+)?{ABBR}\b)", NameSide::Before},
      {9, "NAME, referred to as ABBR",
       R"(,\s*(?:referred\s+to\s+as|denoted\s+as|abbreviated\s+as|designated\s+as)\s+{ABBR}\b)", NameSide::Before},
      {10, "NAME, ABBR, (apposition)", R"(,\s*{ABBR}\s*,)", NameSide::Before},
      {11, "ABBR = NAME", R"(\b{ABBR}\s*=\s*)", NameSide::After},
      {12, "ABBR: NAME", R"(\b{ABBR}\s*:\s*)", NameSide::After},
      {13, "ABBR (NAME)", R"(\b{ABBR}\s*\()", NameSide::Enclosed},
      {14, "ABBR stands for NAME", R"(\b{ABBR}\s+(?:stands\s+for|represents|denotes|refers\s+to)\s+)",
       NameSide::After},
      {15, "ABBR [NAME]", R"(\b{ABBR}\s*\[)", NameSide::Enclosed},
  };
  return r;
}

PatternRegistry PatternRegistry::from_json(const json& doc) {
  PatternRegistry r;
  std::set<int> ids;
  for (const auto& p : doc) {
    Pattern pat;
    pat.id = p.at("id").get<int>();
    pat.description = p.value("description", "");
    pat.regex = p.at("regex").get<std::string>();
    std::string side = p.value("name_side", "before");
    if (side == "before") pat.side = NameSide::Before;
    else if (side == "after") pat.side = NameSide::After;
    else if (side == "enclosed") pat.side = NameSide::Enclosed;
    else throw Error(ErrorKind::InvalidConfig, "pattern " + std::to_string(pat.id) + ": bad name_side '" + side + "'");
    if (pat.regex.find("{ABBR}") == std::string::npos)
      throw Error(ErrorKind::InvalidConfig, "pattern " + std::to_string(pat.id) + " lacks {ABBR}");
    if (!ids.insert(pat.id).second)
      throw Error(ErrorKind::InvalidConfig, "duplicate pattern id " + std::to_string(pat.id));
    try {
      std::regex check(text::replace_all(pat.regex, "{ABBR}", kAbbrCapture));
    } catch (const std::regex_error& e) {
      throw Error(ErrorKind::InvalidConfig, "pattern " + std::to_string(pat.id) + ": " + e.what());
    }
    r.patterns_.push_back(std::move(pat));
  }
  std::sort(r.patterns_.begin(), r.patterns_.end(), [](const Pattern& a, const Pattern& b) { return a.id < b.id; });
  return r;
}

json PatternRegistry::to_json() const {
  json out = json::array();
  for (const auto& p : patterns_)
    out.push_back({{"id", p.id}, {"description", p.description}, {"regex", p.regex}, {"name_side", side_name(p.side)}});
  return out;
}

bool is_ligand_abbreviation(std::string_view token) {
  static const std::regex kGrammar(R"(^(H\d*L\d*|L\d*H\d*|L\d*)$)");
  std::string flat = text::flatten_subscripts(token).text;
  return std::regex_match(flat, kGrammar);
}

bool contains_metal_token(std::string_view name) {
  std::string flat = text::flatten_subscripts(name).text;
  std::string word;
  auto flush = [&]() {
    bool metal = !word.empty() && chem::is_metal_name(word);
    word.clear();
    return metal;
  };
  for (char c : flat) {
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) {
      word += c;
    } else if (flush()) {
      return true;
    }
  }
  if (flush()) return true;

  for (const auto& span : tokens_in(flat, 0, flat.size())) {
    std::string tok = flat.substr(span.start, span.end - span.start);
    for (char& c : tok)
      if (c == ',' || c == ';' || c == '-') c = ' ';
    for (const auto& part : text::split(tok, ' ')) {
      std::string_view p = text::trim(part);
      while (!p.empty() && (p.back() == '.' || p.back() == ':')) p.remove_suffix(1);
      if (formula_like(p) && has_metal_symbol(p)) return true;
    }
  }
  return false;
}

std::vector<AbbreviationMapping> scan_mappings(std::string_view original, const PatternRegistry& registry) {
  auto flat = text::flatten_subscripts(original);
  const std::string& s = flat.text;
  auto sentences = text::split_sentences(s);
  auto sentence_of = [&](std::size_t pos) -> text::Span {
    for (const auto& sp : sentences)
      if (pos >= sp.start && pos < sp.end) return sp;
    return {pos, pos};
  };

  std::map<std::size_t, AbbreviationMapping> by_abbr_start;  // first pattern (by id) per occurrence
  for (const auto& pat : registry.patterns()) {
    std::regex re(text::replace_all(pat.regex, "{ABBR}", kAbbrCapture));
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
      const auto& m = *it;
      std::size_t mstart = static_cast<std::size_t>(m.position(0));
      std::size_t mend = mstart + static_cast<std::size_t>(m.length(0));
      std::size_t astart = static_cast<std::size_t>(m.position(1));
      std::size_t aend = astart + static_cast<std::size_t>(m.length(1));
      if (by_abbr_start.count(astart)) continue;
      auto sent = sentence_of(astart);
      std::optional<text::Span> name;
      switch (pat.side) {
        case NameSide::Before: name = name_before(s, sent.start, mstart); break;
        case NameSide::After: name = name_after(s, mend, std::max(sent.end, mend)); break;
        case NameSide::Enclosed: name = name_enclosed(s, mend); break;
      }
      if (!name) continue;
      std::string_view name_text(s.data() + name->start, name->end - name->start);
      if (!plausible_name(name_text)) continue;

      AbbreviationMapping am;
      am.abbreviation = s.substr(astart, aend - astart);
      am.pattern_id = pat.id;
      am.abbreviation_span = {flat.origin[astart], flat.origin[aend]};
      am.name_span = {flat.origin[name->start], flat.origin[name->end]};
      am.full_name = std::string(original.substr(am.name_span.start, am.name_span.end - am.name_span.start));
      am.evidence_span = {std::min(am.abbreviation_span.start, am.name_span.start),
                          std::max(am.abbreviation_span.end, am.name_span.end)};
      by_abbr_start.emplace(astart, std::move(am));
    }
  }

  std::vector<AbbreviationMapping> out;
  std::set<std::pair<std::string, std::string>> seen;
  for (auto& [pos, am] : by_abbr_start) {  // ordered by position, so the earliest duplicate wins
    if (!seen.insert({am.abbreviation, normalized_name(am.full_name)}).second) continue;
    out.push_back(std::move(am));
  }
  return out;
}

std::vector<AbbreviationMapping> triple_filter(std::string_view text, std::vector<AbbreviationMapping> candidates) {
  auto sentences = text::split_sentences(text);
  auto same_sentence = [&](const text::Span& a, const text::Span& b) {
    for (const auto& sp : sentences) {
      bool in_a = a.start >= sp.start && a.end <= sp.end;
      bool in_b = b.start >= sp.start && b.end <= sp.end;
      if (in_a || in_b) return in_a && in_b;
    }
    return false;
  };
  std::vector<AbbreviationMapping> out;
  for (auto& c : candidates) {
    if (!is_ligand_abbreviation(c.abbreviation)) continue;
    if (contains_metal_token(c.full_name)) continue;
    if (!same_sentence(c.abbreviation_span, c.name_span)) continue;
    out.push_back(std::move(c));
  }
  return out;
}

ResolveResult resolve(std::string_view text, const ResolveOptions& options, const PatternRegistry& registry) {
  ResolveResult result;
  auto kept = triple_filter(text, scan_mappings(text, registry));

  std::vector<std::string> order;
  std::map<std::string, std::vector<AbbreviationMapping>> groups;
  for (auto& m : kept) {
    if (!groups.count(m.abbreviation)) order.push_back(m.abbreviation);
    groups[m.abbreviation].push_back(std::move(m));
  }

  for (const auto& abbr : order) {
    auto& group = groups[abbr];
    std::vector<std::string> names;
    for (const auto& m : group) {
      std::string n = normalized_name(m.full_name);
      if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
    }
    if (names.size() == 1) {
      group.front().confirmed = true;
      result.mappings.push_back(group.front());
      continue;
    }

    if (options.mode == ResolveMode::RegexPlusLlm && options.gateway) {
      json payload = {{"abbreviation", abbr}, {"candidates", json::array()}, {"evidence", json::array()}};
      for (const auto& m : group) {
        payload["candidates"].push_back(m.full_name);
        payload["evidence"].push_back(std::string(text.substr(m.evidence_span.start,
                                                              m.evidence_span.end - m.evidence_span.start)));
      }
      try {
        llm::ChatRequest req;
        req.model_id = options.model_id;
        req.template_name = prompts::kAbbrevAdjudicate;
        req.user_payload = payload.dump();
        auto resp = options.gateway->complete_json(req, {options.doc_id, "abbrev-resolve"});
        const json& reply = resp.require();
        const json& chosen = reply.at("full_name");
        std::optional<AbbreviationMapping> pick;
        if (chosen.is_string()) {
          std::string want = normalized_name(chosen.get<std::string>());
          for (const auto& m : group)
            if (normalized_name(m.full_name) == want) {
              pick = m;
              break;
            }
        }
        if (pick) {
          pick->confirmed = true;
          result.mappings.push_back(*pick);
        } else {
          result.unresolved.push_back(abbr);
        }
        continue;
      } catch (const Error& e) {
        result.warnings.push_back("abbreviation adjudication for " + abbr + " fell back to regex: " + e.what());
      }
    }
    for (auto& m : group) result.mappings.push_back(m);
    result.unresolved.push_back(abbr);
  }
  return result;
}

json to_json(const ResolveResult& r) {
  json mappings = json::array();
  for (const auto& m : r.mappings) mappings.push_back(m);
  return {{"mappings", mappings}, {"unresolved", r.unresolved}, {"warnings", r.warnings}};
}

}  // namespace mofh6::abbrev
