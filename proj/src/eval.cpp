#include "mofh6/eval.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "mofh6/chem.hpp"
#include "mofh6/error.hpp"
#include "mofh6/extract.hpp"
#include "mofh6/text.hpp"

namespace mofh6::eval {

// ---- preprocessing ----

namespace {

std::string preprocess_once(const std::string& in) {
  static const std::regex kTitle("^\\s*(?:synthesis|preparation)\\s+of\\s+[^:\\n]{1,200}:\\s*", std::regex::icase);
  static const std::regex kDegree("(\\d+(?:\\.\\d+)?)\\s*(?:°|º|˚|o)\\s*C\\b");
  static const std::regex kCelsiusSign("(\\d+(?:\\.\\d+)?)\\s*℃");
  static const std::regex kHours("(\\d+(?:\\.\\d+)?)\\s*(?:hours?|hrs?|h)\\b");
  std::string s = std::regex_replace(in, kTitle, "", std::regex_constants::format_first_only);
  s = extract::strip_characterization(s);
  s = std::regex_replace(s, kDegree, "$1 C");
  s = std::regex_replace(s, kCelsiusSign, "$1 C");
  s = std::regex_replace(s, kHours, "$1h");
  return std::string(text::trim(s));
}

}  // namespace

std::string preprocess_synthesis_text(std::string_view input) {
  std::string s(input);
  for (int i = 0; i < 8; ++i) {
    std::string next = preprocess_once(s);
    if (next == s) break;
    s = std::move(next);
  }
  return s;
}

// ---- vectors ----

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidRequest, "cosine of vectors with different lengths");
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> mean_pool(const std::vector<std::vector<double>>& tokens, const std::vector<double>& mask) {
  if (tokens.size() != mask.size()) throw Error(ErrorKind::InvalidRequest, "mask length differs from token count");
  double total = 0;
  for (double m : mask) {
    if (m < 0) throw Error(ErrorKind::InvalidRequest, "negative mask weight");
    total += m;
  }
  if (total == 0) throw Error(ErrorKind::ZeroMask, "mask selects no tokens");
  std::size_t dim = tokens.front().size();
  std::vector<double> pooled(dim, 0.0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].size() != dim) throw Error(ErrorKind::InvalidRequest, "token vectors differ in dimension");
    if (mask[i] == 0) continue;
    for (std::size_t k = 0; k < dim; ++k) pooled[k] += tokens[i][k] * mask[i];
  }
  double norm = 0;
  for (double& v : pooled) {
    v /= total;
    norm += v * v;
  }
  norm = std::sqrt(norm);
  if (norm > 0)
    for (double& v : pooled) v /= norm;
  return pooled;
}

std::vector<double> HashingEmbedder::embed(std::string_view s) {
  if (dim_ == 0) throw Error(ErrorKind::EmbedderFailure, "embedding dimension is zero");
  std::vector<std::vector<double>> vecs;
  std::string tok;
  auto flush = [&] {
    if (tok.empty()) return;
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : tok) {
      h ^= c;
      h *= 1099511628211ull;
    }
    std::vector<double> v(dim_, 0.0);
    v[h % dim_] = 1.0;
    vecs.push_back(std::move(v));
    tok.clear();
  };
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && std::isalnum(u)) tok += static_cast<char>(std::tolower(u));
    else flush();
  }
  flush();
  if (vecs.empty()) return std::vector<double>(dim_, 0.0);
  return mean_pool(vecs, std::vector<double>(vecs.size(), 1.0));
}

double sentence_similarity(std::string_view a, std::string_view b, Embedder& embedder) {
  if (a == b) return 1.0;
  return std::clamp(cosine(embedder.embed(a), embedder.embed(b)), 0.0, 1.0);
}

// ---- rule cascade ----

namespace {

// Whitespace removed, ASCII lowercased and Unicode look-alikes folded.
std::string fold(std::string_view s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    char32_t cp = text::decode_utf8(s, i);
    if (cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == 0xA0 || (cp >= 0x2000 && cp <= 0x200B) ||
        cp == 0x202F || cp == 0x3000)
      continue;
    if (cp >= 0x2080 && cp <= 0x2089) cp = '0' + (cp - 0x2080);
    else if (cp == 0x00B2) cp = '2';
    else if (cp == 0x00B3) cp = '3';
    else if (cp == 0x00B9) cp = '1';
    else if (cp >= 0x2070 && cp <= 0x2079 && cp != 0x2071 && cp != 0x2072 && cp != 0x2073) cp = '0' + (cp - 0x2070);
    else if (cp == 0x2010 || cp == 0x2011 || cp == 0x2012 || cp == 0x2013 || cp == 0x2014 || cp == 0x2212) cp = '-';
    else if (cp == 0x00B7 || cp == 0x2022 || cp == 0x2219 || cp == 0x22C5) cp = '.';
    else if (cp == 0x00B5 || cp == 0x03BC) cp = 'u';
    else if (cp == 0x212B) cp = 0x00C5;
    else if (cp == 0x2018 || cp == 0x2019 || cp == 0x2032) cp = '\'';
    else if (cp == 0x201C || cp == 0x201D || cp == 0x2033) cp = '"';
    else if (cp == 0x00BA || cp == 0x02DA) cp = 0x00B0;
    else if (cp == 0x00D7) cp = 'x';
    if (cp < 0x80) cp = static_cast<char32_t>(std::tolower(static_cast<int>(cp)));
    text::append_utf8(out, cp);
  }
  return out;
}

std::optional<bool> rule_exact(std::string_view a, std::string_view b, std::string_view) {
  if (fold(a) == fold(b)) return true;
  return std::nullopt;
}

std::optional<double> as_fraction(std::string_view s, bool& percent) {
  static const std::regex kPct("^(\\d+(?:\\.\\d+)?)%$");
  static const std::regex kPlain("^(\\d*\\.?\\d+)$");
  std::string f = fold(s);
  std::smatch m;
  if (std::regex_match(f, m, kPct)) {
    percent = true;
    return std::stod(m[1].str()) / 100.0;
  }
  if (std::regex_match(f, m, kPlain)) {
    percent = false;
    return std::stod(m[1].str());
  }
  return std::nullopt;
}

std::optional<bool> rule_percentage(std::string_view a, std::string_view b, std::string_view) {
  bool pa = false, pb = false;
  auto va = as_fraction(a, pa);
  auto vb = as_fraction(b, pb);
  if (!va || !vb || (!pa && !pb)) return std::nullopt;
  return std::abs(*va - *vb) <= 1e-9;
}

std::optional<std::pair<std::string, std::string>> outside_inside(std::string_view s) {
  static const std::regex kParen("^(.*?)\\s*\\(([^()]+)\\)\\s*$");
  std::string str(s);
  std::smatch m;
  if (!std::regex_match(str, m, kParen) || text::trim(m[1].str()).empty()) return std::nullopt;
  return std::make_pair(fold(m[1].str()), fold(m[2].str()));
}

std::optional<bool> rule_parenthetical(std::string_view a, std::string_view b, std::string_view) {
  auto pa = outside_inside(a), pb = outside_inside(b);
  std::string fa = fold(a), fb = fold(b);
  if (pa && (fb == pa->first || fb == pa->second)) return true;
  if (pb && (fa == pb->first || fa == pb->second)) return true;
  if (pa && pb && pa->first == pb->second && pa->second == pb->first) return true;
  return std::nullopt;
}

struct FormulaTokens {
  std::multiset<std::string> hill;
  std::size_t words = 0;
};

FormulaTokens formula_tokens(std::string_view s) {
  FormulaTokens out;
  static const std::regex kSep("[\\s,;]+");
  std::string str(s);
  for (auto it = std::sregex_token_iterator(str.begin(), str.end(), kSep, -1); it != std::sregex_token_iterator();
       ++it) {
    std::string tok = it->str();
    if (tok.empty()) continue;
    ++out.words;
    while (!tok.empty() && (tok.back() == '.' || tok.back() == ':')) tok.pop_back();
    auto balance = [](const std::string& t) {
      return std::count(t.begin(), t.end(), '(') - std::count(t.begin(), t.end(), ')');
    };
    if (!tok.empty() && tok.front() == '(' && balance(tok) > 0) tok.erase(0, 1);
    if (!tok.empty() && tok.back() == ')' && balance(tok) < 0) tok.pop_back();
    if (tok.empty() || !std::isupper(static_cast<unsigned char>(tok[0]))) continue;
    if (std::none_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) &&
        text::flatten_subscripts(tok).text == tok)
      continue;
    if (auto comp = chem::try_parse_formula(tok)) out.hill.insert(chem::hill_formula(*comp));
  }
  return out;
}

std::optional<bool> rule_formula(std::string_view a, std::string_view b, std::string_view) {
  auto fa = formula_tokens(a), fb = formula_tokens(b);
  if (fa.hill.empty() || fb.hill.empty()) return std::nullopt;
  if (fa.hill == fb.hill) return true;
  if (fa.words == 1 && fa.hill.size() == 1 && fb.words == 1 && fb.hill.size() == 1) return false;
  return std::nullopt;
}

std::optional<bool> rule_yield(std::string_view a, std::string_view b, std::string_view field) {
  if (field != "yield") return std::nullopt;
  static const std::regex kPct("(\\d+(?:\\.\\d+)?)\\s*%");
  std::string sa(a), sb(b);
  std::smatch ma, mb;
  if (!std::regex_search(sa, ma, kPct) || !std::regex_search(sb, mb, kPct)) return std::nullopt;
  return std::stod(ma[1].str()) == std::stod(mb[1].str());
}

std::set<std::string> equipment_classes(std::string_view s) {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> kClasses = {
      {"autoclave", {"autoclave", "teflon", "stainless steel", "bomb", "reactor", "parr"}},
      {"vial", {"vial"}},
      {"flask", {"flask"}},
      {"tube", {"tube", "ampoule", "ampule"}},
      {"jar", {"jar", "bottle"}},
      {"microwave", {"microwave"}},
      {"beaker", {"beaker"}},
  };
  std::string low = text::to_lower(s);
  std::set<std::string> out;
  for (const auto& [cls, words] : kClasses)
    for (const auto& w : words)
      if (low.find(w) != std::string::npos) out.insert(cls);
  return out;
}

std::optional<bool> rule_equipment(std::string_view a, std::string_view b, std::string_view field) {
  if (field != "equipment") return std::nullopt;
  auto ca = equipment_classes(a), cb = equipment_classes(b);
  if (ca.empty() || cb.empty()) return std::nullopt;
  for (const auto& c : ca)
    if (cb.count(c)) return true;
  return false;
}

struct Quantity {
  char dim;  // 'n' amount, 'm' mass, 'v' volume
  double base;
};

std::vector<Quantity> quantities(std::string_view s, std::optional<double>* stated_total = nullptr) {
  static const std::regex kQty(
      "(\\d+(?:\\.\\d+)?)\\s*(mmol|umol|mol|mg|kg|g|ml|ul|l)\\b");
  static const std::regex kTotal("total\\s*(?:of\\s*)?(\\d+(?:\\.\\d+)?)\\s*(ml|ul|l)\\b");
  // Lowercase with the micro sign folded; spaces are kept so units stay separate words.
  std::string low;
  std::size_t i = 0;
  while (i < s.size()) {
    char32_t cp = text::decode_utf8(s, i);
    if (cp == 0x00B5 || cp == 0x03BC) cp = 'u';
    if (cp < 0x80) cp = static_cast<char32_t>(std::tolower(static_cast<int>(cp)));
    text::append_utf8(low, cp);
  }
  auto convert = [](double v, const std::string& unit) -> Quantity {
    if (unit == "mmol") return {'n', v * 1e-3};
    if (unit == "umol") return {'n', v * 1e-6};
    if (unit == "mol") return {'n', v};
    if (unit == "mg") return {'m', v * 1e-3};
    if (unit == "kg") return {'m', v * 1e3};
    if (unit == "g") return {'m', v};
    if (unit == "ml") return {'v', v};
    if (unit == "ul") return {'v', v * 1e-3};
    return {'v', v * 1e3};  // l
  };
  std::vector<Quantity> out;
  for (auto it = std::sregex_iterator(low.begin(), low.end(), kQty); it != std::sregex_iterator(); ++it)
    out.push_back(convert(std::stod((*it)[1].str()), (*it)[2].str()));
  if (stated_total) {
    std::smatch m;
    if (std::regex_search(low, m, kTotal)) *stated_total = convert(std::stod(m[1].str()), m[2].str()).base;
  }
  return out;
}

bool close(double x, double y) { return std::abs(x - y) <= 1e-9 * std::max({1.0, std::abs(x), std::abs(y)}); }

std::optional<bool> rule_amount_mass(std::string_view a, std::string_view b, std::string_view) {
  auto qa = quantities(a), qb = quantities(b);
  if (qa.empty() || qb.empty() || qa.size() != qb.size()) return std::nullopt;
  auto key = [](const Quantity& q) { return std::make_pair(q.dim, q.base); };
  std::sort(qa.begin(), qa.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
  std::sort(qb.begin(), qb.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
  for (std::size_t i = 0; i < qa.size(); ++i)
    if (qa[i].dim != qb[i].dim || !close(qa[i].base, qb[i].base)) return std::nullopt;
  return true;
}

std::optional<bool> rule_solvent_accumulation(std::string_view a, std::string_view b, std::string_view) {
  auto side = [](std::string_view s, std::size_t& n) -> std::optional<double> {
    std::optional<double> stated;
    auto qs = quantities(s, &stated);
    double sum = 0;
    n = 0;
    for (const auto& q : qs)
      if (q.dim == 'v') {
        sum += q.base;
        ++n;
      }
    if (n == 0) return std::nullopt;
    return stated ? *stated : sum;
  };
  std::size_t na = 0, nb = 0;
  auto ta = side(a, na), tb = side(b, nb);
  if (!ta || !tb || (na < 2 && nb < 2)) return std::nullopt;
  if (close(*ta, *tb)) return true;
  return std::nullopt;
}

}  // namespace

const std::vector<std::pair<std::string, Rule>>& rules() {
  static const std::vector<std::pair<std::string, Rule>> kRules = {
      {"exact", rule_exact},
      {"percentage", rule_percentage},
      {"parenthetical-abbreviation", rule_parenthetical},
      {"formula", rule_formula},
      {"yield", rule_yield},
      {"equipment", rule_equipment},
      {"amount-mass", rule_amount_mass},
      {"solvent-accumulation", rule_solvent_accumulation},
  };
  return kRules;
}

RuleVerdict apply_rules(std::string_view a, std::string_view b, std::string_view field) {
  for (const auto& [id, rule] : rules())
    if (auto v = rule(a, b, field)) return {*v, id};
  return {};
}

CellJudgment cells_equivalent(std::string_view a, std::string_view b, std::string_view field,
                              const Embedders& embedders) {
  CellJudgment j;
  j.verdict = apply_rules(a, b, field);
  if (j.verdict.equivalent) return j;
  bool source = false;
  for (const auto& f : StructuredRecord::fields())
    if (f.key == field) source = f.source_field;
  Embedder* e = source ? embedders.chemical : embedders.general;
  if (!e) throw Error(ErrorKind::EmbedderFailure, "no embedder configured for field " + std::string(field));
  j.similarity = sentence_similarity(fold(a), fold(b), *e);
  j.verdict.equivalent = *j.similarity >= kMatchThreshold;
  j.verdict.rule_id = "embedding";
  return j;
}

// ---- metrics ----

MetricReport metrics_from_counts(const Counts& c) {
  MetricReport r;
  r.tp = c.tp;
  r.fp = c.fp;
  r.fn = c.fn;
  r.tn = c.tn;
  auto ratio = [](double num, double den) { return den == 0 ? 0.0 : num / den; };
  r.accuracy = ratio(c.tp + c.tn, c.tp + c.fp + c.fn + c.tn);
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.recall = ratio(c.tp, c.tp + c.fn);
  r.f1 = ratio(2 * r.precision * r.recall, r.precision + r.recall);
  return r;
}

MetricReport compute_metrics(const std::vector<Judgment>& judgments) {
  Counts all;
  std::map<std::string, Counts> by_field;
  for (const auto& j : judgments) {
    Counts& f = by_field[j.field];
    long Counts::*slot;
    if (j.gold_present && j.predicted_present && j.equivalent) slot = &Counts::tp;
    else if (j.predicted_present) slot = &Counts::fp;
    else if (j.gold_present) slot = &Counts::fn;
    else slot = &Counts::tn;
    ++(all.*slot);
    ++(f.*slot);
  }
  MetricReport r = metrics_from_counts(all);
  for (const auto& [field, c] : by_field) r.per_field[field] = metrics_from_counts(c);
  return r;
}

json MetricReport::to_json() const {
  auto flat = [](const MetricReport& m) {
    return json{{"tp", m.tp},         {"fp", m.fp},
                {"fn", m.fn},         {"tn", m.tn},
                {"accuracy", m.accuracy}, {"precision", m.precision},
                {"recall", m.recall}, {"f1", m.f1}};
  };
  json j = flat(*this);
  j["zero_denominator_value"] = 0;
  j["per_field"] = json::object();
  for (const auto& [f, m] : per_field) j["per_field"][f] = flat(m);
  return j;
}

std::string MetricReport::per_field_csv() const {
  std::string out = "field,tp,fp,fn,tn,accuracy,precision,recall,f1\n";
  auto n = [](double v) { return text::format_number(v); };
  for (const auto& [f, m] : per_field)
    out += f + "," + std::to_string(m.tp) + "," + std::to_string(m.fp) + "," + std::to_string(m.fn) + "," +
           std::to_string(m.tn) + "," + n(m.accuracy) + "," + n(m.precision) + "," + n(m.recall) + "," + n(m.f1) +
           "\n";
  return out;
}

// ---- gold and predictions ----

std::vector<GoldRecord> load_gold(const std::filesystem::path& path) {
  std::vector<GoldRecord> out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  for (const auto& line : text::split(text::read_file(path), '\n')) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    auto where = path.filename().string() + ":" + std::to_string(line_no);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("ccdc_code") || !j["ccdc_code"].is_string())
      throw Error(ErrorKind::InvariantViolation, where + ": expected an object with a ccdc_code");
    GoldRecord g;
    g.ccdc_code = text::to_upper(j["ccdc_code"].get<std::string>());
    if (!seen.insert(g.ccdc_code).second) throw Error(ErrorKind::DuplicateKey, where + ": duplicate " + g.ccdc_code);
    g.synthesis_text = j.value("synthesis_text", "");
    if (j.contains("structured")) g.structured = structured_record_from_json(j["structured"]);
    out.push_back(std::move(g));
  }
  return out;
}

StructuredRecord parse_markdown(std::string_view md) {
  StructuredRecord r;
  for (const auto& raw : text::split(md, '\n')) {
    std::string line(text::trim(raw));
    if (line.size() < 2 || line.front() != '|') continue;
    std::vector<std::string> cells;
    std::string cur;
    for (std::size_t i = 1; i < line.size(); ++i) {
      if (line[i] == '\\' && i + 1 < line.size() && line[i + 1] == '|') {
        cur += '|';
        ++i;
      } else if (line[i] == '|') {
        cells.emplace_back(text::trim(cur));
        cur.clear();
      } else {
        cur += line[i];
      }
    }
    if (cells.size() < 2) continue;
    for (const auto& f : StructuredRecord::fields())
      if (f.label == cells[0]) {
        if (cells[1] != "N/A" && !cells[1].empty()) r.field(f.key) = cells[1];
        break;
      }
  }
  return r;
}

std::map<std::string, Prediction> load_predictions(const std::filesystem::path& dir) {
  static const std::regex kStructure("^structure_(.+)\\.md$");
  static const std::regex kIdentifier("^identifier_(.+)\\.txt$");
  std::map<std::string, Prediction> out;
  std::error_code ec;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir, ec))
    if (e.is_regular_file()) files.push_back(e.path());
  if (ec) throw Error(ErrorKind::UnreadableFile, "cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    std::string name = p.filename().string();
    std::smatch m;
    if (std::regex_match(name, m, kStructure)) {
      auto code = text::to_upper(m[1].str());
      out[code].ccdc_code = code;
      out[code].structured = parse_markdown(text::read_file(p));
    } else if (std::regex_match(name, m, kIdentifier)) {
      auto code = text::to_upper(m[1].str());
      std::string body = text::read_file(p);
      const std::string marker = "Synthesis procedure: ";
      auto pos = body.find(marker);
      out[code].ccdc_code = code;
      if (pos != std::string::npos) out[code].synthesis_text = std::string(text::trim(body.substr(pos + marker.size())));
    }
  }
  return out;
}

std::vector<Judgment> sentence_judgments(std::string_view gold, std::string_view predicted, Embedder& embedder) {
  auto sentences = [](const std::string& s) {
    std::vector<std::string> out;
    for (const auto& sp : text::split_sentences(s)) {
      std::string t(text::trim(std::string_view(s).substr(sp.start, sp.end - sp.start)));
      if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
  };
  auto gs = sentences(preprocess_synthesis_text(gold));
  auto ps = sentences(preprocess_synthesis_text(predicted));
  std::vector<bool> used(ps.size(), false);
  std::vector<Judgment> out;
  for (const auto& g : gs) {
    double best = -1;
    std::size_t best_i = ps.size();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (used[i]) continue;
      double sim = sentence_similarity(g, ps[i], embedder);
      if (sim > best) {
        best = sim;
        best_i = i;
      }
    }
    if (best_i < ps.size() && best >= kMatchThreshold) {
      used[best_i] = true;
      out.push_back({"synthesis_text", true, true, true});
    } else {
      out.push_back({"synthesis_text", true, false, false});
    }
  }
  for (bool u : used)
    if (!u) out.push_back({"synthesis_text", false, true, false});
  return out;
}

std::vector<Judgment> evaluate(const std::vector<GoldRecord>& gold, const std::map<std::string, Prediction>& pred,
                               const Embedders& embedders) {
  std::vector<Judgment> out;
  for (const auto& g : gold) {
    auto it = pred.find(g.ccdc_code);
    const Prediction* p = it == pred.end() ? nullptr : &it->second;
    for (const auto& f : StructuredRecord::fields()) {
      const auto& gv = g.structured.field(f.key);
      std::optional<std::string> pv;
      if (p && p->structured) pv = p->structured->field(f.key);
      Judgment j{std::string(f.key), gv.has_value(), pv.has_value(), false};
      if (gv && pv) j.equivalent = cells_equivalent(*gv, *pv, f.key, embedders).equivalent();
      out.push_back(std::move(j));
    }
    if (!g.synthesis_text.empty()) {
      Embedder* e = embedders.chemical ? embedders.chemical : embedders.general;
      if (!e) throw Error(ErrorKind::EmbedderFailure, "no embedder configured for sentence evaluation");
      auto sj = sentence_judgments(g.synthesis_text, p && p->synthesis_text ? *p->synthesis_text : "", *e);
      out.insert(out.end(), sj.begin(), sj.end());
    }
  }
  return out;
}

}  // namespace mofh6::eval
