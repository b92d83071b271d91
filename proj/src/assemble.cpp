#include "mofh6/assemble.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>

#include "mofh6/error.hpp"
#include "mofh6/match.hpp"
#include "mofh6/prompts.hpp"
#include "mofh6/text.hpp"

namespace mofh6::assemble {

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Bm25Index::Bm25Index(std::vector<std::vector<std::string>> documents, double k1, double b)
    : docs_(std::move(documents)), k1_(k1), b_(b) {
  std::size_t total = 0;
  for (const auto& d : docs_) {
    std::map<std::string, std::size_t> tf;
    for (const auto& t : d) ++tf[t];
    for (const auto& [t, n] : tf) ++df_[t];
    tf_.push_back(std::move(tf));
    total += d.size();
  }
  if (!docs_.empty()) avgdl_ = static_cast<double>(total) / static_cast<double>(docs_.size());
}

std::size_t Bm25Index::df(const std::string& token) const {
  auto it = df_.find(token);
  return it == df_.end() ? 0 : it->second;
}

double Bm25Index::idf(const std::string& token) const {
  double n = static_cast<double>(docs_.size());
  double d = static_cast<double>(df(token));
  return std::log((n - d + 0.5) / (d + 0.5) + 1.0);
}

double Bm25Index::score(const std::vector<std::string>& query, std::size_t doc_index) const {
  if (doc_index >= docs_.size())
    throw Error(ErrorKind::IndexOutOfRange, "document " + std::to_string(doc_index) + " of " +
                                                std::to_string(docs_.size()));
  const auto& tf = tf_[doc_index];
  double len = static_cast<double>(docs_[doc_index].size());
  double sum = 0;
  for (const auto& t : query) {
    auto it = tf.find(t);
    if (it == tf.end()) continue;
    double f = static_cast<double>(it->second);
    sum += idf(t) * f * (k1_ + 1) / (f + k1_ * (1 - b_ + b_ * len / avgdl_));
  }
  return sum;
}

std::vector<double> Bm25Index::scores(const std::vector<std::string>& query) const {
  std::vector<double> out;
  for (std::size_t i = 0; i < docs_.size(); ++i) out.push_back(score(query, i));
  return out;
}

namespace {

int level_rank(MatchLevel l) { return l == MatchLevel::Lattice ? 0 : l == MatchLevel::Composition ? 1 : 2; }

bool mentions(std::string_view haystack, std::string_view token) {
  auto toks = tokenize(haystack);
  auto want = tokenize(token);
  if (want.empty()) return false;
  for (std::size_t i = 0; i + want.size() <= toks.size(); ++i)
    if (std::equal(want.begin(), want.end(), toks.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  return false;
}

}  // namespace

DossierResult generate_dossiers(const PipelineState& state, const AssembleConfig& config) {
  DossierResult out;
  std::vector<std::vector<std::string>> docs;
  for (const auto& p : state.synthesis_paragraphs) docs.push_back(tokenize(p.compound_hint + " " + p.text));
  Bm25Index index(docs, config.k1, config.b);

  std::set<std::string> seen_codes;
  for (const auto& target : state.targets) {
    if (!seen_codes.insert(target.ccdc_code).second) continue;

    const MatchResult* best = nullptr;
    for (const auto& m : state.match_results) {
      if (m.query_id != target.ccdc_code || !m.matched) continue;
      if (!best || level_rank(m.level) < level_rank(best->level) ||
          (level_rank(m.level) == level_rank(best->level) && m.degree > best->degree))
        best = &m;
    }
    if (!best) {
      out.warnings.push_back("no table entry matched " + target.ccdc_code);
      continue;
    }
    const CrystalTableEntry* entry = nullptr;
    for (std::size_t i = 0; i < state.table_entries.size(); ++i)
      if (match::candidate_id(state.table_entries[i], i) == best->candidate_id) {
        entry = &state.table_entries[i];
        break;
      }
    if (!entry) continue;

    std::string query_text = entry->compound_name + " " + target.chemical_name + " " + target.ccdc_code;
    if (target.abbreviation) query_text += " " + *target.abbreviation;
    auto query = tokenize(query_text);

    std::optional<std::size_t> chosen;
    double chosen_score = 0;
    auto start_of = [&](std::size_t i) {
      const auto& sp = state.synthesis_paragraphs[i].source_span;
      return sp ? sp->start : std::numeric_limits<std::size_t>::max();
    };
    for (std::size_t i = 0; i < index.size(); ++i) {
      double s = index.score(query, i);
      if (s <= 0) continue;
      if (!chosen || s > chosen_score || (s == chosen_score && start_of(i) < start_of(*chosen))) {
        chosen = i;
        chosen_score = s;
      }
    }
    if (!chosen) {
      out.errors.push_back({"result-generate", "NoParagraphForCompound",
                            "no synthesis paragraph ranks for " + target.ccdc_code});
      continue;
    }

    const auto& para = state.synthesis_paragraphs[*chosen];
    CompoundDossier d;
    d.ccdc_code = target.ccdc_code;
    d.ccdc_number = target.ccdc_number;
    d.compound_name = target.chemical_name;
    d.common_abbreviation = target.abbreviation;
    d.synthesis_text = para.text;
    d.compound_hint = para.compound_hint;
    d.crystal = match::canonicalize(*entry);
    d.source_doc = state.doc_id;
    for (const auto& m : state.abbreviations)
      if (m.confirmed && mentions(para.text, m.abbreviation)) d.abbreviation_glossary.push_back(m);
    for (const auto& u : state.unresolved_abbreviations)
      if (mentions(para.text, u)) d.unresolved_abbreviations.push_back(u);
    out.dossiers.push_back(std::move(d));
  }
  return out;
}

std::string render_block(const CompoundDossier& d) {
  std::string out;
  out += d.ccdc_code + "\n";
  out += "Chemical name: " + d.compound_name + "\n";
  out += "CCDC number: " + d.ccdc_number.value_or("N/A") + "\n";
  out += "Common abbreviation: " + d.common_abbreviation.value_or("N/A") + "\n";

  const auto& c = d.crystal;
  std::vector<std::string> cell;
  if (c.crystal_system) cell.push_back(std::string(to_string(*c.crystal_system)));
  if (c.space_group_canonical) cell.push_back(*c.space_group_canonical);
  auto add = [&](const char* label, const std::optional<double>& v, const char* unit) {
    if (v) cell.push_back(std::string(label) + " = " + text::format_number(*v) + unit);
  };
  add("a", c.a, " Å");
  add("b", c.b, " Å");
  add("c", c.c, " Å");
  add("α", c.alpha, "°");
  add("β", c.beta, "°");
  add("γ", c.gamma, "°");
  out += "Crystal data: " + (cell.empty() ? std::string("N/A") : text::join(cell, ", ")) + "\n";
  if (!c.formula.empty()) out += "Formula: " + c.formula + "\n";

  std::vector<std::string> gloss;
  for (const auto& m : d.abbreviation_glossary) gloss.push_back(m.abbreviation + " = " + m.full_name);
  for (const auto& u : d.unresolved_abbreviations) gloss.push_back(u + " (unresolved)");
  out += "Abbreviations: " + (gloss.empty() ? std::string("N/A") : text::join(gloss, "; ")) + "\n";
  out += "Synthesis procedure: " + d.synthesis_text;
  return out;
}

std::string render_final_output(const std::vector<CompoundDossier>& dossiers) {
  std::vector<std::string> blocks;
  for (const auto& d : dossiers) blocks.push_back(render_block(d));
  if (blocks.empty()) return "";
  return text::join(blocks, "\n\n\n") + "\n";
}

json SplitReport::to_json() const {
  return {{"timestamp", timestamp}, {"total_files", files.size()}, {"files", files}, {"skipped", skipped}};
}

std::vector<std::string> split_blocks(std::string_view merged) {
  std::string s = text::replace_all(std::string(merged), "\r\n", "\n");
  std::vector<std::string> out;
  std::size_t i = 0, start = 0;
  auto flush = [&](std::size_t end) {
    auto block = text::trim(std::string_view(s).substr(start, end - start));
    if (!block.empty()) out.emplace_back(block);
  };
  while (i < s.size()) {
    if (s[i] != '\n') {
      ++i;
      continue;
    }
    // Count the line breaks in this run, ignoring whitespace-only lines.
    std::size_t j = i, breaks = 0;
    while (j < s.size() && (s[j] == '\n' || s[j] == ' ' || s[j] == '\t')) {
      if (s[j] == '\n') ++breaks;
      ++j;
    }
    if (breaks >= 3) {
      flush(i);
      start = j;
    }
    i = j;
  }
  flush(s.size());
  return out;
}

std::optional<std::string> block_identifier(std::string_view block) {
  static const std::regex kCode(R"((^|[^A-Za-z0-9])([A-Z]{6}(\d{2})?)([^A-Za-z0-9]|$))");
  auto nl = block.find('\n');
  std::string first(block.substr(0, nl));
  std::smatch m;
  if (!std::regex_search(first, m, kCode)) return std::nullopt;
  return m[2].str();
}

SplitReport split_outputs(std::string_view merged, const std::filesystem::path& out_dir) {
  SplitReport report;
  report.timestamp = text::rfc3339(std::chrono::system_clock::now());
  std::size_t n = 0;
  for (const auto& block : split_blocks(merged)) {
    ++n;
    auto code = block_identifier(block);
    if (!code) {
      report.skipped.push_back(std::string(to_string(ErrorKind::MissingIdentifier)) + ": block " +
                               std::to_string(n) + " has no CCDC code on its first line");
      continue;
    }
    auto path = out_dir / ("identifier_" + *code + ".txt");
    text::write_file(path, block + "\n");
    report.files.push_back(path.filename().string());
  }
  return report;
}

namespace {

// Exact decimal addition of volume strings such as "5", "2.5".
std::string decimal_sum(const std::vector<std::string>& values) {
  std::size_t scale = 0;
  for (const auto& v : values) {
    auto dot = v.find('.');
    if (dot != std::string::npos) scale = std::max(scale, v.size() - dot - 1);
  }
  long long total = 0;
  for (const auto& v : values) {
    auto dot = v.find('.');
    std::string digits = dot == std::string::npos ? v : v.substr(0, dot) + v.substr(dot + 1);
    std::size_t frac = dot == std::string::npos ? 0 : v.size() - dot - 1;
    digits.append(scale - frac, '0');
    total += std::stoll(digits);
  }
  std::string s = std::to_string(total);
  if (scale == 0) return s;
  if (s.size() <= scale) s.insert(0, scale - s.size() + 1, '0');
  s.insert(s.size() - scale, ".");
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

std::string accumulate_volumes(std::string_view quantity) {
  static const std::regex kTotal(R"(\s*\(\s*total[^)]*\))", std::regex::icase);
  static const std::regex kVolume(R"((\d+(?:\.\d+)?)\s*(mL|ml|L|µL|μL)\b)");
  std::string q = std::regex_replace(std::string(quantity), kTotal, "");
  std::vector<std::string> values, units, shown;
  for (auto it = std::sregex_iterator(q.begin(), q.end(), kVolume); it != std::sregex_iterator(); ++it) {
    values.push_back((*it)[1].str());
    std::string unit = (*it)[2].str();
    if (unit == "ml") unit = "mL";
    units.push_back(unit);
    shown.push_back(values.back() + " " + unit);
  }
  if (values.size() < 2) return std::string(quantity);
  std::string joined = text::join(shown, " + ");
  bool same = std::all_of(units.begin(), units.end(), [&](const std::string& u) { return u == units.front(); });
  if (!same) return joined;
  return joined + " (total " + decimal_sum(values) + " " + units.front() + ")";
}

std::string render_markdown(const std::string& ccdc_code, const StructuredRecord& record) {
  std::string out = "# " + ccdc_code + "\n\n| Field | Value |\n| --- | --- |\n";
  for (const auto& f : StructuredRecord::fields()) {
    std::string v = record.field(f.key).value_or("N/A");
    v = text::replace_all(std::move(v), "|", "\\|");
    v = text::replace_all(std::move(v), "\n", " ");
    out += "| " + std::string(f.label) + " | " + v + " |\n";
  }
  return out;
}

StructuredResult to_structured(const CompoundDossier& dossier, llm::Gateway& gateway, const AssembleConfig& config) {
  if (text::trim(dossier.synthesis_text).empty())
    throw Error(ErrorKind::InvalidRequest, "dossier " + dossier.ccdc_code + " has no synthesis text");
  llm::ChatRequest req;
  req.model_id = config.structured_model;
  req.template_name = prompts::kStructured;
  req.user_payload = dossier.synthesis_text;
  auto resp = gateway.complete_json(req, {dossier.source_doc, "structured-convert"});
  StructuredResult out;
  out.record = structured_record_from_json(resp.require());
  if (out.record.quantity_of_solvent)
    out.record.quantity_of_solvent = accumulate_volumes(*out.record.quantity_of_solvent);
  bool any = false;
  for (const auto& f : StructuredRecord::fields()) any = any || out.record.field(f.key).has_value();
  if (!any) out.warnings.push_back("structured extraction for " + dossier.ccdc_code + " is empty");
  out.markdown = render_markdown(dossier.ccdc_code, out.record);
  return out;
}

}  // namespace mofh6::assemble
