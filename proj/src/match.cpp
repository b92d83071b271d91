#include "mofh6/match.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mofh6/error.hpp"
#include "mofh6/prompts.hpp"
#include "mofh6/text.hpp"

namespace mofh6::match {

std::string canonical_space_group(std::string_view s) {
  std::string flat = text::flatten_subscripts(s).text;
  std::string out;
  std::size_t pos = 0;
  while (pos < flat.size()) {
    char32_t cp = text::decode_utf8(flat, pos);
    if (cp == U'̅' || cp == U'̄') {
      // Combining bar over the preceding digit: "1̄" -> "-1".
      if (!out.empty() && std::isdigit(static_cast<unsigned char>(out.back()))) {
        char d = out.back();
        out.back() = '-';
        out += d;
      }
      continue;
    }
    if (cp == U'−' || cp == U'‐' || cp == U'‑' || cp == U'–') {
      out += '-';
      continue;
    }
    if (cp == U'_' || cp == U' ' || cp == U'\t' || cp == U'\n' || cp == U' ') continue;
    text::append_utf8(out, cp);
  }
  return out;
}

double parse_cell_number(std::string_view s) {
  auto v = text::parse_decimal(s);
  if (!v) throw Error(ErrorKind::UnparseableNumber, "cannot parse number '" + std::string(s) + "'");
  return *v;
}

CellParameters canonicalize(const RawCell& raw) {
  CellParameters p;
  if (raw.crystal_system) p.crystal_system = parse_crystal_system(*raw.crystal_system);
  if (raw.space_group && !text::trim(*raw.space_group).empty())
    p.space_group_canonical = canonical_space_group(*raw.space_group);
  auto num = [](const std::optional<std::string>& s) -> std::optional<double> {
    if (!s) return std::nullopt;
    return parse_cell_number(*s);
  };
  p.a = num(raw.a);
  p.b = num(raw.b);
  p.c = num(raw.c);
  p.alpha = num(raw.alpha);
  p.beta = num(raw.beta);
  p.gamma = num(raw.gamma);
  if (raw.formula && !text::trim(*raw.formula).empty()) {
    p.elements = chem::parse_formula(*raw.formula);
    p.formula = std::string(text::trim(*raw.formula));
  }
  return p;
}

CellParameters canonicalize(const CrystalTableEntry& e) {
  CellParameters p;
  p.crystal_system = e.crystal_system;
  if (e.space_group && !text::trim(*e.space_group).empty())
    p.space_group_canonical = canonical_space_group(*e.space_group);
  p.a = e.a;
  p.b = e.b;
  p.c = e.c;
  p.alpha = e.alpha;
  p.beta = e.beta;
  p.gamma = e.gamma;
  if (e.empirical_formula && !text::trim(*e.empirical_formula).empty()) {
    p.elements = chem::parse_formula(*e.empirical_formula);
    p.formula = std::string(text::trim(*e.empirical_formula));
  }
  return p;
}

CellParameters canonicalize(const MofRecord& r) {
  CellParameters p;
  p.crystal_system = r.crystal_system;
  p.space_group_canonical = canonical_space_group(r.space_group);
  p.a = r.a;
  p.b = r.b;
  p.c = r.c;
  p.alpha = r.alpha;
  p.beta = r.beta;
  p.gamma = r.gamma;
  p.elements = r.elements;
  p.formula = chem::hill_formula(r.elements);
  return p;
}

double FieldScores::mean() const {
  return std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
}

double FieldScores::min() const { return *std::min_element(scores.begin(), scores.end()); }

FieldScores field_scores(const CellParameters& q, const CellParameters& c, const MatchConfig& config) {
  FieldScores fs;
  if (q.crystal_system && c.crystal_system) fs.scores.push_back(*q.crystal_system == *c.crystal_system ? 1.0 : 0.0);
  if (q.space_group_canonical && c.space_group_canonical)
    fs.scores.push_back(*q.space_group_canonical == *c.space_group_canonical ? 1.0 : 0.0);
  auto length = [&](const std::optional<double>& x, const std::optional<double>& ref) {
    if (!x || !ref) return;
    double s = 1.0 - std::abs(*x - *ref) / (config.length_tolerance * *ref);
    fs.scores.push_back(std::clamp(s, 0.0, 1.0));
  };
  auto angle = [&](const std::optional<double>& x, const std::optional<double>& ref) {
    if (!x || !ref) return;
    double s = 1.0 - std::abs(*x - *ref) / config.angle_tolerance;
    fs.scores.push_back(std::clamp(s, 0.0, 1.0));
  };
  length(q.a, c.a);
  length(q.b, c.b);
  length(q.c, c.c);
  angle(q.alpha, c.alpha);
  angle(q.beta, c.beta);
  angle(q.gamma, c.gamma);
  if (fs.scores.empty()) throw Error(ErrorKind::NoComparableFields, "no cell field is present on both sides");
  return fs;
}

double match_degree(const CellParameters& q, const CellParameters& c, const MatchConfig& config) {
  return field_scores(q, c, config).mean();
}

double formula_similarity(const CellParameters& q, const CellParameters& c) {
  if (q.elements.empty() || c.elements.empty())
    throw Error(ErrorKind::EmptyFormula, "formula similarity needs two non-empty compositions");
  double shared = 0, total = 0;
  for (const auto& [el, n] : q.elements) {
    total += n;
    if (auto it = c.elements.find(el); it != c.elements.end()) shared += std::min(n, it->second);
  }
  for (const auto& [el, n] : c.elements) total += n;
  return 2.0 * shared / total;
}

MatchResult match(const CellParameters& q, const CellParameters& c, const MatchConfig& config,
                  const Adjudicator& adjudicator) {
  MatchResult r;
  auto fs = field_scores(q, c, config);
  r.degree = fs.mean();
  bool lattice = r.degree >= config.lattice_threshold &&
                 (!config.per_field_strict || fs.min() >= config.lattice_threshold);
  if (lattice) {
    r.level = MatchLevel::Lattice;
    r.matched = true;
    return r;
  }
  if (q.elements.empty() || c.elements.empty()) return r;
  r.formula_sim = formula_similarity(q, c);
  bool metals_equal = chem::metals_of(q.elements) == chem::metals_of(c.elements);
  if (metals_equal && *r.formula_sim >= config.formula_threshold) {
    if (adjudicator && r.degree >= config.gray_band_low && r.degree < config.lattice_threshold &&
        !adjudicator(q, c, r.degree))
      return r;
    r.level = MatchLevel::Composition;
    r.matched = true;
  }
  return r;
}

Adjudicator llm_adjudicator(llm::Gateway& gateway, std::string model_id, std::string doc_id) {
  return [&gateway, model_id = std::move(model_id), doc_id = std::move(doc_id)](
             const CellParameters& q, const CellParameters& c, double degree) {
    json payload = {{"query", q}, {"candidate", c}, {"degree", degree}};
    llm::ChatRequest req;
    req.model_id = model_id;
    req.template_name = prompts::kCrystalAdjudicate;
    req.user_payload = payload.dump();
    auto resp = gateway.complete_json(req, {doc_id, "crystal-compare"});
    // An unusable reply never vetoes; the deterministic rule stands.
    if (!resp.parsed_json) return true;
    return resp.parsed_json->value("same_compound", true);
  };
}

std::string candidate_id(const CrystalTableEntry& entry, std::size_t index) {
  return entry.compound_name.empty() ? "#" + std::to_string(index) : entry.compound_name;
}

std::vector<MatchResult> compare_targets(const std::vector<MofRecord>& targets,
                                         const std::vector<CrystalTableEntry>& entries, const MatchConfig& config,
                                         const Adjudicator& adjudicator) {
  std::vector<CellParameters> cells;
  cells.reserve(entries.size());
  for (const auto& e : entries) cells.push_back(canonicalize(e));
  std::vector<MatchResult> out;
  for (const auto& t : targets) {
    auto q = canonicalize(t);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      auto r = match(q, cells[i], config, adjudicator);
      r.query_id = t.ccdc_code;
      r.candidate_id = candidate_id(entries[i], i);
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace mofh6::match
