#include "mofh6/domain.hpp"

#include <array>

#include "mofh6/error.hpp"

namespace mofh6 {

namespace {

constexpr std::array<std::pair<CrystalSystem, std::string_view>, 7> kSystems = {{
    {CrystalSystem::Triclinic, "triclinic"},
    {CrystalSystem::Monoclinic, "monoclinic"},
    {CrystalSystem::Orthorhombic, "orthorhombic"},
    {CrystalSystem::Tetragonal, "tetragonal"},
    {CrystalSystem::Trigonal, "trigonal"},
    {CrystalSystem::Hexagonal, "hexagonal"},
    {CrystalSystem::Cubic, "cubic"},
}};

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json span_json(const text::Span& s) { return json::array({s.start, s.end}); }

}  // namespace

std::string_view to_string(CrystalSystem cs) {
  for (const auto& [k, name] : kSystems)
    if (k == cs) return name;
  return "triclinic";
}

std::optional<CrystalSystem> parse_crystal_system(std::string_view s) {
  std::string t = text::to_lower(text::trim(s));
  if (t == "rhombohedral") return CrystalSystem::Trigonal;
  for (const auto& [k, name] : kSystems)
    if (name == t) return k;
  return std::nullopt;
}

int CrystalTableEntry::missing_key_parameters() const {
  int missing = 0;
  missing += !crystal_system.has_value();
  missing += !space_group.has_value();
  missing += !a.has_value();
  missing += !b.has_value();
  missing += !c.has_value();
  missing += !alpha.has_value();
  missing += !beta.has_value();
  missing += !gamma.has_value();
  return missing;
}

std::string_view to_string(MatchLevel level) {
  switch (level) {
    case MatchLevel::Lattice: return "lattice";
    case MatchLevel::Composition: return "composition";
    case MatchLevel::None: return "none";
  }
  return "none";
}

const std::vector<StructuredRecord::FieldInfo>& StructuredRecord::fields() {
  static const std::vector<FieldInfo> kFields = {
      {"metal_source", "Metal Source", true},
      {"organic_linkers_source", "Organic Linkers Source", true},
      {"modulator_source", "Modulator Source", true},
      {"solvent_source", "Solvent Source", true},
      {"quantity_of_metal", "Quantity of Metal", false},
      {"quantity_of_organic_linkers", "Quantity of Organic Linkers", false},
      {"quantity_of_modulator", "Quantity of Modulator", false},
      {"quantity_of_solvent", "Quantity of Solvent", false},
      {"synthesis_temperature", "Synthesis Temperature", false},
      {"synthesis_time", "Synthesis Time", false},
      {"crystal_morphology", "Crystal Morphology", false},
      {"yield", "Yield", false},
      {"equipment", "Equipment", false},
  };
  return kFields;
}

std::optional<std::string>& StructuredRecord::field(std::string_view key) {
  return const_cast<std::optional<std::string>&>(std::as_const(*this).field(key));
}

const std::optional<std::string>& StructuredRecord::field(std::string_view key) const {
  if (key == "metal_source") return metal_source;
  if (key == "organic_linkers_source") return organic_linkers_source;
  if (key == "modulator_source") return modulator_source;
  if (key == "solvent_source") return solvent_source;
  if (key == "quantity_of_metal") return quantity_of_metal;
  if (key == "quantity_of_organic_linkers") return quantity_of_organic_linkers;
  if (key == "quantity_of_modulator") return quantity_of_modulator;
  if (key == "quantity_of_solvent") return quantity_of_solvent;
  if (key == "synthesis_temperature") return synthesis_temperature;
  if (key == "synthesis_time") return synthesis_time;
  if (key == "crystal_morphology") return crystal_morphology;
  if (key == "yield") return yield;
  if (key == "equipment") return equipment;
  throw Error(ErrorKind::UnknownProperty, "unknown structured field '" + std::string(key) + "'");
}

void to_json(json& j, const SynthesisParagraph& p) {
  j = {{"compound_hint", p.compound_hint},
       {"text", p.text},
       {"source_span", p.source_span ? span_json(*p.source_span) : json(nullptr)}};
}

void from_json(const json& j, SynthesisParagraph& p) {
  p.compound_hint = j.value("compound_hint", "");
  p.text = j.at("text").get<std::string>();
  p.source_span.reset();
  if (j.contains("source_span") && j["source_span"].is_array() && j["source_span"].size() == 2)
    p.source_span = text::Span{j["source_span"][0].get<std::size_t>(), j["source_span"][1].get<std::size_t>()};
}

void to_json(json& j, const CrystalTableEntry& e) {
  j = {{"compound_name", e.compound_name},
       {"empirical_formula", opt(e.empirical_formula)},
       {"molecular_weight", opt(e.molecular_weight)},
       {"crystal_system", e.crystal_system ? json(to_string(*e.crystal_system)) : json(nullptr)},
       {"space_group", opt(e.space_group)},
       {"a", opt(e.a)},
       {"b", opt(e.b)},
       {"c", opt(e.c)},
       {"alpha", opt(e.alpha)},
       {"beta", opt(e.beta)},
       {"gamma", opt(e.gamma)},
       {"color", opt(e.color)}};
}

void to_json(json& j, const CellParameters& c) {
  j = {{"crystal_system", c.crystal_system ? json(to_string(*c.crystal_system)) : json(nullptr)},
       {"space_group", opt(c.space_group_canonical)},
       {"a", opt(c.a)},
       {"b", opt(c.b)},
       {"c", opt(c.c)},
       {"alpha", opt(c.alpha)},
       {"beta", opt(c.beta)},
       {"gamma", opt(c.gamma)},
       {"elements", c.elements},
       {"formula", c.formula}};
}

void to_json(json& j, const MatchResult& m) {
  j = {{"query_id", m.query_id},
       {"candidate_id", m.candidate_id},
       {"level", to_string(m.level)},
       {"degree", m.degree},
       {"formula_sim", opt(m.formula_sim)},
       {"matched", m.matched}};
}

void to_json(json& j, const AbbreviationMapping& m) {
  j = {{"abbreviation", m.abbreviation},
       {"full_name", m.full_name},
       {"pattern_id", m.pattern_id},
       {"evidence_span", span_json(m.evidence_span)},
       {"confirmed", m.confirmed}};
}

void to_json(json& j, const PoreProperties& p) {
  j = {{"pld", p.pld}, {"lcd", p.lcd}, {"density", p.density},
       {"vsa", p.vsa}, {"gsa", p.gsa}, {"void_fraction", p.void_fraction}};
}

void to_json(json& j, const MofRecord& r) {
  j = {{"ccdc_code", r.ccdc_code},
       {"ccdc_number", opt(r.ccdc_number)},
       {"chemical_name", r.chemical_name},
       {"abbreviation", opt(r.abbreviation)},
       {"doi", opt(r.doi)},
       {"url", opt(r.url)},
       {"space_group", r.space_group},
       {"crystal_system", to_string(r.crystal_system)},
       {"a", r.a}, {"b", r.b}, {"c", r.c},
       {"alpha", r.alpha}, {"beta", r.beta}, {"gamma", r.gamma},
       {"elements", r.elements},
       {"molecular_weight", r.molecular_weight},
       {"pore", r.pore}};
}

MofRecord mof_record_from_json(const json& j) {
  auto fail = [](const std::string& why) { return Error(ErrorKind::InvariantViolation, why); };
  if (!j.is_object()) throw fail("record is not an object");
  auto str = [&](const char* key) -> std::string {
    if (!j.contains(key) || !j[key].is_string()) throw fail(std::string("missing string field '") + key + "'");
    return j[key].get<std::string>();
  };
  auto opt_str = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    if (!j[key].is_string()) throw fail(std::string("field '") + key + "' must be a string");
    return j[key].get<std::string>();
  };
  auto num = [&](const json& obj, const char* key) -> double {
    if (!obj.contains(key) || !obj[key].is_number()) throw fail(std::string("missing numeric field '") + key + "'");
    return obj[key].get<double>();
  };
  MofRecord r;
  r.ccdc_code = str("ccdc_code");
  if (text::trim(r.ccdc_code).empty()) throw fail("empty ccdc_code");
  r.ccdc_number = opt_str("ccdc_number");
  r.chemical_name = str("chemical_name");
  r.abbreviation = opt_str("abbreviation");
  r.doi = opt_str("doi");
  r.url = opt_str("url");
  r.space_group = str("space_group");
  auto cs = parse_crystal_system(str("crystal_system"));
  if (!cs) throw fail("unknown crystal_system");
  r.crystal_system = *cs;
  r.a = num(j, "a");
  r.b = num(j, "b");
  r.c = num(j, "c");
  r.alpha = num(j, "alpha");
  r.beta = num(j, "beta");
  r.gamma = num(j, "gamma");
  for (double len : {r.a, r.b, r.c})
    if (!(len > 0)) throw fail("cell lengths must be > 0");
  for (double ang : {r.alpha, r.beta, r.gamma})
    if (!(ang > 0 && ang < 180)) throw fail("cell angles must lie in (0, 180)");
  if (!j.contains("elements") || !j["elements"].is_object()) throw fail("missing elements object");
  for (const auto& [el, count] : j["elements"].items()) {
    if (!chem::is_element(el)) throw fail("unknown element '" + el + "'");
    if (!count.is_number() || count.get<double>() < 1) throw fail("element counts must be >= 1");
    r.elements[el] = count.get<double>();
  }
  r.molecular_weight = num(j, "molecular_weight");
  if (!j.contains("pore") || !j["pore"].is_object()) throw fail("missing pore object");
  const json& p = j["pore"];
  r.pore = {num(p, "pld"), num(p, "lcd"), num(p, "density"), num(p, "vsa"), num(p, "gsa"), num(p, "void_fraction")};
  for (double v : {r.pore.pld, r.pore.lcd, r.pore.density, r.pore.vsa, r.pore.gsa, r.pore.void_fraction})
    if (v < 0) throw fail("pore properties must be non-negative");
  if (r.pore.lcd < r.pore.pld) throw fail("lcd < pld");
  if (r.pore.void_fraction > 1) throw fail("void_fraction > 1");
  return r;
}

void to_json(json& j, const StructuredRecord& r) {
  j = json::object();
  for (const auto& f : StructuredRecord::fields()) j[std::string(f.key)] = opt(r.field(f.key));
}

StructuredRecord structured_record_from_json(const json& j) {
  StructuredRecord r;
  for (const auto& f : StructuredRecord::fields()) {
    std::string key(f.key);
    if (!j.contains(key) || j[key].is_null()) continue;
    std::string v = j[key].is_string() ? j[key].get<std::string>() : j[key].dump();
    if (!text::trim(v).empty()) r.field(f.key) = std::string(text::trim(v));
  }
  return r;
}

void to_json(json& j, const CompoundDossier& d) {
  j = {{"ccdc_code", d.ccdc_code},
       {"ccdc_number", opt(d.ccdc_number)},
       {"compound_name", d.compound_name},
       {"common_abbreviation", opt(d.common_abbreviation)},
       {"synthesis_text", d.synthesis_text},
       {"compound_hint", d.compound_hint},
       {"crystal", d.crystal},
       {"abbreviation_glossary", d.abbreviation_glossary},
       {"unresolved_abbreviations", d.unresolved_abbreviations},
       {"source_doc", d.source_doc}};
}

}  // namespace mofh6
