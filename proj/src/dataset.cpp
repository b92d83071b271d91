#include "mofh6/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mofh6/chem.hpp"
#include "mofh6/error.hpp"
#include "mofh6/match.hpp"
#include "mofh6/text.hpp"

namespace mofh6::dataset {

namespace {

std::string upper(std::string_view s) { return text::to_upper(s); }

std::string alias_key(std::string_view alias) {
  // Drop bracketed parts and unit-looking words, then keep lowercase alphanumerics.
  std::string s;
  int depth = 0;
  for (char c : alias) {
    if (c == '(' || c == '[') { ++depth; continue; }
    if (c == ')' || c == ']') { depth = std::max(0, depth - 1); continue; }
    if (depth == 0) s += c;
  }
  std::string out;
  for (const auto& w : text::split(text::replace_all(s, "_", " "), ' ')) {
    if (w.empty() || w.find('/') != std::string::npos || w == "Å" || w == "A" || text::iequals(w, "angstrom"))
      continue;
    for (char c : w)
      if (static_cast<unsigned char>(c) < 0x80 && std::isalnum(static_cast<unsigned char>(c)))
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// Neumaier compensated sum: exact for the dyadic values used in fixtures and
// far less order-sensitive than naive accumulation in general.
double compensated_sum(const std::vector<double>& xs) {
  double sum = 0, comp = 0;
  for (double x : xs) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) comp += (sum - t) + x;
    else comp += (x - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace

const std::vector<PropertyInfo>& properties() {
  static const std::vector<PropertyInfo> kProps = {
      {"pld", "PLD (Å)", "PLD", "Å"},
      {"lcd", "LCD (Å)", "LCD", "Å"},
      {"density", "Density (g/cm3)", "Density", "g/cm3"},
      {"vsa", "Accessible_Surface_Area (m2/cm3)", "VSA", "m2/cm3"},
      {"gsa", "GSA (m2/g)", "GSA", "m2/g"},
      {"void_fraction", "Void_Fraction", "Void_Fraction", ""},
      {"molecular_weight", "Molecular_Weight (g/mol)", "MW", "g/mol"},
      {"a", "a (Å)", "a", "Å"},
      {"b", "b (Å)", "b", "Å"},
      {"c", "c (Å)", "c", "Å"},
      {"alpha", "alpha (°)", "alpha", "°"},
      {"beta", "beta (°)", "beta", "°"},
      {"gamma", "gamma (°)", "gamma", "°"},
  };
  return kProps;
}

const PropertyInfo& property(const std::string& key) {
  for (const auto& p : properties())
    if (p.key == key) return p;
  throw Error(ErrorKind::UnknownProperty, "unknown property '" + key + "'");
}

std::optional<std::string> canonical_property(std::string_view alias) {
  static const std::map<std::string, std::string> kAliases = [] {
    std::map<std::string, std::string> m;
    auto add = [&](const char* a, const char* key) { m[alias_key(a)] = key; };
    for (const auto& p : properties()) {
      add(p.key.c_str(), p.key.c_str());
      add(p.display.c_str(), p.key.c_str());
      add(p.range_key.c_str(), p.key.c_str());
    }
    add("pore limiting diameter", "pld");
    add("pore-limiting diameter", "pld");
    add("limiting pore diameter", "pld");
    add("largest cavity diameter", "lcd");
    add("cavity diameter", "lcd");
    add("largest included sphere", "lcd");
    add("crystal density", "density");
    add("densities", "density");
    add("volumetric surface area", "vsa");
    add("volumetric accessible surface area", "vsa");
    add("accessible surface area", "vsa");
    add("surface area", "vsa");
    add("asa", "vsa");
    add("gravimetric surface area", "gsa");
    add("gravimetric accessible surface area", "gsa");
    add("void fraction", "void_fraction");
    add("porosity", "void_fraction");
    add("vf", "void_fraction");
    add("molecular weight", "molecular_weight");
    add("molecular mass", "molecular_weight");
    add("formula weight", "molecular_weight");
    add("mw", "molecular_weight");
    add("cell length a", "a");
    add("cell length b", "b");
    add("cell length c", "c");
    add("cell angle alpha", "alpha");
    add("cell angle beta", "beta");
    add("cell angle gamma", "gamma");
    return m;
  }();
  auto it = kAliases.find(alias_key(alias));
  if (it == kAliases.end()) return std::nullopt;
  return it->second;
}

double property_value(const MofRecord& r, const std::string& key) {
  if (key == "pld") return r.pore.pld;
  if (key == "lcd") return r.pore.lcd;
  if (key == "density") return r.pore.density;
  if (key == "vsa") return r.pore.vsa;
  if (key == "gsa") return r.pore.gsa;
  if (key == "void_fraction") return r.pore.void_fraction;
  if (key == "molecular_weight") return r.molecular_weight;
  if (key == "a") return r.a;
  if (key == "b") return r.b;
  if (key == "c") return r.c;
  if (key == "alpha") return r.alpha;
  if (key == "beta") return r.beta;
  if (key == "gamma") return r.gamma;
  throw Error(ErrorKind::UnknownProperty, "unknown property '" + key + "'");
}

PropertyFilter& PropertyFilter::between(const std::string& prop, std::optional<double> lo, std::optional<double> hi) {
  bounds[prop] = {lo, hi};
  return *this;
}

Store::LoadResult Store::load(const std::filesystem::path& path) { return parse(text::read_file(path)); }

Store::LoadResult Store::parse(std::string_view jsonl) {
  LoadResult result;
  std::vector<MofRecord> records;
  std::map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  for (const auto& line : text::split(jsonl, '\n')) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      result.errors.push_back({line_no, std::string(to_string(ErrorKind::SchemaViolation)), "line is not valid JSON"});
      continue;
    }
    try {
      MofRecord r = mof_record_from_json(j);
      std::string key = upper(r.ccdc_code);
      if (auto it = seen.find(key); it != seen.end()) {
        result.errors.push_back({line_no, std::string(to_string(ErrorKind::DuplicateKey)),
                                 "code " + r.ccdc_code + " already defined on line " + std::to_string(it->second)});
        continue;
      }
      seen.emplace(key, line_no);
      records.push_back(std::move(r));
    } catch (const Error& e) {
      result.errors.push_back({line_no, std::string(e.kind_name()), e.what()});
    } catch (const std::exception& e) {
      result.errors.push_back({line_no, std::string(to_string(ErrorKind::InvariantViolation)), e.what()});
    }
  }
  result.store = from_records(std::move(records));
  return result;
}

Store Store::from_records(std::vector<MofRecord> records) {
  Store s;
  std::sort(records.begin(), records.end(),
            [](const MofRecord& a, const MofRecord& b) { return upper(a.ccdc_code) < upper(b.ccdc_code); });
  s.records_ = std::move(records);
  for (std::size_t i = 0; i < s.records_.size(); ++i) {
    if (!s.by_code_.emplace(upper(s.records_[i].ccdc_code), i).second)
      throw Error(ErrorKind::DuplicateKey, "duplicate code " + s.records_[i].ccdc_code);
    for (const auto& p : properties()) s.by_property_[p.key].emplace(property_value(s.records_[i], p.key), i);
  }
  return s;
}

const MofRecord* Store::find(std::string_view code) const {
  auto it = by_code_.find(upper(text::trim(code)));
  return it == by_code_.end() ? nullptr : &records_[it->second];
}

std::vector<const MofRecord*> Store::find_by_doi(std::string_view doi) const {
  std::vector<const MofRecord*> out;
  for (const auto& r : records_)
    if (r.doi && text::iequals(*r.doi, doi)) out.push_back(&r);
  return out;
}

std::vector<const MofRecord*> Store::find_by_name(std::string_view name) const {
  std::vector<const MofRecord*> out;
  auto n = text::trim(name);
  if (n.empty()) return out;
  if (const auto* r = find(n)) return {r};
  for (const auto& r : records_) {
    bool hit = text::iequals(r.chemical_name, n);
    if (r.abbreviation) {
      const std::string& a = *r.abbreviation;
      hit = hit || text::iequals(a, n) ||
            (a.size() > n.size() && text::starts_with_icase(a, n) &&
             !std::isalnum(static_cast<unsigned char>(a[n.size()])));
    }
    if (hit) out.push_back(&r);
  }
  return out;
}

std::vector<const MofRecord*> Store::query(const PropertyFilter& filter) const {
  std::vector<std::pair<std::string, std::pair<std::optional<double>, std::optional<double>>>> bounds;
  for (const auto& [name, b] : filter.bounds) {
    auto key = canonical_property(name);
    if (!key) throw Error(ErrorKind::UnknownProperty, "unknown property '" + name + "'");
    bounds.emplace_back(*key, b);
  }
  std::vector<std::size_t> candidates;
  if (bounds.empty()) {
    for (std::size_t i = 0; i < records_.size(); ++i) candidates.push_back(i);
  } else {
    // Range-scan the first bound through its ordered index, check the rest per record.
    const auto& [key, b] = bounds.front();
    const auto& idx = by_property_.at(key);
    auto lo = b.first ? idx.lower_bound(*b.first) : idx.begin();
    auto hi = b.second ? idx.upper_bound(*b.second) : idx.end();
    for (auto it = lo; it != hi && (b.first || b.second || true); ++it) {
      if (b.first && b.second && *b.first > *b.second) break;
      candidates.push_back(it->second);
    }
    std::sort(candidates.begin(), candidates.end());
  }
  std::vector<const MofRecord*> out;
  for (std::size_t i : candidates) {
    bool ok = true;
    for (const auto& [key, b] : bounds) {
      double v = property_value(records_[i], key);
      if ((b.first && v < *b.first) || (b.second && v > *b.second)) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(&records_[i]);
  }
  return out;
}

AggregateResult Store::aggregate_over(const std::vector<const MofRecord*>& subset, const std::string& prop,
                                      AggregateOp op) const {
  auto key = canonical_property(prop);
  if (!key) throw Error(ErrorKind::UnknownProperty, "unknown property '" + prop + "'");
  if (subset.empty()) throw Error(ErrorKind::EmptyStore, "no records to aggregate");
  AggregateResult r;
  r.count = subset.size();
  switch (op) {
    case AggregateOp::Mean: {
      std::vector<double> xs;
      for (const auto* rec : subset) xs.push_back(property_value(*rec, *key));
      r.value = compensated_sum(xs) / static_cast<double>(xs.size());
      break;
    }
    case AggregateOp::Max:
    case AggregateOp::Min: {
      bool want_max = op == AggregateOp::Max;
      r.value = property_value(*subset.front(), *key);
      for (const auto* rec : subset) {
        double v = property_value(*rec, *key);
        if (want_max ? v > r.value : v < r.value) r.value = v;
      }
      for (const auto* rec : subset)
        if (property_value(*rec, *key) == r.value) r.witnesses.push_back(rec->ccdc_code);
      std::sort(r.witnesses.begin(), r.witnesses.end());
      break;
    }
    case AggregateOp::CountIf:
      r.value = static_cast<double>(subset.size());
      break;
  }
  return r;
}

AggregateResult Store::aggregate(const std::string& prop, AggregateOp op, const PropertyFilter& filter) const {
  if (records_.empty()) throw Error(ErrorKind::EmptyStore, "the store is empty");
  if (!canonical_property(prop)) throw Error(ErrorKind::UnknownProperty, "unknown property '" + prop + "'");
  if (op == AggregateOp::CountIf) {
    AggregateResult r;
    auto hits = query(filter);
    r.count = records_.size();
    r.value = static_cast<double>(hits.size());
    return r;
  }
  std::vector<const MofRecord*> all;
  for (const auto& rec : records_) all.push_back(&rec);
  return aggregate_over(all, prop, op);
}

std::vector<HistogramBin> Store::histogram(const std::string& prop, double bin_width) const {
  if (records_.empty()) throw Error(ErrorKind::EmptyStore, "the store is empty");
  if (!(bin_width > 0)) throw Error(ErrorKind::InvalidRequest, "bin width must be positive");
  auto key = canonical_property(prop);
  if (!key) throw Error(ErrorKind::UnknownProperty, "unknown property '" + prop + "'");
  const auto& idx = by_property_.at(*key);
  double first = std::floor(idx.begin()->first / bin_width);
  double last = std::floor(idx.rbegin()->first / bin_width);
  std::vector<HistogramBin> bins;
  for (double k = first; k <= last; k += 1) bins.push_back({k * bin_width, (k + 1) * bin_width, 0});
  for (const auto& [v, i] : idx) {
    auto b = static_cast<std::size_t>(std::floor(v / bin_width) - first);
    ++bins[std::min(b, bins.size() - 1)].count;
  }
  return bins;
}

// ---- CIF ----

namespace {

struct CifToken {
  std::string text;
  bool quoted = false;
};

std::vector<CifToken> cif_tokens(std::string_view src) {
  std::vector<CifToken> out;
  auto lines = text::split(text::replace_all(std::string(src), "\r\n", "\n"), '\n');
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string& line = lines[li];
    if (!line.empty() && line[0] == ';') {
      std::string field = line.substr(1);
      while (++li < lines.size() && !(lines[li].size() > 0 && lines[li][0] == ';')) field += "\n" + lines[li];
      out.push_back({std::string(text::trim(field)), true});
      continue;
    }
    std::size_t i = 0;
    while (i < line.size()) {
      char c = line[i];
      if (c == ' ' || c == '\t') {
        ++i;
        continue;
      }
      if (c == '#') break;
      if (c == '\'' || c == '"') {
        std::size_t j = i + 1;
        while (j < line.size() && !(line[j] == c && (j + 1 == line.size() || line[j + 1] == ' ' || line[j + 1] == '\t')))
          ++j;
        out.push_back({line.substr(i + 1, j - i - 1), true});
        i = j + 1;
        continue;
      }
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      out.push_back({line.substr(i, j - i), false});
      i = j;
    }
  }
  return out;
}

bool is_tag(const CifToken& t) { return !t.quoted && !t.text.empty() && t.text[0] == '_'; }
bool is_keyword(const CifToken& t, std::string_view kw) {
  return !t.quoted && text::starts_with_icase(t.text, kw);
}

std::string element_from(std::string_view raw) {
  std::string s;
  for (char c : raw) {
    if (!std::isalpha(static_cast<unsigned char>(c))) break;
    s += c;
  }
  if (s.empty()) return "";
  s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  if (s.size() >= 2) {
    std::string two = s.substr(0, 1) + static_cast<char>(std::tolower(static_cast<unsigned char>(s[1])));
    if (chem::is_element(two)) return two;
  }
  std::string one = s.substr(0, 1);
  return chem::is_element(one) ? one : "";
}

}  // namespace

CifModel parse_cif(std::string_view src) {
  auto toks = cif_tokens(src);
  CifModel model;
  std::map<std::string, std::string> tags;
  struct Loop {
    std::vector<std::string> names;
    std::vector<std::string> values;
  };
  std::vector<Loop> loops;
  bool seen_block = false;
  for (std::size_t i = 0; i < toks.size();) {
    const auto& t = toks[i];
    if (is_keyword(t, "data_")) {
      if (seen_block) break;  // only the first data block is read
      seen_block = true;
      std::string name = t.text.substr(5);
      if (!name.empty()) model.title = name;
      ++i;
    } else if (is_keyword(t, "loop_")) {
      Loop loop;
      ++i;
      while (i < toks.size() && is_tag(toks[i])) loop.names.push_back(text::to_lower(toks[i++].text));
      while (i < toks.size() && !is_tag(toks[i]) && !is_keyword(toks[i], "loop_") && !is_keyword(toks[i], "data_"))
        loop.values.push_back(toks[i++].text);
      if (loop.names.empty() || loop.values.size() % loop.names.size() != 0)
        throw Error(ErrorKind::MalformedLoop, "loop with " + std::to_string(loop.names.size()) + " columns has " +
                                                  std::to_string(loop.values.size()) + " values");
      loops.push_back(std::move(loop));
    } else if (is_tag(t)) {
      std::string name = text::to_lower(t.text);
      if (i + 1 < toks.size() && !is_tag(toks[i + 1]) && !is_keyword(toks[i + 1], "loop_")) {
        tags[name] = toks[i + 1].text;
        i += 2;
      } else {
        ++i;
      }
    } else {
      ++i;
    }
  }

  auto cell_value = [&](const char* tag) {
    auto it = tags.find(tag);
    if (it == tags.end()) throw Error(ErrorKind::MissingCellBlock, std::string("CIF lacks ") + tag);
    auto v = text::parse_decimal(it->second);
    if (!v) throw Error(ErrorKind::MissingCellBlock, std::string("unreadable ") + tag + " '" + it->second + "'");
    return *v;
  };
  model.cell.a = cell_value("_cell_length_a");
  model.cell.b = cell_value("_cell_length_b");
  model.cell.c = cell_value("_cell_length_c");
  model.cell.alpha = cell_value("_cell_angle_alpha");
  model.cell.beta = cell_value("_cell_angle_beta");
  model.cell.gamma = cell_value("_cell_angle_gamma");
  for (const char* sg : {"_symmetry_space_group_name_h-m", "_space_group_name_h-m_alt"})
    if (auto it = tags.find(sg); it != tags.end() && it->second != "?" && it->second != ".") {
      model.cell.space_group_canonical = match::canonical_space_group(it->second);
      break;
    }
  for (const char* cs : {"_space_group_crystal_system", "_symmetry_cell_setting"})
    if (auto it = tags.find(cs); it != tags.end()) {
      model.cell.crystal_system = parse_crystal_system(it->second);
      if (model.cell.crystal_system) break;
    }
  if (auto it = tags.find("_chemical_formula_sum"); it != tags.end()) {
    if (auto comp = chem::try_parse_formula(it->second)) {
      model.cell.elements = *comp;
      model.cell.formula = it->second;
    }
  }

  for (const auto& loop : loops) {
    auto col = [&](const char* name) -> std::optional<std::size_t> {
      auto it = std::find(loop.names.begin(), loop.names.end(), name);
      if (it == loop.names.end()) return std::nullopt;
      return static_cast<std::size_t>(it - loop.names.begin());
    };
    auto fx = col("_atom_site_fract_x"), fy = col("_atom_site_fract_y"), fz = col("_atom_site_fract_z");
    if (!fx && !fy && !fz) continue;
    if (!fx || !fy || !fz) throw Error(ErrorKind::MalformedLoop, "atom_site loop lacks a fractional coordinate column");
    auto label = col("_atom_site_label");
    auto type = col("_atom_site_type_symbol");
    if (!label && !type) throw Error(ErrorKind::MalformedLoop, "atom_site loop has neither label nor type_symbol");
    std::size_t width = loop.names.size();
    for (std::size_t r = 0; r < loop.values.size() / width; ++r) {
      auto v = [&](std::size_t c) { return loop.values[r * width + c]; };
      CifAtom atom;
      atom.label = label ? v(*label) : "";
      atom.element = element_from(type ? v(*type) : v(*label));
      if (atom.element.empty())
        throw Error(ErrorKind::MalformedLoop, "row " + std::to_string(r + 1) + " has no valid element symbol");
      auto coord = [&](std::size_t c) {
        auto x = text::parse_decimal(v(c));
        if (!x || !std::isfinite(*x))
          throw Error(ErrorKind::MalformedLoop, "row " + std::to_string(r + 1) + " has coordinate '" + v(c) + "'");
        return *x;
      };
      atom.x = coord(*fx);
      atom.y = coord(*fy);
      atom.z = coord(*fz);
      model.atoms.push_back(std::move(atom));
    }
  }
  return model;
}

std::string emit_cif(const CifModel& m) {
  std::string title = m.title.value_or("structure");
  for (char& c : title)
    if (c == ' ' || c == '\t') c = '_';
  std::string out = "data_" + title + "\n";
  auto num = [](const std::optional<double>& v) { return v ? text::format_number(*v) : std::string("?"); };
  out += "_cell_length_a " + num(m.cell.a) + "\n";
  out += "_cell_length_b " + num(m.cell.b) + "\n";
  out += "_cell_length_c " + num(m.cell.c) + "\n";
  out += "_cell_angle_alpha " + num(m.cell.alpha) + "\n";
  out += "_cell_angle_beta " + num(m.cell.beta) + "\n";
  out += "_cell_angle_gamma " + num(m.cell.gamma) + "\n";
  if (m.cell.space_group_canonical) out += "_symmetry_space_group_name_H-M '" + *m.cell.space_group_canonical + "'\n";
  if (m.cell.crystal_system) out += "_space_group_crystal_system " + std::string(to_string(*m.cell.crystal_system)) + "\n";
  if (!m.cell.formula.empty()) out += "_chemical_formula_sum '" + m.cell.formula + "'\n";
  out += "loop_\n_atom_site_label\n_atom_site_type_symbol\n_atom_site_fract_x\n_atom_site_fract_y\n_atom_site_fract_z\n";
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    const auto& a = m.atoms[i];
    std::string label = a.label.empty() ? a.element + std::to_string(i + 1) : a.label;
    out += label + " " + a.element + " " + text::format_number(a.x) + " " + text::format_number(a.y) + " " +
           text::format_number(a.z) + "\n";
  }
  return out;
}

namespace {

// Exact values at the common special angles keep orthogonal cells diagonal.
double cos_deg(double deg) {
  if (deg == 90) return 0;
  if (deg == 60) return 0.5;
  if (deg == 120) return -0.5;
  return std::cos(deg * std::numbers::pi / 180.0);
}

double sin_deg(double deg) {
  if (deg == 90) return 1;
  return std::sin(deg * std::numbers::pi / 180.0);
}

}  // namespace

std::array<std::array<double, 3>, 3> lattice_vectors(const CellParameters& cell) {
  double a = cell.a.value_or(0), b = cell.b.value_or(0), c = cell.c.value_or(0);
  double ca = cos_deg(cell.alpha.value_or(90)), cb = cos_deg(cell.beta.value_or(90)),
         cg = cos_deg(cell.gamma.value_or(90)), sg = sin_deg(cell.gamma.value_or(90));
  double cx = cb;
  double cy = (ca - cb * cg) / sg;
  double cz = std::sqrt(std::max(0.0, 1 - cx * cx - cy * cy));
  return {{{a, 0, 0}, {b * cg, b * sg, 0}, {c * cx, c * cy, c * cz}}};
}

json viz_payload(const CifModel& m) {
  auto v = lattice_vectors(m.cell);
  json atoms = json::array();
  std::vector<std::array<double, 3>> cart;
  for (const auto& a : m.atoms) {
    std::array<double, 3> p{};
    for (int k = 0; k < 3; ++k) p[k] = a.x * v[0][k] + a.y * v[1][k] + a.z * v[2][k];
    cart.push_back(p);
    atoms.push_back({{"element", a.element}, {"label", a.label}, {"x", p[0]}, {"y", p[1]}, {"z", p[2]}});
  }
  json bonds = json::array();
  for (std::size_t i = 0; i < cart.size(); ++i)
    for (std::size_t j = i + 1; j < cart.size(); ++j) {
      double dx = cart[i][0] - cart[j][0], dy = cart[i][1] - cart[j][1], dz = cart[i][2] - cart[j][2];
      double d = std::sqrt(dx * dx + dy * dy + dz * dz);
      double cutoff = 1.2 * (chem::covalent_radius(m.atoms[i].element) + chem::covalent_radius(m.atoms[j].element));
      if (d > 0 && d <= cutoff) bonds.push_back({i, j});
    }
  json cell = {{"a", m.cell.a.value_or(0)},         {"b", m.cell.b.value_or(0)},
               {"c", m.cell.c.value_or(0)},         {"alpha", m.cell.alpha.value_or(90)},
               {"beta", m.cell.beta.value_or(90)},  {"gamma", m.cell.gamma.value_or(90)},
               {"vectors", {{v[0][0], v[0][1], v[0][2]}, {v[1][0], v[1][1], v[1][2]}, {v[2][0], v[2][1], v[2][2]}}}};
  json out = {{"cell", cell}, {"atoms", atoms}, {"bonds", bonds}};
  out["title"] = m.title ? json(*m.title) : json(nullptr);
  out["space_group"] = m.cell.space_group_canonical ? json(*m.cell.space_group_canonical) : json(nullptr);
  return out;
}

std::optional<std::filesystem::path> CifStore::find(std::string_view code) const {
  std::string want = text::to_upper(text::trim(code));
  if (want.empty() || want.find_first_of("/\\.") != std::string::npos) return std::nullopt;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir_, ec)) {
    if (!entry.is_regular_file()) continue;
    auto p = entry.path();
    if (text::iequals(p.extension().string(), ".cif") && text::to_upper(p.stem().string()) == want) return p;
  }
  return std::nullopt;
}

}  // namespace mofh6::dataset
