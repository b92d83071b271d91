#include "mofh6/chem.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <vector>

#include "mofh6/error.hpp"
#include "mofh6/text.hpp"

namespace mofh6::chem {

namespace {

// Covalent radii: Cordero et al. single-bond values (low-spin where split).
constexpr std::array<ElementInfo, 118> kElements = {{
    {"H", "hydrogen", 0.31},     {"He", "helium", 0.28},      {"Li", "lithium", 1.28},
    {"Be", "beryllium", 0.96},   {"B", "boron", 0.84},        {"C", "carbon", 0.76},
    {"N", "nitrogen", 0.71},     {"O", "oxygen", 0.66},       {"F", "fluorine", 0.57},
    {"Ne", "neon", 0.58},        {"Na", "sodium", 1.66},      {"Mg", "magnesium", 1.41},
    {"Al", "aluminium", 1.21},   {"Si", "silicon", 1.11},     {"P", "phosphorus", 1.07},
    {"S", "sulfur", 1.05},       {"Cl", "chlorine", 1.02},    {"Ar", "argon", 1.06},
    {"K", "potassium", 2.03},    {"Ca", "calcium", 1.76},     {"Sc", "scandium", 1.70},
    {"Ti", "titanium", 1.60},    {"V", "vanadium", 1.53},     {"Cr", "chromium", 1.39},
    {"Mn", "manganese", 1.39},   {"Fe", "iron", 1.32},        {"Co", "cobalt", 1.26},
    {"Ni", "nickel", 1.24},      {"Cu", "copper", 1.32},      {"Zn", "zinc", 1.22},
    {"Ga", "gallium", 1.22},     {"Ge", "germanium", 1.20},   {"As", "arsenic", 1.19},
    {"Se", "selenium", 1.20},    {"Br", "bromine", 1.20},     {"Kr", "krypton", 1.16},
    {"Rb", "rubidium", 2.20},    {"Sr", "strontium", 1.95},   {"Y", "yttrium", 1.90},
    {"Zr", "zirconium", 1.75},   {"Nb", "niobium", 1.64},     {"Mo", "molybdenum", 1.54},
    {"Tc", "technetium", 1.47},  {"Ru", "ruthenium", 1.46},   {"Rh", "rhodium", 1.42},
    {"Pd", "palladium", 1.39},   {"Ag", "silver", 1.45},      {"Cd", "cadmium", 1.44},
    {"In", "indium", 1.42},      {"Sn", "tin", 1.39},         {"Sb", "antimony", 1.39},
    {"Te", "tellurium", 1.38},   {"I", "iodine", 1.39},       {"Xe", "xenon", 1.40},
    {"Cs", "caesium", 2.44},     {"Ba", "barium", 2.15},      {"La", "lanthanum", 2.07},
    {"Ce", "cerium", 2.04},      {"Pr", "praseodymium", 2.03}, {"Nd", "neodymium", 2.01},
    {"Pm", "promethium", 1.99},  {"Sm", "samarium", 1.98},    {"Eu", "europium", 1.98},
    {"Gd", "gadolinium", 1.96},  {"Tb", "terbium", 1.94},     {"Dy", "dysprosium", 1.92},
    {"Ho", "holmium", 1.92},     {"Er", "erbium", 1.89},      {"Tm", "thulium", 1.90},
    {"Yb", "ytterbium", 1.87},   {"Lu", "lutetium", 1.87},    {"Hf", "hafnium", 1.75},
    {"Ta", "tantalum", 1.70},    {"W", "tungsten", 1.62},     {"Re", "rhenium", 1.51},
    {"Os", "osmium", 1.44},      {"Ir", "iridium", 1.41},     {"Pt", "platinum", 1.36},
    {"Au", "gold", 1.36},        {"Hg", "mercury", 1.32},     {"Tl", "thallium", 1.45},
    {"Pb", "lead", 1.46},        {"Bi", "bismuth", 1.48},     {"Po", "polonium", 1.40},
    {"At", "astatine", 1.50},    {"Rn", "radon", 1.50},       {"Fr", "francium", 2.60},
    {"Ra", "radium", 2.21},      {"Ac", "actinium", 2.15},    {"Th", "thorium", 2.06},
    {"Pa", "protactinium", 2.00}, {"U", "uranium", 1.96},     {"Np", "neptunium", 1.90},
    {"Pu", "plutonium", 1.87},   {"Am", "americium", 1.80},   {"Cm", "curium", 1.69},
    {"Bk", "berkelium", 0},      {"Cf", "californium", 0},    {"Es", "einsteinium", 0},
    {"Fm", "fermium", 0},        {"Md", "mendelevium", 0},    {"No", "nobelium", 0},
    {"Lr", "lawrencium", 0},     {"Rf", "rutherfordium", 0},  {"Db", "dubnium", 0},
    {"Sg", "seaborgium", 0},     {"Bh", "bohrium", 0},        {"Hs", "hassium", 0},
    {"Mt", "meitnerium", 0},     {"Ds", "darmstadtium", 0},   {"Rg", "roentgenium", 0},
    {"Cn", "copernicium", 0},    {"Nh", "nihonium", 0},       {"Fl", "flerovium", 0},
    {"Mc", "moscovium", 0},      {"Lv", "livermorium", 0},    {"Ts", "tennessine", 0},
    {"Og", "oganesson", 0},
}};

constexpr std::array<std::string_view, 20> kNonMetals = {
    "H", "He", "B", "C", "N", "O", "F", "Ne", "Si", "P",
    "S", "Cl", "Ar", "Se", "Br", "Kr", "I", "Xe", "Rn", "Og"};

constexpr std::array<std::string_view, 14> kMetalStems = {
    "cupric", "cuprous", "ferric", "ferrous", "cobaltous", "cobaltic", "nickelous",
    "stannous", "stannic", "plumbous", "mercuric", "aluminum", "cesium", "argentous"};

constexpr double kDefaultRadius = 1.50;

bool is_hydrate_dot(std::string_view s, std::size_t pos, std::size_t& len) {
  // U+00B7 middle dot, U+2022 bullet, U+22C5 dot operator, ASCII '*'.
  if (s.compare(pos, 2, "\xC2\xB7") == 0) { len = 2; return true; }
  if (s.compare(pos, 3, "\xE2\x80\xA2") == 0) { len = 3; return true; }
  if (s.compare(pos, 3, "\xE2\x8B\x85") == 0) { len = 3; return true; }
  if (s[pos] == '*') { len = 1; return true; }
  return false;
}

class FormulaParser {
 public:
  explicit FormulaParser(std::string_view s) : s_(s) {}

  Composition parse() {
    Composition total;
    bool first = true;
    while (true) {
      skip_space();
      if (at_end()) break;
      std::size_t dot_len = 0;
      if (!first && (is_hydrate_dot(s_, pos_, dot_len) || s_[pos_] == '.')) {
        pos_ += dot_len ? dot_len : 1;
        skip_space();
      } else if (!first) {
        fail("unexpected character");
      }
      double mult = 1.0;
      if (!at_end() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) mult = number();
      Composition part = sequence(0);
      if (part.empty()) fail("empty component");
      for (auto& [el, n] : part) total[el] += n * mult;
      first = false;
    }
    if (total.empty()) fail("no elements");
    return total;
  }

 private:
  bool at_end() const { return pos_ >= s_.size(); }
  void skip_space() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(ErrorKind::UnparseableFormula,
                "cannot parse formula '" + std::string(s_) + "': " + why);
  }

  double number() {
    std::size_t start = pos_;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (!at_end() && s_[pos_] == '.' && pos_ + 1 < s_.size() &&
        std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) && !hydrate_follows()) {
      ++pos_;
      while (!at_end() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    double v = 0;
    std::from_chars(s_.data() + start, s_.data() + pos_, v);
    return v;
  }

  // "Zn(NO3)2.6H2O": '.' + digits + "H2O" or a bracket is a hydrate separator,
  // anything else ("C18.5H20") is a decimal count.
  bool hydrate_follows() const {
    std::size_t p = pos_ + 1;
    while (p < s_.size() && std::isdigit(static_cast<unsigned char>(s_[p]))) ++p;
    return p < s_.size() && (s_.compare(p, 3, "H2O") == 0 || s_[p] == '(');
  }

  Composition sequence(int depth) {
    Composition comp;
    while (true) {
      // Table-style formulas separate element groups with spaces.
      while (!at_end() && s_[pos_] == ' ' && depth == 0 && pos_ + 1 < s_.size() &&
             (std::isupper(static_cast<unsigned char>(s_[pos_ + 1])) || s_[pos_ + 1] == '('))
        ++pos_;
      if (at_end()) break;
      char c = s_[pos_];
      if (c == '(' || c == '[' || c == '{') {
        char close = c == '(' ? ')' : c == '[' ? ']' : '}';
        ++pos_;
        Composition inner = sequence(depth + 1);
        if (at_end() || s_[pos_] != close) fail("unbalanced bracket");
        ++pos_;
        double mult = 1.0;
        if (!at_end() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) mult = number();
        for (auto& [el, n] : inner) comp[el] += n * mult;
      } else if (std::isupper(static_cast<unsigned char>(c))) {
        std::string sym(1, c);
        ++pos_;
        if (!at_end() && std::islower(static_cast<unsigned char>(s_[pos_])) &&
            is_element(sym + s_[pos_])) {
          sym += s_[pos_];
          ++pos_;
        }
        if (!is_element(sym)) fail("unknown element " + sym);
        double n = 1.0;
        if (!at_end() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) n = number();
        if (n <= 0) fail("non-positive count for " + sym);
        comp[sym] += n;
      } else {
        break;
      }
    }
    return comp;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::optional<ElementInfo> element(std::string_view symbol) {
  for (const auto& e : kElements)
    if (e.symbol == symbol) return e;
  return std::nullopt;
}

bool is_element(std::string_view symbol) { return element(symbol).has_value(); }

bool is_metal(std::string_view symbol) {
  return is_element(symbol) &&
         std::find(kNonMetals.begin(), kNonMetals.end(), symbol) == kNonMetals.end();
}

bool is_metal_name(std::string_view word) {
  std::string w = text::to_lower(word);
  if (std::find(kMetalStems.begin(), kMetalStems.end(), w) != kMetalStems.end()) return true;
  for (const auto& e : kElements)
    if (e.name == w) return is_metal(e.symbol);
  return false;
}

double covalent_radius(std::string_view symbol) {
  auto e = element(symbol);
  return e && e->covalent_radius > 0 ? e->covalent_radius : kDefaultRadius;
}

Composition parse_formula(std::string_view formula) {
  std::string_view f = text::trim(formula);
  if (f.empty()) throw Error(ErrorKind::UnparseableFormula, "empty formula");
  text::Flattened flat = text::flatten_subscripts(f);
  return FormulaParser(flat.text).parse();
}

std::optional<Composition> try_parse_formula(std::string_view formula) {
  try {
    return parse_formula(formula);
  } catch (const Error&) {
    return std::nullopt;
  }
}

Composition metals_of(const Composition& c) {
  Composition out;
  for (const auto& [el, n] : c)
    if (is_metal(el)) out.emplace(el, n);
  return out;
}

std::string hill_formula(const Composition& c) {
  std::string out;
  auto emit = [&](const std::string& el, double n) {
    out += el;
    if (n != 1.0) out += text::format_number(n);
  };
  bool has_carbon = c.count("C") > 0;
  if (has_carbon) {
    emit("C", c.at("C"));
    if (c.count("H")) emit("H", c.at("H"));
  }
  for (const auto& [el, n] : c) {
    if (has_carbon && (el == "C" || el == "H")) continue;
    emit(el, n);
  }
  return out;
}

}  // namespace mofh6::chem
