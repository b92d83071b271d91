#pragma once

// Periodic-table data and a chemical formula tokenizer.

#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace mofh6::chem {

struct ElementInfo {
  std::string_view symbol;
  std::string_view name;  // lowercase English name
  double covalent_radius;  // Å; 0 when no tabulated value
};

std::optional<ElementInfo> element(std::string_view symbol);
bool is_element(std::string_view symbol);

/// Elements outside {H, B, C, N, O, Si, P, S, Se, halogens, noble gases}.
bool is_metal(std::string_view symbol);

/// True when `word` (any case) is the English name of a metal element or a
/// common salt-name stem such as "cupric" or "ferrous".
bool is_metal_name(std::string_view word);

double covalent_radius(std::string_view symbol);

/// Element symbol -> count; ordered by symbol for deterministic iteration.
using Composition = std::map<std::string, double>;

/// Parses formulas such as "C6H12O6", "Zn4O(C8H4O4)3", "Zn(NO3)2·6H2O" and
/// table-style "C24 H12 O13 Zn4". Throws Error(UnparseableFormula).
Composition parse_formula(std::string_view formula);
std::optional<Composition> try_parse_formula(std::string_view formula);

/// The sub-composition restricted to metal elements.
Composition metals_of(const Composition& c);

/// Hill-order string (C, H, then alphabetical; alphabetical when no carbon).
std::string hill_formula(const Composition& c);

}  // namespace mofh6::chem
