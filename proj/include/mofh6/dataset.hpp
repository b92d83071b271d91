#pragma once

// Crystallographic + pore-property dataset: JSON-lines store with ordered
// per-property indexes, aggregates, and CIF parsing for the structure viewer.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mofh6/domain.hpp"

namespace mofh6::dataset {

struct PropertyInfo {
  std::string key;        // storage key: "pld"
  std::string display;    // answer/query form: "PLD (Å)"
  std::string range_key;  // short form used in range bounds: "PLD"
  std::string unit;       // "Å"
};

/// All numeric properties in a fixed order.
const std::vector<PropertyInfo>& properties();
const PropertyInfo& property(const std::string& key);  // throws UnknownProperty

/// Maps user-facing aliases ("pore limiting diameter", "PLD (Å)", "PLD Å",
/// "Accessible_Surface_Area (m2/cm3)") to a storage key.
std::optional<std::string> canonical_property(std::string_view alias);

double property_value(const MofRecord& r, const std::string& key);

struct LineError {
  std::size_t line = 0;  // 1-based
  std::string kind;
  std::string message;
};

/// Closed interval bounds keyed by property alias or storage key.
struct PropertyFilter {
  std::map<std::string, std::pair<std::optional<double>, std::optional<double>>> bounds;
  PropertyFilter& between(const std::string& property, std::optional<double> lo, std::optional<double> hi);
};

enum class AggregateOp { Mean, Max, Min, CountIf };

struct AggregateResult {
  double value = 0;
  std::vector<std::string> witnesses;  // codes attaining max/min, ordered by code
  std::size_t count = 0;               // records considered
};

struct HistogramBin {
  double lo = 0;
  double hi = 0;
  std::size_t count = 0;
};

class Store {
 public:
  struct LoadResult;

  /// Throws UnreadableFile; malformed lines are collected in LoadResult::errors.
  static LoadResult load(const std::filesystem::path& path);
  static LoadResult parse(std::string_view jsonl);
  /// Throws DuplicateKey.
  static Store from_records(std::vector<MofRecord> records);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<MofRecord>& records() const { return records_; }  // ordered by code

  /// Case-insensitive exact code lookup.
  const MofRecord* find(std::string_view code) const;
  std::vector<const MofRecord*> find_by_doi(std::string_view doi) const;
  /// Records whose code, chemical name or abbreviation equals `name`
  /// (case-insensitive), or whose abbreviation starts with `name` followed by
  /// a non-alphanumeric character ("MOF-5" finds "MOF-5(Zn)").
  std::vector<const MofRecord*> find_by_name(std::string_view name) const;

  /// Ordered by code. Throws UnknownProperty.
  std::vector<const MofRecord*> query(const PropertyFilter& filter) const;

  /// Throws EmptyStore or UnknownProperty. For CountIf, `filter` selects the records.
  AggregateResult aggregate(const std::string& property, AggregateOp op, const PropertyFilter& filter = {}) const;
  AggregateResult aggregate_over(const std::vector<const MofRecord*>& subset, const std::string& property,
                                 AggregateOp op) const;

  std::vector<HistogramBin> histogram(const std::string& property, double bin_width) const;

 private:
  std::vector<MofRecord> records_;
  std::map<std::string, std::size_t> by_code_;  // upper-cased code -> index
  std::map<std::string, std::multimap<double, std::size_t>> by_property_;
};

struct Store::LoadResult {
  Store store;
  std::vector<LineError> errors;
};

struct CifAtom {
  std::string label;
  std::string element;
  double x = 0, y = 0, z = 0;  // fractional
  bool operator==(const CifAtom&) const = default;
};

struct CifModel {
  CellParameters cell;
  std::vector<CifAtom> atoms;
  std::optional<std::string> title;
};

/// Throws MissingCellBlock or MalformedLoop.
CifModel parse_cif(std::string_view text);
/// Minimal tag set: cell, space group, atom_site loop.
std::string emit_cif(const CifModel& model);

/// Row-major lattice vectors (a, b, c) in Å: a along x, b in the xy plane.
std::array<std::array<double, 3>, 3> lattice_vectors(const CellParameters& cell);
json viz_payload(const CifModel& model);

/// Directory of <CODE>.cif files.
class CifStore {
 public:
  explicit CifStore(std::filesystem::path dir) : dir_(std::move(dir)) {}
  std::optional<std::filesystem::path> find(std::string_view code) const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
};

}  // namespace mofh6::dataset
