#pragma once

// Small text helpers shared by the extraction, matching and evaluation code.

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mofh6::text {

struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

// UTF-8
char32_t decode_utf8(std::string_view s, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);
bool is_valid_utf8(std::string_view s);

std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::string_view trim(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool starts_with_icase(std::string_view s, std::string_view prefix);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string replace_all(std::string s, std::string_view from, std::string_view to);

/// Text with Unicode subscript digits (₀-₉) mapped to ASCII digits, plus the
/// byte offset in the original string of every byte in the flattened one.
struct Flattened {
  std::string text;
  std::vector<std::size_t> origin;  // origin.size() == text.size() + 1
};
Flattened flatten_subscripts(std::string_view s);

/// Sentence boundaries. A sentence ends at . ! or ? followed by whitespace and
/// an uppercase letter, digit or opening bracket, unless the terminator closes a
/// known abbreviation ("Anal.", "Calcd.", "e.g.", "ca.") or a single initial.
std::vector<Span> split_sentences(std::string_view s);

/// Parses a decimal number written the way crystallographic tables do:
/// surrounding whitespace, a trailing standard uncertainty "(4)", Unicode minus.
/// Units and other trailing text are not accepted.
std::optional<double> parse_decimal(std::string_view s);

/// Shortest representation that round-trips.
std::string format_number(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// RFC 3339 UTC timestamp with second precision.
std::string rfc3339(std::chrono::system_clock::time_point tp);

}  // namespace mofh6::text
