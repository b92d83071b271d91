#include "mofh6/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <ctime>
#include <fstream>
#include <sstream>

#include "mofh6/error.hpp"

namespace mofh6::text {

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  unsigned char c = byte(pos);
  if (c < 0x80) {
    ++pos;
    return c;
  }
  int len = 0;
  char32_t cp = 0;
  if ((c & 0xE0) == 0xC0) {
    len = 2;
    cp = c & 0x1F;
  } else if ((c & 0xF0) == 0xE0) {
    len = 3;
    cp = c & 0x0F;
  } else if ((c & 0xF8) == 0xF0) {
    len = 4;
    cp = c & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + len > s.size()) {
    pos = s.size();
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    unsigned char cc = byte(pos + k);
    if ((cc & 0xC0) != 0x80) {
      pos += k;
      return 0xFFFD;
    }
    cp = (cp << 6) | (cc & 0x3F);
  }
  pos += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_valid_utf8(std::string_view s) {
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t before = pos;
    char32_t cp = decode_utf8(s, pos);
    if (cp == 0xFFFD) {
      // U+FFFD itself is legal when encoded as EF BF BD.
      if (!(pos - before == 3 && s.substr(before, 3) == "\xEF\xBF\xBD")) return false;
    }
  }
  return true;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  }
  return true;
}

bool starts_with_icase(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && iequals(s.substr(0, prefix.size()), prefix);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  if (from.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

Flattened flatten_subscripts(std::string_view s) {
  Flattened f;
  f.text.reserve(s.size());
  f.origin.reserve(s.size() + 1);
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t start = pos;
    char32_t cp = decode_utf8(s, pos);
    if (cp >= U'₀' && cp <= U'₉') {
      f.text.push_back(static_cast<char>('0' + (cp - U'₀')));
      f.origin.push_back(start);
    } else {
      for (std::size_t k = start; k < pos; ++k) {
        f.text.push_back(s[k]);
        f.origin.push_back(k);
      }
    }
  }
  f.origin.push_back(s.size());
  return f;
}

namespace {

bool is_abbreviation_word(std::string_view word) {
  static const std::array<std::string_view, 20> kAbbrev = {
      "Anal", "anal", "Calcd", "calcd", "Calc", "calc", "ca", "approx", "Fig", "Figs",
      "fig", "Ref", "Refs", "ref", "vs", "al", "Eq", "Eqs", "eq", "No"};
  if (word.size() == 1 && std::isalpha(static_cast<unsigned char>(word[0]))) return true;
  return std::find(kAbbrev.begin(), kAbbrev.end(), word) != kAbbrev.end();
}

bool starts_sentence(unsigned char c) {
  return std::isupper(c) || std::isdigit(c) || c == '(' || c == '[' || c == '"' || c >= 0x80;
}

}  // namespace

std::vector<Span> split_sentences(std::string_view s) {
  std::vector<Span> out;
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  std::size_t n = s.size();
  std::size_t start = 0;
  while (start < n && is_space(s[start])) ++start;
  for (std::size_t i = start; i < n; ++i) {
    char c = s[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t j = i + 1;
    if (j >= n || !is_space(s[j])) continue;
    std::size_t k = j;
    while (k < n && is_space(s[k])) ++k;
    if (k < n && !starts_sentence(static_cast<unsigned char>(s[k]))) continue;
    if (c == '.') {
      std::size_t w = i;
      while (w > 0 && std::isalnum(static_cast<unsigned char>(s[w - 1]))) --w;
      auto word = s.substr(w, i - w);
      // A lone letter is an initial unless it is a unit: "120 °C." or "298 K."
      bool unit = false;
      if (word.size() == 1 && w > 0) {
        if (!is_space(s[w - 1])) {
          unit = true;
        } else {
          std::size_t p = w - 1;
          while (p > 0 && is_space(s[p - 1])) --p;
          unit = p > 0 && std::isdigit(static_cast<unsigned char>(s[p - 1]));
        }
      }
      if (!unit && is_abbreviation_word(word)) continue;
    }
    if (i + 1 > start) out.push_back({start, i + 1});
    start = k;
    i = k == 0 ? 0 : k - 1;
  }
  std::size_t end = n;
  while (end > start && is_space(s[end - 1])) --end;
  if (end > start) out.push_back({start, end});
  return out;
}

std::optional<double> parse_decimal(std::string_view s) {
  std::string t(trim(s));
  t = replace_all(std::move(t), "\xE2\x88\x92", "-");  // U+2212 minus
  if (!t.empty() && t.back() == ')') {
    auto open = t.rfind('(');
    if (open == std::string::npos || open == 0) return std::nullopt;
    std::string_view inner(t.data() + open + 1, t.size() - open - 2);
    if (inner.empty() || !std::all_of(inner.begin(), inner.end(),
                                      [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
      return std::nullopt;
    t.resize(open);
    t = std::string(trim(t));
  }
  if (!t.empty() && t.front() == '+') t.erase(0, 1);
  if (t.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf.data(), ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorKind::Io, "short write to " + path.string());
}

std::string rfc3339(std::chrono::system_clock::time_point tp) {
  std::time_t t = std::chrono::system_clock::to_time_t(tp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

}  // namespace mofh6::text
