#include "mofh6/ingest.hpp"

#include <algorithm>
#include <regex>

#include "mofh6/error.hpp"
#include "mofh6/text.hpp"

namespace mofh6::ingest {

std::string_view to_string(Publisher p) {
  switch (p) {
    case Publisher::ACS: return "ACS";
    case Publisher::RSC: return "RSC";
    case Publisher::Elsevier: return "Elsevier";
    case Publisher::Wiley: return "Wiley";
    case Publisher::Springer: return "Springer";
    case Publisher::Unknown: return "Unknown";
  }
  return "Unknown";
}

Publisher parse_publisher(std::string_view s) {
  for (Publisher p : {Publisher::ACS, Publisher::RSC, Publisher::Elsevier, Publisher::Wiley, Publisher::Springer})
    if (text::iequals(s, to_string(p))) return p;
  return Publisher::Unknown;
}

std::vector<PublisherRoute> default_routes() {
  return {{"10.1021", Publisher::ACS, "local"},
          {"10.1039", Publisher::RSC, "local"},
          {"10.1016", Publisher::Elsevier, "local"},
          {"10.1002", Publisher::Wiley, "local"},
          {"10.1007", Publisher::Springer, "local"}};
}

std::vector<PublisherRoute> routes_from_json(const json& doc) {
  static const std::regex kPrefix(R"(^10\.\d{4,9}$)");
  std::vector<PublisherRoute> out;
  for (const auto& r : doc) {
    PublisherRoute route{r.at("doi_prefix").get<std::string>(), parse_publisher(r.value("publisher", "")),
                         r.value("fetcher_id", "local")};
    if (!std::regex_match(route.doi_prefix, kPrefix))
      throw Error(ErrorKind::InvalidConfig, "bad DOI prefix '" + route.doi_prefix + "'");
    out.push_back(std::move(route));
  }
  return out;
}

bool is_valid_doi(std::string_view doi) {
  static const std::regex kDoi(R"(^10\.\d{4,9}(\.\d+)*/\S+$)");
  return std::regex_match(doi.begin(), doi.end(), kDoi);
}

PublisherRoute route_doi(std::string_view doi, const std::vector<PublisherRoute>& table) {
  if (!is_valid_doi(doi)) throw Error(ErrorKind::MalformedDoi, "malformed DOI '" + std::string(doi) + "'");
  const PublisherRoute* best = nullptr;
  for (const auto& route : table) {
    const std::string& p = route.doi_prefix;
    if (p.empty() || doi.size() <= p.size() || doi.substr(0, p.size()) != p) continue;
    char next = doi[p.size()];
    if (next != '/' && next != '.') continue;
    if (!best || p.size() > best->doi_prefix.size()) best = &route;
  }
  if (best) return *best;
  return PublisherRoute{"", Publisher::Unknown, ""};
}

LocalCorpus LocalCorpus::load(const std::filesystem::path& manifest) {
  json doc = json::parse(text::read_file(manifest), nullptr, false);
  if (doc.is_discarded() || !doc.is_array())
    throw Error(ErrorKind::InvalidConfig, "corpus manifest must be a JSON array: " + manifest.string());
  auto base = manifest.parent_path();
  LocalCorpus corpus;
  for (const auto& e : doc) {
    CorpusEntry entry;
    entry.doi = e.at("doi").get<std::string>();
    entry.path = base / e.at("path").get<std::string>();
    if (e.contains("ccdc_codes"))
      for (const auto& c : e["ccdc_codes"]) entry.ccdc_codes.push_back(c.get<std::string>());
    if (e.contains("si"))
      for (const auto& p : e["si"]) entry.si_paths.push_back(base / p.get<std::string>());
    std::sort(entry.si_paths.begin(), entry.si_paths.end(),
              [](const auto& x, const auto& y) { return x.filename().string() < y.filename().string(); });
    corpus.entries_.push_back(std::move(entry));
  }
  return corpus;
}

const CorpusEntry* LocalCorpus::find_doi(std::string_view doi) const {
  for (const auto& e : entries_)
    if (text::iequals(e.doi, doi)) return &e;
  return nullptr;
}

const CorpusEntry* LocalCorpus::find_ccdc(std::string_view code) const {
  for (const auto& e : entries_)
    for (const auto& c : e.ccdc_codes)
      if (text::iequals(c, code)) return &e;
  return nullptr;
}

FetchResult LocalCorpusFetcher::fetch(const PublisherRoute&, std::string_view doi) {
  const CorpusEntry* entry = corpus_->find_doi(doi);
  if (!entry) throw Error(ErrorKind::NotInCorpus, "DOI '" + std::string(doi) + "' is not in the local corpus");
  FetchResult out;
  out.media_type = "text/plain";
  out.bytes = text::read_file(entry->path);
  for (const auto& si : entry->si_paths) {
    if (!out.bytes.empty() && out.bytes.back() != '\n') out.bytes += '\n';
    out.bytes += std::string(kSiMarker) + "\n";
    out.bytes += text::read_file(si);
  }
  return out;
}

void FetcherRegistry::add(std::string id, std::shared_ptr<Fetcher> fetcher) {
  fetchers_[std::move(id)] = std::move(fetcher);
}

Fetcher* FetcherRegistry::find(const std::string& id) const {
  auto it = fetchers_.find(id);
  return it == fetchers_.end() ? nullptr : it->second.get();
}

FetchResult fetch_document(const PublisherRoute& route, std::string_view doi, const FetcherRegistry& fetchers) {
  std::string context = std::string(to_string(route.publisher)) + " route" +
                        (route.doi_prefix.empty() ? "" : " " + route.doi_prefix) + " via fetcher '" +
                        route.fetcher_id + "'";
  Fetcher* fetcher = fetchers.find(route.fetcher_id);
  if (!fetcher) {
    // The Unknown route has no fetcher of its own; fall back to the local corpus.
    fetcher = fetchers.find("local");
    if (!fetcher || !route.fetcher_id.empty())
      throw Error(ErrorKind::FetchFailed, "no fetcher registered for " + context);
  }
  try {
    return fetcher->fetch(route, doi);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NotInCorpus) throw;
    throw Error(ErrorKind::FetchFailed, context + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorKind::FetchFailed, context + ": " + e.what());
  }
}

namespace {

bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

std::string fold_codepoints(std::string_view in) {
  std::string out;
  out.reserve(in.size());
  std::size_t pos = 0;
  while (pos < in.size()) {
    char32_t cp = text::decode_utf8(in, pos);
    switch (cp) {
      case U'ﬀ': out += "ff"; continue;
      case U'ﬁ': out += "fi"; continue;
      case U'ﬂ': out += "fl"; continue;
      case U'ﬃ': out += "ffi"; continue;
      case U'ﬄ': out += "ffl"; continue;
      case U'ﬅ':
      case U'ﬆ': out += "st"; continue;
      case U'­':  // soft hyphen
      case U'​':
      case U'‌':
      case U'‍':
      case U'⁠':
      case U'﻿': continue;
      case U'\r':
        if (pos < in.size() && in[pos] == '\n') continue;
        out += '\n';
        continue;
      case U'\n': out += '\n'; continue;
      case U' ':
      case U' ':
      case U' ':
      case U'　':
      case U' ':
      case U' ':
      case U'\t':
      case U'\v':
      case U'\f': out += ' '; continue;
      default: break;
    }
    if (cp >= 0x2000 && cp <= 0x200A) {
      out += ' ';
    } else if (cp < 0x20 || cp == 0x7F || (cp >= 0x80 && cp <= 0x9F)) {
      // other control characters are dropped
    } else {
      text::append_utf8(out, cp);
    }
  }
  return out;
}

std::string clean_once(std::string_view raw) {
  std::string s = fold_codepoints(raw);

  // Join words broken across lines: "syn-\nthesis" -> "synthesis".
  std::string joined;
  joined.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '-' && i + 1 < s.size() && s[i + 1] == '\n' && i > 0 && is_ascii_letter(s[i - 1]) &&
        i + 2 < s.size() && is_ascii_letter(s[i + 2])) {
      ++i;
      continue;
    }
    joined += s[i];
  }

  // Collapse spaces and drop them next to line breaks.
  std::string spaced;
  spaced.reserve(joined.size());
  for (char c : joined) {
    if (c == ' ') {
      if (spaced.empty() || spaced.back() == ' ' || spaced.back() == '\n') continue;
      spaced += ' ';
    } else if (c == '\n') {
      while (!spaced.empty() && spaced.back() == ' ') spaced.pop_back();
      spaced += '\n';
    } else {
      spaced += c;
    }
  }

  // Two or more line breaks become exactly one blank line.
  std::string out;
  out.reserve(spaced.size());
  std::size_t run = 0;
  for (char c : spaced) {
    if (c == '\n') {
      ++run;
      continue;
    }
    if (run == 1) out += '\n';
    else if (run >= 2) out += "\n\n";
    run = 0;
    out += c;
  }
  return std::string(text::trim(out));
}

}  // namespace

std::string clean_text(std::string_view raw) {
  std::string current = clean_once(raw);
  // Each pass only shortens the text once ligatures are gone, so this terminates.
  while (true) {
    std::string next = clean_once(current);
    if (next == current) return current;
    current = std::move(next);
  }
}

DocumentRecord make_document(std::string doc_id, std::string raw_text, Provenance provenance,
                             std::optional<std::string> doi, std::vector<std::string> ccdc_codes) {
  DocumentRecord d;
  d.doc_id = std::move(doc_id);
  d.doi = std::move(doi);
  d.ccdc_codes_requested = std::move(ccdc_codes);
  d.cleaned_text = clean_text(raw_text);
  d.raw_text = std::move(raw_text);
  d.provenance = provenance;
  return d;
}

}  // namespace mofh6::ingest
