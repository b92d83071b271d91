#pragma once

// DOI routing, document fetching and plain-text cleaning.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mofh6/json_schema.hpp"

namespace mofh6::ingest {

enum class Publisher { ACS, RSC, Elsevier, Wiley, Springer, Unknown };
std::string_view to_string(Publisher p);
Publisher parse_publisher(std::string_view s);

struct PublisherRoute {
  std::string doi_prefix;  // "10.1021"; empty for the Unknown route
  Publisher publisher = Publisher::Unknown;
  std::string fetcher_id;
};

/// ACS 10.1021, RSC 10.1039, Elsevier 10.1016, Wiley 10.1002, Springer 10.1007,
/// all served by the "local" fetcher.
std::vector<PublisherRoute> default_routes();
/// [{"doi_prefix", "publisher", "fetcher_id"}]; validates the prefix pattern.
std::vector<PublisherRoute> routes_from_json(const json& doc);

bool is_valid_doi(std::string_view doi);

/// Longest-prefix match on the registrant code; Unknown route when nothing
/// matches. Throws MalformedDoi.
PublisherRoute route_doi(std::string_view doi, const std::vector<PublisherRoute>& table);

enum class Provenance { LocalFile, Fetched, UserUpload };

struct DocumentRecord {
  std::string doc_id;
  std::optional<std::string> doi;
  std::vector<std::string> ccdc_codes_requested;
  std::string raw_text;
  std::string cleaned_text;
  Provenance provenance = Provenance::LocalFile;
};

struct FetchResult {
  std::string bytes;
  std::string media_type;
};

class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual FetchResult fetch(const PublisherRoute& route, std::string_view doi) = 0;
};

struct CorpusEntry {
  std::string doi;
  std::filesystem::path path;
  std::vector<std::string> ccdc_codes;
  std::vector<std::filesystem::path> si_paths;  // kept in lexicographic filename order
};

/// Manifest: JSON array of {doi, path, ccdc_codes, si?}; relative paths resolve
/// against the manifest's directory.
class LocalCorpus {
 public:
  static LocalCorpus load(const std::filesystem::path& manifest);
  const std::vector<CorpusEntry>& entries() const { return entries_; }
  const CorpusEntry* find_doi(std::string_view doi) const;
  const CorpusEntry* find_ccdc(std::string_view code) const;

 private:
  std::vector<CorpusEntry> entries_;
};

/// Separator placed between main text and each supporting-information file.
inline constexpr std::string_view kSiMarker = "===SI===";

class LocalCorpusFetcher : public Fetcher {
 public:
  explicit LocalCorpusFetcher(std::shared_ptr<const LocalCorpus> corpus) : corpus_(std::move(corpus)) {}
  /// Main text followed by SI files, each preceded by a kSiMarker line.
  /// Throws NotInCorpus or FetchFailed.
  FetchResult fetch(const PublisherRoute& route, std::string_view doi) override;

 private:
  std::shared_ptr<const LocalCorpus> corpus_;
};

class FetcherRegistry {
 public:
  void add(std::string id, std::shared_ptr<Fetcher> fetcher);
  Fetcher* find(const std::string& id) const;

 private:
  std::map<std::string, std::shared_ptr<Fetcher>> fetchers_;
};

/// Dispatches to the route's fetcher; failures other than NotInCorpus surface
/// as FetchFailed with the route in the message.
FetchResult fetch_document(const PublisherRoute& route, std::string_view doi, const FetcherRegistry& fetchers);

/// Ligature and compatibility-space folding, removal of soft hyphens and
/// control characters, de-hyphenation of line-broken words, whitespace
/// collapse and blank-line normalisation. Idempotent.
std::string clean_text(std::string_view raw);

/// Builds a cleaned record from raw text.
DocumentRecord make_document(std::string doc_id, std::string raw_text, Provenance provenance,
                             std::optional<std::string> doi = std::nullopt,
                             std::vector<std::string> ccdc_codes = {});

}  // namespace mofh6::ingest
