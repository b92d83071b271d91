#pragma once

// Extraction-quality evaluation: chemistry-aware preprocessing, sentence and
// cell similarity, the rule-matching cascade and TP/FP/FN/TN metrics.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mofh6/domain.hpp"

namespace mofh6::eval {

inline constexpr double kMatchThreshold = 0.90;

/// Drops a leading "Synthesis of ...:" title, strips characterization
/// sentences and normalizes temperatures ("100 oC" -> "100 C") and durations
/// ("24 hours" -> "24h"). Idempotent.
std::string preprocess_synthesis_text(std::string_view text);

/// Throws InvalidRequest on length mismatch; 0 when either vector is zero.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

/// normalize(sum_i x_i * m_i / sum_i m_i). Throws ZeroMask or InvalidRequest.
std::vector<double> mean_pool(const std::vector<std::vector<double>>& token_vectors, const std::vector<double>& mask);

class Embedder {
 public:
  virtual ~Embedder() = default;
  /// Throws EmbedderFailure.
  virtual std::vector<double> embed(std::string_view text) = 0;
};

/// Deterministic offline embedder: each lowercase alphanumeric token becomes a
/// one-hot vector at FNV-1a(token) mod dim, pooled with mean_pool.
class HashingEmbedder : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 512) : dim_(dim) {}
  std::vector<double> embed(std::string_view text) override;

 private:
  std::size_t dim_;
};

/// 1.0 for identical strings without calling the embedder, else the clamped cosine.
double sentence_similarity(std::string_view a, std::string_view b, Embedder& embedder);

struct RuleVerdict {
  std::optional<bool> equivalent;  // nullopt: undecided by every rule
  std::optional<std::string> rule_id;
};

struct CellJudgment {
  RuleVerdict verdict;
  std::optional<double> similarity;  // set when the embedder decided
  bool equivalent() const { return verdict.equivalent.value_or(false); }
};

/// Rules in cascade order; each returns nullopt when it does not apply.
using Rule = std::function<std::optional<bool>(std::string_view a, std::string_view b, std::string_view field)>;
const std::vector<std::pair<std::string, Rule>>& rules();

/// The rule cascade alone; undecided pairs leave `equivalent` empty.
RuleVerdict apply_rules(std::string_view a, std::string_view b, std::string_view field);

struct Embedders {
  Embedder* chemical = nullptr;  // source fields
  Embedder* general = nullptr;   // condition, morphology, yield, equipment fields
};

/// Rule cascade, then embedder cosine >= 0.90 for undecided pairs.
/// Throws EmbedderFailure only when the cascade is undecided.
CellJudgment cells_equivalent(std::string_view a, std::string_view b, std::string_view field,
                              const Embedders& embedders);

struct Judgment {
  std::string field;
  bool gold_present = false;
  bool predicted_present = false;
  bool equivalent = false;
};

struct Counts {
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

struct MetricReport {
  long tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0, precision = 0, recall = 0, f1 = 0;
  std::map<std::string, MetricReport> per_field;
  json to_json() const;
  std::string per_field_csv() const;
};

/// Ratios computed from counts; 0 whenever a denominator is 0.
MetricReport metrics_from_counts(const Counts& c);
MetricReport compute_metrics(const std::vector<Judgment>& judgments);

struct GoldRecord {
  std::string ccdc_code;
  std::string synthesis_text;
  StructuredRecord structured;
};

/// JSON lines of {ccdc_code, synthesis_text, structured}. Throws DuplicateKey,
/// UnreadableFile or InvariantViolation.
std::vector<GoldRecord> load_gold(const std::filesystem::path& path);

struct Prediction {
  std::string ccdc_code;
  std::optional<std::string> synthesis_text;
  std::optional<StructuredRecord> structured;
};

/// Parses a structure_<CODE>.md table back into a record ("N/A" -> absent).
StructuredRecord parse_markdown(std::string_view md);

/// Reads structure_<CODE>.md and identifier_<CODE>.txt files found anywhere under `dir`.
std::map<std::string, Prediction> load_predictions(const std::filesystem::path& dir);

/// Gold sentences matched greedily to the most similar unused predicted sentence.
std::vector<Judgment> sentence_judgments(std::string_view gold, std::string_view predicted, Embedder& embedder);

/// One judgment per gold record and field, plus sentence-level judgments
/// under the field name "synthesis_text".
std::vector<Judgment> evaluate(const std::vector<GoldRecord>& gold, const std::map<std::string, Prediction>& pred,
                               const Embedders& embedders);

}  // namespace mofh6::eval
