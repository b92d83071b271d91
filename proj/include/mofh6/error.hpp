#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mofh6 {

enum class ErrorKind {
  // state-graph
  CycleDetected,
  UnknownDependency,
  DuplicateNode,
  StageOrder,
  ExecutorPanic,
  // llm-gateway
  UnknownTemplate,
  ProviderUnavailable,
  FixtureMissing,
  SchemaViolation,
  UnknownModelPrice,
  InvalidRequest,
  // ingest
  MalformedDoi,
  NotInCorpus,
  FetchFailed,
  // crystal-match
  UnparseableFormula,
  UnparseableNumber,
  NoComparableFields,
  EmptyFormula,
  // assemble
  IndexOutOfRange,
  NoParagraphForCompound,
  MissingIdentifier,
  // dataset
  UnreadableFile,
  DuplicateKey,
  InvariantViolation,
  UnknownProperty,
  EmptyStore,
  MissingCellBlock,
  MalformedLoop,
  // query-engine
  ContextUnavailable,
  UnknownMaterial,
  NumericMismatch,
  // eval-harness
  EmbedderFailure,
  ZeroMask,
  // misc
  InvalidConfig,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-readable kind. Every module reports its
/// contract errors through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view kind_name() const { return to_string(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace mofh6
