#include "mofh6/error.hpp"

namespace mofh6 {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::UnknownDependency: return "UnknownDependency";
    case ErrorKind::DuplicateNode: return "DuplicateNode";
    case ErrorKind::StageOrder: return "StageOrder";
    case ErrorKind::ExecutorPanic: return "ExecutorPanic";
    case ErrorKind::UnknownTemplate: return "UnknownTemplate";
    case ErrorKind::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorKind::FixtureMissing: return "FixtureMissing";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::UnknownModelPrice: return "UnknownModelPrice";
    case ErrorKind::InvalidRequest: return "InvalidRequest";
    case ErrorKind::MalformedDoi: return "MalformedDoi";
    case ErrorKind::NotInCorpus: return "NotInCorpus";
    case ErrorKind::FetchFailed: return "FetchFailed";
    case ErrorKind::UnparseableFormula: return "UnparseableFormula";
    case ErrorKind::UnparseableNumber: return "UnparseableNumber";
    case ErrorKind::NoComparableFields: return "NoComparableFields";
    case ErrorKind::EmptyFormula: return "EmptyFormula";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::NoParagraphForCompound: return "NoParagraphForCompound";
    case ErrorKind::MissingIdentifier: return "MissingIdentifier";
    case ErrorKind::UnreadableFile: return "UnreadableFile";
    case ErrorKind::DuplicateKey: return "DuplicateKey";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::UnknownProperty: return "UnknownProperty";
    case ErrorKind::EmptyStore: return "EmptyStore";
    case ErrorKind::MissingCellBlock: return "MissingCellBlock";
    case ErrorKind::MalformedLoop: return "MalformedLoop";
    case ErrorKind::ContextUnavailable: return "ContextUnavailable";
    case ErrorKind::UnknownMaterial: return "UnknownMaterial";
    case ErrorKind::NumericMismatch: return "NumericMismatch";
    case ErrorKind::EmbedderFailure: return "EmbedderFailure";
    case ErrorKind::ZeroMask: return "ZeroMask";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace mofh6
