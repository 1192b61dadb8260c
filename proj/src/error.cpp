#include "cpscausal/error.hpp"

namespace cpscausal {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveEss: return "NonPositiveEss";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::UnknownColumn: return "UnknownColumn";
    case ErrorCode::DegenerateColumn: return "DegenerateColumn";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::UnmappedActuatorValue: return "UnmappedActuatorValue";
    case ErrorCode::DuplicateParent: return "DuplicateParent";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::CyclicGraph: return "CyclicGraph";
    case ErrorCode::NodeSetMismatch: return "NodeSetMismatch";
    case ErrorCode::StillCyclic: return "StillCyclic";
    case ErrorCode::NoConsistentExtension: return "NoConsistentExtension";
    case ErrorCode::IncompleteAssignment: return "IncompleteAssignment";
    case ErrorCode::UnknownState: return "UnknownState";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::ZeroProbabilityEvidence: return "ZeroProbabilityEvidence";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::TargetNotInNet: return "TargetNotInNet";
    case ErrorCode::UnknownStage: return "UnknownStage";
    case ErrorCode::ReplayMismatch: return "ReplayMismatch";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::NonPositiveEss:
      return ErrorCategory::Usage;
    case ErrorCode::EmptyInput:
    case ErrorCode::RaggedRow:
    case ErrorCode::NonNumericCell:
    case ErrorCode::UnknownColumn:
    case ErrorCode::DegenerateColumn:
    case ErrorCode::MissingColumn:
    case ErrorCode::UnmappedActuatorValue:
    case ErrorCode::DuplicateParent:
    case ErrorCode::EmptyDataset:
    case ErrorCode::InsufficientData:
    case ErrorCode::ParseError:
      return ErrorCategory::Data;
    default:
      return ErrorCategory::Model;
  }
}

}  // namespace cpscausal
