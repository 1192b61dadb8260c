#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpscausal {

// Every failure the library reports carries one of these codes. The CLI maps
// the category of a code onto its process exit status.
enum class ErrorCode {
  // usage / configuration
  InvalidArgument,
  NonPositiveEss,
  // data
  EmptyInput,
  RaggedRow,
  NonNumericCell,
  UnknownColumn,
  DegenerateColumn,
  MissingColumn,
  UnmappedActuatorValue,
  DuplicateParent,
  EmptyDataset,
  InsufficientData,
  ParseError,
  // model
  SelfLoop,
  UnknownNode,
  DuplicateEdge,
  CyclicGraph,
  NodeSetMismatch,
  StillCyclic,
  NoConsistentExtension,
  IncompleteAssignment,
  UnknownState,
  UnknownVariable,
  ZeroProbabilityEvidence,
  StateSpaceTooLarge,
  TargetNotInNet,
  UnknownStage,
  // a replayed run produced different bytes
  ReplayMismatch,
};

enum class ErrorCategory { Usage, Data, Model };

std::string_view to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cpscausal
