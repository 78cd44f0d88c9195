#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace royalgame {

enum class ErrorCode {
  InvalidState,
  IllegalMove,
  UnparseableToken,
  AmbiguousToken,
  NoMatchingLegalMove,
  PieceAbsent,
  NotationMismatch,
  MalformedFen,
  InvariantViolation,
  DuplicateSquare,
  BadPairSyntax,
  UnorderedPairs,
  InsufficientPool,
  SeedMissing,
  InvalidBoard,
  UnsolvableInstance,
  MalformedRecord,
  GenerationExhausted,
  EndpointTimeout,
  ProtocolViolation,
  NoLegalMoves,
  EmptyTable,
  SchemaError,
  StageFailure,
  Io,
};

// Kebab-case identifier, e.g. "piece-absent". Stable; used in reports and lint output.
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace royalgame
