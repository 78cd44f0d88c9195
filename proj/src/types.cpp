#include "royalgame/types.hpp"

#include <cctype>

#include "royalgame/error.hpp"

namespace royalgame {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidState: return "invalid-state";
    case ErrorCode::IllegalMove: return "illegal-move";
    case ErrorCode::UnparseableToken: return "unparseable-token";
    case ErrorCode::AmbiguousToken: return "ambiguous-token";
    case ErrorCode::NoMatchingLegalMove: return "no-matching-legal-move";
    case ErrorCode::PieceAbsent: return "piece-absent";
    case ErrorCode::NotationMismatch: return "notation-mismatch";
    case ErrorCode::MalformedFen: return "malformed-fen";
    case ErrorCode::InvariantViolation: return "invariant-violation";
    case ErrorCode::DuplicateSquare: return "duplicate-square";
    case ErrorCode::BadPairSyntax: return "bad-pair-syntax";
    case ErrorCode::UnorderedPairs: return "unordered-pairs";
    case ErrorCode::InsufficientPool: return "insufficient-pool";
    case ErrorCode::SeedMissing: return "seed-missing";
    case ErrorCode::InvalidBoard: return "invalid-board";
    case ErrorCode::UnsolvableInstance: return "unsolvable-instance";
    case ErrorCode::MalformedRecord: return "malformed-record";
    case ErrorCode::GenerationExhausted: return "generation-exhausted";
    case ErrorCode::EndpointTimeout: return "endpoint-timeout";
    case ErrorCode::ProtocolViolation: return "protocol-violation";
    case ErrorCode::NoLegalMoves: return "no-legal-moves";
    case ErrorCode::EmptyTable: return "empty-table";
    case ErrorCode::SchemaError: return "schema-error";
    case ErrorCode::StageFailure: return "stage-failure";
    case ErrorCode::Io: return "io-error";
  }
  return "unknown";
}

std::string_view to_string(Color c) { return c == Color::White ? "white" : "black"; }

char kind_letter(PieceKind kind) {
  static constexpr char kLetters[] = {'P', 'N', 'B', 'R', 'Q', 'K'};
  return kLetters[static_cast<int>(kind)];
}

char piece_letter(Piece piece) {
  const char upper = kind_letter(piece.kind);
  return piece.color == Color::White ? upper
                                     : static_cast<char>(std::tolower(static_cast<unsigned char>(upper)));
}

std::optional<PieceKind> kind_from_letter(char upper) {
  switch (upper) {
    case 'P': return PieceKind::Pawn;
    case 'N': return PieceKind::Knight;
    case 'B': return PieceKind::Bishop;
    case 'R': return PieceKind::Rook;
    case 'Q': return PieceKind::Queen;
    case 'K': return PieceKind::King;
    default: return std::nullopt;
  }
}

std::optional<Piece> piece_from_letter(char letter) {
  const auto uc = static_cast<unsigned char>(letter);
  if (std::isupper(uc)) {
    if (auto k = kind_from_letter(letter)) return Piece{*k, Color::White};
  } else if (std::islower(uc)) {
    if (auto k = kind_from_letter(static_cast<char>(std::toupper(uc)))) return Piece{*k, Color::Black};
  }
  return std::nullopt;
}

std::string_view kind_name(PieceKind kind) {
  switch (kind) {
    case PieceKind::Pawn: return "pawn";
    case PieceKind::Knight: return "knight";
    case PieceKind::Bishop: return "bishop";
    case PieceKind::Rook: return "rook";
    case PieceKind::Queen: return "queen";
    case PieceKind::King: return "king";
  }
  return "?";
}

std::optional<Square> Square::parse(std::string_view text) {
  if (text.size() != 2) return std::nullopt;
  const char f = text[0];
  const char r = text[1];
  if (f < 'a' || f > 'h' || r < '1' || r > '8') return std::nullopt;
  return Square::at(f - 'a', r - '1');
}

std::string Move::uci() const {
  std::string out = origin.name() + destination.name();
  if (promotion) {
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(kind_letter(*promotion))));
  }
  return out;
}

}  // namespace royalgame
