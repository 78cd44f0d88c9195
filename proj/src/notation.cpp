#include "royalgame/notation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <vector>

#include "royalgame/error.hpp"

namespace royalgame {
namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view strip_ep_marker(std::string_view s) {
  if (ends_with(s, "e.p.")) {
    s.remove_suffix(4);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  }
  return s;
}

// Rewrites accepted input-only spellings into the canonical ones.
std::string normalize_token(std::string_view token) {
  std::string_view body = strip_ep_marker(token);
  std::string suffix;
  while (!body.empty() && (body.back() == '+' || body.back() == '#')) {
    suffix.insert(suffix.begin(), body.back());
    body.remove_suffix(1);
  }
  body = strip_ep_marker(body);
  std::string out(body);
  if (out == "0-0") out = "O-O";
  if (out == "0-0-0") out = "O-O-O";
  return out + suffix;
}

bool has_piece_kind(const GameState& state, PieceKind kind, Color color) {
  return state.placement().count(Piece{kind, color}) > 0;
}

}  // namespace

std::optional<SanParts> decompose_san(std::string_view token, SanMode mode) {
  const bool lenient = mode == SanMode::Lenient;
  SanParts parts;
  std::string_view body = strip_ep_marker(token);

  if (ends_with(body, "#")) {
    parts.suffix = SanSuffix::Mate;
    body.remove_suffix(1);
  } else if (lenient && ends_with(body, "++")) {
    parts.suffix = SanSuffix::Check;
    body.remove_suffix(2);
  } else if (ends_with(body, "+")) {
    parts.suffix = SanSuffix::Check;
    body.remove_suffix(1);
  }
  body = strip_ep_marker(body);
  if (body.empty()) return std::nullopt;

  if (body == "O-O" || body == "0-0") {
    parts.castle = CastleSide::Kingside;
    parts.kind = PieceKind::King;
    return parts;
  }
  if (body == "O-O-O" || body == "0-0-0") {
    parts.castle = CastleSide::Queenside;
    parts.kind = PieceKind::King;
    return parts;
  }

  // Promotion suffix.
  if (body.size() >= 2 && body[body.size() - 2] == '=') {
    char letter = body.back();
    if (lenient) letter = static_cast<char>(std::toupper(static_cast<unsigned char>(letter)));
    const auto k = kind_from_letter(letter);
    if (!k || *k == PieceKind::Pawn || *k == PieceKind::King) return std::nullopt;
    parts.promotion = k;
    body.remove_suffix(2);
  } else if (lenient && body.size() >= 3 && (body[body.size() - 2] == '8' || body[body.size() - 2] == '1')) {
    const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(body.back())));
    const auto k = kind_from_letter(letter);
    if (k && *k != PieceKind::Pawn && *k != PieceKind::King &&
        std::islower(static_cast<unsigned char>(body[body.size() - 3]))) {
      parts.promotion = k;
      body.remove_suffix(1);
    }
  }

  if (body.size() < 2) return std::nullopt;
  const auto dest = Square::parse(body.substr(body.size() - 2));
  if (!dest) return std::nullopt;
  parts.destination = *dest;
  body.remove_suffix(2);

  if (!body.empty() && std::isupper(static_cast<unsigned char>(body.front()))) {
    const auto k = kind_from_letter(body.front());
    if (!k || (*k == PieceKind::Pawn && !lenient)) return std::nullopt;
    parts.kind = *k;
    body.remove_prefix(1);
  }
  if (!body.empty() && (body.back() == 'x' || (lenient && body.back() == ':'))) {
    parts.capture = true;
    body.remove_suffix(1);
  }
  if (!body.empty() && body.front() >= 'a' && body.front() <= 'h') {
    parts.from_file = body.front() - 'a';
    body.remove_prefix(1);
  }
  if (!body.empty() && body.front() >= '1' && body.front() <= '8') {
    parts.from_rank = body.front() - '1';
    body.remove_prefix(1);
  }
  if (!body.empty()) return std::nullopt;

  if (parts.promotion && parts.kind != PieceKind::Pawn) return std::nullopt;
  if (parts.promotion && parts.destination.rank() != 0 && parts.destination.rank() != 7) {
    return std::nullopt;
  }
  if (parts.kind == PieceKind::Pawn && !lenient) {
    if (parts.from_rank) return std::nullopt;
    if (parts.capture != parts.from_file.has_value()) return std::nullopt;
  }
  return parts;
}

Move parse_san(const GameState& state, std::string_view token, SanMode mode) {
  const auto parts = decompose_san(token, mode);
  if (!parts) throw Error(ErrorCode::UnparseableToken, "'" + std::string(token) + "'");

  const Color us = state.side_to_move();
  if (!parts->castle && !has_piece_kind(state, parts->kind, us)) {
    throw Error(ErrorCode::PieceAbsent, "no " + std::string(to_string(us)) + " " +
                                            std::string(kind_name(parts->kind)) + " for '" +
                                            std::string(token) + "'");
  }

  std::vector<Move> matches;
  for (const Move& m : legal_moves(state)) {
    if (parts->castle) {
      if (m.castle == parts->castle) matches.push_back(m);
      continue;
    }
    if (m.castle || m.piece.kind != parts->kind || m.destination != parts->destination) continue;
    if (parts->from_file && m.origin.file() != *parts->from_file) continue;
    if (parts->from_rank && m.origin.rank() != *parts->from_rank) continue;
    if (m.promotion != parts->promotion) continue;
    matches.push_back(m);
  }
  if (matches.empty()) {
    throw Error(ErrorCode::NoMatchingLegalMove, "'" + std::string(token) + "'");
  }
  if (matches.size() > 1) throw Error(ErrorCode::AmbiguousToken, "'" + std::string(token) + "'");

  if (mode == SanMode::Strict) {
    const std::string canonical = render_san(state, matches.front());
    if (canonical != normalize_token(token)) {
      throw Error(ErrorCode::NotationMismatch,
                  "'" + std::string(token) + "' should be written '" + canonical + "'");
    }
  }
  return matches.front();
}

std::string render_san(const GameState& state, const Move& m) {
  const auto moves = legal_moves(state);
  if (std::find(moves.begin(), moves.end(), m) == moves.end()) {
    throw Error(ErrorCode::IllegalMove, m.uci() + " is not legal in this position");
  }

  std::string out;
  if (m.castle) {
    out = *m.castle == CastleSide::Kingside ? "O-O" : "O-O-O";
  } else if (m.piece.kind == PieceKind::Pawn) {
    if (m.is_capture) {
      out += m.origin.file_char();
      out += 'x';
    }
    out += m.destination.name();
    if (m.promotion) {
      out += '=';
      out += kind_letter(*m.promotion);
    }
  } else {
    out += kind_letter(m.piece.kind);
    bool rivals = false;
    bool file_shared = false;
    bool rank_shared = false;
    for (const Move& other : moves) {
      if (other.piece.kind != m.piece.kind || other.destination != m.destination ||
          other.origin == m.origin || other.castle) {
        continue;
      }
      rivals = true;
      file_shared |= other.origin.file() == m.origin.file();
      rank_shared |= other.origin.rank() == m.origin.rank();
    }
    if (rivals) {
      if (!file_shared) {
        out += m.origin.file_char();
      } else if (!rank_shared) {
        out += m.origin.rank_char();
      } else {
        out += m.origin.name();
      }
    }
    if (m.is_capture) out += 'x';
    out += m.destination.name();
  }

  const GameState next = apply_move_unchecked(state, m);
  if (next.in_check()) out += legal_moves(next).empty() ? '#' : '+';
  return out;
}

GameState parse_fen(std::string_view fen) {
  std::vector<std::string_view> fields;
  std::string_view rest = trim(fen);
  while (!rest.empty()) {
    const auto end = rest.find_first_of(" \t");
    fields.push_back(rest.substr(0, end));
    if (end == std::string_view::npos) break;
    rest = trim(rest.substr(end));
  }
  if (fields.size() != 4 && fields.size() != 6) {
    throw Error(ErrorCode::MalformedFen, "expected 4 or 6 fields, got " + std::to_string(fields.size()));
  }

  Placement placement;
  int rank = 7;
  int file = 0;
  for (char c : fields[0]) {
    if (c == '/') {
      if (file != 8) throw Error(ErrorCode::MalformedFen, "rank " + std::to_string(rank + 1) + " does not sum to 8");
      --rank;
      file = 0;
      if (rank < 0) throw Error(ErrorCode::MalformedFen, "more than 8 ranks");
    } else if (c >= '1' && c <= '8') {
      file += c - '0';
      if (file > 8) throw Error(ErrorCode::MalformedFen, "rank " + std::to_string(rank + 1) + " exceeds 8 squares");
    } else if (auto piece = piece_from_letter(c)) {
      if (file >= 8) throw Error(ErrorCode::MalformedFen, "rank " + std::to_string(rank + 1) + " exceeds 8 squares");
      placement.set(Square::at(file, rank), *piece);
      ++file;
    } else {
      throw Error(ErrorCode::MalformedFen, std::string("unexpected character '") + c + "' in placement");
    }
  }
  if (rank != 0 || file != 8) throw Error(ErrorCode::MalformedFen, "placement must describe 8 full ranks");

  Color side;
  if (fields[1] == "w") {
    side = Color::White;
  } else if (fields[1] == "b") {
    side = Color::Black;
  } else {
    throw Error(ErrorCode::MalformedFen, "side to move must be 'w' or 'b'");
  }

  CastlingRights castling;
  if (fields[2] != "-") {
    for (char c : fields[2]) {
      bool* flag = nullptr;
      switch (c) {
        case 'K': flag = &castling.white_kingside; break;
        case 'Q': flag = &castling.white_queenside; break;
        case 'k': flag = &castling.black_kingside; break;
        case 'q': flag = &castling.black_queenside; break;
        default: throw Error(ErrorCode::MalformedFen, std::string("bad castling flag '") + c + "'");
      }
      if (*flag) throw Error(ErrorCode::MalformedFen, "repeated castling flag");
      *flag = true;
    }
  }

  std::optional<Square> ep;
  if (fields[3] != "-") {
    ep = Square::parse(fields[3]);
    if (!ep) throw Error(ErrorCode::MalformedFen, "bad en-passant square");
  }

  auto parse_count = [](std::string_view text, const char* what) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
      throw Error(ErrorCode::MalformedFen, std::string("bad ") + what);
    }
    return value;
  };
  int halfmove = 0;
  int fullmove = 1;
  if (fields.size() == 6) {
    halfmove = parse_count(fields[4], "halfmove clock");
    fullmove = parse_count(fields[5], "fullmove number");
  }

  if (auto broken = GameState::check_invariants(placement, side, castling, ep, halfmove, fullmove)) {
    throw Error(ErrorCode::InvariantViolation, *broken);
  }
  return GameState::create(placement, side, castling, ep, halfmove, fullmove);
}

std::string render_fen(const GameState& state) {
  std::string out;
  for (int rank = 7; rank >= 0; --rank) {
    int empty = 0;
    for (int file = 0; file < 8; ++file) {
      const auto p = state.at(Square::at(file, rank));
      if (!p) {
        ++empty;
        continue;
      }
      if (empty) out += static_cast<char>('0' + empty);
      empty = 0;
      out += piece_letter(*p);
    }
    if (empty) out += static_cast<char>('0' + empty);
    if (rank) out += '/';
  }
  out += state.side_to_move() == Color::White ? " w " : " b ";
  const auto c = state.castling();
  if (!c.any()) {
    out += '-';
  } else {
    if (c.white_kingside) out += 'K';
    if (c.white_queenside) out += 'Q';
    if (c.black_kingside) out += 'k';
    if (c.black_queenside) out += 'q';
  }
  out += ' ';
  out += state.en_passant() ? state.en_passant()->name() : "-";
  out += ' ' + std::to_string(state.halfmove_clock()) + ' ' + std::to_string(state.fullmove_number());
  return out;
}

std::string render_square_list(const Placement& placement) {
  std::string out;
  for (int i = 0; i < kSquareCount; ++i) {
    const Square sq = Square::from_index(i);
    const auto p = placement.at(sq);
    if (!p) continue;
    if (!out.empty()) out += ", ";
    out += sq.name();
    out += ':';
    out += piece_letter(*p);
  }
  return out;
}

Placement parse_square_list(std::string_view text, SquareListMode mode) {
  Placement placement;
  std::string_view rest = trim(text);
  if (mode == SquareListMode::Lenient && !rest.empty() && rest.back() == ',') rest.remove_suffix(1);
  if (rest.empty()) return placement;

  std::optional<Square> previous;
  bool ordered = true;
  while (true) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    if (item.size() != 4 || item[2] != ':') {
      throw Error(ErrorCode::BadPairSyntax, "'" + std::string(item) + "'");
    }
    const auto sq = Square::parse(item.substr(0, 2));
    const auto piece = piece_from_letter(item[3]);
    if (!sq || !piece) throw Error(ErrorCode::BadPairSyntax, "'" + std::string(item) + "'");
    if (!placement.empty(*sq)) throw Error(ErrorCode::DuplicateSquare, sq->name());
    if (previous && *sq < *previous) ordered = false;
    previous = sq;
    placement.set(*sq, *piece);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }

  if (mode == SquareListMode::Strict) {
    if (!ordered) throw Error(ErrorCode::UnorderedPairs, "pairs must be sorted rank-major by square");
    if (render_square_list(placement) != text) {
      throw Error(ErrorCode::BadPairSyntax, "pairs must be separated by exactly \", \"");
    }
  }
  return placement;
}

GameState state_from_placement(const Placement& placement) {
  CastlingRights castling;
  for (Color c : {Color::White, Color::Black}) {
    const int home = c == Color::White ? 0 : 7;
    if (placement.at(Square::at(4, home)) != Piece{PieceKind::King, c}) continue;
    castling.set(c, CastleSide::Kingside, placement.at(Square::at(7, home)) == Piece{PieceKind::Rook, c});
    castling.set(c, CastleSide::Queenside, placement.at(Square::at(0, home)) == Piece{PieceKind::Rook, c});
  }
  return GameState::create(placement, Color::White, castling, std::nullopt, 0, 1);
}

}  // namespace royalgame
