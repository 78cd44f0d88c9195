#include "royalgame/game_state.hpp"

#include <algorithm>
#include <array>
#include <tuple>

#include "royalgame/error.hpp"

namespace royalgame {
namespace {

struct Offset {
  int df;
  int dr;
};

constexpr std::array<Offset, 8> kKnightOffsets{
    {{1, 2}, {2, 1}, {2, -1}, {1, -2}, {-1, -2}, {-2, -1}, {-2, 1}, {-1, 2}}};
constexpr std::array<Offset, 8> kKingOffsets{
    {{1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1}}};
constexpr std::array<Offset, 4> kRookDirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
constexpr std::array<Offset, 4> kBishopDirs{{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};

constexpr bool on_board(int file, int rank) { return file >= 0 && file < 8 && rank >= 0 && rank < 8; }

// Jump targets per square, precomputed once.
struct JumpTable {
  std::array<std::array<std::int8_t, 8>, kSquareCount> targets{};
  std::array<std::uint8_t, kSquareCount> count{};
};

template <std::size_t N>
constexpr JumpTable make_jumps(const std::array<Offset, N>& offsets) {
  JumpTable t{};
  for (int sq = 0; sq < kSquareCount; ++sq) {
    const int f = sq & 7;
    const int r = sq >> 3;
    for (const auto& o : offsets) {
      if (on_board(f + o.df, r + o.dr)) {
        t.targets[sq][t.count[sq]++] = static_cast<std::int8_t>((r + o.dr) * 8 + f + o.df);
      }
    }
  }
  return t;
}

constexpr JumpTable kKnightJumps = make_jumps(kKnightOffsets);
constexpr JumpTable kKingJumps = make_jumps(kKingOffsets);

constexpr int pawn_forward(Color c) { return c == Color::White ? 1 : -1; }
constexpr int home_rank(Color c) { return c == Color::White ? 0 : 7; }

bool is(const std::optional<Piece>& p, PieceKind kind, Color color) {
  return p && p->kind == kind && p->color == color;
}

Square rook_home(Color c, CastleSide side) {
  return Square::at(side == CastleSide::Kingside ? 7 : 0, home_rank(c));
}

bool attacked_on(const Placement& board, Square sq, Color attacker) {
  const int f = sq.file();
  const int r = sq.rank();

  // Pawns attack diagonally forward, so look one rank "behind" from the attacker's view.
  const int pr = r - pawn_forward(attacker);
  for (int df : {-1, 1}) {
    if (on_board(f + df, pr) && is(board.at(Square::at(f + df, pr)), PieceKind::Pawn, attacker)) {
      return true;
    }
  }
  const int idx = sq.index();
  for (int i = 0; i < kKnightJumps.count[idx]; ++i) {
    if (is(board.at(Square::from_index(kKnightJumps.targets[idx][i])), PieceKind::Knight, attacker)) {
      return true;
    }
  }
  for (int i = 0; i < kKingJumps.count[idx]; ++i) {
    if (is(board.at(Square::from_index(kKingJumps.targets[idx][i])), PieceKind::King, attacker)) {
      return true;
    }
  }
  auto ray_hits = [&](const auto& dirs, PieceKind slider) {
    for (const auto& d : dirs) {
      int tf = f + d.df;
      int tr = r + d.dr;
      while (on_board(tf, tr)) {
        const auto p = board.at(Square::at(tf, tr));
        if (p) {
          if (p->color == attacker && (p->kind == slider || p->kind == PieceKind::Queen)) return true;
          break;
        }
        tf += d.df;
        tr += d.dr;
      }
    }
    return false;
  };
  return ray_hits(kRookDirs, PieceKind::Rook) || ray_hits(kBishopDirs, PieceKind::Bishop);
}

void push_pawn_moves(std::vector<Move>& out, Square from, Square to, Piece pawn, bool capture) {
  const int last = pawn.color == Color::White ? 7 : 0;
  if (to.rank() == last) {
    for (auto k : {PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook, PieceKind::Queen}) {
      out.push_back(Move{from, to, pawn, capture, k, std::nullopt, false});
    }
  } else {
    out.push_back(Move{from, to, pawn, capture, std::nullopt, std::nullopt, false});
  }
}

void pseudo_legal(const GameState& s, std::vector<Move>& out) {
  const Placement& board = s.placement();
  const Color us = s.side_to_move();

  for (int idx = 0; idx < kSquareCount; ++idx) {
    const Square from = Square::from_index(idx);
    const auto p = board.at(from);
    if (!p || p->color != us) continue;
    const Piece piece = *p;
    const int f = from.file();
    const int r = from.rank();

    auto add_target = [&](Square to) {
      const auto target = board.at(to);
      if (!target) {
        out.push_back(Move{from, to, piece, false, std::nullopt, std::nullopt, false});
      } else if (target->color != us) {
        out.push_back(Move{from, to, piece, true, std::nullopt, std::nullopt, false});
      }
    };
    auto slide = [&](const auto& dirs) {
      for (const auto& d : dirs) {
        int tf = f + d.df;
        int tr = r + d.dr;
        while (on_board(tf, tr)) {
          const Square to = Square::at(tf, tr);
          const auto target = board.at(to);
          if (target) {
            if (target->color != us) {
              out.push_back(Move{from, to, piece, true, std::nullopt, std::nullopt, false});
            }
            break;
          }
          out.push_back(Move{from, to, piece, false, std::nullopt, std::nullopt, false});
          tf += d.df;
          tr += d.dr;
        }
      }
    };

    switch (piece.kind) {
      case PieceKind::Pawn: {
        const int fwd = pawn_forward(us);
        const int start = us == Color::White ? 1 : 6;
        if (on_board(f, r + fwd) && board.empty(Square::at(f, r + fwd))) {
          push_pawn_moves(out, from, Square::at(f, r + fwd), piece, false);
          if (r == start && board.empty(Square::at(f, r + 2 * fwd))) {
            out.push_back(Move{from, Square::at(f, r + 2 * fwd), piece, false, std::nullopt,
                               std::nullopt, false});
          }
        }
        for (int df : {-1, 1}) {
          if (!on_board(f + df, r + fwd)) continue;
          const Square to = Square::at(f + df, r + fwd);
          const auto target = board.at(to);
          if (target && target->color != us) {
            push_pawn_moves(out, from, to, piece, true);
          } else if (!target && s.en_passant() == to) {
            out.push_back(Move{from, to, piece, true, std::nullopt, std::nullopt, true});
          }
        }
        break;
      }
      case PieceKind::Knight:
        for (int i = 0; i < kKnightJumps.count[idx]; ++i) {
          add_target(Square::from_index(kKnightJumps.targets[idx][i]));
        }
        break;
      case PieceKind::Bishop: slide(kBishopDirs); break;
      case PieceKind::Rook: slide(kRookDirs); break;
      case PieceKind::Queen:
        slide(kRookDirs);
        slide(kBishopDirs);
        break;
      case PieceKind::King: {
        for (int i = 0; i < kKingJumps.count[idx]; ++i) {
          add_target(Square::from_index(kKingJumps.targets[idx][i]));
        }
        const int home = home_rank(us);
        if (from != Square::at(4, home) || attacked_on(board, from, ~us)) break;
        const auto castling = s.castling();
        if (castling.get(us, CastleSide::Kingside) && board.empty(Square::at(5, home)) &&
            board.empty(Square::at(6, home)) && !attacked_on(board, Square::at(5, home), ~us)) {
          out.push_back(Move{from, Square::at(6, home), piece, false, std::nullopt,
                             CastleSide::Kingside, false});
        }
        if (castling.get(us, CastleSide::Queenside) && board.empty(Square::at(3, home)) &&
            board.empty(Square::at(2, home)) && board.empty(Square::at(1, home)) &&
            !attacked_on(board, Square::at(3, home), ~us)) {
          out.push_back(Move{from, Square::at(2, home), piece, false, std::nullopt,
                             CastleSide::Queenside, false});
        }
        break;
      }
    }
  }
}

auto order_key(const Move& m) {
  return std::make_tuple(m.origin.index(), m.destination.index(),
                         m.promotion ? static_cast<int>(*m.promotion) : -1);
}

void sort_moves(std::vector<Move>& moves) {
  std::sort(moves.begin(), moves.end(),
            [](const Move& a, const Move& b) { return order_key(a) < order_key(b); });
}

// Legal moves without the final sort; perft only needs counts.
std::vector<Move> legal_unsorted(const GameState& s) {
  std::vector<Move> pseudo;
  pseudo.reserve(64);
  pseudo_legal(s, pseudo);
  std::vector<Move> legal;
  legal.reserve(pseudo.size());
  const Color us = s.side_to_move();
  for (const Move& m : pseudo) {
    const GameState next = apply_move_unchecked(s, m);
    if (!next.attacked_by(next.king_square(us), ~us)) legal.push_back(m);
  }
  return legal;
}

}  // namespace

int Placement::count() const {
  return static_cast<int>(std::count_if(cells_.begin(), cells_.end(), [](auto c) { return c != 0; }));
}

int Placement::count(Piece piece) const {
  int n = 0;
  for (int i = 0; i < kSquareCount; ++i) {
    if (at(Square::from_index(i)) == piece) ++n;
  }
  return n;
}

bool CastlingRights::get(Color c, CastleSide side) const {
  if (c == Color::White) return side == CastleSide::Kingside ? white_kingside : white_queenside;
  return side == CastleSide::Kingside ? black_kingside : black_queenside;
}

void CastlingRights::set(Color c, CastleSide side, bool value) {
  if (c == Color::White) {
    (side == CastleSide::Kingside ? white_kingside : white_queenside) = value;
  } else {
    (side == CastleSide::Kingside ? black_kingside : black_queenside) = value;
  }
}

std::string_view to_string(GameStatus s) {
  switch (s) {
    case GameStatus::Ongoing: return "ongoing";
    case GameStatus::Check: return "check";
    case GameStatus::Checkmate: return "checkmate";
    case GameStatus::Stalemate: return "stalemate";
    case GameStatus::DrawInsufficientMaterial: return "draw-insufficient-material";
  }
  return "?";
}

GameState GameState::initial() {
  Placement p;
  constexpr std::array<PieceKind, 8> kBackRank{PieceKind::Rook,  PieceKind::Knight, PieceKind::Bishop,
                                               PieceKind::Queen, PieceKind::King,   PieceKind::Bishop,
                                               PieceKind::Knight, PieceKind::Rook};
  for (int f = 0; f < 8; ++f) {
    p.set(Square::at(f, 0), Piece{kBackRank[static_cast<std::size_t>(f)], Color::White});
    p.set(Square::at(f, 1), Piece{PieceKind::Pawn, Color::White});
    p.set(Square::at(f, 6), Piece{PieceKind::Pawn, Color::Black});
    p.set(Square::at(f, 7), Piece{kBackRank[static_cast<std::size_t>(f)], Color::Black});
  }
  return create(p, Color::White, CastlingRights::all(), std::nullopt, 0, 1);
}

std::optional<std::string> GameState::check_invariants(const Placement& placement,
                                                       Color side_to_move, CastlingRights castling,
                                                       std::optional<Square> en_passant,
                                                       int halfmove_clock, int fullmove_number) {
  if (placement.count() > 32) return "more than 32 pieces on the board";
  for (Color c : {Color::White, Color::Black}) {
    if (placement.count(Piece{PieceKind::King, c}) != 1) {
      return "exactly one " + std::string(to_string(c)) + " king required";
    }
  }
  for (int f = 0; f < 8; ++f) {
    for (int r : {0, 7}) {
      const auto p = placement.at(Square::at(f, r));
      if (p && p->kind == PieceKind::Pawn) return "pawn on rank " + std::to_string(r + 1);
    }
  }
  for (Color c : {Color::White, Color::Black}) {
    for (CastleSide side : {CastleSide::Kingside, CastleSide::Queenside}) {
      if (!castling.get(c, side)) continue;
      if (placement.at(Square::at(4, home_rank(c))) != Piece{PieceKind::King, c} ||
          placement.at(rook_home(c, side)) != Piece{PieceKind::Rook, c}) {
        return "castling right without king and rook on their initial squares";
      }
    }
  }
  if (en_passant) {
    const int expected_rank = side_to_move == Color::White ? 5 : 2;
    if (en_passant->rank() != expected_rank) return "en-passant target on wrong rank";
    const Color pusher = ~side_to_move;
    const Square pawn_sq = Square::at(en_passant->file(), en_passant->rank() - pawn_forward(side_to_move));
    const Square origin = Square::at(en_passant->file(), en_passant->rank() + pawn_forward(side_to_move));
    if (!placement.empty(*en_passant) || !placement.empty(origin) ||
        placement.at(pawn_sq) != Piece{PieceKind::Pawn, pusher}) {
      return "en-passant target without a just-pushed pawn";
    }
  }
  if (halfmove_clock < 0) return "negative halfmove clock";
  if (fullmove_number < 1) return "fullmove number below 1";

  Square enemy_king;
  for (int i = 0; i < kSquareCount; ++i) {
    if (placement.at(Square::from_index(i)) == Piece{PieceKind::King, ~side_to_move}) {
      enemy_king = Square::from_index(i);
    }
  }
  if (attacked_on(placement, enemy_king, side_to_move)) return "side not to move is in check";
  return std::nullopt;
}

GameState GameState::create(const Placement& placement, Color side_to_move, CastlingRights castling,
                            std::optional<Square> en_passant, int halfmove_clock,
                            int fullmove_number) {
  if (auto broken = check_invariants(placement, side_to_move, castling, en_passant, halfmove_clock,
                                     fullmove_number)) {
    throw Error(ErrorCode::InvalidState, *broken);
  }
  GameState s;
  s.placement_ = placement;
  s.side_ = side_to_move;
  s.castling_ = castling;
  s.en_passant_ = en_passant;
  s.halfmove_ = halfmove_clock;
  s.fullmove_ = fullmove_number;
  for (int i = 0; i < kSquareCount; ++i) {
    const auto p = placement.at(Square::from_index(i));
    if (p && p->kind == PieceKind::King) s.kings_[static_cast<std::size_t>(p->color)] = Square::from_index(i);
  }
  return s;
}

bool GameState::attacked_by(Square sq, Color attacker) const {
  return attacked_on(placement_, sq, attacker);
}

GameState apply_move_unchecked(const GameState& state, const Move& m) {
  GameState next = state;
  const Color us = state.side_;
  Placement& board = next.placement_;
  const bool target_occupied = !board.empty(m.destination);

  board.set(m.origin, std::nullopt);
  board.set(m.destination, m.promotion ? Piece{*m.promotion, us} : m.piece);

  if (m.is_en_passant) {
    board.set(Square::at(m.destination.file(), m.origin.rank()), std::nullopt);
  }
  if (m.castle) {
    const int home = home_rank(us);
    const Square rook_from = rook_home(us, *m.castle);
    const Square rook_to = Square::at(*m.castle == CastleSide::Kingside ? 5 : 3, home);
    board.set(rook_from, std::nullopt);
    board.set(rook_to, Piece{PieceKind::Rook, us});
  }
  if (m.piece.kind == PieceKind::King) {
    next.kings_[static_cast<std::size_t>(us)] = m.destination;
    next.castling_.set(us, CastleSide::Kingside, false);
    next.castling_.set(us, CastleSide::Queenside, false);
  }
  // Any move from or onto a rook's home square clears that right.
  for (Color c : {Color::White, Color::Black}) {
    for (CastleSide side : {CastleSide::Kingside, CastleSide::Queenside}) {
      const Square home = rook_home(c, side);
      if (m.origin == home || m.destination == home) next.castling_.set(c, side, false);
    }
  }

  next.en_passant_.reset();
  if (m.piece.kind == PieceKind::Pawn && std::abs(m.destination.rank() - m.origin.rank()) == 2) {
    next.en_passant_ = Square::at(m.origin.file(), (m.origin.rank() + m.destination.rank()) / 2);
  }
  next.halfmove_ = (m.piece.kind == PieceKind::Pawn || target_occupied || m.is_en_passant)
                       ? 0
                       : state.halfmove_ + 1;
  if (us == Color::Black) ++next.fullmove_;
  next.side_ = ~us;
  return next;
}

std::vector<Move> legal_moves(const GameState& state) {
  std::vector<Move> moves = legal_unsorted(state);
  sort_moves(moves);
  return moves;
}

GameState apply_move(const GameState& state, const Move& m) {
  const auto moves = legal_unsorted(state);
  if (std::find(moves.begin(), moves.end(), m) == moves.end()) {
    throw Error(ErrorCode::IllegalMove, m.uci() + " is not legal in this position");
  }
  return apply_move_unchecked(state, m);
}

bool square_attacked(const Placement& placement, Square sq, Color attacker) {
  return attacked_on(placement, sq, attacker);
}

bool insufficient_material(const Placement& placement) {
  int minors = 0;
  bool bishop_on_dark = false;
  bool bishop_on_light = false;
  bool knights = false;
  for (int i = 0; i < kSquareCount; ++i) {
    const Square sq = Square::from_index(i);
    const auto p = placement.at(sq);
    if (!p || p->kind == PieceKind::King) continue;
    switch (p->kind) {
      case PieceKind::Knight:
        knights = true;
        ++minors;
        break;
      case PieceKind::Bishop:
        (sq.is_dark() ? bishop_on_dark : bishop_on_light) = true;
        ++minors;
        break;
      default: return false;
    }
  }
  if (minors <= 1) return true;
  // Bishops only, all on one square colour.
  return !knights && !(bishop_on_dark && bishop_on_light);
}

GameStatus status(const GameState& state) {
  const bool checked = state.in_check();
  if (legal_unsorted(state).empty()) return checked ? GameStatus::Checkmate : GameStatus::Stalemate;
  if (checked) return GameStatus::Check;
  if (insufficient_material(state.placement())) return GameStatus::DrawInsufficientMaterial;
  return GameStatus::Ongoing;
}

std::uint64_t perft(const GameState& state, int depth) {
  if (depth <= 0) return 1;
  const auto moves = legal_unsorted(state);
  if (depth == 1) return moves.size();
  std::uint64_t nodes = 0;
  for (const Move& m : moves) nodes += perft(apply_move_unchecked(state, m), depth - 1);
  return nodes;
}

}  // namespace royalgame
