#include <gtest/gtest.h>

#include "royalgame/error.hpp"
#include "royalgame/types.hpp"

using namespace royalgame;

TEST(Square, ParseAndName) {
  const auto e4 = Square::parse("e4");
  ASSERT_TRUE(e4);
  EXPECT_EQ(e4->file(), 4);
  EXPECT_EQ(e4->rank(), 3);
  EXPECT_EQ(e4->index(), 28);
  EXPECT_EQ(e4->name(), "e4");
  EXPECT_FALSE(Square::parse("i1"));
  EXPECT_FALSE(Square::parse("a9"));
  EXPECT_FALSE(Square::parse("a"));
  EXPECT_FALSE(Square::parse("a10"));
}

TEST(Square, AllSquaresRoundTrip) {
  for (int i = 0; i < kSquareCount; ++i) {
    const Square sq = Square::from_index(i);
    EXPECT_EQ(Square::parse(sq.name()), sq);
  }
}

TEST(Square, Colours) {
  EXPECT_TRUE(Square::parse("a1")->is_dark());
  EXPECT_FALSE(Square::parse("h1")->is_dark());
  EXPECT_TRUE(Square::parse("h8")->is_dark());
}

TEST(Square, OrderingIsRankMajor) {
  EXPECT_LT(*Square::parse("h1"), *Square::parse("a2"));
  EXPECT_LT(*Square::parse("a2"), *Square::parse("b2"));
}

TEST(Piece, Letters) {
  EXPECT_EQ(piece_letter(Piece{PieceKind::Knight, Color::White}), 'N');
  EXPECT_EQ(piece_letter(Piece{PieceKind::Queen, Color::Black}), 'q');
  EXPECT_EQ(piece_from_letter('k'), (Piece{PieceKind::King, Color::Black}));
  EXPECT_FALSE(piece_from_letter('x'));
  EXPECT_EQ(kind_from_letter('R'), PieceKind::Rook);
  EXPECT_FALSE(kind_from_letter('r'));
}

TEST(Move, Uci) {
  Move m{*Square::parse("e7"), *Square::parse("e8"), Piece{PieceKind::Pawn, Color::White}, false,
         PieceKind::Queen, std::nullopt, false};
  EXPECT_EQ(m.uci(), "e7e8q");
}

TEST(Error, CodeNamesAppearInMessages) {
  const Error e(ErrorCode::PieceAbsent, "no white queen");
  EXPECT_EQ(e.code(), ErrorCode::PieceAbsent);
  EXPECT_STREQ(e.what(), "piece-absent: no white queen");
  EXPECT_EQ(to_string(ErrorCode::Io), "io-error");
}
