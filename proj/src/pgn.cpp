#include "royalgame/pgn.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "json.hpp"
#include "royalgame/error.hpp"
#include "royalgame/notation.hpp"

namespace royalgame {
namespace {

using nlohmann::json;

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    int extra = 0;
    if (c < 0x80) {
      extra = 0;
    } else if ((c & 0xE0) == 0xC0 && c >= 0xC2) {
      extra = 1;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
    } else if ((c & 0xF8) == 0xF0 && c <= 0xF4) {
      extra = 3;
    } else {
      return false;
    }
    if (i + static_cast<std::size_t>(extra) >= s.size() && extra > 0) return false;
    for (int k = 1; k <= extra; ++k) {
      if ((static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]) & 0xC0) != 0x80) return false;
    }
    i += static_cast<std::size_t>(extra) + 1;
  }
  return true;
}

std::string latin1_to_utf8(std::string_view s) {
  std::string out;
  out.reserve(s.size() * 2);
  for (char ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80) {
      out += ch;
    } else {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }
  return out;
}

std::string decode_lines(std::string_view raw) {
  if (raw.substr(0, 3) == "\xEF\xBB\xBF") raw.remove_prefix(3);
  std::string out;
  out.reserve(raw.size());
  std::size_t pos = 0;
  while (pos < raw.size()) {
    auto end = raw.find('\n', pos);
    if (end == std::string_view::npos) end = raw.size();
    std::string_view line = raw.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (valid_utf8(line)) {
      out.append(line);
    } else {
      out += latin1_to_utf8(line);
    }
    out += '\n';
    pos = end + 1;
  }
  return out;
}

bool is_result(std::string_view tok) {
  return tok == "1-0" || tok == "0-1" || tok == "1/2-1/2" || tok == "*";
}

// Drops a leading move number ("12.", "12...", "12.e4" -> "e4"). Returns empty for bare numbers.
std::string_view strip_move_number(std::string_view tok) {
  std::size_t i = 0;
  while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) ++i;
  if (i == 0) {
    while (!tok.empty() && tok.front() == '.') tok.remove_prefix(1);
    return tok;
  }
  std::size_t j = i;
  while (j < tok.size() && tok[j] == '.') ++j;
  if (j == i) return i == tok.size() ? std::string_view{} : tok;  // "0-0" style stays intact
  return tok.substr(j);
}

std::string_view strip_glyphs(std::string_view tok) {
  while (!tok.empty() && (tok.back() == '!' || tok.back() == '?')) tok.remove_suffix(1);
  return tok;
}

class Scanner {
 public:
  Scanner(std::string text, std::string source) : text_(std::move(text)), source_(std::move(source)) {}

  PgnParseResult run() {
    while (pos_ < text_.size()) step();
    finish_game();
    return std::move(result_);
  }

 private:
  char peek() const { return text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') ++line_;
    ++pos_;
  }

  bool at_line_start() const { return pos_ == 0 || text_[pos_ - 1] == '\n'; }

  void begin_game_if_needed() {
    if (!in_game_) {
      in_game_ = true;
      game_ = PgnGame{};
      game_.source = source_;
      game_.index = game_count_;
      game_.line = line_;
      bad_.reset();
      depth_ = 0;
      saw_movetext_ = false;
    }
  }

  void fail(const std::string& message) {
    if (!bad_) bad_ = "line " + std::to_string(line_) + ": " + message;
  }

  void step() {
    const char c = peek();
    if (c == '%' && at_line_start()) {
      skip_line();
      return;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance();
      return;
    }
    // A tag at the start of a line opens a new game even after an unterminated variation.
    if (c == '[' && (depth_ == 0 || at_line_start())) {
      if (in_game_ && saw_movetext_) finish_game();
      begin_game_if_needed();
      read_tag();
      return;
    }
    begin_game_if_needed();
    switch (c) {
      case '{': read_comment(); return;
      case ';': skip_line(); return;
      case '(':
        ++depth_;
        saw_movetext_ = true;
        advance();
        return;
      case ')':
        if (depth_ == 0) fail("unbalanced ')'");
        else --depth_;
        advance();
        return;
      default: break;
    }
    read_token();
  }

  void skip_line() {
    while (pos_ < text_.size() && peek() != '\n') advance();
  }

  void read_comment() {
    const std::size_t start_line = line_;
    advance();
    while (pos_ < text_.size() && peek() != '}') advance();
    if (pos_ >= text_.size()) {
      fail("unterminated comment opened at line " + std::to_string(start_line));
      return;
    }
    advance();
  }

  void read_tag() {
    advance();  // '['
    std::string name;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != '"' &&
           peek() != ']' && peek() != '\n') {
      name += peek();
      advance();
    }
    while (pos_ < text_.size() && (peek() == ' ' || peek() == '\t')) advance();
    if (pos_ >= text_.size() || peek() != '"' || name.empty()) {
      fail("malformed tag pair");
      skip_line();
      return;
    }
    advance();
    std::string value;
    bool closed = false;
    while (pos_ < text_.size() && peek() != '\n') {
      char ch = peek();
      advance();
      if (ch == '\\' && pos_ < text_.size() && (peek() == '"' || peek() == '\\')) {
        value += peek();
        advance();
        continue;
      }
      if (ch == '"') {
        closed = true;
        break;
      }
      value += ch;
    }
    while (pos_ < text_.size() && (peek() == ' ' || peek() == '\t')) advance();
    if (!closed || pos_ >= text_.size() || peek() != ']') {
      fail("malformed tag pair '" + name + "'");
      skip_line();
      return;
    }
    advance();
    game_.tags.emplace_back(std::move(name), std::move(value));
  }

  void read_token() {
    std::string tok;
    while (pos_ < text_.size()) {
      const char ch = peek();
      if (std::isspace(static_cast<unsigned char>(ch)) || ch == '{' || ch == '}' || ch == '(' ||
          ch == ')' || ch == '[' || ch == ']' || ch == ';') {
        break;
      }
      tok += ch;
      advance();
    }
    if (tok.empty()) {
      // Stray '}' or ']'.
      fail(std::string("unexpected '") + peek() + "'");
      advance();
      return;
    }
    saw_movetext_ = true;
    if (depth_ > 0) return;
    if (is_result(tok)) {
      game_.result = tok;
      finish_game();
      return;
    }
    if (tok[0] == '$') return;
    std::string_view body = strip_glyphs(strip_move_number(tok));
    if (body.empty()) return;
    game_.moves.emplace_back(body);
  }

  void finish_game() {
    if (!in_game_) return;
    in_game_ = false;
    ++game_count_;
    if (depth_ > 0) fail("unterminated variation");
    if (game_.tags.empty() && game_.moves.empty() && !bad_) return;
    if (bad_) {
      result_.diagnostics.push_back({source_, game_.index, game_.line, *bad_});
      return;
    }
    if (auto problem = validate(game_)) {
      result_.diagnostics.push_back({source_, game_.index, game_.line, *problem});
      return;
    }
    result_.games.push_back(std::move(game_));
  }

  static std::optional<std::string> validate(const PgnGame& game) {
    const auto setup = game.tag("SetUp");
    if (setup == "1" && !game.tag("FEN")) return "SetUp tag without FEN";
    std::optional<GameState> state;
    try {
      state = game.start();
    } catch (const Error& e) {
      return std::string("bad FEN tag: ") + e.what();
    }
    for (std::size_t i = 0; i < game.moves.size(); ++i) {
      try {
        const Move m = parse_san(*state, game.moves[i], SanMode::Strict);
        state = apply_move_unchecked(*state, m);
      } catch (const Error& e) {
        return "illegal move at ply " + std::to_string(i + 1) + " ('" + game.moves[i] + "': " + e.what() + ")";
      }
    }
    return std::nullopt;
  }

  std::string text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t game_count_ = 0;
  bool in_game_ = false;
  bool saw_movetext_ = false;
  int depth_ = 0;
  std::optional<std::string> bad_;
  PgnGame game_;
  PgnParseResult result_;
};

std::vector<CountEntry> top_entries(const std::map<std::string, std::uint64_t>& counts, std::size_t k) {
  std::vector<CountEntry> out;
  out.reserve(counts.size());
  for (const auto& [key, n] : counts) out.push_back({key, n});
  std::stable_sort(out.begin(), out.end(),
                   [](const CountEntry& a, const CountEntry& b) { return a.count > b.count; });
  if (k && out.size() > k) out.resize(k);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::optional<std::string> PgnGame::tag(std::string_view name) const {
  for (const auto& [k, v] : tags) {
    if (k == name) return v;
  }
  return std::nullopt;
}

std::string PgnGame::id() const { return source + "#" + std::to_string(index); }

GameState PgnGame::start() const {
  if (const auto fen = tag("FEN")) return parse_fen(*fen);
  return GameState::initial();
}

PgnParseResult parse_pgn_text(std::string_view text, std::string_view source) {
  return Scanner(decode_lines(text), std::string(source)).run();
}

PgnParseResult parse_pgn_stream(std::istream& in, std::string_view source) {
  const std::string raw{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse_pgn_text(raw, source);
}

std::vector<BoardMovePair> extract_pairs(const std::vector<PgnGame>& games, PairFilter filter) {
  std::vector<BoardMovePair> out;
  for (const PgnGame& game : games) {
    GameState state = game.start();
    const std::string white = game.tag("White").value_or("?");
    const std::string black = game.tag("Black").value_or("?");
    for (std::size_t i = 0; i < game.moves.size(); ++i) {
      const Move m = parse_san(state, game.moves[i], SanMode::Strict);
      const Color mover = state.side_to_move();
      if (filter == PairFilter::All || mover == Color::White) {
        out.push_back(BoardMovePair{state, m, render_san(state, m), mover,
                                    PairSource{game.id(), i + 1, white, black, game.source}});
      }
      state = apply_move_unchecked(state, m);
    }
  }
  return out;
}

std::vector<BoardMovePair> dedupe_pairs(const std::vector<BoardMovePair>& pairs) {
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<BoardMovePair> out;
  for (const auto& p : pairs) {
    if (seen.emplace(render_square_list(p.board), p.san).second) out.push_back(p);
  }
  return out;
}

std::string pair_to_json_line(const BoardMovePair& pair) {
  const nlohmann::ordered_json j = {
      {"fen", render_fen(pair.board)},
      {"board", render_square_list(pair.board)},
      {"move", pair.san},
      {"uci", pair.move.uci()},
      {"mover", std::string(to_string(pair.mover))},
      {"game", pair.source.game_id},
      {"ply", pair.source.ply},
      {"white", pair.source.white},
      {"black", pair.source.black},
      {"source", pair.source.label},
  };
  return j.dump();
}

BoardMovePair pair_from_json_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
    BoardMovePair p{GameState::initial(), Move{}, "", Color::White, {}};
    p.board = parse_fen(j.at("fen").get<std::string>());
    p.san = j.at("move").get<std::string>();
    p.move = parse_san(p.board, p.san, SanMode::Strict);
    p.mover = p.board.side_to_move();
    p.source.game_id = j.value("game", "");
    p.source.ply = j.value("ply", std::size_t{0});
    p.source.white = j.value("white", "");
    p.source.black = j.value("black", "");
    p.source.label = j.value("source", "");
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
}

void StatsAccumulator::add_game(const PgnGame& game) {
  ++games_;
  white_per_game_.try_emplace(game.id(), 0);
}

void StatsAccumulator::add_pair(const BoardMovePair& pair) {
  ++players_[pair.source.label];
  if (pair.mover == Color::Black) {
    ++black_pairs_;
    return;
  }
  ++white_per_game_[pair.source.game_id];
  ++white_moves_[pair.san];
  const std::string board = render_square_list(pair.board);
  ++white_boards_[board];
  ++white_pair_keys_[{board, pair.san}];
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
  games_ += other.games_;
  black_pairs_ += other.black_pairs_;
  for (const auto& [k, v] : other.white_per_game_) white_per_game_[k] += v;
  for (const auto& [k, v] : other.white_moves_) white_moves_[k] += v;
  for (const auto& [k, v] : other.white_boards_) white_boards_[k] += v;
  for (const auto& [k, v] : other.white_pair_keys_) white_pair_keys_[k] += v;
  for (const auto& [k, v] : other.players_) players_[k] += v;
}

CorpusStats StatsAccumulator::finish(std::size_t top_k) const {
  CorpusStats s;
  s.games = games_;
  for (const auto& [game, n] : white_per_game_) {
    s.white_pairs += n;
    s.max_white_moves_per_game = std::max(s.max_white_moves_per_game, n);
  }
  s.black_pairs = black_pairs_;
  s.total_pairs = s.white_pairs + s.black_pairs;
  s.unique_white_pairs = white_pair_keys_.size();
  s.mean_white_moves_per_game = games_ ? static_cast<double>(s.white_pairs) / static_cast<double>(games_) : 0.0;
  s.top_white_moves = top_entries(white_moves_, top_k);
  s.top_white_boards = top_entries(white_boards_, top_k);
  s.player_moves = top_entries(players_, 0);
  return s;
}

CorpusStats compute_stats(const std::vector<BoardMovePair>& pairs, const std::vector<PgnGame>& games,
                          std::size_t top_k) {
  StatsAccumulator acc;
  for (const auto& g : games) acc.add_game(g);
  for (const auto& p : pairs) acc.add_pair(p);
  return acc.finish(top_k);
}

void write_stats_csv(const CorpusStats& stats, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  auto open = [&](const char* name) {
    std::ofstream out(fs::path(directory) / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + (fs::path(directory) / name).string());
    return out;
  };
  {
    auto out = open("summary.csv");
    std::ostringstream mean;
    mean.precision(6);
    mean << std::fixed << stats.mean_white_moves_per_game;
    out << "metric,value\n"
        << "games," << stats.games << "\n"
        << "total_pairs," << stats.total_pairs << "\n"
        << "white_pairs," << stats.white_pairs << "\n"
        << "black_pairs," << stats.black_pairs << "\n"
        << "unique_white_pairs," << stats.unique_white_pairs << "\n"
        << "mean_white_moves_per_game," << mean.str() << "\n"
        << "max_white_moves_per_game," << stats.max_white_moves_per_game << "\n";
  }
  auto write_counts = [&](const char* name, const char* header, const std::vector<CountEntry>& rows) {
    auto out = open(name);
    out << header << ",count\n";
    for (const auto& r : rows) out << csv_field(r.key) << "," << r.count << "\n";
  };
  write_counts("top_moves.csv", "move", stats.top_white_moves);
  write_counts("top_boards.csv", "board", stats.top_white_boards);
  write_counts("players.csv", "player", stats.player_moves);
}

}  // namespace royalgame
