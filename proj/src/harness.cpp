#include "royalgame/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "royalgame/dataset.hpp"
#include "royalgame/digest.hpp"
#include "royalgame/error.hpp"
#include "royalgame/notation.hpp"

namespace royalgame {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::string_view kLabelNames[] = {"legal",   "legal-and-check",    "legal-and-mate",
                                            "illegal", "piece-not-on-board", "unparseable"};

bool reaches_on_empty_board(PieceKind kind, Color color, Square from, Square to) {
  const int df = to.file() - from.file();
  const int dr = to.rank() - from.rank();
  const int adf = std::abs(df);
  const int adr = std::abs(dr);
  if (adf == 0 && adr == 0) return false;
  switch (kind) {
    case PieceKind::Pawn: {
      const int fwd = color == Color::White ? 1 : -1;
      return (dr == fwd && adf <= 1) || (dr == 2 * fwd && adf == 0);
    }
    case PieceKind::Knight: return (adf == 1 && adr == 2) || (adf == 2 && adr == 1);
    case PieceKind::Bishop: return adf == adr;
    case PieceKind::Rook: return adf == 0 || adr == 0;
    case PieceKind::Queen: return adf == adr || adf == 0 || adr == 0;
    case PieceKind::King: return adf <= 1 && adr <= 1;
  }
  return false;
}

// The move's geometric effect forced onto a copy of the board: the named piece (or a
// conjured one when absent) lands on the destination regardless of legality.
bool forced_attacks_king(const GameState& board, const SanParts& parts) {
  const Color us = board.side_to_move();
  const Color them = ~us;
  Placement p = board.placement();
  const int home = us == Color::White ? 0 : 7;

  if (parts.castle) {
    const Square king_from = Square::at(4, home);
    const bool kingside = *parts.castle == CastleSide::Kingside;
    const Square rook_from = Square::at(kingside ? 7 : 0, home);
    if (p.at(king_from) != Piece{PieceKind::King, us} || p.at(rook_from) != Piece{PieceKind::Rook, us}) {
      return false;
    }
    p.set(king_from, std::nullopt);
    p.set(rook_from, std::nullopt);
    p.set(Square::at(kingside ? 6 : 2, home), Piece{PieceKind::King, us});
    p.set(Square::at(kingside ? 5 : 3, home), Piece{PieceKind::Rook, us});
  } else {
    const Square to = parts.destination;
    if (p.at(to) == Piece{PieceKind::King, them}) return false;
    std::optional<Square> origin;
    bool origin_reaches = false;
    for (int idx = 0; idx < kSquareCount; ++idx) {
      const Square sq = Square::from_index(idx);
      if (p.at(sq) != Piece{parts.kind, us} || sq == to) continue;
      if (parts.from_file && sq.file() != *parts.from_file) continue;
      if (parts.from_rank && sq.rank() != *parts.from_rank) continue;
      const bool reaches = reaches_on_empty_board(parts.kind, us, sq, to);
      if (!origin || (reaches && !origin_reaches)) {
        origin = sq;
        origin_reaches = reaches;
      }
    }
    if (origin) p.set(*origin, std::nullopt);
    p.set(to, Piece{parts.promotion.value_or(parts.kind), us});
  }

  for (int idx = 0; idx < kSquareCount; ++idx) {
    const Square sq = Square::from_index(idx);
    if (p.at(sq) == Piece{PieceKind::King, them}) return square_attacked(p, sq, us);
  }
  return false;
}

std::string format_double(double v) {
  std::ostringstream out;
  out.precision(6);
  out << std::fixed << v;
  std::string s = out.str();
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

ordered_json protocol_json(const EvalProtocol& p) {
  ordered_json j;
  j["mode"] = std::string(to_string(p.mode));
  j["temperature"] = p.temperature;
  j["max_retries"] = p.max_retries;
  j["timeout_ms"] = p.timeout.count();
  j["concurrency"] = p.concurrency;
  return j;
}

Label final_label(Label raw, EvalMode mode) {
  // Retry attempts that never produced a legal move are labeled illegal.
  if (mode == EvalMode::Retry && !is_legal(raw)) return Label::Illegal;
  return raw;
}

EvalRecord run_instance(const EvalInstance& inst, Endpoint& endpoint, const EvalProtocol& protocol,
                        bool endpoint_templates) {
  EvalRecord r;
  r.id = inst.id;
  r.fen = render_fen(inst.board);
  r.prompt = endpoint_templates ? inst.instruction : render_prompt(inst.instruction);
  const bool retry = protocol.mode == EvalMode::Retry;
  const int max_attempts = retry ? std::max(1, protocol.max_retries) : 1;
  const auto start = std::chrono::steady_clock::now();
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    GenerationRequest req;
    req.id = retry ? inst.id + "/" + std::to_string(attempt) : inst.id;
    req.prompt = r.prompt;
    req.temperature = protocol.temperature;
    req.sample = retry;
    try {
      r.raw = endpoint.generate(req, protocol.timeout).text;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EndpointTimeout) throw;
      r.errored = true;
      r.error = e.what();
      r.attempts = attempt;
      break;
    }
    r.attempts = attempt;
    r.token = extract_move(r.raw);
    const Classification c = classify(inst.board, r.token);
    r.raw_label = c.label;
    r.would_check_or_mate = c.would_check_or_mate;
    if (is_legal(c.label)) break;
  }
  r.label = final_label(r.raw_label, protocol.mode);
  r.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace

std::string_view to_string(Label l) { return kLabelNames[static_cast<std::size_t>(l)]; }

std::optional<Label> parse_label(std::string_view s) {
  for (Label l : kAllLabels) {
    if (to_string(l) == s) return l;
  }
  return std::nullopt;
}

std::string_view to_string(EvalMode m) { return m == EvalMode::SingleShot ? "single" : "retry"; }

EvalMode parse_eval_mode(std::string_view s) {
  if (s == "single") return EvalMode::SingleShot;
  if (s == "retry") return EvalMode::Retry;
  throw Error(ErrorCode::SchemaError, "unknown eval mode '" + std::string(s) + "'");
}

std::optional<std::string> extract_move(std::string_view raw) {
  const auto marker = raw.find(kResponseMarker);
  if (marker != std::string_view::npos) raw.remove_prefix(marker + kResponseMarker.size());
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!raw.empty() && is_space(raw.front())) raw.remove_prefix(1);
  std::size_t end = 0;
  while (end < raw.size() && !is_space(raw[end])) ++end;
  std::string token(raw.substr(0, end));
  while (!token.empty()) {
    const unsigned char c = static_cast<unsigned char>(token.back());
    if (c == '+' || c == '#' || std::isalnum(c)) break;
    if (!std::ispunct(c)) break;
    token.pop_back();
  }
  if (token.empty()) return std::nullopt;
  return token;
}

Classification classify(const GameState& board, std::optional<std::string_view> token) {
  if (!token || token->empty()) return {Label::Unparseable, false};
  const auto parts = decompose_san(*token, SanMode::Lenient);
  if (!parts) return {Label::Unparseable, false};
  try {
    const Move m = parse_san(board, *token, SanMode::Lenient);
    const GameState next = apply_move_unchecked(board, m);
    if (!next.in_check()) return {Label::Legal, false};
    return {legal_moves(next).empty() ? Label::LegalMate : Label::LegalCheck, true};
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::PieceAbsent: return {Label::PieceNotOnBoard, forced_attacks_king(board, *parts)};
      case ErrorCode::NoMatchingLegalMove:
      case ErrorCode::AmbiguousToken:
      case ErrorCode::IllegalMove: return {Label::Illegal, forced_attacks_king(board, *parts)};
      default: return {Label::Unparseable, false};
    }
  }
}

EvalInstance make_eval_instance(std::string id, const GameState& board, bool goal_sentence) {
  return EvalInstance{std::move(id), board, make_instruction(render_square_list(board), goal_sentence)};
}

std::vector<EvalInstance> load_eval_dataset(const fs::path& path, bool goal_sentence) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  const std::string stem = path.stem().string();
  std::vector<EvalInstance> out;

  auto add = [&](const json& j, std::size_t n) {
    std::string id = stem + ":" + std::to_string(n);
    if (j.contains("id")) id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    if (j.contains("fen")) {
      out.push_back(make_eval_instance(id, parse_fen(j["fen"].get<std::string>()), goal_sentence));
      return;
    }
    const std::string instruction = j.at("instruction").get<std::string>();
    const auto parsed = parse_instruction(instruction);
    if (!parsed) throw Error(ErrorCode::MalformedRecord, "instruction does not match the template");
    const GameState board = state_from_placement(parse_square_list(parsed->board, SquareListMode::Lenient));
    out.push_back(EvalInstance{id, board, instruction});
  };

  auto wrap = [&](std::size_t n, const auto& body) {
    try {
      body();
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, path.string() + ":" + std::to_string(n) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedRecord, path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  };

  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    wrap(0, [&] {
      const json arr = json::parse(text);
      for (std::size_t i = 0; i < arr.size(); ++i) add(arr[i], i + 1);
    });
    return out;
  }
  std::istringstream lines(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    wrap(n, [&] { add(json::parse(line), n); });
  }
  return out;
}

std::string record_to_json_line(const EvalRecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["fen"] = r.fen;
  j["prompt"] = r.prompt;
  j["raw"] = r.raw;
  j["token"] = r.token ? json(*r.token) : json(nullptr);
  j["label"] = std::string(to_string(r.label));
  j["raw_label"] = std::string(to_string(r.raw_label));
  j["would_check_or_mate"] = r.would_check_or_mate;
  j["attempts"] = r.attempts;
  j["latency_ms"] = r.latency_ms;
  j["errored"] = r.errored;
  j["error"] = r.error;
  return j.dump();
}

EvalRecord record_from_json_line(std::string_view line) {
  try {
    const json j = json::parse(line);
    EvalRecord r;
    r.id = j.at("id").get<std::string>();
    r.fen = j.at("fen").get<std::string>();
    r.prompt = j.value("prompt", "");
    r.raw = j.value("raw", "");
    if (j.contains("token") && j["token"].is_string()) r.token = j["token"].get<std::string>();
    const auto label = parse_label(j.at("label").get<std::string>());
    const auto raw_label = parse_label(j.at("raw_label").get<std::string>());
    if (!label || !raw_label) throw Error(ErrorCode::MalformedRecord, "unknown label");
    r.label = *label;
    r.raw_label = *raw_label;
    r.would_check_or_mate = j.value("would_check_or_mate", false);
    r.attempts = j.value("attempts", 0);
    r.latency_ms = j.value("latency_ms", 0.0);
    r.errored = j.value("errored", false);
    r.error = j.value("error", "");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
}

std::vector<ReferenceLine> default_reference_lines() {
  return {
      {"legal_pct", 0.0, "un-tuned base models, 28M to 8B parameters, single-shot"},
      {"legal_pct", 29.0, "125M model tuned on 1,000 unique pairs, single-shot"},
      {"legal_pct", 36.0, "125M model tuned on 10,000 unique pairs, single-shot"},
      {"legal_pct", 16.0, "125M model tuned on 1,000 no-goal pairs, check/mate-in-1 set"},
      {"legal_check_mate_pct", 1.0, "125M model tuned on 1,000 no-goal pairs, check/mate-in-1 set"},
      {"legal_pct", 33.0, "125M model tuned on 10,000 no-goal pairs, check/mate-in-1 set"},
      {"legal_check_mate_pct", 6.0, "125M model tuned on 10,000 no-goal pairs, check/mate-in-1 set"},
      {"legal_pct", 52.0, "125M model tuned on 100,000 no-goal pairs, check/mate-in-1 set"},
      {"legal_check_mate_pct", 10.0, "125M model tuned on 100,000 no-goal pairs, check/mate-in-1 set"},
      {"legal_pct", 60.0, "125M model tuned on 1,000,000 no-goal pairs, check/mate-in-1 set"},
      {"legal_check_mate_pct", 12.0, "125M model tuned on 1,000,000 no-goal pairs, check/mate-in-1 set"},
      {"legal_pct", 99.0, "125M model tuned on 1,000,000 pairs, retry up to 100 at temperature 3.5 (reported as >99)"},
      {"legal_check_mate_pct", 24.0, "125M model tuned on 1,000,000 pairs, retry up to 100 at temperature 3.5"},
  };
}

MetricsReport aggregate(const std::vector<EvalRecord>& records, const EvalProtocol& protocol) {
  MetricsReport m;
  m.protocol = protocol;
  m.instances = records.size();
  std::size_t legal_cm = 0;
  std::size_t illegal_cm = 0;
  std::size_t absent_cm = 0;
  std::size_t attempts = 0;
  for (const EvalRecord& r : records) {
    if (r.errored) {
      ++m.errored;
      continue;
    }
    ++m.attempted;
    ++m.counts[static_cast<std::size_t>(r.label)];
    attempts += static_cast<std::size_t>(r.attempts);
    if (r.label == Label::LegalCheck || r.label == Label::LegalMate) ++legal_cm;
    // The hallucination split follows the last token, so exhausted retries keep their kind.
    if (r.raw_label == Label::Illegal && r.would_check_or_mate) ++illegal_cm;
    if (r.raw_label == Label::PieceNotOnBoard && r.would_check_or_mate) ++absent_cm;
  }
  if (m.attempted > 0) {
    const double n = static_cast<double>(m.attempted);
    for (std::size_t i = 0; i < m.counts.size(); ++i) m.percent[i] = 100.0 * static_cast<double>(m.counts[i]) / n;
    m.legal_pct = m.pct(Label::Legal) + m.pct(Label::LegalCheck) + m.pct(Label::LegalMate);
    m.legal_check_mate_pct = 100.0 * static_cast<double>(legal_cm) / n;
    m.legal_mate_pct = m.pct(Label::LegalMate);
    m.illegal_check_mate_pct = 100.0 * static_cast<double>(illegal_cm) / n;
    m.piece_absent_check_mate_pct = 100.0 * static_cast<double>(absent_cm) / n;
    m.mean_attempts = static_cast<double>(attempts) / n;
  }
  m.references = default_reference_lines();
  return m;
}

std::string MetricsReport::to_json() const {
  ordered_json j;
  j["instances"] = instances;
  j["attempted"] = attempted;
  j["errored"] = errored;
  ordered_json labels = ordered_json::object();
  for (Label l : kAllLabels) {
    labels[std::string(to_string(l))] = {{"count", count(l)}, {"percent", pct(l)}};
  }
  j["labels"] = labels;
  j["legal_pct"] = legal_pct;
  j["legal_check_mate_pct"] = legal_check_mate_pct;
  j["legal_mate_pct"] = legal_mate_pct;
  j["illegal_check_mate_pct"] = illegal_check_mate_pct;
  j["piece_absent_check_mate_pct"] = piece_absent_check_mate_pct;
  j["unparseable_pct"] = pct(Label::Unparseable);
  j["mean_attempts"] = mean_attempts;
  j["protocol"] = protocol_json(protocol);
  j["endpoint"] = endpoint;
  j["dataset_digest"] = dataset_digest;
  ordered_json refs = ordered_json::array();
  for (const auto& r : references) {
    refs.push_back({{"metric", r.metric}, {"value", r.value}, {"context", r.context}, {"kind", "reference"}});
  }
  j["references"] = refs;
  return j.dump(2);
}

std::string MetricsReport::plot_csv() const {
  std::string out = "metric,value\n";
  for (Label l : kAllLabels) out += std::string(to_string(l)) + "_pct," + format_double(pct(l)) + "\n";
  out += "legal_pct," + format_double(legal_pct) + "\n";
  out += "legal_check_mate_pct," + format_double(legal_check_mate_pct) + "\n";
  out += "legal_mate_pct," + format_double(legal_mate_pct) + "\n";
  out += "illegal_check_mate_pct," + format_double(illegal_check_mate_pct) + "\n";
  out += "piece_absent_check_mate_pct," + format_double(piece_absent_check_mate_pct) + "\n";
  return out;
}

std::string dataset_digest(const std::vector<EvalInstance>& dataset) {
  Sha256 h;
  for (const auto& inst : dataset) {
    h.update(inst.id);
    h.update("\t");
    h.update(render_fen(inst.board));
    h.update("\n");
  }
  return h.hex_digest();
}

EvalOutcome evaluate(const std::vector<EvalInstance>& dataset, const EndpointFactory& factory,
                     const EvalProtocol& protocol) {
  const Hello client{"royalgame-harness", std::string(kProtocolVersion), std::nullopt, std::nullopt};
  auto first = factory();
  const Hello server = first->handshake(client);
  const int capacity = server.capacity.value_or(1);
  const int workers = std::max(1, std::min({protocol.concurrency, capacity, static_cast<int>(dataset.size())}));
  const bool templates = server.templates.value_or(false);

  EvalOutcome outcome;
  outcome.records.resize(dataset.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr failure;

  auto work = [&](Endpoint& endpoint) {
    try {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= dataset.size()) return;
        outcome.records[i] = run_instance(dataset[i], endpoint, protocol, templates);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!failure) failure = std::current_exception();
      next = dataset.size();
    }
  };

  if (workers == 1) {
    work(*first);
  } else {
    std::vector<std::unique_ptr<Endpoint>> endpoints;
    endpoints.push_back(std::move(first));
    for (int w = 1; w < workers; ++w) {
      endpoints.push_back(factory());
      endpoints.back()->handshake(client);
    }
    std::vector<std::thread> threads;
    for (auto& ep : endpoints) threads.emplace_back([&work, &ep] { work(*ep); });
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  outcome.report = aggregate(outcome.records, protocol);
  outcome.report.endpoint = server.name + " " + server.version;
  outcome.report.dataset_digest = dataset_digest(dataset);
  return outcome;
}

std::vector<std::string> audit_replay(const std::vector<EvalRecord>& records, EvalMode mode) {
  std::vector<std::string> mismatches;
  for (const EvalRecord& r : records) {
    if (r.errored) continue;
    std::optional<Classification> c;
    try {
      c = classify(parse_fen(r.fen), r.token ? std::optional<std::string_view>(*r.token) : std::nullopt);
    } catch (const Error&) {
      mismatches.push_back(r.id);
      continue;
    }
    if (c->label != r.raw_label || c->would_check_or_mate != r.would_check_or_mate ||
        final_label(c->label, mode) != r.label) {
      mismatches.push_back(r.id);
    }
  }
  return mismatches;
}

std::vector<SweepPoint> sweep_temperature(const std::vector<EvalInstance>& dataset, const EndpointFactory& endpoint,
                                          const EvalProtocol& base, const std::vector<double>& temperatures) {
  std::vector<SweepPoint> out;
  for (double t : temperatures) {
    EvalProtocol p = base;
    p.mode = EvalMode::Retry;
    p.temperature = t;
    out.push_back({t, evaluate(dataset, endpoint, p).report});
  }
  return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::string out = "temperature,attempted,errored,legal_pct,legal_check_mate_pct,legal_mate_pct,mean_attempts\n";
  for (const auto& p : points) {
    out += format_double(p.temperature) + "," + std::to_string(p.report.attempted) + "," +
           std::to_string(p.report.errored) + "," + format_double(p.report.legal_pct) + "," +
           format_double(p.report.legal_check_mate_pct) + "," + format_double(p.report.legal_mate_pct) + "," +
           format_double(p.report.mean_attempts) + "\n";
  }
  return out;
}

void write_eval_outputs(const EvalOutcome& outcome, const fs::path& dir) {
  fs::create_directories(dir);
  auto write = [&](const fs::path& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / name).string());
    out << content;
  };
  write("report.json", outcome.report.to_json() + "\n");
  std::string lines;
  for (const auto& r : outcome.records) lines += record_to_json_line(r) + "\n";
  write("records.ndjson", lines);
  write("plotdata.csv", outcome.report.plot_csv());
}

}  // namespace royalgame
