#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "royalgame/baselines.hpp"
#include "royalgame/dataset.hpp"
#include "royalgame/error.hpp"
#include "royalgame/notation.hpp"
#include "royalgame/protocol.hpp"

using namespace royalgame;
using namespace std::chrono_literals;

namespace {

class EchoHandler final : public LineHandler {
 public:
  Hello hello() const override { return {"echo", "1", 4, std::nullopt}; }
  GenerationResponse respond(const GenerationRequest& r) const override {
    return {r.id, r.prompt + "|" + std::to_string(r.sample)};
  }
};

ErrorCode decode_error(std::string_view line) {
  try {
    decode_response(line);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "accepted " << line;
  return ErrorCode::Io;
}

std::string board_prompt(const GameState& s) {
  return render_prompt(make_instruction(render_square_list(s), true));
}

}  // namespace

TEST(Codec, EncodesWithStableKeyOrder) {
  EXPECT_EQ(encode_request({"a", "p", 0.5, true}), R"({"id":"a","prompt":"p","temperature":0.5,"sample":true})");
  EXPECT_EQ(encode_response({"a", "e4"}), R"({"id":"a","text":"e4"})");
  EXPECT_EQ(encode_hello({"n", "1", std::nullopt, std::nullopt}), R"({"hello":{"name":"n","version":"1"}})");
  EXPECT_EQ(encode_hello({"n", "1", 8, true}), R"({"hello":{"name":"n","version":"1","capacity":8,"templates":true}})");
}

TEST(Codec, RoundTrips) {
  const auto r = decode_request(encode_request({"id-1", "line\nbreak \"q\"", 3.5, false}));
  EXPECT_EQ(r.id, "id-1");
  EXPECT_EQ(r.prompt, "line\nbreak \"q\"");
  EXPECT_DOUBLE_EQ(r.temperature, 3.5);
  EXPECT_FALSE(r.sample);
  const auto h = decode_hello(encode_hello({"n", "2", 3, false}));
  EXPECT_EQ(h.capacity, 3);
  EXPECT_EQ(h.templates, false);
  EXPECT_TRUE(is_hello(encode_hello(h)));
  EXPECT_FALSE(is_hello(encode_response({"a", "b"})));
  EXPECT_FALSE(is_hello("{"));
}

TEST(Codec, RejectsMalformedLines) {
  EXPECT_EQ(decode_error("not json"), ErrorCode::ProtocolViolation);
  EXPECT_EQ(decode_error("[1,2]"), ErrorCode::ProtocolViolation);
  EXPECT_EQ(decode_error(R"({"id":"a"})"), ErrorCode::ProtocolViolation);
  EXPECT_EQ(decode_error(R"({"id":1,"text":"x"})"), ErrorCode::ProtocolViolation);
  EXPECT_EQ(decode_error(R"({"error":"boom"})"), ErrorCode::ProtocolViolation);
  EXPECT_THROW(decode_request(R"({"id":"a","prompt":"p","temperature":"hot","sample":false})"), Error);
  EXPECT_THROW(decode_request(R"({"id":"a","prompt":"p","temperature":1})"), Error);
  EXPECT_THROW(decode_hello(R"({"hello":{"name":"x"}})"), Error);
}

TEST(LineHandler, AnswersHelloRequestsAndErrors) {
  EchoHandler h;
  EXPECT_EQ(decode_hello(h.handle_line(encode_hello({"c", "1", std::nullopt, std::nullopt}))).name, "echo");
  EXPECT_EQ(decode_response(h.handle_line(encode_request({"x", "p", 1.0, true}))).text, "p|1");
  EXPECT_NE(h.handle_line("garbage").find("\"error\""), std::string::npos);
}

TEST(ServeStream, OneReplyPerLine) {
  EchoHandler h;
  std::istringstream in(encode_hello({"c", "1", std::nullopt, std::nullopt}) + "\n" +
                        encode_request({"r1", "p", 1.0, false}) + "\n\n" + "junk\n");
  std::ostringstream out;
  serve_stream(h, in, out);
  std::istringstream replies(out.str());
  std::string a, b, c;
  std::getline(replies, a);
  std::getline(replies, b);
  std::getline(replies, c);
  EXPECT_TRUE(is_hello(a));
  EXPECT_EQ(decode_response(b).id, "r1");
  EXPECT_NE(c.find("error"), std::string::npos);
}

TEST(Endpoint, InProcess) {
  auto ep = make_in_process_endpoint(std::make_shared<EchoHandler>());
  EXPECT_EQ(ep->handshake({"c", "1", std::nullopt, std::nullopt}).capacity, 4);
  EXPECT_EQ(ep->generate({"a", "q", 1.0, false}, 1000ms).text, "q|0");
}

TEST(Endpoint, SubprocessBaselineServer) {
  auto ep = make_subprocess_endpoint(std::string(ROYALGAME_CLI) + " baseline serve --policy greedy");
  const Hello h = ep->handshake({"test", std::string(kProtocolVersion), std::nullopt, std::nullopt});
  EXPECT_EQ(h.name, "baseline-greedy");
  const GameState s = parse_fen("6k1/5ppp/8/8/8/8/8/4R1K1 w - - 0 1");
  EXPECT_EQ(ep->generate({"q1", board_prompt(s), 1.0, false}, 10000ms).text, "Re8#");
  EXPECT_EQ(ep->generate({"q2", "no board here", 1.0, false}, 10000ms).text, "");
}

TEST(Endpoint, SubprocessTimeout) {
  auto ep = make_subprocess_endpoint(
      "read h; echo '{\"hello\":{\"name\":\"slow\",\"version\":\"1\"}}'; sleep 5");
  ep->handshake({"c", "1", std::nullopt, std::nullopt});
  const auto start = std::chrono::steady_clock::now();
  try {
    ep->generate({"a", "p", 1.0, false}, 200ms);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EndpointTimeout);
  }
  EXPECT_LT(std::chrono::steady_clock::now() - start, 3s);
}

TEST(Endpoint, SubprocessSkipsStaleReplies) {
  auto ep = make_subprocess_endpoint(
      "read h; echo '{\"hello\":{\"name\":\"s\",\"version\":\"1\"}}'; read r; "
      "echo '{\"id\":\"old\",\"text\":\"x\"}'; echo '{\"id\":\"r1\",\"text\":\"y\"}'; sleep 1");
  ep->handshake({"c", "1", std::nullopt, std::nullopt});
  EXPECT_EQ(ep->generate({"r1", "p", 1.0, false}, 5000ms).text, "y");
}

TEST(Endpoint, SubprocessExitIsProtocolViolation) {
  auto ep = make_subprocess_endpoint("read h; echo '{\"hello\":{\"name\":\"s\",\"version\":\"1\"}}'");
  ep->handshake({"c", "1", std::nullopt, std::nullopt});
  try {
    ep->generate({"a", "p", 1.0, false}, 5000ms);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ProtocolViolation);
  }
}

TEST(Endpoint, Http) {
  PolicyOptions opts;
  opts.kind = PolicyKind::Greedy;
  PolicyHandler handler(opts);
  HttpService service(handler);
  const int port = service.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread server([&] { service.run(); });
  {
    auto ep = make_http_endpoint("http://127.0.0.1:" + std::to_string(port) + "/generate");
    EXPECT_EQ(ep->handshake({"c", "1", std::nullopt, std::nullopt}).name, "baseline-greedy");
    const GameState s = parse_fen("6k1/5ppp/8/8/8/8/8/4R1K1 w - - 0 1");
    EXPECT_EQ(ep->generate({"h1", board_prompt(s), 1.0, false}, 5000ms).text, "Re8#");
  }
  service.stop();
  server.join();
}

TEST(Endpoint, HttpUnreachableAndBadUrl) {
  EXPECT_THROW(make_http_endpoint("ftp://x"), Error);
  auto ep = make_http_endpoint("http://127.0.0.1:1");
  EXPECT_THROW(ep->handshake({"c", "1", std::nullopt, std::nullopt}), Error);
}
