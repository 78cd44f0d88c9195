#pragma once

#include <chrono>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace royalgame {

inline constexpr std::string_view kLibraryVersion = "0.1.0";
inline constexpr std::string_view kProtocolVersion = "1";

// Wire messages, one JSON object per line:
//   request   {"id":str,"prompt":str,"temperature":number,"sample":bool}
//   response  {"id":str,"text":str}
//   handshake {"hello":{"name":str,"version":str}} in both directions
// Endpoints may add "capacity" (in-flight requests they accept) and "templates" (true when the
// endpoint wraps prompts itself) inside "hello".
struct Hello {
  std::string name;
  std::string version;
  std::optional<int> capacity;
  std::optional<bool> templates;
};

struct GenerationRequest {
  std::string id;
  std::string prompt;
  double temperature = 1.0;
  bool sample = false;
};

struct GenerationResponse {
  std::string id;
  std::string text;
};

std::string encode_hello(const Hello& h);
std::string encode_request(const GenerationRequest& r);
std::string encode_response(const GenerationResponse& r);

// All decoders throw protocol-violation on malformed input.
Hello decode_hello(std::string_view line);
GenerationRequest decode_request(std::string_view line);
GenerationResponse decode_response(std::string_view line);

bool is_hello(std::string_view line);

class Endpoint {
 public:
  virtual ~Endpoint() = default;
  // Exchanges hello messages. Must be called once before generate.
  virtual Hello handshake(const Hello& client) = 0;
  // Throws endpoint-timeout or protocol-violation.
  virtual GenerationResponse generate(const GenerationRequest& request,
                                      std::chrono::milliseconds timeout) = 0;
};

using EndpointFactory = std::function<std::unique_ptr<Endpoint>()>;

// Answers one protocol line with one protocol line. Hello lines get the server hello back.
class LineHandler {
 public:
  virtual ~LineHandler() = default;
  virtual Hello hello() const = 0;
  virtual GenerationResponse respond(const GenerationRequest& request) const = 0;

  std::string handle_line(std::string_view line) const;
};

// Calls the handler directly; no transport.
std::unique_ptr<Endpoint> make_in_process_endpoint(std::shared_ptr<const LineHandler> handler);

// Runs `command` through /bin/sh and talks over its stdin/stdout.
std::unique_ptr<Endpoint> make_subprocess_endpoint(const std::string& command);

// POSTs one JSON line per message to http://host:port[/path].
std::unique_ptr<Endpoint> make_http_endpoint(const std::string& url);

// Reads protocol lines from `in` until EOF, writing one reply line per input line.
void serve_stream(const LineHandler& handler, std::istream& in, std::ostream& out);

// Serves one protocol line per POST body on any path.
class HttpService {
 public:
  explicit HttpService(const LineHandler& handler);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called from another thread.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

void serve_http(const LineHandler& handler, const std::string& host, int port);

}  // namespace royalgame
