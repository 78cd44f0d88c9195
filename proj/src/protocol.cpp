#include "royalgame/protocol.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <iostream>
#include <mutex>
#include <regex>

#include "httplib.h"
#include "json.hpp"
#include "royalgame/error.hpp"

namespace royalgame {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

json parse_line(std::string_view line) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) throw Error(ErrorCode::ProtocolViolation, "message is not an object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProtocolViolation, std::string("bad JSON: ") + e.what());
  }
}

template <typename T>
T field(const json& j, const char* name) {
  const auto it = j.find(name);
  if (it == j.end()) throw Error(ErrorCode::ProtocolViolation, std::string("missing field ") + name);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ProtocolViolation, std::string("wrong type for field ") + name);
  }
}

class InProcessEndpoint final : public Endpoint {
 public:
  explicit InProcessEndpoint(std::shared_ptr<const LineHandler> handler) : handler_(std::move(handler)) {}

  Hello handshake(const Hello& client) override {
    return decode_hello(handler_->handle_line(encode_hello(client)));
  }

  GenerationResponse generate(const GenerationRequest& request, std::chrono::milliseconds) override {
    return decode_response(handler_->handle_line(encode_request(request)));
  }

 private:
  std::shared_ptr<const LineHandler> handler_;
};

class SubprocessEndpoint final : public Endpoint {
 public:
  explicit SubprocessEndpoint(const std::string& command) {
    static std::once_flag ignore_sigpipe;
    std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });

    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0) {
      throw Error(ErrorCode::Io, std::string("pipe: ") + std::strerror(errno));
    }
    pid_ = ::fork();
    if (pid_ < 0) throw Error(ErrorCode::Io, std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    in_ = to_child[1];
    out_ = from_child[0];
  }

  ~SubprocessEndpoint() override {
    ::close(in_);
    ::close(out_);
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, nullptr, WNOHANG) == pid_) return;
      ::usleep(20000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }

  SubprocessEndpoint(const SubprocessEndpoint&) = delete;
  SubprocessEndpoint& operator=(const SubprocessEndpoint&) = delete;

  Hello handshake(const Hello& client) override {
    send(encode_hello(client));
    return decode_hello(read_line(std::chrono::milliseconds(10000)));
  }

  GenerationResponse generate(const GenerationRequest& request, std::chrono::milliseconds timeout) override {
    send(encode_request(request));
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      GenerationResponse r = decode_response(read_line(std::max(left, std::chrono::milliseconds(0))));
      // Late answers to requests that already timed out are dropped.
      if (r.id == request.id) return r;
    }
  }

 private:
  void send(std::string line) {
    line += '\n';
    std::size_t done = 0;
    while (done < line.size()) {
      const ssize_t n = ::write(in_, line.data() + done, line.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::ProtocolViolation, std::string("endpoint closed its input: ") + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw Error(ErrorCode::EndpointTimeout, "no reply within timeout");
      pollfd pfd{out_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::Io, std::string("poll: ") + std::strerror(errno));
      }
      if (rc == 0) throw Error(ErrorCode::EndpointTimeout, "no reply within timeout");
      char chunk[4096];
      const ssize_t n = ::read(out_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorCode::Io, std::string("read: ") + std::strerror(errno));
      }
      if (n == 0) throw Error(ErrorCode::ProtocolViolation, "endpoint exited");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  pid_t pid_ = -1;
  int in_ = -1;
  int out_ = -1;
  std::string buffer_;
};

class HttpEndpoint final : public Endpoint {
 public:
  explicit HttpEndpoint(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw Error(ErrorCode::SchemaError, "bad endpoint URL " + url);
    base_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
  }

  Hello handshake(const Hello& client) override {
    return decode_hello(post(encode_hello(client), std::chrono::milliseconds(10000)));
  }

  GenerationResponse generate(const GenerationRequest& request, std::chrono::milliseconds timeout) override {
    GenerationResponse r = decode_response(post(encode_request(request), timeout));
    if (r.id != request.id) throw Error(ErrorCode::ProtocolViolation, "response id mismatch");
    return r;
  }

 private:
  std::string post(const std::string& line, std::chrono::milliseconds timeout) {
    httplib::Client client(base_);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(path_, line + "\n", "application/x-ndjson");
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) {
        throw Error(ErrorCode::EndpointTimeout, "HTTP " + httplib::to_string(err));
      }
      throw Error(ErrorCode::Io, "HTTP " + httplib::to_string(err));
    }
    if (res->status != 200) {
      throw Error(ErrorCode::ProtocolViolation, "HTTP status " + std::to_string(res->status));
    }
    std::string body = res->body;
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    return body;
  }

  std::string base_;
  std::string path_;
};

}  // namespace

std::string encode_hello(const Hello& h) {
  ordered_json inner;
  inner["name"] = h.name;
  inner["version"] = h.version;
  if (h.capacity) inner["capacity"] = *h.capacity;
  if (h.templates) inner["templates"] = *h.templates;
  ordered_json j;
  j["hello"] = inner;
  return j.dump();
}

std::string encode_request(const GenerationRequest& r) {
  ordered_json j;
  j["id"] = r.id;
  j["prompt"] = r.prompt;
  j["temperature"] = r.temperature;
  j["sample"] = r.sample;
  return j.dump();
}

std::string encode_response(const GenerationResponse& r) {
  ordered_json j;
  j["id"] = r.id;
  j["text"] = r.text;
  return j.dump();
}

bool is_hello(std::string_view line) {
  try {
    const json j = json::parse(line);
    return j.is_object() && j.contains("hello");
  } catch (const json::exception&) {
    return false;
  }
}

Hello decode_hello(std::string_view line) {
  const json j = parse_line(line);
  const auto it = j.find("hello");
  if (it == j.end() || !it->is_object()) throw Error(ErrorCode::ProtocolViolation, "expected hello");
  Hello h;
  h.name = field<std::string>(*it, "name");
  h.version = field<std::string>(*it, "version");
  if (it->contains("capacity")) h.capacity = field<int>(*it, "capacity");
  if (it->contains("templates")) h.templates = field<bool>(*it, "templates");
  return h;
}

GenerationRequest decode_request(std::string_view line) {
  const json j = parse_line(line);
  GenerationRequest r;
  r.id = field<std::string>(j, "id");
  r.prompt = field<std::string>(j, "prompt");
  if (!j.contains("temperature") || !j["temperature"].is_number()) {
    throw Error(ErrorCode::ProtocolViolation, "missing or non-numeric temperature");
  }
  r.temperature = j["temperature"].get<double>();
  r.sample = field<bool>(j, "sample");
  return r;
}

GenerationResponse decode_response(std::string_view line) {
  const json j = parse_line(line);
  if (j.contains("error")) {
    throw Error(ErrorCode::ProtocolViolation, "endpoint error: " + j["error"].dump());
  }
  return GenerationResponse{field<std::string>(j, "id"), field<std::string>(j, "text")};
}

std::string LineHandler::handle_line(std::string_view line) const {
  try {
    if (is_hello(line)) {
      decode_hello(line);
      return encode_hello(hello());
    }
    return encode_response(respond(decode_request(line)));
  } catch (const Error& e) {
    ordered_json j;
    j["error"] = e.what();
    return j.dump();
  }
}

std::unique_ptr<Endpoint> make_in_process_endpoint(std::shared_ptr<const LineHandler> handler) {
  return std::make_unique<InProcessEndpoint>(std::move(handler));
}

std::unique_ptr<Endpoint> make_subprocess_endpoint(const std::string& command) {
  return std::make_unique<SubprocessEndpoint>(command);
}

std::unique_ptr<Endpoint> make_http_endpoint(const std::string& url) {
  return std::make_unique<HttpEndpoint>(url);
}

void serve_stream(const LineHandler& handler, std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << handler.handle_line(line) << '\n';
    out.flush();
  }
}

struct HttpService::Impl {
  httplib::Server server;
};

HttpService::HttpService(const LineHandler& handler) : impl_(std::make_unique<Impl>()) {
  impl_->server.Post(R"(/.*)", [&handler](const httplib::Request& req, httplib::Response& res) {
    std::string body = req.body;
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    res.set_content(handler.handle_line(body) + "\n", "application/x-ndjson");
  });
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  const int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpService::run() { impl_->server.listen_after_bind(); }

void HttpService::stop() { impl_->server.stop(); }

void serve_http(const LineHandler& handler, const std::string& host, int port) {
  HttpService service(handler);
  service.bind(host, port);
  service.run();
}

}  // namespace royalgame
