#include "brilliant/search/sidecar.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstring>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "brilliant/chess/notation.hpp"
#include "brilliant/error.hpp"

namespace brilliant::search {

namespace {

// Buffered line reader/writer over a pair of file descriptors.
class FdTransport : public LineTransport {
 public:
  FdTransport(int read_fd, int write_fd) : rfd_(read_fd), wfd_(write_fd) {}

  void write_line(std::string_view line) override {
    std::string buf(line);
    buf.push_back('\n');
    std::size_t off = 0;
    while (off < buf.size()) {
      const ssize_t n = ::write(wfd_, buf.data() + off, buf.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(fmt::format("sidecar write failed: {}", std::strerror(errno)));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string read_line(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      const auto nl = pending_.find('\n');
      if (nl != std::string::npos) {
        std::string line = pending_.substr(0, nl);
        pending_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw TimeoutError(fmt::format("sidecar timed out after {} ms", timeout.count()));
      pollfd pfd{rfd_, POLLIN, 0};
      const int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw TransportError(fmt::format("sidecar poll failed: {}", std::strerror(errno)));
      }
      if (rc == 0) continue;
      char chunk[4096];
      const ssize_t n = ::read(rfd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(fmt::format("sidecar read failed: {}", std::strerror(errno)));
      }
      if (n == 0) throw TransportError("sidecar closed the connection");
      pending_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  int rfd_;
  int wfd_;
  std::string pending_;
};

class StdioTransport final : public FdTransport {
 public:
  StdioTransport(pid_t pid, int read_fd, int write_fd) : FdTransport(read_fd, write_fd), pid_(pid) {}
  ~StdioTransport() override {
    ::close(wfd_);
    ::close(rfd_);
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }

 private:
  pid_t pid_;
};

class TcpTransport final : public FdTransport {
 public:
  explicit TcpTransport(int fd) : FdTransport(fd, fd) {}
  ~TcpTransport() override { ::close(rfd_); }
};

}  // namespace

std::unique_ptr<LineTransport> spawn_stdio_transport(const std::vector<std::string>& argv) {
  if (argv.empty()) throw TransportError("sidecar command is empty");
  // A dead sidecar must surface as a read/write error, not kill us.
  ::signal(SIGPIPE, SIG_IGN);
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0 || ::pipe2(from_child, O_CLOEXEC) != 0)
    throw TransportError(fmt::format("pipe failed: {}", std::strerror(errno)));
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  const pid_t pid = ::fork();
  if (pid < 0) throw TransportError(fmt::format("fork failed: {}", std::strerror(errno)));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<StdioTransport>(pid, from_child[0], to_child[1]);
}

std::unique_ptr<LineTransport> connect_tcp_transport(const std::string& host, int port) {
  ::signal(SIGPIPE, SIG_IGN);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
    throw TransportError(fmt::format("cannot resolve {}: {}", host, ::gai_strerror(rc)));
  int fd = -1;
  for (addrinfo* a = res; a; a = a->ai_next) {
    fd = ::socket(a->ai_family, a->ai_socktype | SOCK_CLOEXEC, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw TransportError(fmt::format("cannot connect to {}:{}", host, port));
  return std::make_unique<TcpTransport>(fd);
}

Evaluation parse_response(std::string_view line, std::span<const chess::Move> legal) {
  std::vector<std::string_view> tok;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    const std::size_t j = line.find(' ', i);
    const std::size_t end = j == std::string_view::npos ? line.size() : j;
    if (end > i) tok.push_back(line.substr(i, end - i));
    i = end;
  }
  if (tok.size() < 3 || tok[0] != "v" || tok[2] != "p")
    throw ProtocolError(fmt::format("malformed response '{}'", line));

  auto parse_double = [&](std::string_view s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
      throw ProtocolError(fmt::format("bad number '{}' in response", s));
    return v;
  };

  Evaluation ev;
  ev.value = parse_double(tok[1]);
  if (ev.value < -1.0 || ev.value > 1.0) throw ProtocolError(fmt::format("value {} outside [-1, 1]", ev.value));
  ev.policy.assign(legal.size(), 0.0);
  for (std::size_t k = 3; k < tok.size(); ++k) {
    const auto colon = tok[k].find(':');
    if (colon == std::string_view::npos) throw ProtocolError(fmt::format("bad policy entry '{}'", tok[k]));
    chess::Move m;
    try {
      m = chess::parse_uci(tok[k].substr(0, colon));
    } catch (const ParseError&) {
      throw ProtocolError(fmt::format("bad move '{}' in response", tok[k].substr(0, colon)));
    }
    const auto it = std::lower_bound(legal.begin(), legal.end(), m);
    if (it == legal.end() || *it != m)
      throw ProtocolError(fmt::format("response names illegal move {}", tok[k].substr(0, colon)));
    const double p = parse_double(tok[k].substr(colon + 1));
    if (p < 0.0) throw ProtocolError(fmt::format("negative prior for {}", tok[k].substr(0, colon)));
    ev.policy[static_cast<std::size_t>(it - legal.begin())] = p;
  }
  double sum = 0.0;
  for (const double p : ev.policy) sum += p;
  if (sum <= 0.0) throw ProtocolError("response policy is empty");
  if (std::abs(sum - 1.0) > 1e-9) {
    spdlog::warn("sidecar policy sums to {}, renormalizing", sum);
    for (double& p : ev.policy) p /= sum;
  }
  return ev;
}

ExternalEvaluator::ExternalEvaluator(SidecarConfig config) : config_(std::move(config)) {
  if (!config_.command.empty()) {
    transport_ = spawn_stdio_transport(config_.command);
  } else if (!config_.host.empty()) {
    transport_ = connect_tcp_transport(config_.host, config_.port);
  } else {
    throw TransportError("sidecar config needs a command or host");
  }
}

ExternalEvaluator::ExternalEvaluator(SidecarConfig config, std::unique_ptr<LineTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {}

void ExternalEvaluator::begin_search() {
  std::lock_guard lock(mu_);
  cache_.clear();
}

Evaluation ExternalEvaluator::evaluate(const chess::Position& p, std::span<const chess::Move> legal) {
  const std::string fen = chess::to_fen(p);
  std::lock_guard lock(mu_);
  if (const auto it = cache_.find(fen); it != cache_.end()) return it->second;
  try {
    transport_->write_line("eval " + fen);
    ++requests_;
    const std::string line = transport_->read_line(config_.timeout);
    Evaluation ev = parse_response(line, legal);
    cache_.emplace(fen, ev);
    return ev;
  } catch (const TimeoutError& e) {
    throw TimeoutError(fmt::format("{} at {}", e.what(), fen));
  } catch (const TransportError& e) {
    throw TransportError(fmt::format("{} at {}", e.what(), fen));
  } catch (const ProtocolError& e) {
    throw ProtocolError(fmt::format("{} at {}", e.what(), fen));
  }
}

}  // namespace brilliant::search
