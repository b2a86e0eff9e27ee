#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "brilliant/search/evaluator.hpp"

namespace brilliant::search {

// Bidirectional line channel to an evaluation sidecar.
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  virtual void write_line(std::string_view line) = 0;
  // Throws TimeoutError when no full line arrives in time, TransportError
  // when the peer goes away.
  virtual std::string read_line(std::chrono::milliseconds timeout) = 0;
};

// Spawns `argv` and talks over its stdin/stdout. The child is killed on
// destruction.
std::unique_ptr<LineTransport> spawn_stdio_transport(const std::vector<std::string>& argv);
std::unique_ptr<LineTransport> connect_tcp_transport(const std::string& host, int port);

struct SidecarConfig {
  std::string name = "external";
  // Either a command line (stdio) or host/port (TCP).
  std::vector<std::string> command;
  std::string host;
  int port = 0;
  std::chrono::milliseconds timeout{10000};
  bool deterministic = true;
};

// Parses "v <value> p <uci>:<p> ..." against the legal moves of the
// requested position. Legal moves missing from the response get prior 0;
// priors are renormalized (with a warning) when they do not sum to 1.
// Throws ProtocolError on malformed lines, unknown or illegal moves, values
// outside [-1, 1] or an all-zero policy.
Evaluation parse_response(std::string_view line, std::span<const chess::Move> legal);

// Evaluator backed by an external engine. Requests are serialized on one
// connection; responses are cached per position until the next search.
class ExternalEvaluator final : public Evaluator {
 public:
  explicit ExternalEvaluator(SidecarConfig config);
  ExternalEvaluator(SidecarConfig config, std::unique_ptr<LineTransport> transport);

  std::string name() const override { return config_.name; }
  bool deterministic() const override { return config_.deterministic; }
  Evaluation evaluate(const chess::Position& p, std::span<const chess::Move> legal) override;
  void begin_search() override;

  std::size_t requests_sent() const { return requests_; }

 private:
  SidecarConfig config_;
  std::unique_ptr<LineTransport> transport_;
  std::mutex mu_;
  std::unordered_map<std::string, Evaluation> cache_;
  std::size_t requests_ = 0;
};

}  // namespace brilliant::search
