#include "brilliant/ingest/fetch.hpp"

#include <algorithm>
#include <cctype>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>
#include <spdlog/spdlog.h>

#include "brilliant/error.hpp"

namespace brilliant::ingest {

StudyFetcher::StudyFetcher(FetchConfig cfg) : cfg_(std::move(cfg)) {}

std::string StudyFetcher::fetch(const std::string& study_id) {
  if (cfg_.offline) throw TransportError("network disabled");
  if (study_id.empty() ||
      !std::all_of(study_id.begin(), study_id.end(), [](unsigned char c) { return std::isalnum(c); }))
    throw DataError(fmt::format("study not found: malformed id '{}'", study_id));

  httplib::Client client(cfg_.base_url);
  client.set_connection_timeout(cfg_.timeout);
  client.set_read_timeout(cfg_.timeout);
  client.set_follow_location(true);
  httplib::Headers headers;
  if (cfg_.token) headers.emplace("Authorization", "Bearer " + *cfg_.token);
  const std::string path = fmt::format("/api/study/{}.pgn", study_id);

  auto backoff = cfg_.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= cfg_.max_attempts; ++attempt) {
    if (last_) {
      const auto ready = *last_ + cfg_.min_interval;
      std::this_thread::sleep_until(ready);
    }
    last_ = std::chrono::steady_clock::now();
    const auto res = client.Get(path, headers);
    if (!res) {
      last_error = fmt::format("request failed: {}", httplib::to_string(res.error()));
    } else if (res->status == 200) {
      return res->body;
    } else if (res->status == 404) {
      throw DataError(fmt::format("study not found: {}", study_id));
    } else if (res->status == 429 || res->status >= 500) {
      last_error = fmt::format("HTTP {}", res->status);
    } else {
      throw TransportError(fmt::format("fetching study {}: HTTP {}", study_id, res->status));
    }
    if (attempt < cfg_.max_attempts) {
      spdlog::warn("study {}: {}; retrying in {} ms", study_id, last_error, backoff.count());
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
  }
  throw TransportError(fmt::format("fetching study {}: {} after {} attempts", study_id, last_error, cfg_.max_attempts));
}

}  // namespace brilliant::ingest
