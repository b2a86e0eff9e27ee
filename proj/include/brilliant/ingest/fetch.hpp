#pragma once

#include <chrono>
#include <optional>
#include <string>

namespace brilliant::ingest {

struct FetchConfig {
  std::string base_url = "https://lichess.org";
  std::optional<std::string> token;  // sent as a bearer token
  std::chrono::milliseconds min_interval{1000};
  std::chrono::milliseconds initial_backoff{2000};
  int max_attempts = 4;
  std::chrono::seconds timeout{30};
  bool offline = false;
};

// Downloads {base_url}/api/study/{id}.pgn, at most one request per
// min_interval across calls. Retries 429, 5xx and connection failures with
// doubling backoff. Errors: DataError "study not found" for 404 or a
// malformed id; TransportError for "network disabled", exhausted retries and
// other statuses.
class StudyFetcher {
 public:
  explicit StudyFetcher(FetchConfig cfg);
  std::string fetch(const std::string& study_id);

 private:
  FetchConfig cfg_;
  std::optional<std::chrono::steady_clock::time_point> last_;
};

}  // namespace brilliant::ingest
