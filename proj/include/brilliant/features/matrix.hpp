#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace brilliant::features {

struct RowInfo {
  std::string game_id;
  int ply = 0;
  std::string label;  // brilliant / good / other
  std::string fen;
  std::string uci;
};

// Row-major float32 feature table plus per-row provenance.
struct FeatureMatrix {
  std::size_t cols = 0;
  std::vector<float> values;
  std::vector<RowInfo> rows;
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t n_rows() const { return rows.size(); }
  std::span<const float> row(std::size_t i) const { return {values.data() + i * cols, cols}; }
  void append(std::span<const double> features, RowInfo info);
};

// Writes `path` (little-endian float32, no header) and `path` + ".json".
void save_matrix(const FeatureMatrix& m, const std::filesystem::path& path);
// Throws DataError when the binary size disagrees with the sidecar.
FeatureMatrix load_matrix(const std::filesystem::path& path);

}  // namespace brilliant::features
