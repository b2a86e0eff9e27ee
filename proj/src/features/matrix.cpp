#include "brilliant/features/matrix.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <fmt/format.h>

#include "brilliant/error.hpp"

namespace brilliant::features {

namespace {

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
}

std::filesystem::path sidecar_path(const std::filesystem::path& p) { return p.string() + ".json"; }

}  // namespace

void FeatureMatrix::append(std::span<const double> features, RowInfo info) {
  if (cols == 0 && rows.empty()) cols = features.size();
  if (features.size() != cols)
    throw DataError(fmt::format("feature row has {} values, matrix has {} columns", features.size(), cols));
  for (const double v : features) values.push_back(static_cast<float>(v));
  rows.push_back(std::move(info));
}

void save_matrix(const FeatureMatrix& m, const std::filesystem::path& path) {
  std::ofstream bin(path, std::ios::binary | std::ios::trunc);
  if (!bin) throw DataError(fmt::format("cannot write {}", path.string()));
  for (const float f : m.values) {
    const std::uint32_t le = to_le(std::bit_cast<std::uint32_t>(f));
    bin.write(reinterpret_cast<const char*>(&le), sizeof le);
  }
  if (!bin) throw DataError(fmt::format("short write to {}", path.string()));

  nlohmann::json rows = nlohmann::json::array();
  for (const RowInfo& r : m.rows)
    rows.push_back({{"game_id", r.game_id}, {"ply", r.ply}, {"label", r.label}, {"fen", r.fen}, {"uci", r.uci}});
  const nlohmann::json side = {
      {"format", "f32le-row-major"},
      {"n_rows", m.rows.size()},
      {"n_cols", m.cols},
      {"rows", std::move(rows)},
      {"provenance", m.provenance},
  };
  std::ofstream js(sidecar_path(path), std::ios::trunc);
  if (!js) throw DataError(fmt::format("cannot write {}", sidecar_path(path).string()));
  js << side.dump(1) << '\n';
}

FeatureMatrix load_matrix(const std::filesystem::path& path) {
  std::ifstream js(sidecar_path(path));
  if (!js) throw DataError(fmt::format("missing sidecar {}", sidecar_path(path).string()));
  FeatureMatrix m;
  try {
    const nlohmann::json side = nlohmann::json::parse(js);
    m.cols = side.at("n_cols").get<std::size_t>();
    for (const auto& r : side.at("rows"))
      m.rows.push_back({r.at("game_id").get<std::string>(), r.at("ply").get<int>(), r.at("label").get<std::string>(),
                        r.value("fen", ""), r.value("uci", "")});
    m.provenance = side.value("provenance", nlohmann::json::object());
    if (side.at("n_rows").get<std::size_t>() != m.rows.size()) throw DataError("sidecar row count mismatch");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", sidecar_path(path).string(), e.what()));
  }

  std::ifstream bin(path, std::ios::binary | std::ios::ate);
  if (!bin) throw DataError(fmt::format("missing matrix {}", path.string()));
  const auto bytes = static_cast<std::size_t>(bin.tellg());
  const std::size_t expected = m.rows.size() * m.cols * sizeof(float);
  if (bytes != expected)
    throw DataError(fmt::format("{} has {} bytes, expected {}", path.string(), bytes, expected));
  bin.seekg(0);
  m.values.resize(m.rows.size() * m.cols);
  for (float& f : m.values) {
    std::uint32_t le = 0;
    bin.read(reinterpret_cast<char*>(&le), sizeof le);
    f = std::bit_cast<float>(to_le(le));
  }
  return m;
}

}  // namespace brilliant::features
