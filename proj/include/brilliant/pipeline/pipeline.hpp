#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "brilliant/chess/position.hpp"
#include "brilliant/features/matrix.hpp"
#include "brilliant/ingest/dataset.hpp"
#include "brilliant/pipeline/config.hpp"
#include "brilliant/search/evaluator.hpp"
#include "brilliant/search/tree.hpp"

namespace brilliant::pipeline {

std::unique_ptr<search::Evaluator> make_evaluator(const EvaluatorSettings& s, const search::EvalWeights& w);

using EvaluatorPair = std::array<std::unique_ptr<search::Evaluator>, 2>;
EvaluatorPair make_evaluators(const PipelineConfig& cfg);

// The 10 trees of one datum: a budget ladder per evaluator. Throws
// IllegalMoveError when `move` is not legal in `pos`.
std::vector<search::SearchTree> datum_trees(const chess::Position& pos, const chess::Move& move,
                                            const PipelineConfig& cfg, EvaluatorPair& evaluators);

std::vector<double> datum_row(const chess::Position& pos, const chess::Move& move, const PipelineConfig& cfg,
                              EvaluatorPair& evaluators);

// Calls fn(i, evaluators) for i in [0, n) on `workers` threads, each with its
// own evaluator pair. The first exception stops the pool and is rethrown.
void parallel_rows(std::size_t n, const PipelineConfig& cfg, std::size_t workers,
                   const std::function<void(std::size_t, EvaluatorPair&)>& fn);

// Feature rows for moves[indices[i]], in index order, computed by `workers`
// threads that each own their evaluators.
features::FeatureMatrix build_feature_matrix(std::span<const ingest::LabeledMove> moves,
                                             std::span<const std::size_t> indices, const PipelineConfig& cfg,
                                             std::size_t workers);

// Hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Provenance record written next to every stage's outputs.
struct RunManifest {
  std::string stage;
  nlohmann::json config;
  nlohmann::json inputs = nlohmann::json::array();
  nlohmann::json outputs = nlohmann::json::array();
  nlohmann::json extra = nlohmann::json::object();

  void add_input(const std::filesystem::path& p);
  void add_output(const std::filesystem::path& p);
  // Writes runs/<stage>.json under the work directory.
  std::filesystem::path write(const PipelineConfig& cfg) const;
};

// Throws DataError naming the expected artifact and the stage producing it.
void require_artifact(const std::filesystem::path& p, std::string_view stage);

}  // namespace brilliant::pipeline
