#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brilliant/features/features.hpp"
#include "brilliant/learn/model.hpp"
#include "brilliant/learn/network.hpp"
#include "brilliant/search/builtin.hpp"

namespace brilliant::pipeline {

// Where a tree-search evaluator comes from: "builtin" (name strong or weak)
// or "sidecar" (command line for stdio, or host and port for TCP).
struct EvaluatorSettings {
  std::string name;
  std::string type = "builtin";
  std::vector<std::string> command;
  std::string host;
  int port = 0;
  int timeout_ms = 10000;

  nlohmann::json to_json() const;
  static EvaluatorSettings from_json(const nlohmann::json& j, EvaluatorSettings base);
};

// Every pipeline knob. JSON sections: paths, ingest, search, evaluators,
// train. Keys left out keep their defaults; unknown keys are rejected.
struct PipelineConfig {
  std::filesystem::path work_dir = "work";

  std::uint64_t split_seed = 0;
  std::optional<std::size_t> other_cap;
  std::string base_url = "https://lichess.org";
  int fetch_interval_ms = 1000;

  double c_puct = 1.5;
  std::array<std::uint64_t, 5> budgets{10, 100, 1000, 10000, 100000};
  std::uint64_t max_idle_iterations = std::uint64_t{1} << 20;
  std::uint64_t search_seed = 0;
  std::array<EvaluatorSettings, 2> evaluators{EvaluatorSettings{"strong"}, EvaluatorSettings{"weak"}};
  search::EvalWeights weights;

  learn::ArchSpec arch = learn::ArchSpec::defaults(learn::ArchKind::AggReduce);
  learn::TrainConfig train;
  std::size_t cv_folds = 5;
  double validation_fraction = 0.1;

  nlohmann::json to_json() const;
  // Throws ParseError for malformed or unknown keys, DataError for invalid
  // values.
  static PipelineConfig from_json(const nlohmann::json& j);
  static PipelineConfig load(const std::filesystem::path& path);

  features::DatumLayout layout() const;

  std::filesystem::path dataset_path() const { return work_dir / "dataset.jsonl"; }
  std::filesystem::path manifest_path() const { return work_dir / "manifest.json"; }
  std::filesystem::path features_path(const std::string& split) const {
    return work_dir / "features" / (split + ".f32");
  }
  std::filesystem::path checkpoint_path() const { return work_dir / "checkpoints" / "model.json"; }
  std::filesystem::path reports_dir() const { return work_dir / "reports"; }
  std::filesystem::path runs_dir() const { return work_dir / "runs"; }
};

}  // namespace brilliant::pipeline
