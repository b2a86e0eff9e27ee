#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "brilliant/learn/dataset.hpp"
#include "brilliant/learn/network.hpp"

namespace brilliant::learn {

enum class ClassWeighting { Balanced, None };

struct TrainConfig {
  double learning_rate = 1e-4;
  double weight_decay = 1e-5;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 200;
  std::size_t patience = 10;
  std::uint64_t seed = 0;
  ClassWeighting weighting = ClassWeighting::Balanced;

  // Logistic regression trains without weight decay by default.
  static TrainConfig defaults(ArchKind kind);
  void validate() const;
  nlohmann::json to_json() const;
  // Missing keys keep the values of `base`.
  static TrainConfig from_json(const nlohmann::json& j, const TrainConfig& base);
  static TrainConfig from_json(const nlohmann::json& j) { return from_json(j, TrainConfig{}); }
};

struct TrainMeta {
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double val_balanced_acc = 0.0;
};

// Everything needed to score raw 3980-wide rows: normalize, select, model.
struct Checkpoint {
  ArchSpec arch;
  TrainConfig config;
  Normalizer norm;
  TrainMeta meta;
  Network net;  // network kinds
  Matrix knn_x;  // knn: normalized, selected training rows
  std::vector<int> knn_y;
  std::array<std::vector<double>, 2> gnb_mean;  // per class
  std::array<std::vector<double>, 2> gnb_var;

  // Row after normalization and feature selection.
  std::vector<double> prepare(std::span<const double> raw) const;
  // Score of an already prepared row.
  double score_prepared(std::span<const double> x) const;
  double predict(std::span<const double> raw) const;
  std::vector<double> predict(const Matrix& raw) const;

  // Weights are written as 32-bit floats.
  nlohmann::json to_json() const;
  static Checkpoint from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

// Fraction of brilliant labels among the k nearest rows (Euclidean).
// Throws DataError when k exceeds the row count.
double knn_score(const Matrix& x, std::span<const int> y, std::size_t k, std::span<const double> query);

// Per-class Gaussian fit with variance floor 1e-9.
void gnb_fit(const Matrix& x, std::span<const int> y, std::array<std::vector<double>, 2>& mean,
             std::array<std::vector<double>, 2>& var);
// Posterior of the brilliant class under equal priors.
double gnb_score(const std::array<std::vector<double>, 2>& mean, const std::array<std::vector<double>, 2>& var,
                 std::span<const double> x);

}  // namespace brilliant::learn
