#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brilliant/features/matrix.hpp"
#include "brilliant/random.hpp"

namespace brilliant::learn {

// Row-major dense matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Binary task: 1 = brilliant, 0 = everything else.
struct Dataset {
  Matrix x;
  std::vector<int> y;

  std::size_t size() const { return y.size(); }
  std::size_t positives() const;
  Dataset subset(std::span<const std::size_t> idx) const;
};

// Widens to double; label 1 for "brilliant", 0 for every other label.
Dataset to_dataset(const features::FeatureMatrix& m);

// Per-feature standardization fitted on a training split. Zero-variance
// features keep std 1 so they map to 0.
struct Normalizer {
  std::vector<double> mean;
  std::vector<double> std;

  static Normalizer fit(const Matrix& x);
  Matrix apply(const Matrix& x) const;
  void apply_inplace(std::span<double> row) const;

  nlohmann::json to_json() const;
  static Normalizer from_json(const nlohmann::json& j);
};

// Column subsets for the logistic-regression ablations, applied to
// normalized 3980-wide rows.
//   all                         every column
//   is-best-move                is-best flag of the 10 tree blocks
//   win-chance:E                parent Q, post-move Q, difference at the
//                               largest budget, E in {strong, weak, both}
//   win-chance-per-nodes:E      the same triple for every budget
class FeatureSelector {
 public:
  // Throws DataError for an unknown selector name.
  explicit FeatureSelector(std::string name = "all");

  const std::string& name() const { return name_; }
  bool is_identity() const { return all_; }
  std::size_t output_dim(std::size_t input_dim) const;
  std::vector<double> apply(std::span<const double> row) const;
  Matrix apply(const Matrix& x) const;

  // Every selector name the ablation table uses, "all" last.
  static std::vector<std::string> ablation_names();

 private:
  std::string name_;
  bool all_ = false;
  std::vector<std::size_t> picks_;  // copied columns
  std::vector<std::size_t> diffs_;  // picks_ prefix lengths after which post - parent is emitted
};

// Per-class loss weights n / (2 n_c): mean weight over rows is 1.
struct ClassWeights {
  double negative = 1.0;
  double positive = 1.0;
  static ClassWeights balanced(std::span<const int> y);
};

using brilliant::shuffled_indices;

}  // namespace brilliant::learn
