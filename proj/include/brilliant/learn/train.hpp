#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brilliant/learn/dataset.hpp"
#include "brilliant/learn/model.hpp"

namespace brilliant::learn {

// Mean of TPR and TNR with scores thresholded at 0.5. A class with no rows
// contributes nothing; with neither class present the result is 0.
double balanced_accuracy(std::span<const double> scores, std::span<const int> y, double threshold = 0.5);

// Tracks the best metric seen; improvement must be strict. Epochs are
// numbered from 1.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);
  // Returns true when the metric improved on the best so far.
  bool update(double metric);
  bool should_stop() const { return epoch_ - best_epoch_ >= patience_; }
  std::size_t best_epoch() const { return best_epoch_; }
  std::size_t epoch() const { return epoch_; }
  double best() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = -std::numeric_limits<double>::infinity();
};

// Class-weighted binary cross-entropy from a logit, weight applied per row.
double weighted_bce(double logit, int label, const ClassWeights& w);

// Fits normalization on `train`, trains with AdamW and early stopping on the
// balanced accuracy of `validation`, and restores the best epoch. Throws
// DataError for single-class data and when the loss becomes non-finite.
Checkpoint train(const ArchSpec& arch, const TrainConfig& cfg, const Dataset& train, const Dataset& validation);

struct CvResult {
  std::vector<double> folds;
  double mean = 0.0;
};

// Fold f holds positions [f n / k, (f+1) n / k) of a seeded permutation.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

// Stratified holdout: `fraction` of each class (at least one row) goes to the
// second vector.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_holdout(std::span<const int> y,
                                                                                 double fraction,
                                                                                 std::uint64_t seed);

// Each fold trains on the other k-1 folds, with 10% of them held out for
// early stopping, and is scored on itself. Throws DataError naming a fold
// without both classes.
CvResult cross_validate(const ArchSpec& arch, const TrainConfig& cfg, const Dataset& data, std::size_t k = 5);

struct GridCell {
  ArchSpec arch;
  TrainConfig config;
  nlohmann::json to_json() const;
};

struct GridRow {
  GridCell cell;
  std::size_t parameters = 0;
  CvResult cv;
};

struct GridResult {
  std::vector<GridRow> rows;  // input order
  std::size_t best = 0;
  nlohmann::json to_json() const;
};

// Parses a JSON list of config maps. Each map may set kind, hidden, dropout,
// selector, k and any TrainConfig key; unset keys take the kind's defaults.
std::vector<GridCell> parse_grid(const nlohmann::json& j, ArchKind default_kind);

// Highest mean balanced accuracy wins; ties go to fewer parameters, then to
// the lexicographically smaller serialized config.
GridResult grid_search(std::span<const GridCell> grid, const Dataset& data, std::size_t k = 5);

}  // namespace brilliant::learn
