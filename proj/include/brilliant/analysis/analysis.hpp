#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brilliant/features/features.hpp"
#include "brilliant/features/matrix.hpp"
#include "brilliant/learn/dataset.hpp"
#include "brilliant/learn/model.hpp"

namespace brilliant::analysis {

// Values derived from TPR and TNR assuming equal class prevalence.
struct BalancedRates {
  double tpr = 0.0;
  double tnr = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
  double ppv = 0.0;  // TPR / (TPR + FPR)
  double npv = 0.0;  // TNR / (TNR + FNR)
  double balanced_accuracy = 0.0;
};

// PPV and NPV are 0 when their denominator is 0.
BalancedRates balanced_rates(double tpr, double tnr);

struct ConfusionSummary {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;
  double threshold = 0.5;

  // A class with no rows has rate 0.
  BalancedRates rates() const;
  nlohmann::json to_json() const;
};

// Positives are label 1. Throws DataError for empty rows.
ConfusionSummary confusion(std::span<const double> scores, std::span<const int> y, double threshold = 0.5);
ConfusionSummary evaluate_model(const learn::Checkpoint& c, const learn::Dataset& rows, double threshold = 0.5);

struct TTest {
  double t = 0.0;
  double p = 1.0;  // two-sided
};

// One-sample t-test of the mean against 0 with t = mean / (s / sqrt(n)),
// s the sample standard deviation. Needs n >= 2; zero spread gives p = 1
// for a zero mean and p = 0 otherwise.
TTest one_sample_t_test(std::span<const double> values);

struct PerturbationReport {
  std::vector<double> deltas;  // perturbed minus original score, row order
  double mean = 0.0;
  double sigma = 0.0;  // population
  std::size_t n = 0;
  TTest test;
  nlohmann::json to_json() const;  // omits the per-row deltas
};

// Raw feature indices of the post-move root Q in the weak-evaluator blocks.
std::array<std::size_t, 5> perturbation_indices();
// Sets those indices to -1.
void perturb_row(std::span<double> raw);
PerturbationReport maia_perturbation(const learn::Checkpoint& c, const learn::Matrix& raw);

struct ViolinPoint {
  std::string label;
  std::string evaluator;
  std::uint64_t budget = 0;
  double q = 0.0;
  bool filled = false;
};

// Post-move root Q per row and tree block; rows whose tree lacks the move
// report -1 flagged as filled. Restrict to one block with evaluator/budget.
std::vector<ViolinPoint> violin_data(const features::FeatureMatrix& m, const features::DatumLayout& layout,
                                     const std::optional<std::string>& evaluator = std::nullopt,
                                     std::optional<std::uint64_t> budget = std::nullopt);
// Header label,evaluator,budget,q,filled.
void write_violin_csv(std::ostream& out, std::span<const ViolinPoint> points);

}  // namespace brilliant::analysis
