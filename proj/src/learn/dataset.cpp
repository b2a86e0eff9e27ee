#include "brilliant/learn/dataset.hpp"

#include <cmath>

#include <fmt/format.h>

#include "brilliant/error.hpp"
#include "brilliant/features/features.hpp"

namespace brilliant::learn {

namespace fx = brilliant::features;

std::size_t Dataset::positives() const {
  std::size_t n = 0;
  for (const int v : y) n += v == 1;
  return n;
}

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
  Dataset out;
  out.x = Matrix(idx.size(), x.cols);
  out.y.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto src = x.row(idx[i]);
    std::copy(src.begin(), src.end(), out.x.row(i).begin());
    out.y.push_back(y[idx[i]]);
  }
  return out;
}

Dataset to_dataset(const features::FeatureMatrix& m) {
  Dataset d;
  d.x = Matrix(m.n_rows(), m.cols);
  for (std::size_t r = 0; r < m.n_rows(); ++r) {
    const auto src = m.row(r);
    std::copy(src.begin(), src.end(), d.x.row(r).begin());
    d.y.push_back(m.rows[r].label == "brilliant" ? 1 : 0);
  }
  return d;
}

Normalizer Normalizer::fit(const Matrix& x) {
  if (x.rows == 0) throw DataError("cannot fit normalization on zero rows");
  Normalizer n;
  n.mean.assign(x.cols, 0.0);
  n.std.assign(x.cols, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < x.cols; ++c) n.mean[c] += x.at(r, c);
  for (double& m : n.mean) m /= static_cast<double>(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r)
    for (std::size_t c = 0; c < x.cols; ++c) {
      const double d = x.at(r, c) - n.mean[c];
      n.std[c] += d * d;
    }
  for (double& s : n.std) {
    s = std::sqrt(s / static_cast<double>(x.rows));
    if (!(s > 1e-12)) s = 1.0;
  }
  return n;
}

void Normalizer::apply_inplace(std::span<double> row) const {
  if (row.size() != mean.size())
    throw DataError(fmt::format("row has {} features, normalizer expects {}", row.size(), mean.size()));
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / std[c];
}

Matrix Normalizer::apply(const Matrix& x) const {
  Matrix out = x;
  for (std::size_t r = 0; r < out.rows; ++r) apply_inplace(out.row(r));
  return out;
}

nlohmann::json Normalizer::to_json() const { return {{"mean", mean}, {"std", std}}; }

Normalizer Normalizer::from_json(const nlohmann::json& j) {
  Normalizer n;
  n.mean = j.at("mean").get<std::vector<double>>();
  n.std = j.at("std").get<std::vector<double>>();
  if (n.mean.size() != n.std.size()) throw DataError("normalizer mean/std length mismatch");
  return n;
}

FeatureSelector::FeatureSelector(std::string name) : name_(std::move(name)) {
  if (name_ == "all") {
    all_ = true;
    return;
  }
  if (name_ == "is-best-move") {
    for (std::size_t b = 0; b < fx::kBlocks; ++b) picks_.push_back(b * fx::kTreeDim + fx::kIsBest);
    return;
  }
  const auto colon = name_.find(':');
  const std::string kind = name_.substr(0, colon);
  const std::string who = colon == std::string::npos ? "" : name_.substr(colon + 1);
  if ((kind != "win-chance" && kind != "win-chance-per-nodes") || (who != "strong" && who != "weak" && who != "both"))
    throw DataError(fmt::format("unknown feature selector '{}'", name_));
  std::vector<std::size_t> evaluators;
  if (who != "weak") evaluators.push_back(0);
  if (who != "strong") evaluators.push_back(1);
  const std::size_t per_eval = fx::kBlocks / 2;
  for (const std::size_t e : evaluators) {
    for (std::size_t s = 0; s < per_eval; ++s) {
      if (kind == "win-chance" && s != per_eval - 1) continue;
      const std::size_t base = (e * per_eval + s) * fx::kTreeDim;
      picks_.push_back(base + fx::kParentSubtree + fx::kRootQ);
      picks_.push_back(base + fx::kChildSubtree + fx::kRootQ);
      diffs_.push_back(picks_.size());  // marks a difference column after the pair
    }
  }
}

std::size_t FeatureSelector::output_dim(std::size_t input_dim) const {
  return all_ ? input_dim : picks_.size() + diffs_.size();
}

std::vector<double> FeatureSelector::apply(std::span<const double> row) const {
  if (all_) return {row.begin(), row.end()};
  if (row.size() != fx::kDatumDim)
    throw DataError(fmt::format("selector '{}' needs {}-wide rows, got {}", name_, fx::kDatumDim, row.size()));
  std::vector<double> out;
  out.reserve(output_dim(row.size()));
  std::size_t d = 0;
  for (std::size_t i = 0; i < picks_.size(); ++i) {
    out.push_back(row[picks_[i]]);
    if (d < diffs_.size() && diffs_[d] == i + 1) {
      out.push_back(row[picks_[i]] - row[picks_[i - 1]]);
      ++d;
    }
  }
  return out;
}

Matrix FeatureSelector::apply(const Matrix& x) const {
  if (all_) return x;
  Matrix out(x.rows, output_dim(x.cols));
  for (std::size_t r = 0; r < x.rows; ++r) {
    const auto v = apply(x.row(r));
    std::copy(v.begin(), v.end(), out.row(r).begin());
  }
  return out;
}

std::vector<std::string> FeatureSelector::ablation_names() {
  return {"win-chance:strong",
          "win-chance:weak",
          "win-chance:both",
          "win-chance-per-nodes:strong",
          "win-chance-per-nodes:weak",
          "win-chance-per-nodes:both",
          "is-best-move",
          "all"};
}

ClassWeights ClassWeights::balanced(std::span<const int> y) {
  std::size_t pos = 0;
  for (const int v : y) pos += v == 1;
  const std::size_t neg = y.size() - pos;
  if (pos == 0 || neg == 0) throw DataError("training data must contain both classes");
  const double n = static_cast<double>(y.size());
  return {n / (2.0 * static_cast<double>(neg)), n / (2.0 * static_cast<double>(pos))};
}

}  // namespace brilliant::learn
