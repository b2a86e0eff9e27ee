#include "brilliant/analysis/analysis.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "brilliant/error.hpp"

namespace brilliant::analysis {

namespace fx = brilliant::features;

namespace {

double ratio(double a, double b) { return b > 0.0 ? a / b : 0.0; }

}  // namespace

BalancedRates balanced_rates(double tpr, double tnr) {
  BalancedRates r;
  r.tpr = tpr;
  r.tnr = tnr;
  r.fpr = 1.0 - tnr;
  r.fnr = 1.0 - tpr;
  r.ppv = ratio(tpr, tpr + r.fpr);
  r.npv = ratio(tnr, tnr + r.fnr);
  r.balanced_accuracy = (tpr + tnr) / 2.0;
  return r;
}

BalancedRates ConfusionSummary::rates() const {
  return balanced_rates(ratio(static_cast<double>(tp), static_cast<double>(tp + fn)),
                        ratio(static_cast<double>(tn), static_cast<double>(tn + fp)));
}

nlohmann::json ConfusionSummary::to_json() const {
  const BalancedRates r = rates();
  return {{"tp", tp},       {"fp", fp},   {"tn", tn},   {"fn", fn},   {"threshold", threshold},
          {"tpr", r.tpr},   {"tnr", r.tnr}, {"fpr", r.fpr}, {"fnr", r.fnr}, {"ppv", r.ppv},
          {"npv", r.npv},   {"balanced_accuracy", r.balanced_accuracy}};
}

ConfusionSummary confusion(std::span<const double> scores, std::span<const int> y, double threshold) {
  if (y.empty()) throw DataError("cannot evaluate on zero rows");
  if (scores.size() != y.size()) throw DataError("score and label counts differ");
  ConfusionSummary s;
  s.threshold = threshold;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool hit = scores[i] >= threshold;
    if (y[i] == 1) (hit ? s.tp : s.fn) += 1;
    else (hit ? s.fp : s.tn) += 1;
  }
  return s;
}

ConfusionSummary evaluate_model(const learn::Checkpoint& c, const learn::Dataset& rows, double threshold) {
  if (rows.size() == 0) throw DataError("cannot evaluate on zero rows");
  return confusion(c.predict(rows.x), rows.y, threshold);
}

TTest one_sample_t_test(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) throw DataError("t-test needs at least two values");
  double sum = 0.0;
  for (const double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  const double s = std::sqrt(ss / static_cast<double>(n - 1));
  TTest r;
  if (s == 0.0) {
    r.t = mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean);
    r.p = mean == 0.0 ? 1.0 : 0.0;
    return r;
  }
  r.t = mean / (s / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
  return r;
}

nlohmann::json PerturbationReport::to_json() const {
  return {{"mean", mean}, {"sigma", sigma}, {"n", n}, {"t", test.t}, {"p", test.p}};
}

std::array<std::size_t, 5> perturbation_indices() {
  std::array<std::size_t, 5> out{};
  const std::size_t per_eval = fx::kBlocks / 2;
  for (std::size_t s = 0; s < per_eval; ++s)
    out[s] = (per_eval + s) * fx::kTreeDim + fx::kChildSubtree + fx::kRootQ;
  return out;
}

void perturb_row(std::span<double> raw) {
  if (raw.size() != fx::kDatumDim)
    throw DataError(fmt::format("perturbation needs {}-wide rows, got {}", fx::kDatumDim, raw.size()));
  for (const std::size_t i : perturbation_indices()) raw[i] = -1.0;
}

PerturbationReport maia_perturbation(const learn::Checkpoint& c, const learn::Matrix& raw) {
  PerturbationReport r;
  std::vector<double> row;
  for (std::size_t i = 0; i < raw.rows; ++i) {
    row.assign(raw.row(i).begin(), raw.row(i).end());
    const double before = c.predict(row);
    perturb_row(row);
    r.deltas.push_back(c.predict(row) - before);
  }
  r.n = r.deltas.size();
  if (r.n == 0) return r;
  double sum = 0.0;
  for (const double d : r.deltas) sum += d;
  r.mean = sum / static_cast<double>(r.n);
  double ss = 0.0;
  for (const double d : r.deltas) ss += (d - r.mean) * (d - r.mean);
  r.sigma = std::sqrt(ss / static_cast<double>(r.n));
  if (r.n >= 2) r.test = one_sample_t_test(r.deltas);
  return r;
}

std::vector<ViolinPoint> violin_data(const fx::FeatureMatrix& m, const fx::DatumLayout& layout,
                                     const std::optional<std::string>& evaluator,
                                     std::optional<std::uint64_t> budget) {
  if (m.cols != fx::kDatumDim)
    throw DataError(fmt::format("violin data needs {}-wide rows, got {}", fx::kDatumDim, m.cols));
  std::vector<ViolinPoint> out;
  for (std::size_t r = 0; r < m.n_rows(); ++r) {
    const auto row = m.row(r);
    for (std::size_t e = 0; e < layout.evaluators.size(); ++e) {
      if (evaluator && *evaluator != layout.evaluators[e]) continue;
      for (std::size_t s = 0; s < layout.budgets.size(); ++s) {
        if (budget && *budget != layout.budgets[s]) continue;
        const std::size_t base = (e * layout.budgets.size() + s) * fx::kTreeDim;
        ViolinPoint p;
        p.label = m.rows[r].label;
        p.evaluator = layout.evaluators[e];
        p.budget = layout.budgets[s];
        p.filled = row[base + fx::kContainsMove] == 0.0f;
        p.q = p.filled ? -1.0 : static_cast<double>(row[base + fx::kChildSubtree + fx::kRootQ]);
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

void write_violin_csv(std::ostream& out, std::span<const ViolinPoint> points) {
  out << "label,evaluator,budget,q,filled\n";
  for (const ViolinPoint& p : points)
    out << fmt::format("{},{},{},{},{}\n", p.label, p.evaluator, p.budget, p.q, p.filled ? 1 : 0);
}

}  // namespace brilliant::analysis
