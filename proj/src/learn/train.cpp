#include "brilliant/learn/train.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "brilliant/error.hpp"
#include "brilliant/kernels/kernels.hpp"

namespace brilliant::learn {

namespace {

constexpr std::uint64_t kDropoutStream = 0xd1b54a32d192ed03ULL;
constexpr std::uint64_t kEpochStream = 0x9e3779b97f4a7c15ULL;

void require_both_classes(std::span<const int> y, const char* what) {
  bool pos = false;
  bool neg = false;
  for (const int v : y) (v == 1 ? pos : neg) = true;
  if (!pos || !neg) throw DataError(fmt::format("{} must contain both classes", what));
}

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::vector<double> scores_of(const Checkpoint& c, const Matrix& x) {
  std::vector<double> out;
  out.reserve(x.rows);
  if (is_network(c.arch.kind)) {
    Workspace ws = c.net.make_workspace();
    for (std::size_t r = 0; r < x.rows; ++r) out.push_back(c.net.forward(x.row(r), ws));
  } else {
    for (std::size_t r = 0; r < x.rows; ++r) out.push_back(c.score_prepared(x.row(r)));
  }
  return out;
}

Matrix prepare(const Normalizer& norm, const FeatureSelector& sel, const Matrix& raw) {
  return sel.apply(norm.apply(raw));
}

}  // namespace

double balanced_accuracy(std::span<const double> scores, std::span<const int> y, double threshold) {
  if (scores.size() != y.size()) throw DataError("score and label counts differ");
  std::size_t tp = 0, p = 0, tn = 0, n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const bool hit = scores[i] >= threshold;
    if (y[i] == 1) {
      ++p;
      tp += hit;
    } else {
      ++n;
      tn += !hit;
    }
  }
  double sum = 0.0;
  int classes = 0;
  if (p) {
    sum += static_cast<double>(tp) / static_cast<double>(p);
    ++classes;
  }
  if (n) {
    sum += static_cast<double>(tn) / static_cast<double>(n);
    ++classes;
  }
  return classes ? sum / classes : 0.0;
}

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience_ == 0) throw DataError("patience must be >= 1");
}

bool EarlyStopping::update(double metric) {
  ++epoch_;
  if (metric > best_) {
    best_ = metric;
    best_epoch_ = epoch_;
    return true;
  }
  return false;
}

double weighted_bce(double logit, int label, const ClassWeights& w) {
  return label == 1 ? w.positive * softplus(-logit) : w.negative * softplus(logit);
}

Checkpoint train(const ArchSpec& arch, const TrainConfig& cfg, const Dataset& train, const Dataset& validation) {
  arch.validate();
  cfg.validate();
  if (train.size() == 0 || validation.size() == 0) throw DataError("training and validation rows must be nonempty");
  require_both_classes(train.y, "training data");

  Checkpoint c;
  c.arch = arch;
  c.config = cfg;
  c.meta.seed = cfg.seed;
  c.norm = Normalizer::fit(train.x);
  const FeatureSelector sel(arch.selector);
  const Matrix xt = prepare(c.norm, sel, train.x);
  const Matrix xv = prepare(c.norm, sel, validation.x);

  if (arch.kind == ArchKind::Knn) {
    if (arch.k > xt.rows) throw DataError(fmt::format("knn k={} exceeds {} training rows", arch.k, xt.rows));
    c.knn_x = xt;
    c.knn_y = train.y;
    c.meta.val_balanced_acc = balanced_accuracy(scores_of(c, xv), validation.y);
    return c;
  }
  if (arch.kind == ArchKind::Gnb) {
    gnb_fit(xt, train.y, c.gnb_mean, c.gnb_var);
    c.meta.val_balanced_acc = balanced_accuracy(scores_of(c, xv), validation.y);
    return c;
  }

  const ClassWeights cw =
      cfg.weighting == ClassWeighting::Balanced ? ClassWeights::balanced(train.y) : ClassWeights{1.0, 1.0};
  c.net = Network::build(arch, xt.cols);
  c.net.initialize(cfg.seed);
  const auto& k = kernels::active();
  const std::size_t np = c.net.parameter_count();
  std::vector<double> grad(np), m(np, 0.0), v(np, 0.0);
  std::vector<double> best(c.net.params().begin(), c.net.params().end());
  Workspace ws = c.net.make_workspace();
  std::mt19937_64 dropout_rng(cfg.seed ^ kDropoutStream);
  kernels::AdamStep step;
  step.lr = cfg.learning_rate;
  step.weight_decay = cfg.weight_decay;
  double pow1 = 1.0;
  double pow2 = 1.0;

  EarlyStopping stop(cfg.patience);
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto order = shuffled_indices(xt.rows, cfg.seed + kEpochStream * epoch);
    double loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t r = order[i];
        const double p = c.net.forward(xt.row(r), ws, &dropout_rng);
        const int y = train.y[r];
        const double w = y == 1 ? cw.positive : cw.negative;
        loss += weighted_bce(c.net.logit(ws), y, cw);
        c.net.backward(ws, w * (p - y), grad);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      for (double& g : grad) g *= scale;
      pow1 *= step.beta1;
      pow2 *= step.beta2;
      step.bias_correction1 = 1.0 - pow1;
      step.bias_correction2 = 1.0 - pow2;
      k.adamw(c.net.params().data(), grad.data(), m.data(), v.data(), np, step);
    }
    if (!std::isfinite(loss)) throw DataError(fmt::format("training loss became non-finite at epoch {}", epoch));
    c.meta.epochs = epoch;
    if (stop.update(balanced_accuracy(scores_of(c, xv), validation.y)))
      std::copy(c.net.params().begin(), c.net.params().end(), best.begin());
    if (stop.should_stop()) break;
  }
  std::copy(best.begin(), best.end(), c.net.params().begin());
  c.meta.best_epoch = stop.best_epoch();
  c.meta.val_balanced_acc = stop.best();
  return c;
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw DataError("cross-validation needs k >= 2");
  if (n < k) throw DataError(fmt::format("cannot split {} rows into {} folds", n, k));
  const auto idx = shuffled_indices(n, seed);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t f = 0; f < k; ++f)
    folds[f].assign(idx.begin() + static_cast<std::ptrdiff_t>(f * n / k),
                    idx.begin() + static_cast<std::ptrdiff_t>((f + 1) * n / k));
  return folds;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_holdout(std::span<const int> y,
                                                                                 double fraction,
                                                                                 std::uint64_t seed) {
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (const int cls : {0, 1}) {
    std::vector<std::size_t> members;
    for (const std::size_t i : shuffled_indices(y.size(), seed))
      if ((y[i] == 1) == (cls == 1)) members.push_back(i);
    if (members.empty()) continue;
    const std::size_t take = std::max<std::size_t>(1, static_cast<std::size_t>(fraction * members.size()));
    out.second.insert(out.second.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(take));
    out.first.insert(out.first.end(), members.begin() + static_cast<std::ptrdiff_t>(take), members.end());
  }
  std::sort(out.first.begin(), out.first.end());
  std::sort(out.second.begin(), out.second.end());
  return out;
}

CvResult cross_validate(const ArchSpec& arch, const TrainConfig& cfg, const Dataset& data, std::size_t k) {
  const auto folds = make_folds(data.size(), k, cfg.seed);
  CvResult res;
  for (std::size_t f = 0; f < k; ++f) {
    const Dataset held = data.subset(folds[f]);
    try {
      require_both_classes(held.y, "held-out rows");
      std::vector<std::size_t> rest;
      for (std::size_t g = 0; g < k; ++g)
        if (g != f) rest.insert(rest.end(), folds[g].begin(), folds[g].end());
      std::sort(rest.begin(), rest.end());
      const Dataset pool = data.subset(rest);
      require_both_classes(pool.y, "training rows");
      const auto [fit, val] = stratified_holdout(pool.y, 0.1, cfg.seed + f + 1);
      const Checkpoint c = train(arch, cfg, pool.subset(fit), pool.subset(val));
      res.folds.push_back(balanced_accuracy(c.predict(held.x), held.y));
    } catch (const DataError& e) {
      throw DataError(fmt::format("fold {}: {}", f + 1, e.what()));
    }
  }
  double sum = 0.0;
  for (const double a : res.folds) sum += a;
  res.mean = sum / static_cast<double>(k);
  return res;
}

nlohmann::json GridCell::to_json() const {
  nlohmann::json j = arch.to_json();
  j.update(config.to_json());
  return j;
}

nlohmann::json GridResult::to_json() const {
  nlohmann::json table = nlohmann::json::array();
  for (const GridRow& r : rows)
    table.push_back({{"config", r.cell.to_json()},
                     {"parameters", r.parameters},
                     {"folds", r.cv.folds},
                     {"mean_balanced_acc", r.cv.mean}});
  return {{"rows", table}, {"best", best}};
}

std::vector<GridCell> parse_grid(const nlohmann::json& j, ArchKind default_kind) {
  if (!j.is_array()) throw ParseError("grid must be a JSON list of config maps");
  if (j.empty()) throw DataError("grid is empty");
  std::vector<GridCell> out;
  for (const auto& entry : j) {
    if (!entry.is_object()) throw ParseError("grid entries must be objects");
    nlohmann::json a = entry;
    if (!a.contains("kind")) a["kind"] = kind_name(default_kind);
    GridCell cell;
    cell.arch = ArchSpec::from_json(a);
    cell.config = TrainConfig::from_json(entry, TrainConfig::defaults(cell.arch.kind));
    out.push_back(std::move(cell));
  }
  return out;
}

GridResult grid_search(std::span<const GridCell> grid, const Dataset& data, std::size_t k) {
  if (grid.empty()) throw DataError("grid is empty");
  GridResult res;
  for (const GridCell& cell : grid) {
    GridRow row;
    row.cell = cell;
    row.parameters = parameter_count(cell.arch, FeatureSelector(cell.arch.selector).output_dim(data.x.cols));
    row.cv = cross_validate(cell.arch, cell.config, data, k);
    res.rows.push_back(std::move(row));
  }
  for (std::size_t i = 1; i < res.rows.size(); ++i) {
    const GridRow& a = res.rows[i];
    const GridRow& b = res.rows[res.best];
    if (a.cv.mean != b.cv.mean) {
      if (a.cv.mean > b.cv.mean) res.best = i;
    } else if (a.parameters != b.parameters) {
      if (a.parameters < b.parameters) res.best = i;
    } else if (a.cell.to_json().dump() < b.cell.to_json().dump()) {
      res.best = i;
    }
  }
  return res;
}

}  // namespace brilliant::learn
