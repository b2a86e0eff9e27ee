#include "brilliant/learn/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>

#include "brilliant/error.hpp"
#include "brilliant/kernels/kernels.hpp"

namespace brilliant::learn {

namespace {

constexpr double kVarianceFloor = 1e-9;

std::vector<float> to_f32(std::span<const double> v) { return {v.begin(), v.end()}; }

nlohmann::json layer(const std::string& name, std::size_t rows, std::size_t cols, std::span<const double> w,
                     std::span<const double> b) {
  return {{"name", name}, {"shape", {rows, cols}}, {"weights", to_f32(w)}, {"bias", to_f32(b)}};
}

const nlohmann::json& find_layer(const nlohmann::json& layers, const std::string& name, std::size_t rows,
                                 std::size_t cols) {
  for (const auto& l : layers) {
    if (l.at("name").get<std::string>() != name) continue;
    const auto shape = l.at("shape").get<std::vector<std::size_t>>();
    if (shape.size() != 2 || shape[0] != rows || shape[1] != cols || l.at("weights").size() != rows * cols)
      throw DataError(fmt::format("checkpoint layer {} has the wrong shape", name));
    return l;
  }
  throw DataError(fmt::format("checkpoint has no layer {}", name));
}

}  // namespace

TrainConfig TrainConfig::defaults(ArchKind kind) {
  TrainConfig c;
  if (kind == ArchKind::LogReg) c.weight_decay = 0.0;
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw DataError("learning rate must be positive");
  if (!(weight_decay >= 0.0)) throw DataError("weight decay must be non-negative");
  if (batch_size == 0 || max_epochs == 0 || patience == 0)
    throw DataError("batch size, max epochs and patience must be >= 1");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"lr", learning_rate},     {"weight_decay", weight_decay}, {"batch_size", batch_size},
          {"max_epochs", max_epochs}, {"patience", patience},         {"seed", seed},
          {"class_weighting", weighting == ClassWeighting::Balanced ? "balanced" : "none"}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j, const TrainConfig& base) {
  TrainConfig c = base;
  try {
    c.learning_rate = j.value("lr", c.learning_rate);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    if (j.contains("class_weighting")) {
      const auto w = j.at("class_weighting").get<std::string>();
      if (w != "balanced" && w != "none") throw DataError(fmt::format("unknown class weighting '{}'", w));
      c.weighting = w == "balanced" ? ClassWeighting::Balanced : ClassWeighting::None;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<double> Checkpoint::prepare(std::span<const double> raw) const {
  std::vector<double> row(raw.begin(), raw.end());
  norm.apply_inplace(row);
  const FeatureSelector sel(arch.selector);
  return sel.is_identity() ? row : sel.apply(row);
}

double Checkpoint::score_prepared(std::span<const double> x) const {
  switch (arch.kind) {
    case ArchKind::Knn:
      return knn_score(knn_x, knn_y, arch.k, x);
    case ArchKind::Gnb:
      return gnb_score(gnb_mean, gnb_var, x);
    default:
      return net.forward(x);
  }
}

double Checkpoint::predict(std::span<const double> raw) const { return score_prepared(prepare(raw)); }

std::vector<double> Checkpoint::predict(const Matrix& raw) const {
  std::vector<double> out;
  out.reserve(raw.rows);
  for (std::size_t r = 0; r < raw.rows; ++r) out.push_back(predict(raw.row(r)));
  return out;
}

nlohmann::json Checkpoint::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  if (arch.kind == ArchKind::Knn) {
    std::vector<double> labels(knn_y.begin(), knn_y.end());
    layers.push_back(layer("knn.points", knn_x.rows, knn_x.cols, knn_x.data, labels));
  } else if (arch.kind == ArchKind::Gnb) {
    for (int c = 0; c < 2; ++c) {
      layers.push_back(layer(fmt::format("gnb.class{}.mean", c), 1, gnb_mean[c].size(), gnb_mean[c], {}));
      layers.push_back(layer(fmt::format("gnb.class{}.var", c), 1, gnb_var[c].size(), gnb_var[c], {}));
    }
  } else {
    const auto p = net.params();
    for (std::size_t i = 0; i < net.tiers().size(); ++i) {
      const Tier& t = net.tiers()[i];
      layers.push_back(layer(fmt::format("tier{}", i), t.out, t.in, p.subspan(t.weight_offset, t.out * t.in),
                             p.subspan(t.weight_offset + t.out * t.in, t.out)));
    }
  }
  return {{"arch", arch.to_json()},
          {"config", config.to_json()},
          {"layers", layers},
          {"norm", norm.to_json()},
          {"meta",
           {{"seed", meta.seed},
            {"epochs", meta.epochs},
            {"best_epoch", meta.best_epoch},
            {"val_balanced_acc", meta.val_balanced_acc}}}};
}

Checkpoint Checkpoint::from_json(const nlohmann::json& j) {
  Checkpoint c;
  try {
    c.arch = ArchSpec::from_json(j.at("arch"));
    c.config = TrainConfig::from_json(j.value("config", nlohmann::json::object()));
    c.norm = Normalizer::from_json(j.at("norm"));
    const auto& m = j.at("meta");
    c.meta.seed = m.at("seed").get<std::uint64_t>();
    c.meta.epochs = m.at("epochs").get<std::size_t>();
    c.meta.best_epoch = m.value("best_epoch", std::size_t{0});
    c.meta.val_balanced_acc = m.at("val_balanced_acc").get<double>();
    const auto& layers = j.at("layers");
    const FeatureSelector sel(c.arch.selector);
    const std::size_t dim = sel.output_dim(c.norm.mean.size());
    if (c.arch.kind == ArchKind::Knn) {
      const auto& l = layers.at(0);
      const auto shape = l.at("shape").get<std::vector<std::size_t>>();
      const auto& pts = find_layer(layers, "knn.points", shape.at(0), dim);
      c.knn_x = Matrix(shape[0], dim);
      c.knn_x.data = pts.at("weights").get<std::vector<double>>();
      for (const double v : pts.at("bias").get<std::vector<double>>()) c.knn_y.push_back(v > 0.5 ? 1 : 0);
      if (c.knn_y.size() != shape[0]) throw DataError("knn checkpoint label count mismatch");
    } else if (c.arch.kind == ArchKind::Gnb) {
      for (int k = 0; k < 2; ++k) {
        c.gnb_mean[k] = find_layer(layers, fmt::format("gnb.class{}.mean", k), 1, dim).at("weights").get<std::vector<double>>();
        c.gnb_var[k] = find_layer(layers, fmt::format("gnb.class{}.var", k), 1, dim).at("weights").get<std::vector<double>>();
      }
    } else {
      c.net = Network::build(c.arch, dim);
      auto p = c.net.params();
      for (std::size_t i = 0; i < c.net.tiers().size(); ++i) {
        const Tier& t = c.net.tiers()[i];
        const auto& l = find_layer(layers, fmt::format("tier{}", i), t.out, t.in);
        const auto w = l.at("weights").get<std::vector<double>>();
        const auto b = l.at("bias").get<std::vector<double>>();
        if (b.size() != t.out) throw DataError(fmt::format("checkpoint layer tier{} has the wrong bias size", i));
        std::copy(w.begin(), w.end(), p.begin() + static_cast<std::ptrdiff_t>(t.weight_offset));
        std::copy(b.begin(), b.end(), p.begin() + static_cast<std::ptrdiff_t>(t.weight_offset + w.size()));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  return c;
}

void Checkpoint::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << to_json().dump() << '\n';
}

Checkpoint Checkpoint::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return from_json(j);
}

double knn_score(const Matrix& x, std::span<const int> y, std::size_t k, std::span<const double> query) {
  if (k == 0 || k > x.rows) throw DataError(fmt::format("knn k={} exceeds {} training rows", k, x.rows));
  std::vector<std::pair<double, std::size_t>> d(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) d[r] = {kernels::squared_distance(x.row(r), query), r};
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
  std::size_t pos = 0;
  for (std::size_t i = 0; i < k; ++i) pos += y[d[i].second] == 1;
  return static_cast<double>(pos) / static_cast<double>(k);
}

void gnb_fit(const Matrix& x, std::span<const int> y, std::array<std::vector<double>, 2>& mean,
             std::array<std::vector<double>, 2>& var) {
  std::array<double, 2> n{0, 0};
  for (int c = 0; c < 2; ++c) {
    mean[c].assign(x.cols, 0.0);
    var[c].assign(x.cols, 0.0);
  }
  for (std::size_t r = 0; r < x.rows; ++r) {
    const int c = y[r] == 1;
    n[c] += 1;
    for (std::size_t j = 0; j < x.cols; ++j) mean[c][j] += x.at(r, j);
  }
  if (n[0] == 0 || n[1] == 0) throw DataError("training data must contain both classes");
  for (int c = 0; c < 2; ++c)
    for (double& m : mean[c]) m /= n[c];
  for (std::size_t r = 0; r < x.rows; ++r) {
    const int c = y[r] == 1;
    for (std::size_t j = 0; j < x.cols; ++j) {
      const double d = x.at(r, j) - mean[c][j];
      var[c][j] += d * d;
    }
  }
  for (int c = 0; c < 2; ++c)
    for (double& v : var[c]) v = std::max(v / n[c], kVarianceFloor);
}

double gnb_score(const std::array<std::vector<double>, 2>& mean, const std::array<std::vector<double>, 2>& var,
                 std::span<const double> x) {
  if (x.size() != mean[0].size()) throw DataError("gnb feature count mismatch");
  std::array<double, 2> ll{0, 0};
  for (int c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double d = x[j] - mean[c][j];
      ll[c] -= 0.5 * (std::log(2.0 * std::numbers::pi * var[c][j]) + d * d / var[c][j]);
    }
  // Equal priors cancel.
  const double z = ll[1] - ll[0];
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

}  // namespace brilliant::learn
