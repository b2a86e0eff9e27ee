#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace brilliant::learn {

enum class ArchKind { LogReg, Knn, Gnb, Fcnn, PerWeight, PerSize, PerWeightPerSize, AggReduce };

std::string_view kind_name(ArchKind kind);
// Throws DataError for an unknown name.
ArchKind parse_kind(std::string_view name);
bool is_network(ArchKind kind);
// Number of hidden sizes the kind takes (0 for logreg, knn and gnb).
std::size_t hidden_count(ArchKind kind);

struct ArchSpec {
  ArchKind kind = ArchKind::AggReduce;
  std::vector<std::size_t> hidden;  // h1, h2, h3 as the kind requires
  double dropout = 0.2;
  std::string selector = "all";
  std::size_t k = 5;  // knn neighbours

  static ArchSpec defaults(ArchKind kind);
  // Throws DataError on a wrong hidden count, zero sizes, dropout outside
  // [0,1), even k or an unknown selector.
  void validate() const;
  nlohmann::json to_json() const;
  static ArchSpec from_json(const nlohmann::json& j);
};

// A contiguous slice of the network input (source -1) or of an earlier
// tier's concatenated output (source = tier index).
struct Segment {
  int source = -1;
  std::size_t offset = 0;
  std::size_t len = 0;
};

// One dense layer applied to every group; the groups share its weights and
// their outputs are concatenated in group order.
struct Tier {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<std::vector<Segment>> groups;
  std::size_t weight_offset = 0;  // out x in row-major, then out biases
  std::size_t output_dim() const { return groups.size() * out; }
};

struct Workspace {
  std::vector<std::vector<double>> input;  // per tier, groups x in
  std::vector<std::vector<double>> z;      // per tier, pre-activation after dropout scaling
  std::vector<std::vector<double>> mask;   // per tier, dropout scale per unit; empty = 1
  std::vector<std::vector<double>> act;    // per tier, groups x out
  std::vector<std::vector<double>> grad;   // per tier, d loss / d act
  std::vector<double> scratch;
};

// Feed-forward net of tiers. Hidden tiers apply dropout (train mode, inverted
// scaling) then ReLU; the last tier has one unit and a sigmoid.
class Network {
 public:
  Network() = default;
  // Throws DataError when the input width does not fit the wiring.
  static Network build(const ArchSpec& arch, std::size_t input_dim);

  std::size_t input_dim() const { return input_dim_; }
  double dropout() const { return dropout_; }
  const std::vector<Tier>& tiers() const { return tiers_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // Uniform(-1/sqrt(in), 1/sqrt(in)) for weights and biases. A network
  // without hidden layers (logistic regression) starts at zero.
  void initialize(std::uint64_t seed);

  Workspace make_workspace() const;
  // Returns the score in [0,1]. Dropout is applied only when rng is given.
  double forward(std::span<const double> x, Workspace& ws, std::mt19937_64* rng = nullptr) const;
  double forward(std::span<const double> x) const;
  double logit(const Workspace& ws) const { return ws.z.back()[0]; }
  // Adds d loss / d params to grad, given d loss / d logit and the workspace
  // of the preceding forward call.
  void backward(Workspace& ws, double dlogit, std::span<double> grad) const;

 private:
  std::size_t input_dim_ = 0;
  double dropout_ = 0.0;
  std::vector<Tier> tiers_;
  std::vector<double> params_;
};

// Trainable parameters the architecture has for the given input width:
// network weights, 4 per feature for gnb, 0 for knn.
std::size_t parameter_count(const ArchSpec& arch, std::size_t input_dim);

}  // namespace brilliant::learn
