#include "brilliant/learn/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "brilliant/error.hpp"
#include "brilliant/features/features.hpp"
#include "brilliant/kernels/kernels.hpp"
#include "brilliant/learn/dataset.hpp"

namespace brilliant::learn {

namespace fx = brilliant::features;

namespace {

struct KindInfo {
  ArchKind kind;
  std::string_view name;
  std::size_t hidden;
};

constexpr std::array<KindInfo, 8> kKinds{{
    {ArchKind::LogReg, "logreg", 0},
    {ArchKind::Knn, "knn", 0},
    {ArchKind::Gnb, "gnb", 0},
    {ArchKind::Fcnn, "fcnn", 1},
    {ArchKind::PerWeight, "per_weight", 2},
    {ArchKind::PerSize, "per_size", 2},
    {ArchKind::PerWeightPerSize, "per_weight_per_size", 3},
    {ArchKind::AggReduce, "agg_reduce", 3},
}};

const KindInfo& info(ArchKind kind) { return kKinds[static_cast<std::size_t>(kind)]; }

constexpr std::size_t kSizes = fx::kBlocks / 2;

std::size_t block(std::size_t evaluator, std::size_t size) { return evaluator * kSizes + size; }

Segment input(std::size_t offset, std::size_t len) { return {-1, offset, len}; }

Segment from_tier(int tier, std::size_t offset, std::size_t len) { return {tier, offset, len}; }

Tier single(int source, std::size_t in, std::size_t out) {
  Tier t;
  t.in = in;
  t.out = out;
  t.groups.push_back({{source, 0, in}});
  return t;
}

Tier per_block(std::size_t h1) {
  Tier t;
  t.in = fx::kTreeDim;
  t.out = h1;
  for (std::size_t b = 0; b < fx::kBlocks; ++b) t.groups.push_back({input(b * fx::kTreeDim, fx::kTreeDim)});
  return t;
}

std::vector<Tier> wiring(const ArchSpec& a, std::size_t d) {
  const auto& h = a.hidden;
  std::vector<Tier> tiers;
  switch (a.kind) {
    case ArchKind::LogReg:
      tiers.push_back(single(-1, d, 1));
      break;
    case ArchKind::Fcnn:
      tiers.push_back(single(-1, d, h[0]));
      tiers.push_back(single(0, h[0], 1));
      break;
    case ArchKind::PerWeight: {
      Tier t0;
      t0.in = kSizes * fx::kTreeDim;
      t0.out = h[0];
      for (std::size_t e = 0; e < 2; ++e) t0.groups.push_back({input(e * t0.in, t0.in)});
      tiers.push_back(t0);
      tiers.push_back(single(0, 2 * h[0], h[1]));
      tiers.push_back(single(1, h[1], 1));
      break;
    }
    case ArchKind::PerSize: {
      Tier t0;
      t0.in = 2 * fx::kTreeDim;
      t0.out = h[0];
      for (std::size_t s = 0; s < kSizes; ++s)
        t0.groups.push_back({input(block(0, s) * fx::kTreeDim, fx::kTreeDim),
                             input(block(1, s) * fx::kTreeDim, fx::kTreeDim)});
      tiers.push_back(t0);
      tiers.push_back(single(0, kSizes * h[0], h[1]));
      tiers.push_back(single(1, h[1], 1));
      break;
    }
    case ArchKind::PerWeightPerSize:
    case ArchKind::AggReduce: {
      const bool keys = a.kind == ArchKind::AggReduce;
      tiers.push_back(per_block(h[0]));
      Tier t1;
      t1.in = 2 * (h[0] + (keys ? fx::kKeyFeatures : 0));
      t1.out = h[1];
      for (std::size_t s = 0; s < kSizes; ++s) {
        std::vector<Segment> g;
        for (std::size_t e = 0; e < 2; ++e) {
          g.push_back(from_tier(0, block(e, s) * h[0], h[0]));
          if (keys) g.push_back(input(block(e, s) * fx::kTreeDim, fx::kKeyFeatures));
        }
        t1.groups.push_back(std::move(g));
      }
      tiers.push_back(t1);
      tiers.push_back(single(1, kSizes * h[1], h[2]));
      tiers.push_back(single(2, h[2], 1));
      break;
    }
    case ArchKind::Knn:
    case ArchKind::Gnb:
      throw DataError(fmt::format("{} is not a network architecture", kind_name(a.kind)));
  }
  return tiers;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::string_view kind_name(ArchKind kind) { return info(kind).name; }

ArchKind parse_kind(std::string_view name) {
  for (const auto& k : kKinds)
    if (k.name == name) return k.kind;
  throw DataError(fmt::format("unknown architecture kind '{}'", name));
}

bool is_network(ArchKind kind) { return kind != ArchKind::Knn && kind != ArchKind::Gnb; }

std::size_t hidden_count(ArchKind kind) { return info(kind).hidden; }

ArchSpec ArchSpec::defaults(ArchKind kind) {
  ArchSpec a;
  a.kind = kind;
  switch (kind) {
    case ArchKind::Fcnn:
      a.hidden = {50};
      break;
    case ArchKind::PerWeight:
    case ArchKind::PerSize:
      a.hidden = {25, 50};
      break;
    case ArchKind::PerWeightPerSize:
      a.hidden = {25, 50, 50};
      break;
    case ArchKind::AggReduce:
      a.hidden = {25, 400, 50};
      break;
    default:
      break;
  }
  return a;
}

void ArchSpec::validate() const {
  if (hidden.size() != hidden_count(kind))
    throw DataError(fmt::format("{} takes {} hidden sizes, got {}", kind_name(kind), hidden_count(kind), hidden.size()));
  for (const std::size_t h : hidden)
    if (h < 1) throw DataError("hidden sizes must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw DataError(fmt::format("dropout {} outside [0, 1)", dropout));
  if (kind == ArchKind::Knn && (k == 0 || k % 2 == 0)) throw DataError(fmt::format("knn k must be odd, got {}", k));
  FeatureSelector{selector};
}

nlohmann::json ArchSpec::to_json() const {
  nlohmann::json j = {{"kind", kind_name(kind)}, {"hidden", hidden}, {"dropout", dropout}, {"selector", selector}};
  if (kind == ArchKind::Knn) j["k"] = k;
  return j;
}

ArchSpec ArchSpec::from_json(const nlohmann::json& j) {
  ArchSpec a;
  try {
    a = defaults(parse_kind(j.at("kind").get<std::string>()));
    if (j.contains("hidden")) a.hidden = j.at("hidden").get<std::vector<std::size_t>>();
    a.dropout = j.value("dropout", a.dropout);
    a.selector = j.value("selector", a.selector);
    a.k = j.value("k", a.k);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("architecture: ") + e.what());
  }
  a.validate();
  return a;
}

Network Network::build(const ArchSpec& arch, std::size_t input_dim) {
  arch.validate();
  if (arch.kind != ArchKind::LogReg && arch.kind != ArchKind::Fcnn && input_dim != fx::kDatumDim)
    throw DataError(fmt::format("{} needs {}-wide input, got {}", kind_name(arch.kind), fx::kDatumDim, input_dim));
  if (input_dim == 0) throw DataError("network input must be nonempty");
  Network n;
  n.input_dim_ = input_dim;
  n.dropout_ = arch.dropout;
  n.tiers_ = wiring(arch, input_dim);
  std::size_t offset = 0;
  for (Tier& t : n.tiers_) {
    t.weight_offset = offset;
    offset += t.out * t.in + t.out;
  }
  n.params_.assign(offset, 0.0);
  return n;
}

void Network::initialize(std::uint64_t seed) {
  if (tiers_.size() == 1) {
    std::fill(params_.begin(), params_.end(), 0.0);
    return;
  }
  std::mt19937_64 rng(seed);
  for (const Tier& t : tiers_) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(t.in));
    for (std::size_t i = 0; i < t.out * t.in + t.out; ++i)
      params_[t.weight_offset + i] = (2.0 * uniform01(rng) - 1.0) * bound;
  }
}

Workspace Network::make_workspace() const {
  Workspace ws;
  std::size_t widest = 0;
  for (const Tier& t : tiers_) {
    ws.input.emplace_back(t.groups.size() * t.in);
    ws.z.emplace_back(t.output_dim());
    ws.mask.emplace_back();
    ws.act.emplace_back(t.output_dim());
    ws.grad.emplace_back(t.output_dim());
    widest = std::max(widest, t.in);
  }
  ws.scratch.resize(widest);
  return ws;
}

double Network::forward(std::span<const double> x, Workspace& ws, std::mt19937_64* rng) const {
  if (x.size() != input_dim_)
    throw DataError(fmt::format("network expects {} features, got {}", input_dim_, x.size()));
  const auto& k = kernels::active();
  for (std::size_t ti = 0; ti < tiers_.size(); ++ti) {
    const Tier& t = tiers_[ti];
    const bool hidden = ti + 1 < tiers_.size();
    const double* w = params_.data() + t.weight_offset;
    const double* b = w + t.out * t.in;
    double* in = ws.input[ti].data();
    for (std::size_t g = 0; g < t.groups.size(); ++g) {
      double* dst = in + g * t.in;
      for (const Segment& s : t.groups[g]) {
        const double* src = s.source < 0 ? x.data() : ws.act[static_cast<std::size_t>(s.source)].data();
        std::copy_n(src + s.offset, s.len, dst);
        dst += s.len;
      }
      k.gemv(w, t.out, t.in, in + g * t.in, b, ws.z[ti].data() + g * t.out);
    }
    auto& z = ws.z[ti];
    auto& mask = ws.mask[ti];
    if (hidden && rng && dropout_ > 0.0) {
      mask.resize(z.size());
      const double keep = 1.0 / (1.0 - dropout_);
      for (std::size_t i = 0; i < z.size(); ++i) {
        mask[i] = uniform01(*rng) < dropout_ ? 0.0 : keep;
        z[i] *= mask[i];
      }
    } else {
      mask.clear();
    }
    if (hidden)
      for (std::size_t i = 0; i < z.size(); ++i) ws.act[ti][i] = z[i] > 0.0 ? z[i] : 0.0;
    else
      ws.act[ti][0] = sigmoid(z[0]);
  }
  return ws.act.back()[0];
}

double Network::forward(std::span<const double> x) const {
  Workspace ws = make_workspace();
  return forward(x, ws);
}

void Network::backward(Workspace& ws, double dlogit, std::span<double> grad) const {
  const auto& k = kernels::active();
  for (auto& g : ws.grad) std::fill(g.begin(), g.end(), 0.0);
  ws.grad.back()[0] = dlogit;
  for (std::size_t ti = tiers_.size(); ti-- > 0;) {
    const Tier& t = tiers_[ti];
    const bool hidden = ti + 1 < tiers_.size();
    const double* w = params_.data() + t.weight_offset;
    double* dw = grad.data() + t.weight_offset;
    double* db = dw + t.out * t.in;
    auto& dz = ws.grad[ti];
    if (hidden) {
      const auto& z = ws.z[ti];
      const auto& mask = ws.mask[ti];
      for (std::size_t i = 0; i < dz.size(); ++i) {
        if (z[i] <= 0.0) dz[i] = 0.0;
        else if (!mask.empty()) dz[i] *= mask[i];
      }
    }
    bool feeds_tier = false;
    for (const auto& g : t.groups)
      for (const Segment& s : g) feeds_tier |= s.source >= 0;
    for (std::size_t g = 0; g < t.groups.size(); ++g) {
      const double* dzg = dz.data() + g * t.out;
      k.ger_acc(dw, t.out, t.in, dzg, ws.input[ti].data() + g * t.in);
      for (std::size_t o = 0; o < t.out; ++o) db[o] += dzg[o];
      if (!feeds_tier) continue;
      std::fill(ws.scratch.begin(), ws.scratch.begin() + static_cast<std::ptrdiff_t>(t.in), 0.0);
      k.gemv_t_acc(w, t.out, t.in, dzg, ws.scratch.data());
      const double* src = ws.scratch.data();
      for (const Segment& s : t.groups[g]) {
        if (s.source >= 0) {
          double* dst = ws.grad[static_cast<std::size_t>(s.source)].data() + s.offset;
          for (std::size_t i = 0; i < s.len; ++i) dst[i] += src[i];
        }
        src += s.len;
      }
    }
  }
}

std::size_t parameter_count(const ArchSpec& arch, std::size_t input_dim) {
  if (arch.kind == ArchKind::Knn) return 0;
  if (arch.kind == ArchKind::Gnb) return 4 * input_dim;
  return Network::build(arch, input_dim).parameter_count();
}

}  // namespace brilliant::learn
