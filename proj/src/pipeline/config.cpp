#include "brilliant/pipeline/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <fmt/format.h>

#include "brilliant/error.hpp"

namespace brilliant::pipeline {

namespace {

void check_keys(const nlohmann::json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ParseError(fmt::format("config section '{}' must be an object", section));
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw ParseError(fmt::format("unknown config key '{}{}'", section.empty() ? "" : section + ".", k));
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

nlohmann::json EvaluatorSettings::to_json() const {
  return {{"name", name}, {"type", type},         {"command", command},
          {"host", host}, {"port", port},         {"timeout_ms", timeout_ms}};
}

EvaluatorSettings EvaluatorSettings::from_json(const nlohmann::json& j, EvaluatorSettings base) {
  check_keys(j, "evaluators[]", {"name", "type", "command", "host", "port", "timeout_ms"});
  read(j, "name", base.name);
  read(j, "type", base.type);
  read(j, "command", base.command);
  read(j, "host", base.host);
  read(j, "port", base.port);
  read(j, "timeout_ms", base.timeout_ms);
  if (base.type == "builtin") {
    if (base.name != "strong" && base.name != "weak")
      throw DataError(fmt::format("builtin evaluator must be named strong or weak, got '{}'", base.name));
  } else if (base.type == "sidecar") {
    if (base.command.empty() && (base.host.empty() || base.port <= 0))
      throw DataError(fmt::format("sidecar evaluator '{}' needs a command or host and port", base.name));
  } else {
    throw DataError(fmt::format("unknown evaluator type '{}'", base.type));
  }
  if (base.timeout_ms <= 0) throw DataError("evaluator timeout_ms must be positive");
  return base;
}

nlohmann::json PipelineConfig::to_json() const {
  nlohmann::json train_j = train.to_json();
  train_j["kind"] = learn::kind_name(arch.kind);
  train_j["hidden"] = arch.hidden;
  train_j["dropout"] = arch.dropout;
  train_j["selector"] = arch.selector;
  train_j["k"] = arch.k;
  train_j["cv_folds"] = cv_folds;
  train_j["validation_fraction"] = validation_fraction;
  return {
      {"paths", {{"work_dir", work_dir.string()}}},
      {"ingest",
       {{"split_seed", split_seed},
        {"other_cap", other_cap ? nlohmann::json(*other_cap) : nlohmann::json(nullptr)},
        {"base_url", base_url},
        {"fetch_interval_ms", fetch_interval_ms}}},
      {"search",
       {{"c_puct", c_puct},
        {"budgets", budgets},
        {"max_idle_iterations", max_idle_iterations},
        {"seed", search_seed},
        {"weights", weights.to_json()}}},
      {"evaluators", {evaluators[0].to_json(), evaluators[1].to_json()}},
      {"train", train_j},
  };
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    check_keys(j, "", {"paths", "ingest", "search", "evaluators", "train"});
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      check_keys(p, "paths", {"work_dir"});
      if (p.contains("work_dir")) c.work_dir = p.at("work_dir").get<std::string>();
    }
    if (j.contains("ingest")) {
      const auto& s = j.at("ingest");
      check_keys(s, "ingest", {"split_seed", "other_cap", "base_url", "fetch_interval_ms"});
      read(s, "split_seed", c.split_seed);
      if (s.contains("other_cap") && !s.at("other_cap").is_null()) c.other_cap = s.at("other_cap").get<std::size_t>();
      read(s, "base_url", c.base_url);
      read(s, "fetch_interval_ms", c.fetch_interval_ms);
    }
    if (j.contains("search")) {
      const auto& s = j.at("search");
      check_keys(s, "search", {"c_puct", "budgets", "max_idle_iterations", "seed", "weights"});
      read(s, "c_puct", c.c_puct);
      read(s, "budgets", c.budgets);
      read(s, "max_idle_iterations", c.max_idle_iterations);
      read(s, "seed", c.search_seed);
      if (s.contains("weights")) c.weights = search::EvalWeights::from_json(s.at("weights"));
    }
    if (j.contains("evaluators")) {
      const auto& e = j.at("evaluators");
      if (!e.is_array() || e.size() != 2) throw ParseError("config 'evaluators' must list exactly two evaluators");
      for (std::size_t i = 0; i < 2; ++i) c.evaluators[i] = EvaluatorSettings::from_json(e[i], c.evaluators[i]);
    }
    if (j.contains("train")) {
      const auto& t = j.at("train");
      check_keys(t, "train",
                 {"lr", "weight_decay", "batch_size", "max_epochs", "patience", "seed", "class_weighting", "kind",
                  "hidden", "dropout", "selector", "k", "cv_folds", "validation_fraction"});
      nlohmann::json arch_j = c.arch.to_json();
      for (const char* key : {"kind", "hidden", "dropout", "selector", "k"})
        if (t.contains(key)) arch_j[key] = t.at(key);
      if (t.contains("kind") && !t.contains("hidden"))
        arch_j["hidden"] = learn::ArchSpec::defaults(learn::parse_kind(t.at("kind").get<std::string>())).hidden;
      c.arch = learn::ArchSpec::from_json(arch_j);
      c.train = learn::TrainConfig::from_json(t, learn::TrainConfig::defaults(c.arch.kind));
      read(t, "cv_folds", c.cv_folds);
      read(t, "validation_fraction", c.validation_fraction);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!(c.c_puct > 0.0)) throw DataError("search.c_puct must be positive");
  if (!std::is_sorted(c.budgets.begin(), c.budgets.end()) ||
      std::adjacent_find(c.budgets.begin(), c.budgets.end()) != c.budgets.end() || c.budgets[0] == 0)
    throw DataError("search.budgets must be 5 strictly ascending positive integers");
  if (c.evaluators[0].name == c.evaluators[1].name) throw DataError("the two evaluators need distinct names");
  if (c.cv_folds < 2) throw DataError("train.cv_folds must be >= 2");
  if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0))
    throw DataError("train.validation_fraction must be in (0, 1)");
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot read config {}", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return from_json(j);
}

features::DatumLayout PipelineConfig::layout() const {
  features::DatumLayout l;
  l.evaluators = {evaluators[0].name, evaluators[1].name};
  l.budgets = budgets;
  return l;
}

}  // namespace brilliant::pipeline
