#include "brilliant/pipeline/pipeline.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "brilliant/chess/notation.hpp"
#include "brilliant/error.hpp"
#include "brilliant/features/features.hpp"
#include "brilliant/search/builtin.hpp"
#include "brilliant/search/mcts.hpp"
#include "brilliant/search/sidecar.hpp"

namespace brilliant::pipeline {

inline constexpr const char* kVersion = "0.1.0";

std::unique_ptr<search::Evaluator> make_evaluator(const EvaluatorSettings& s, const search::EvalWeights& w) {
  if (s.type == "builtin") {
    if (s.name == "strong") return std::make_unique<search::StrongEvaluator>(w);
    if (s.name == "weak") return std::make_unique<search::WeakEvaluator>(w);
    throw DataError(fmt::format("no builtin evaluator named '{}'", s.name));
  }
  search::SidecarConfig sc;
  sc.name = s.name;
  sc.command = s.command;
  sc.host = s.host;
  sc.port = s.port;
  sc.timeout = std::chrono::milliseconds(s.timeout_ms);
  return std::make_unique<search::ExternalEvaluator>(sc);
}

EvaluatorPair make_evaluators(const PipelineConfig& cfg) {
  return {make_evaluator(cfg.evaluators[0], cfg.weights), make_evaluator(cfg.evaluators[1], cfg.weights)};
}

std::vector<search::SearchTree> datum_trees(const chess::Position& pos, const chess::Move& move,
                                            const PipelineConfig& cfg, EvaluatorPair& evaluators) {
  const auto legal = chess::legal_moves(pos);
  if (std::find(legal.begin(), legal.end(), move) == legal.end())
    throw IllegalMoveError(fmt::format("illegal move {} in {}", chess::move_to_uci(move), chess::to_fen(pos)));
  search::SearchConfig sc;
  sc.c_puct = cfg.c_puct;
  sc.seed = cfg.search_seed;
  sc.max_idle_iterations = cfg.max_idle_iterations;
  std::vector<search::SearchTree> trees;
  for (auto& e : evaluators) {
    auto ladder = search::run_search_ladder(pos, cfg.budgets, *e, sc);
    for (auto& t : ladder) trees.push_back(std::move(t));
  }
  return trees;
}

std::vector<double> datum_row(const chess::Position& pos, const chess::Move& move, const PipelineConfig& cfg,
                              EvaluatorPair& evaluators) {
  const auto trees = datum_trees(pos, move, cfg, evaluators);
  return features::datum_features(trees, move, cfg.layout());
}

void parallel_rows(std::size_t n, const PipelineConfig& cfg, std::size_t workers,
                   const std::function<void(std::size_t, EvaluatorPair&)>& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  const auto work = [&] {
    try {
      EvaluatorPair ev = make_evaluators(cfg);
      for (std::size_t i = next++; i < n; i = next++) fn(i, ev);
    } catch (...) {
      const std::lock_guard lock(failure_mu);
      if (!failure) failure = std::current_exception();
      next = n;
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(std::max<std::size_t>(1, workers), std::max<std::size_t>(1, n)); ++w)
    pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

features::FeatureMatrix build_feature_matrix(std::span<const ingest::LabeledMove> moves,
                                             std::span<const std::size_t> indices, const PipelineConfig& cfg,
                                             std::size_t workers) {
  std::vector<std::vector<double>> rows(indices.size());
  parallel_rows(indices.size(), cfg, workers, [&](std::size_t i, EvaluatorPair& ev) {
    const ingest::LabeledMove& m = moves[indices[i]];
    try {
      rows[i] = datum_row(m.position, m.move, cfg, ev);
    } catch (const Error& e) {
      throw DataError(fmt::format("row {} ({} ply {}): {}", indices[i], m.game_id, m.ply, e.what()));
    }
  });

  features::FeatureMatrix fm;
  fm.cols = features::kDatumDim;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const ingest::LabeledMove& m = moves[indices[i]];
    fm.append(rows[i], {m.game_id, m.ply, std::string(ingest::label_name(m.label)), chess::to_fen(m.position),
                        chess::move_to_uci(m.move)});
  }
  fm.provenance = {{"layout", cfg.layout().to_json()},
                   {"block_names", cfg.layout().block_names()},
                   {"c_puct", cfg.c_puct},
                   {"search_seed", cfg.search_seed},
                   {"evaluators", {cfg.evaluators[0].to_json(), cfg.evaluators[1].to_json()}},
                   {"weights_hash", fmt::format("{:016x}", cfg.weights.hash())}};
  return fm;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 computation failed");
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

void RunManifest::add_input(const std::filesystem::path& p) {
  inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
}

void RunManifest::add_output(const std::filesystem::path& p) {
  outputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
}

std::filesystem::path RunManifest::write(const PipelineConfig& cfg) const {
  std::filesystem::create_directories(cfg.runs_dir());
  const auto path = cfg.runs_dir() / (stage + ".json");
  std::ofstream out(path);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  const nlohmann::json j = {{"stage", stage}, {"version", kVersion}, {"config", config},
                            {"inputs", inputs}, {"outputs", outputs}, {"extra", extra}};
  out << j.dump(2) << '\n';
  return path;
}

void require_artifact(const std::filesystem::path& p, std::string_view stage) {
  if (!std::filesystem::exists(p))
    throw DataError(fmt::format("missing {} (produced by `brilliant {}`)", p.string(), stage));
}

}  // namespace brilliant::pipeline
