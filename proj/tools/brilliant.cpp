#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "brilliant/analysis/analysis.hpp"
#include "brilliant/chess/notation.hpp"
#include "brilliant/error.hpp"
#include "brilliant/features/matrix.hpp"
#include "brilliant/ingest/dataset.hpp"
#include "brilliant/ingest/fetch.hpp"
#include "brilliant/ingest/pgn.hpp"
#include "brilliant/learn/train.hpp"
#include "brilliant/pipeline/config.hpp"
#include "brilliant/pipeline/pipeline.hpp"
#include "brilliant/search/mcts.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace brilliant;
using pipeline::PipelineConfig;
using pipeline::RunManifest;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::optional<std::string> work_dir;
  bool verbose = false;
};

PipelineConfig load_config(const Globals& g) {
  PipelineConfig cfg = g.config.empty() ? PipelineConfig{} : PipelineConfig::load(g.config);
  if (g.work_dir) cfg.work_dir = *g.work_dir;
  return cfg;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot read {}", p.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write {}", p.string()));
  out << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

json parse_json_file(const fs::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", p.string(), e.what()));
  }
}

std::size_t default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

std::vector<ingest::LabeledMove> load_moves(const PipelineConfig& cfg, RunManifest& m) {
  pipeline::require_artifact(cfg.dataset_path(), "ingest");
  m.add_input(cfg.dataset_path());
  return ingest::read_jsonl(cfg.dataset_path());
}

ingest::DatasetManifest load_split_manifest(const PipelineConfig& cfg, RunManifest& m) {
  pipeline::require_artifact(cfg.manifest_path(), "ingest");
  m.add_input(cfg.manifest_path());
  return ingest::DatasetManifest::from_json(parse_json_file(cfg.manifest_path()));
}

const std::vector<std::size_t>& split_indices(const ingest::DatasetManifest& dm, const std::string& split) {
  if (split == "train") return dm.train;
  if (split == "test") return dm.test;
  throw UsageError(fmt::format("unknown split '{}' (train or test)", split));
}

void check_split(const std::string& split, bool allow_all) {
  if (split == "train" || split == "test" || (allow_all && split == "all")) return;
  throw UsageError(fmt::format("unknown split '{}' (train, test{})", split, allow_all ? " or all" : ""));
}

features::FeatureMatrix load_features(const PipelineConfig& cfg, const std::string& split, RunManifest& m) {
  if (split == "all") {
    features::FeatureMatrix a = load_features(cfg, "train", m);
    const features::FeatureMatrix b = load_features(cfg, "test", m);
    if (a.cols != b.cols) throw DataError("train and test feature widths differ");
    a.values.insert(a.values.end(), b.values.begin(), b.values.end());
    a.rows.insert(a.rows.end(), b.rows.begin(), b.rows.end());
    return a;
  }
  const fs::path p = cfg.features_path(split);
  pipeline::require_artifact(p, "features");
  m.add_input(p);
  return features::load_matrix(p);
}

learn::Checkpoint load_checkpoint(const PipelineConfig& cfg, RunManifest& m) {
  pipeline::require_artifact(cfg.checkpoint_path(), "train");
  m.add_input(cfg.checkpoint_path());
  return learn::Checkpoint::load(cfg.checkpoint_path());
}

learn::Matrix raw_matrix(const features::FeatureMatrix& fm) {
  learn::Matrix x(fm.n_rows(), fm.cols);
  std::copy(fm.values.begin(), fm.values.end(), x.data.begin());
  return x;
}

// --- ingest ------------------------------------------------------------------

struct IngestOptions {
  std::vector<std::string> pgn;
  std::string study_list;
  bool fetch = false;
  std::string token_env = "LICHESS_TOKEN";
  std::optional<std::uint64_t> split_seed;
  std::optional<std::size_t> other_cap;
};

std::vector<fs::path> expand_pgn_paths(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& a : args) {
    const fs::path p(a);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::recursive_directory_iterator(p))
        if (e.is_regular_file() && e.path().extension() == ".pgn") found.push_back(e.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::is_regular_file(p)) {
      out.push_back(p);
    } else {
      throw DataError(fmt::format("no such PGN file or directory: {}", a));
    }
  }
  return out;
}

std::vector<std::string> read_study_list(const fs::path& p) {
  std::vector<std::string> ids;
  std::istringstream in(read_file(p));
  for (std::string line; std::getline(in, line);) {
    line.erase(0, line.find_first_not_of(" \t\r"));
    line.erase(line.find_last_not_of(" \t\r") + 1);
    if (line.empty() || line[0] == '#') continue;
    ids.push_back(line);
  }
  return ids;
}

void add_games(std::string_view text, const std::string& source, std::optional<std::string> study_id,
               std::vector<ingest::LabeledMove>& moves, ingest::LabelCounts& counts) {
  const auto games = ingest::parse_pgn(text, std::move(study_id));
  for (std::size_t g = 0; g < games.size(); ++g) {
    const auto got = ingest::extract_labeled_moves(games[g], fmt::format("{}/{}", source, g + 1), &counts);
    moves.insert(moves.end(), got.begin(), got.end());
  }
}

void run_ingest(const Globals& g, const IngestOptions& o) {
  PipelineConfig cfg = load_config(g);
  if (o.split_seed) cfg.split_seed = *o.split_seed;
  if (o.other_cap) cfg.other_cap = *o.other_cap;
  if (o.pgn.empty() && o.study_list.empty()) throw UsageError("ingest needs --pgn or --study-list");

  RunManifest m{"ingest", {}};
  std::vector<ingest::LabeledMove> moves;
  ingest::LabelCounts counts;
  for (const fs::path& p : expand_pgn_paths(o.pgn)) {
    m.add_input(p);
    add_games(read_file(p), p.stem().string(), std::nullopt, moves, counts);
  }
  if (!o.study_list.empty()) {
    m.add_input(o.study_list);
    std::optional<ingest::StudyFetcher> fetcher;
    if (o.fetch) {
      ingest::FetchConfig fc;
      fc.base_url = cfg.base_url;
      fc.min_interval = std::chrono::milliseconds(cfg.fetch_interval_ms);
      if (const char* t = std::getenv(o.token_env.c_str()); t && *t) fc.token = t;
      fetcher.emplace(fc);
    }
    for (const auto& id : read_study_list(o.study_list)) {
      const fs::path cached = cfg.work_dir / "studies" / (id + ".pgn");
      if (fetcher) {
        spdlog::info("fetching study {}", id);
        write_text(cached, fetcher->fetch(id));
      } else if (!fs::exists(cached)) {
        throw DataError(fmt::format("missing {} (produced by `brilliant ingest --fetch`)", cached.string()));
      }
      m.add_input(cached);
      add_games(read_file(cached), id, id, moves, counts);
    }
  }

  const ingest::DatasetManifest dm = ingest::build_dataset(moves, cfg.split_seed, cfg.other_cap);
  fs::create_directories(cfg.work_dir);
  {
    std::ofstream out(cfg.dataset_path(), std::ios::binary);
    if (!out) throw DataError(fmt::format("cannot write {}", cfg.dataset_path().string()));
    ingest::write_jsonl(out, moves);
  }
  write_json(cfg.manifest_path(), dm.to_json());
  m.config = cfg.to_json();
  m.extra = {{"label_counts", counts.to_json()}, {"moves", moves.size()}};
  m.add_output(cfg.dataset_path());
  m.add_output(cfg.manifest_path());
  m.write(cfg);
  fmt::print("{} labeled moves (brilliant {}, good {}, other {}; excluded {}); train {}, test {}\n", moves.size(),
             counts.brilliant, counts.good, counts.other, counts.excluded, dm.train.size(), dm.test.size());
}

// --- search ------------------------------------------------------------------

struct SearchOptions {
  std::string fen;
  std::string evaluator = "strong";
  std::optional<std::uint64_t> budget;
  std::string out;
  std::string split = "train";
  std::size_t workers = default_workers();
};

void run_search(const Globals& g, const SearchOptions& o) {
  const PipelineConfig cfg = load_config(g);
  search::SearchConfig sc;
  sc.c_puct = cfg.c_puct;
  sc.seed = cfg.search_seed;
  sc.max_idle_iterations = cfg.max_idle_iterations;

  if (!o.fen.empty()) {
    const auto it = std::find_if(cfg.evaluators.begin(), cfg.evaluators.end(),
                                 [&](const auto& e) { return e.name == o.evaluator; });
    if (it == cfg.evaluators.end()) throw UsageError(fmt::format("unknown evaluator '{}'", o.evaluator));
    auto ev = pipeline::make_evaluator(*it, cfg.weights);
    const search::SearchTree t =
        search::run_search(chess::parse_fen(o.fen), o.budget.value_or(cfg.budgets.back()), *ev, sc);
    const std::string text = t.to_json().dump() + "\n";
    if (o.out.empty()) std::cout << text;
    else write_text(o.out, text);
    return;
  }

  check_split(o.split, false);
  RunManifest m{"search-" + o.split, cfg.to_json()};
  const auto moves = load_moves(cfg, m);
  const auto dm = load_split_manifest(cfg, m);
  const auto& idx = split_indices(dm, o.split);
  std::vector<json> rows(idx.size());
  pipeline::parallel_rows(idx.size(), cfg, o.workers, [&](std::size_t i, pipeline::EvaluatorPair& ev) {
    const ingest::LabeledMove& mv = moves[idx[i]];
    json blocks = json::array();
    for (const search::SearchTree& t : pipeline::datum_trees(mv.position, mv.move, cfg, ev)) {
      const auto child = t.find_child(search::SearchTree::root(), mv.move);
      blocks.push_back({{"evaluator", t.meta().evaluator},
                        {"budget", t.meta().budget},
                        {"evaluator_calls", t.meta().evaluator_calls},
                        {"exhausted", t.meta().exhausted},
                        {"nodes", t.size()},
                        {"root_q", t.node(search::SearchTree::root()).q()},
                        {"move_visits", child ? t.node(*child).visits : 0}});
    }
    rows[i] = {{"game_id", mv.game_id}, {"ply", mv.ply}, {"uci", chess::move_to_uci(mv.move)}, {"blocks", blocks}};
  });
  std::string text;
  for (const json& r : rows) text += r.dump() + "\n";
  const fs::path out = o.out.empty() ? cfg.work_dir / "search" / (o.split + ".jsonl") : fs::path(o.out);
  write_text(out, text);
  m.add_output(out);
  m.write(cfg);
  fmt::print("{} rows searched -> {}\n", rows.size(), out.string());
}

// --- features ----------------------------------------------------------------

struct FeaturesOptions {
  std::string split = "all";
  std::size_t workers = default_workers();
};

void run_features(const Globals& g, const FeaturesOptions& o) {
  const PipelineConfig cfg = load_config(g);
  check_split(o.split, true);
  RunManifest m{"features", cfg.to_json()};
  const auto moves = load_moves(cfg, m);
  const auto dm = load_split_manifest(cfg, m);
  for (const std::string split : {"train", "test"}) {
    if (o.split != "all" && o.split != split) continue;
    const auto& idx = split_indices(dm, split);
    const features::FeatureMatrix fm = pipeline::build_feature_matrix(moves, idx, cfg, o.workers);
    const fs::path out = cfg.features_path(split);
    fs::create_directories(out.parent_path());
    features::save_matrix(fm, out);
    m.add_output(out);
    m.add_output(fs::path(out.string() + ".json"));
    fmt::print("{}: {} rows x {} features -> {}\n", split, fm.n_rows(), fm.cols, out.string());
  }
  m.write(cfg);
}

// --- train / cv / gridsearch ---------------------------------------------------

struct ModelOverrides {
  std::optional<std::string> kind;
  std::vector<std::size_t> hidden;
  std::optional<double> dropout;
  std::optional<std::string> selector;
  std::optional<std::size_t> k;
  std::optional<double> lr;
  std::optional<double> weight_decay;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> max_epochs;
  std::optional<std::size_t> patience;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> class_weighting;

  void add(CLI::App* app) {
    app->add_option("--kind", kind,
                    "Model kind: logreg, knn, gnb, fcnn, per_weight, per_size, per_weight_per_size, agg_reduce "
                    "(resets the architecture to that kind's defaults; default from config)");
    app->add_option("--hidden", hidden, "Hidden widths (default from config)");
    app->add_option("--dropout", dropout, "Dropout rate on hidden layers (default from config)");
    app->add_option("--selector", selector,
                    "Feature selector: all, is-best-move, win-chance:{strong|weak|both}, "
                    "win-chance-per-nodes:{strong|weak|both} (default from config)");
    app->add_option("--k", k, "Neighbours for knn (default from config)");
    app->add_option("--lr", lr, "AdamW learning rate (default from config)");
    app->add_option("--weight-decay", weight_decay, "AdamW weight decay (default from config)");
    app->add_option("--batch-size", batch_size, "Minibatch size (default from config)");
    app->add_option("--max-epochs", max_epochs, "Epoch limit (default from config)");
    app->add_option("--patience", patience, "Early-stopping patience in epochs (default from config)");
    app->add_option("--seed", seed, "Training seed (default from config)");
    app->add_option("--class-weighting", class_weighting, "balanced or none (default from config)");
  }

  void apply(PipelineConfig& cfg) const {
    if (kind) cfg.arch = learn::ArchSpec::defaults(learn::parse_kind(*kind));
    if (!hidden.empty()) cfg.arch.hidden = hidden;
    if (dropout) cfg.arch.dropout = *dropout;
    if (selector) cfg.arch.selector = *selector;
    if (k) cfg.arch.k = *k;
    json t = json::object();
    if (lr) t["lr"] = *lr;
    if (weight_decay) t["weight_decay"] = *weight_decay;
    if (batch_size) t["batch_size"] = *batch_size;
    if (max_epochs) t["max_epochs"] = *max_epochs;
    if (patience) t["patience"] = *patience;
    if (seed) t["seed"] = *seed;
    if (class_weighting) t["class_weighting"] = *class_weighting;
    cfg.train = learn::TrainConfig::from_json(t, cfg.train);
    cfg.arch.validate();
  }
};

void run_train(const Globals& g, const ModelOverrides& mo) {
  PipelineConfig cfg = load_config(g);
  mo.apply(cfg);
  RunManifest m{"train", {}};
  const learn::Dataset data = learn::to_dataset(load_features(cfg, "train", m));
  const auto [fit_idx, val_idx] = learn::stratified_holdout(data.y, cfg.validation_fraction, cfg.train.seed);
  const learn::Checkpoint ckpt = learn::train(cfg.arch, cfg.train, data.subset(fit_idx), data.subset(val_idx));
  fs::create_directories(cfg.checkpoint_path().parent_path());
  ckpt.save(cfg.checkpoint_path());
  m.config = cfg.to_json();
  m.extra = {{"epochs", ckpt.meta.epochs},
             {"best_epoch", ckpt.meta.best_epoch},
             {"val_balanced_acc", ckpt.meta.val_balanced_acc}};
  m.add_output(cfg.checkpoint_path());
  m.write(cfg);
  fmt::print("{}: best epoch {} of {}, validation balanced accuracy {:.4f} -> {}\n", learn::kind_name(cfg.arch.kind),
             ckpt.meta.best_epoch, ckpt.meta.epochs, ckpt.meta.val_balanced_acc, cfg.checkpoint_path().string());
}

void run_cv(const Globals& g, const ModelOverrides& mo, std::optional<std::size_t> folds) {
  PipelineConfig cfg = load_config(g);
  mo.apply(cfg);
  if (folds) cfg.cv_folds = *folds;
  RunManifest m{"cv", {}};
  const learn::Dataset data = learn::to_dataset(load_features(cfg, "train", m));
  const learn::CvResult r = learn::cross_validate(cfg.arch, cfg.train, data, cfg.cv_folds);
  const fs::path out = cfg.reports_dir() / "cv.json";
  write_json(out, {{"arch", cfg.arch.to_json()},
                   {"config", cfg.train.to_json()},
                   {"folds", r.folds},
                   {"mean_balanced_accuracy", r.mean}});
  m.config = cfg.to_json();
  m.add_output(out);
  m.write(cfg);
  fmt::print("{}-fold mean balanced accuracy {:.4f} -> {}\n", cfg.cv_folds, r.mean, out.string());
}

void run_gridsearch(const Globals& g, const std::string& grid_path, bool ablation, std::optional<std::size_t> folds) {
  PipelineConfig cfg = load_config(g);
  if (folds) cfg.cv_folds = *folds;
  if (grid_path.empty() == !ablation) throw UsageError("gridsearch needs exactly one of --grid or --ablation");
  RunManifest m{"gridsearch", cfg.to_json()};
  std::vector<learn::GridCell> cells;
  if (ablation) {
    for (const auto& name : learn::FeatureSelector::ablation_names()) {
      learn::ArchSpec a = learn::ArchSpec::defaults(learn::ArchKind::LogReg);
      a.selector = name;
      cells.push_back({a, cfg.train});
    }
  } else {
    m.add_input(grid_path);
    cells = learn::parse_grid(parse_json_file(grid_path), cfg.arch.kind);
  }
  const learn::Dataset data = learn::to_dataset(load_features(cfg, "train", m));
  const learn::GridResult r = learn::grid_search(cells, data, cfg.cv_folds);
  const fs::path out = cfg.reports_dir() / (ablation ? "ablation.json" : "gridsearch.json");
  write_json(out, r.to_json());
  m.add_output(out);
  m.write(cfg);
  for (const auto& row : r.rows)
    fmt::print("{:.4f}  {}\n", row.cv.mean, row.cell.to_json().dump());
  fmt::print("best: {} -> {}\n", r.rows[r.best].cell.to_json().dump(), out.string());
}

// --- evaluate / predict / perturb / plotdata ----------------------------------------

void run_evaluate(const Globals& g, const std::string& split, double threshold) {
  const PipelineConfig cfg = load_config(g);
  check_split(split, true);
  RunManifest m{"evaluate", cfg.to_json()};
  const learn::Checkpoint ckpt = load_checkpoint(cfg, m);
  const learn::Dataset data = learn::to_dataset(load_features(cfg, split, m));
  const analysis::ConfusionSummary s = analysis::evaluate_model(ckpt, data, threshold);
  const fs::path out = cfg.reports_dir() / fmt::format("evaluate-{}.json", split);
  write_json(out, s.to_json());
  m.add_output(out);
  m.write(cfg);
  const analysis::BalancedRates r = s.rates();
  fmt::print("balanced accuracy {:.4f}  TPR {:.4f}  TNR {:.4f}  PPV {:.4f}  NPV {:.4f} -> {}\n",
             r.balanced_accuracy, r.tpr, r.tnr, r.ppv, r.npv, out.string());
}

void run_predict(const Globals& g, const std::string& fen, const std::string& uci, double threshold) {
  const PipelineConfig cfg = load_config(g);
  const chess::Position pos = chess::parse_fen(fen);
  const chess::Move mv = chess::parse_uci(uci);
  const auto legal = chess::legal_moves(pos);
  if (std::find(legal.begin(), legal.end(), mv) == legal.end())
    throw IllegalMoveError(fmt::format("illegal move {} in {}", uci, fen));
  RunManifest m{"predict", cfg.to_json()};
  const learn::Checkpoint ckpt = load_checkpoint(cfg, m);
  pipeline::EvaluatorPair ev = pipeline::make_evaluators(cfg);
  const double score = ckpt.predict(pipeline::datum_row(pos, mv, cfg, ev));
  fmt::print("score {:.6f}\n{}\n", score, score >= threshold ? "brilliant" : "not brilliant");
}

void run_perturb(const Globals& g, const std::string& split) {
  const PipelineConfig cfg = load_config(g);
  check_split(split, true);
  RunManifest m{"perturb", cfg.to_json()};
  const learn::Checkpoint ckpt = load_checkpoint(cfg, m);
  const features::FeatureMatrix fm = load_features(cfg, split, m);
  const analysis::PerturbationReport r = analysis::maia_perturbation(ckpt, raw_matrix(fm));
  json j = r.to_json();
  j["split"] = split;
  j["deltas"] = r.deltas;
  const fs::path out = cfg.reports_dir() / fmt::format("perturbation-{}.json", split);
  write_json(out, j);
  m.add_output(out);
  m.write(cfg);
  fmt::print("mean delta {:+.5f}  sigma {:.5f}  n {}  t {:.4f}  p {:.3g} -> {}\n", r.mean, r.sigma, r.n, r.test.t,
             r.test.p, out.string());
}

void run_plotdata(const Globals& g, const std::string& split, const std::optional<std::string>& evaluator,
                  std::optional<std::uint64_t> budget) {
  const PipelineConfig cfg = load_config(g);
  check_split(split, true);
  RunManifest m{"plotdata", cfg.to_json()};
  const features::FeatureMatrix fm = load_features(cfg, split, m);
  const auto points = analysis::violin_data(fm, cfg.layout(), evaluator, budget);
  std::ostringstream csv;
  analysis::write_violin_csv(csv, points);
  const fs::path out = cfg.reports_dir() / fmt::format("violin-{}.csv", split);
  write_text(out, csv.str());
  m.add_output(out);
  m.write(cfg);
  fmt::print("{} points -> {}\n", points.size(), out.string());
}

int run(int argc, char** argv) {
  CLI::App app{"Brilliant-move classification pipeline"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("-c,--config", g.config, "Pipeline config JSON (built-in defaults when omitted)")
      ->check(CLI::ExistingFile);
  app.add_option("-w,--work-dir", g.work_dir, "Artifact directory (overrides paths.work_dir)");
  app.add_flag("-v,--verbose", g.verbose, "Debug logging");

  IngestOptions io;
  auto* ingest = app.add_subcommand("ingest", "Parse annotated PGN into dataset.jsonl and a train/test split");
  ingest->add_option("--pgn", io.pgn, "PGN files or directories searched recursively for *.pgn");
  ingest->add_option("--study-list", io.study_list, "File with one Lichess study id per line")->check(CLI::ExistingFile);
  ingest->add_flag("--fetch", io.fetch, "Download listed studies (otherwise read <work-dir>/studies/<id>.pgn)");
  ingest->add_option("--token-env", io.token_env, "Environment variable holding the Lichess API token")
      ->capture_default_str();
  ingest->add_option("--split-seed", io.split_seed, "Seed for the split (default from config)");
  ingest->add_option("--other-cap", io.other_cap, "Cap on 'other' rows (default from config)");

  SearchOptions so;
  auto* search = app.add_subcommand("search", "Run searches for one FEN or summarize every row of a split");
  search->add_option("--fen", so.fen, "Search this position and print the tree as JSON");
  search->add_option("--evaluator", so.evaluator, "Evaluator name for --fen")->capture_default_str();
  search->add_option("--budget", so.budget, "Evaluator calls for --fen (default: largest configured budget)");
  search->add_option("--out", so.out, "Output file (default: stdout for --fen, <work-dir>/search/<split>.jsonl)");
  search->add_option("--split", so.split, "Split to summarize without --fen: train or test")->capture_default_str();
  search->add_option("--workers", so.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  FeaturesOptions fo;
  auto* feats = app.add_subcommand("features", "Search every row and write features/<split>.f32");
  feats->add_option("--split", fo.split, "train, test or all")->capture_default_str();
  feats->add_option("--workers", fo.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  ModelOverrides train_mo, cv_mo;
  auto* train = app.add_subcommand("train", "Train on features/train.f32 and write checkpoints/model.json");
  train_mo.add(train);

  std::optional<std::size_t> cv_folds, grid_folds;
  auto* cv = app.add_subcommand("cv", "Cross-validate on the train split and write reports/cv.json");
  cv_mo.add(cv);
  cv->add_option("--folds", cv_folds, "Number of folds (default from config)");

  std::string grid_path;
  bool ablation = false;
  auto* grid = app.add_subcommand("gridsearch", "Cross-validate a grid of configs and pick the best");
  grid->add_option("--grid", grid_path, "JSON list of config maps")->check(CLI::ExistingFile);
  grid->add_flag("--ablation", ablation, "Logistic regression on every feature selector");
  grid->add_option("--folds", grid_folds, "Number of folds (default from config)");

  std::string eval_split = "test";
  double eval_threshold = 0.5;
  auto* evaluate = app.add_subcommand("evaluate", "Confusion rates of the checkpoint on a split");
  evaluate->add_option("--split", eval_split, "train, test or all")->capture_default_str();
  evaluate->add_option("--threshold", eval_threshold, "Score threshold")->capture_default_str();

  std::string p_fen, p_move;
  double p_threshold = 0.5;
  auto* predict = app.add_subcommand("predict", "Score one move with the checkpoint");
  predict->add_option("--fen", p_fen, "Position before the move")->required();
  predict->add_option("--move", p_move, "Move in UCI notation")->required();
  predict->add_option("--threshold", p_threshold, "Score threshold")->capture_default_str();

  std::string perturb_split = "all";
  auto* perturb = app.add_subcommand("perturb", "Force the weak evaluator's post-move Q to -1 and report deltas");
  perturb->add_option("--split", perturb_split, "train, test or all")->capture_default_str();

  std::string plot_split = "all";
  std::optional<std::string> plot_evaluator;
  std::optional<std::uint64_t> plot_budget;
  auto* plot = app.add_subcommand("plotdata", "Write post-move Q per label as violin CSV");
  plot->add_option("--split", plot_split, "train, test or all")->capture_default_str();
  plot->add_option("--evaluator", plot_evaluator, "Only this evaluator (default: both)");
  plot->add_option("--budget", plot_budget, "Only this budget (default: every budget)");

  auto* config = app.add_subcommand("config", "Config utilities");
  config->require_subcommand(1);
  auto* show = config->add_subcommand("show", "Print the effective config with every default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  spdlog::set_level(g.verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    if (*ingest) run_ingest(g, io);
    else if (*search) run_search(g, so);
    else if (*feats) run_features(g, fo);
    else if (*train) run_train(g, train_mo);
    else if (*cv) run_cv(g, cv_mo, cv_folds);
    else if (*grid) run_gridsearch(g, grid_path, ablation, grid_folds);
    else if (*evaluate) run_evaluate(g, eval_split, eval_threshold);
    else if (*predict) run_predict(g, p_fen, p_move, p_threshold);
    else if (*perturb) run_perturb(g, perturb_split);
    else if (*plot) run_plotdata(g, plot_split, plot_evaluator, plot_budget);
    else if (*show) fmt::print("{}\n", load_config(g).to_json().dump(2));
  } catch (const UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
