#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <thread>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include "brilliant/chess/notation.hpp"
#include "brilliant/error.hpp"
#include "brilliant/search/builtin.hpp"
#include "brilliant/search/mcts.hpp"
#include "brilliant/search/sidecar.hpp"
#include "support/puct_oracle.hpp"
#include "support/random_positions.hpp"

namespace brilliant::search {
namespace {

using testsupport::CountingEvaluator;
using testsupport::oracle_expansions;
using chess::Move;
using chess::Position;
using chess::parse_fen;

// Fixed priors at the root, uniform elsewhere; constant value.
class ToyEvaluator final : public Evaluator {
 public:
  ToyEvaluator(std::vector<double> root_priors, double value) : root_priors_(std::move(root_priors)), value_(value) {}
  std::string name() const override { return "toy"; }
  bool deterministic() const override { return true; }
  Evaluation evaluate(const Position& p, std::span<const Move> legal) override {
    ++calls;
    if (calls == 1) return {root_priors_, value_};
    return {std::vector<double>(legal.size(), 1.0 / legal.size()), value_};
  }
  int calls = 0;

 private:
  std::vector<double> root_priors_;
  double value_;
};

std::vector<std::vector<Move>> recorded_expansions(const Position& root, std::uint64_t budget, Evaluator& e) {
  std::vector<std::vector<Move>> order;
  SearchObserver obs;
  obs.on_expand = [&](std::span<const Move> path) { order.emplace_back(path.begin(), path.end()); };
  run_search(root, budget, e, {}, &obs);
  return order;
}

void expect_conservation(const SearchTree& t) {
  for (const TreeNode& n : t.nodes()) {
    EXPECT_GE(n.q(), -1.0);
    EXPECT_LE(n.q(), 1.0);
    if (n.terminal != Terminal::None) {
      EXPECT_TRUE(n.children.empty());
      continue;
    }
    std::uint32_t sum = 0;
    for (const NodeId k : n.children) sum += t.node(k).visits;
    EXPECT_EQ(n.visits, 1 + sum);
  }
}

TEST(Search, BudgetOneIsRootOnly) {
  WeakEvaluator weak;
  const Position p = parse_fen("r1bqkbnr/pppp1ppp/2n5/4p3/4P3/5N2/PPPP1PPP/RNBQKB1R w KQkq - 2 3");
  const SearchTree t = run_search(p, 1, weak);
  ASSERT_EQ(t.size(), 1u);
  const Evaluation ev = weak.evaluate(p, chess::legal_moves(p));
  EXPECT_EQ(t.node(0).q(), ev.value);
  EXPECT_EQ(t.node(0).visits, 1u);
  EXPECT_EQ(t.meta().evaluator_calls, 1u);
}

TEST(Search, BudgetTenFromStartposHasTenRootVisits) {
  WeakEvaluator weak;
  CountingEvaluator counting(weak);
  const SearchTree t = run_search(Position::startpos(), 10, counting);
  EXPECT_EQ(t.node(0).visits, 10u);
  EXPECT_EQ(counting.calls, 10u);
  EXPECT_EQ(t.meta().budget, 10u);
  EXPECT_FALSE(t.meta().exhausted);
}

TEST(Search, TwoChildToyFollowsHandDerivedSelection) {
  // White Ka1 with only Kb1 and Ka2 legal; canonical order puts b1 first.
  const Position p = parse_fen("8/8/8/8/8/2k5/8/K7 w - - 0 1");
  const auto legal = chess::legal_moves(p);
  ASSERT_EQ(legal.size(), 2u);
  EXPECT_EQ(chess::move_to_uci(legal[0]), "a1b1");

  // Call 1 is the root. Iteration 2: b1 scores 1.5*0.9*1/1 = 1.35 against
  // a2's 0.15. Iteration 3: b1 has Q' = 0 and 1.5*0.9*sqrt(2)/2 = 0.954,
  // a2 has 1.5*0.1*sqrt(2) = 0.212, so search descends into b1 again and
  // expands its first reply (uniform priors there).
  ToyEvaluator toy({0.9, 0.1}, 0.0);
  const auto order = recorded_expansions(p, 3, toy);
  ASSERT_EQ(order.size(), 3u);
  EXPECT_TRUE(order[0].empty());
  ASSERT_EQ(order[1].size(), 1u);
  EXPECT_EQ(chess::move_to_uci(order[1][0]), "a1b1");
  ASSERT_EQ(order[2].size(), 2u);
  EXPECT_EQ(chess::move_to_uci(order[2][0]), "a1b1");
  const Position after = chess::apply_move(p, order[2][0]);
  EXPECT_EQ(order[2][1], chess::legal_moves(after).front());
}

TEST(Search, EqualScoresBreakTiesByCanonicalOrder) {
  const Position p = parse_fen("8/8/8/8/8/2k5/8/K7 w - - 0 1");
  ToyEvaluator toy({0.5, 0.5}, 0.0);
  const auto order = recorded_expansions(p, 2, toy);
  ASSERT_EQ(order.size(), 2u);
  EXPECT_EQ(chess::move_to_uci(order[1][0]), "a1b1");
}

TEST(Search, ExpansionOrderMatchesBruteForceDerivation) {
  WeakEvaluator weak;
  StrongEvaluator strong;
  const auto positions = testsupport::random_positions(12, 11);
  for (const Position& p : positions) {
    for (Evaluator* e : {static_cast<Evaluator*>(&weak), static_cast<Evaluator*>(&strong)}) {
      for (const int budget : {1, 2, 7, 30}) {
        const auto got = recorded_expansions(p, static_cast<std::uint64_t>(budget), *e);
        const auto want = oracle_expansions(p, budget, *e, 1.5);
        EXPECT_EQ(got, want) << chess::to_fen(p) << " budget " << budget;
      }
    }
  }
}

TEST(Search, ConservationBoundsAndExactCallCounts) {
  StrongEvaluator strong;
  for (const Position& p : testsupport::random_positions(10, 5)) {
    for (const std::uint64_t budget : {1u, 10u, 100u}) {
      CountingEvaluator counting(strong);
      const SearchTree t = run_search(p, budget, counting);
      EXPECT_EQ(t.meta().evaluator_calls, counting.calls);
      if (t.meta().exhausted) {
        // Only a terminal that keeps winning selection can stop a search early.
        EXPECT_LT(counting.calls, budget);
        EXPECT_TRUE(std::any_of(t.nodes().begin(), t.nodes().end(),
                                [](const TreeNode& n) { return n.terminal != Terminal::None; }));
      } else {
        EXPECT_EQ(counting.calls, budget);
      }
      expect_conservation(t);
    }
  }
}

TEST(Search, DeterministicAcrossRuns) {
  StrongEvaluator strong;
  const Position p = testsupport::random_positions(1, 99).front();
  EXPECT_TRUE(same_structure(run_search(p, 200, strong), run_search(p, 200, strong)));
}

TEST(Search, LadderEqualsSeparateRunsAndIsMonotone) {
  WeakEvaluator weak;
  const std::vector<std::uint64_t> budgets{1, 10, 50, 200};
  for (const Position& p : testsupport::random_positions(5, 17)) {
    const auto ladder = run_search_ladder(p, budgets, weak);
    ASSERT_EQ(ladder.size(), budgets.size());
    for (std::size_t i = 0; i < budgets.size(); ++i)
      EXPECT_TRUE(same_structure(ladder[i], run_search(p, budgets[i], weak))) << i;
    for (std::size_t i = 1; i < budgets.size(); ++i) {
      const SearchTree& small = ladder[i - 1];
      const SearchTree& big = ladder[i];
      ASSERT_LE(small.size(), big.size());
      for (std::size_t k = 1; k < small.size(); ++k) {
        const TreeNode& n = small.nodes()[k];
        const TreeNode& m = big.nodes()[k];
        EXPECT_EQ(n.parent, m.parent);
        EXPECT_EQ(n.move, m.move);
        EXPECT_LE(n.visits, m.visits);
      }
    }
  }
}

TEST(Search, CheckmateBacksUpMinusOneForTheMatedSide) {
  // Qd8 is mate; the strong evaluator pushes search straight into it.
  const Position p = parse_fen("7k/8/6K1/8/8/8/8/3Q4 w - - 0 1");
  StrongEvaluator strong;
  const SearchTree t = run_search(p, 50, strong);
  const auto mate = t.find_child(0, chess::parse_uci("d1d8"));
  ASSERT_TRUE(mate.has_value());
  const TreeNode& n = t.node(*mate);
  EXPECT_EQ(n.terminal, Terminal::Checkmate);
  EXPECT_GT(n.visits, 1u);
  EXPECT_EQ(n.q(), -1.0);
  expect_conservation(t);
}

TEST(Search, BudgetIsExactWhenNoTerminalAbsorbsSelection) {
  // Uniform priors keep every edge reachable, so the mate cannot starve the
  // rest of the tree and the call count must hit the budget.
  const Position p = parse_fen("7k/8/6K1/8/8/8/8/3Q4 w - - 0 1");
  ToyEvaluator toy(std::vector<double>(chess::legal_moves(p).size(), 1.0 / chess::legal_moves(p).size()), 0.0);
  CountingEvaluator counting(toy);
  const SearchTree t = run_search(p, 300, counting);
  EXPECT_FALSE(t.meta().exhausted);
  EXPECT_EQ(counting.calls, 300u);
}

TEST(Search, FiniteTreeStopsEarlyAndIsFlagged) {
  const Position p = parse_fen("8/3Q4/2k1Q3/6K1/6R1/1Q6/1R6/8 b - - 0 1");
  WeakEvaluator weak;
  CountingEvaluator counting(weak);
  const SearchTree t = run_search(p, 1000, counting);
  EXPECT_TRUE(t.meta().exhausted);
  EXPECT_LT(counting.calls, 1000u);
  EXPECT_EQ(t.meta().evaluator_calls, counting.calls);
  expect_conservation(t);
}

TEST(Search, RejectsTerminalRootAndZeroBudget) {
  WeakEvaluator weak;
  EXPECT_THROW(run_search(parse_fen("7k/6Q1/6K1/8/8/8/8/8 b - - 0 1"), 10, weak), DataError);
  EXPECT_THROW(run_search(Position::startpos(), 0, weak), DataError);
}

TEST(Search, TreeJsonRoundTrip) {
  WeakEvaluator weak;
  const SearchTree t = run_search(testsupport::random_positions(1, 3).front(), 40, weak);
  const auto j = t.to_json();
  EXPECT_TRUE(j.at("nodes").at(0).at("parent_id").is_null());
  EXPECT_TRUE(same_structure(t, SearchTree::from_json(j)));
  EXPECT_EQ(SearchTree::from_json(j).meta().root_fen, t.meta().root_fen);
  EXPECT_THROW(SearchTree::from_json(nlohmann::json{{"nodes", 3}}), ParseError);
}

// Plain max-min over every reply, no pruning.
double full_two_ply(const Position& p, const EvalWeights& w) {
  double best = -std::numeric_limits<double>::infinity();
  for (const Move& m : chess::legal_moves(p)) {
    const Position c = chess::apply_move(p, m);
    const auto replies = chess::legal_moves(c);
    double v = std::numeric_limits<double>::infinity();
    if (replies.empty()) v = c.in_check() ? w.mate_score : 0.0;
    for (const Move& r : replies) v = std::min(v, static_score(chess::apply_move(c, r), w));
    best = std::max(best, v);
  }
  return best;
}

TEST(Builtin, StrongValueEqualsUnprunedTwoPlySearch) {
  StrongEvaluator strong;
  for (const Position& p : testsupport::random_positions(25, 8)) {
    const Evaluation ev = strong.evaluate(p, chess::legal_moves(p));
    EXPECT_DOUBLE_EQ(ev.value, std::tanh(strong.weights().lambda * full_two_ply(p, strong.weights())));
  }
}

TEST(Builtin, PoliciesAreDistributions) {
  StrongEvaluator strong;
  WeakEvaluator weak;
  for (const Position& p : testsupport::random_positions(25, 9)) {
    const auto legal = chess::legal_moves(p);
    for (Evaluator* e : {static_cast<Evaluator*>(&strong), static_cast<Evaluator*>(&weak)}) {
      const Evaluation ev = e->evaluate(p, legal);
      ASSERT_EQ(ev.policy.size(), legal.size());
      double sum = 0.0;
      for (const double x : ev.policy) {
        EXPECT_GE(x, 0.0);
        sum += x;
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
      EXPECT_LE(std::abs(ev.value), 1.0);
    }
  }
}

TEST(Builtin, QueenUpIsClearlyWinningForStrong) {
  // White to move with an extra queen; score >= 9 - small terms, tanh(0.2*9) = 0.946.
  const Position p = parse_fen("4k3/pppp4/8/8/8/8/PPPP4/3QK3 w - - 0 1");
  StrongEvaluator strong;
  EXPECT_GT(strong.evaluate(p, chess::legal_moves(p)).value, 0.5);
}

TEST(Builtin, StartposIsBalanced) {
  const Position p = Position::startpos();
  const auto legal = chess::legal_moves(p);
  EXPECT_LT(std::abs(StrongEvaluator().evaluate(p, legal).value), 0.05);
  EXPECT_LT(std::abs(WeakEvaluator().evaluate(p, legal).value), 0.05);
}

TEST(Builtin, HangingRookFavoursStrongOverWeak) {
  // Bxa8 wins the undefended rook; material is level before the capture.
  const Position p = parse_fen("r3k3/1ppp4/8/8/8/8/1PPP2B1/4K2R w - - 0 1");
  const auto legal = chess::legal_moves(p);
  const double s = StrongEvaluator().evaluate(p, legal).value;
  const double w = WeakEvaluator().evaluate(p, legal).value;
  EXPECT_GT(s, w);
  EXPECT_GT(s, 0.5);
}

TEST(Builtin, WeakPrefersCapturesOverQuietMoves) {
  // The only capture (Rxa8) must carry the largest weak prior.
  const Position p = parse_fen("r3k3/8/8/8/8/8/8/R3K3 w - - 0 1");
  const auto legal = chess::legal_moves(p);
  const Evaluation ev = WeakEvaluator().evaluate(p, legal);
  const auto best = std::max_element(ev.policy.begin(), ev.policy.end()) - ev.policy.begin();
  EXPECT_EQ(chess::move_to_uci(legal[static_cast<std::size_t>(best)]), "a1a8");
}

TEST(Builtin, WeightsRoundTripAndHashTracksChanges) {
  EvalWeights w;
  const EvalWeights back = EvalWeights::from_json(w.to_json());
  EXPECT_EQ(back.hash(), w.hash());
  EvalWeights changed = w;
  changed.tau_weak = 3.0;
  EXPECT_NE(changed.hash(), w.hash());
  EXPECT_EQ(w.version, "builtin-v1");
}

const std::vector<Move> kStartLegal = chess::legal_moves(Position::startpos());

TEST(SidecarProtocol, ParsesValueAndPolicy) {
  const Evaluation ev = parse_response("v -0.5 p e2e4:0.75 d2d4:0.25", kStartLegal);
  EXPECT_EQ(ev.value, -0.5);
  double sum = 0.0;
  for (std::size_t i = 0; i < kStartLegal.size(); ++i) {
    const std::string u = chess::move_to_uci(kStartLegal[i]);
    if (u == "e2e4") EXPECT_EQ(ev.policy[i], 0.75);
    else if (u == "d2d4") EXPECT_EQ(ev.policy[i], 0.25);
    else EXPECT_EQ(ev.policy[i], 0.0);
    sum += ev.policy[i];
  }
  EXPECT_DOUBLE_EQ(sum, 1.0);
}

TEST(SidecarProtocol, RenormalizesShortPolicy) {
  const Evaluation ev = parse_response("v 0 p e2e4:0.6 d2d4:0.2", kStartLegal);
  double sum = 0.0;
  for (const double x : ev.policy) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(*std::max_element(ev.policy.begin(), ev.policy.end()), 0.75, 1e-12);
}

TEST(SidecarProtocol, RejectsViolations) {
  EXPECT_THROW(parse_response("", kStartLegal), ProtocolError);
  EXPECT_THROW(parse_response("value 0 p e2e4:1", kStartLegal), ProtocolError);
  EXPECT_THROW(parse_response("v 2 p e2e4:1", kStartLegal), ProtocolError);
  EXPECT_THROW(parse_response("v x p e2e4:1", kStartLegal), ProtocolError);
  EXPECT_THROW(parse_response("v 0 p e2e5:1", kStartLegal), ProtocolError);
  EXPECT_THROW(parse_response("v 0 p e2e4", kStartLegal), ProtocolError);
  EXPECT_THROW(parse_response("v 0 p e2e4:-1 d2d4:2", kStartLegal), ProtocolError);
  EXPECT_THROW(parse_response("v 0 p", kStartLegal), ProtocolError);
}

SidecarConfig fake(const std::string& mode) {
  SidecarConfig c;
  c.name = "fake";
  c.command = {FAKE_SIDECAR_PATH, mode};
  c.timeout = std::chrono::milliseconds(500);
  return c;
}

TEST(Sidecar, SearchesThroughStdioAndCachesPerSearch) {
  ExternalEvaluator e(fake("normal"));
  const SearchTree t = run_search(Position::startpos(), 20, e);
  EXPECT_EQ(t.meta().evaluator_calls, 20u);
  expect_conservation(t);
  const std::size_t sent = e.requests_sent();
  EXPECT_EQ(sent, 20u);
  // Same position twice inside one search hits the cache.
  e.begin_search();
  const auto legal = chess::legal_moves(Position::startpos());
  e.evaluate(Position::startpos(), legal);
  e.evaluate(Position::startpos(), legal);
  EXPECT_EQ(e.requests_sent(), sent + 1);
}

TEST(Sidecar, ShortPolicyIsRenormalized) {
  ExternalEvaluator e(fake("short"));
  const auto legal = chess::legal_moves(Position::startpos());
  const Evaluation ev = e.evaluate(Position::startpos(), legal);
  double sum = 0.0;
  for (const double x : ev.policy) sum += x;
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(Sidecar, SpeaksTheSameProtocolOverTcp) {
  const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(listener, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr), 0);
  ASSERT_EQ(::listen(listener, 1), 0);
  socklen_t len = sizeof addr;
  ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
  const int port = ntohs(addr.sin_port);

  std::thread server([listener] {
    const int fd = ::accept(listener, nullptr, nullptr);
    std::string buf;
    char chunk[512];
    ssize_t n;
    while ((n = ::read(fd, chunk, sizeof chunk)) > 0) {
      buf.append(chunk, static_cast<std::size_t>(n));
      std::size_t nl;
      while ((nl = buf.find('\n')) != std::string::npos) {
        const Position pos = parse_fen(buf.substr(5, nl - 5));
        buf.erase(0, nl + 1);
        const auto moves = chess::legal_moves(pos);
        std::string reply = "v -0.125 p " + chess::move_to_uci(moves.front()) + ":1\n";
        (void)!::write(fd, reply.data(), reply.size());
      }
    }
    ::close(fd);
  });

  {
    SidecarConfig c;
    c.host = "127.0.0.1";
    c.port = port;
    ExternalEvaluator e(c);
    const SearchTree t = run_search(Position::startpos(), 4, e);
    EXPECT_EQ(t.meta().evaluator_calls, 4u);
    expect_conservation(t);
  }
  server.join();
  ::close(listener);
}

template <typename Err>
void expect_search_error(const std::string& mode, const std::string& needle) {
  ExternalEvaluator e(fake(mode));
  try {
    run_search(Position::startpos(), 5, e);
    FAIL() << "expected failure for mode " << mode;
  } catch (const Err& err) {
    const std::string what = err.what();
    EXPECT_NE(what.find(needle), std::string::npos) << what;
    EXPECT_NE(what.find(std::string(chess::kStartFen)), std::string::npos) << what;
  }
}

TEST(Sidecar, TimeoutAbortsSearchWithFen) { expect_search_error<TimeoutError>("hang", "timed out"); }
TEST(Sidecar, CrashAbortsSearchWithFen) { expect_search_error<TransportError>("crash", "closed"); }
TEST(Sidecar, GarbageIsProtocolViolation) { expect_search_error<ProtocolError>("garbage", "malformed"); }

}  // namespace
}  // namespace brilliant::search
