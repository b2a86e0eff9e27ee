#include "brilliant/search/builtin.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "chess/attacks.hpp"

namespace brilliant::search {

using chess::Color;
using chess::PieceKind;
using chess::Position;

nlohmann::json EvalWeights::to_json() const {
  return {
      {"version", version}, {"lambda", lambda},         {"pawn", pawn},
      {"knight", knight},   {"bishop", bishop},         {"rook", rook},
      {"queen", queen},     {"mobility", mobility},     {"king_safety", king_safety},
      {"tau_strong", tau_strong}, {"tau_weak", tau_weak}, {"capture_bias", capture_bias},
      {"mate_score", mate_score},
  };
}

EvalWeights EvalWeights::from_json(const nlohmann::json& j) {
  EvalWeights w;
  w.version = j.value("version", w.version);
  w.lambda = j.value("lambda", w.lambda);
  w.pawn = j.value("pawn", w.pawn);
  w.knight = j.value("knight", w.knight);
  w.bishop = j.value("bishop", w.bishop);
  w.rook = j.value("rook", w.rook);
  w.queen = j.value("queen", w.queen);
  w.mobility = j.value("mobility", w.mobility);
  w.king_safety = j.value("king_safety", w.king_safety);
  w.tau_strong = j.value("tau_strong", w.tau_strong);
  w.tau_weak = j.value("tau_weak", w.tau_weak);
  w.capture_bias = j.value("capture_bias", w.capture_bias);
  w.mate_score = j.value("mate_score", w.mate_score);
  return w;
}

std::uint64_t EvalWeights::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : to_json().dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

double piece_value(PieceKind k, const EvalWeights& w) {
  switch (k) {
    case PieceKind::Pawn: return w.pawn;
    case PieceKind::Knight: return w.knight;
    case PieceKind::Bishop: return w.bishop;
    case PieceKind::Rook: return w.rook;
    case PieceKind::Queen: return w.queen;
    default: return 0.0;
  }
}

// Squares attacked by each side, plus per-side N/B/R/Q mobility (targets
// that are empty or hold an enemy piece).
struct AttackInfo {
  std::uint64_t attacks[2] = {0, 0};
  int mobility[2] = {0, 0};
};

AttackInfo scan_attacks(const Position& p) {
  using namespace chess::detail;
  AttackInfo info;
  for (int s = 0; s < 64; ++s) {
    const chess::Piece pc = p.at(static_cast<chess::Square>(s));
    if (pc.empty()) continue;
    const int c = static_cast<int>(pc.color());
    std::uint64_t& att = info.attacks[c];
    int& mob = info.mobility[c];
    auto mark = [&](chess::Square t) {
      att |= std::uint64_t{1} << t;
      const chess::Piece q = p.at(t);
      return q;
    };
    switch (pc.kind()) {
      case PieceKind::Pawn: {
        const int r = chess::rank_of(static_cast<chess::Square>(s)) + (c == 0 ? 1 : -1);
        const int f = chess::file_of(static_cast<chess::Square>(s));
        if (r >= 0 && r < 8) {
          if (f > 0) att |= std::uint64_t{1} << chess::make_square(f - 1, r);
          if (f < 7) att |= std::uint64_t{1} << chess::make_square(f + 1, r);
        }
        break;
      }
      case PieceKind::King:
        for (int i = 0; i < kKing.count[s]; ++i) att |= std::uint64_t{1} << kKing.targets[s][i];
        break;
      case PieceKind::Knight:
        for (int i = 0; i < kKnight.count[s]; ++i) {
          const chess::Piece q = mark(kKnight.targets[s][i]);
          mob += q.empty() || q.color() != pc.color();
        }
        break;
      default: {
        const int d0 = pc.kind() == PieceKind::Bishop ? 4 : 0;
        const int d1 = pc.kind() == PieceKind::Rook ? 4 : 8;
        for (int d = d0; d < d1; ++d) {
          for (int i = 0; i < kRays.length[s][d]; ++i) {
            const chess::Piece q = mark(kRays.squares[s][d][i]);
            if (q.empty()) {
              ++mob;
              continue;
            }
            mob += q.color() != pc.color();
            break;
          }
        }
      }
    }
  }
  return info;
}

int king_pressure(const AttackInfo& info, chess::Square king, Color own) {
  using chess::detail::kKing;
  std::uint64_t zone = 0;
  for (int i = 0; i < kKing.count[king]; ++i) zone |= std::uint64_t{1} << kKing.targets[king][i];
  return std::popcount(zone & info.attacks[static_cast<int>(~own)]);
}

void softmax_inplace(std::vector<double>& x, double tau) {
  const double mx = *std::max_element(x.begin(), x.end());
  double sum = 0.0;
  for (double& v : x) {
    v = std::exp((v - mx) / tau);
    sum += v;
  }
  for (double& v : x) v /= sum;
}

}  // namespace

double material_score(const Position& p, const EvalWeights& w) {
  const Color us = p.side_to_move();
  double s = 0.0;
  for (int sq = 0; sq < 64; ++sq) {
    const chess::Piece pc = p.at(static_cast<chess::Square>(sq));
    if (pc.empty()) continue;
    const double v = piece_value(pc.kind(), w);
    s += pc.color() == us ? v : -v;
  }
  return s;
}

double static_score(const Position& p, const EvalWeights& w) {
  const Color us = p.side_to_move();
  const AttackInfo info = scan_attacks(p);
  const int mobility = info.mobility[static_cast<int>(us)] - info.mobility[static_cast<int>(~us)];
  const int pressure = king_pressure(info, p.king_square(~us), ~us) - king_pressure(info, p.king_square(us), us);
  return material_score(p, w) + w.mobility * mobility + w.king_safety * pressure;
}

Evaluation StrongEvaluator::evaluate(const Position& p, std::span<const chess::Move> legal) {
  struct Child {
    Position pos;
    std::vector<chess::Move> replies;
    double score1;  // 1-ply score, mover perspective
  };
  std::vector<Child> children;
  children.reserve(legal.size());
  Evaluation out;
  out.policy.resize(legal.size());
  for (std::size_t i = 0; i < legal.size(); ++i) {
    Child c{chess::apply_move_unchecked(p, legal[i]), {}, 0.0};
    c.replies = chess::legal_moves(c.pos);
    if (c.replies.empty()) {
      c.score1 = c.pos.in_check() ? w_.mate_score : 0.0;
    } else {
      c.score1 = -static_score(c.pos, w_);
    }
    out.policy[i] = c.score1;
    children.push_back(std::move(c));
  }

  // 2-ply negamax with alpha-beta; the result equals the full max-min, the
  // ordering only affects how much is pruned.
  std::vector<std::size_t> order(children.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return children[a].score1 > children[b].score1; });
  double alpha = -std::numeric_limits<double>::infinity();
  for (const std::size_t i : order) {
    Child& c = children[i];
    double v;
    if (c.replies.empty()) {
      v = c.score1;
    } else {
      std::stable_partition(c.replies.begin(), c.replies.end(),
                            [&](const chess::Move& r) { return chess::is_capture(c.pos, r); });
      v = std::numeric_limits<double>::infinity();
      for (const chess::Move& r : c.replies) {
        v = std::min(v, static_score(chess::apply_move_unchecked(c.pos, r), w_));
        if (v <= alpha) break;
      }
    }
    alpha = std::max(alpha, v);
  }
  out.value = std::tanh(w_.lambda * alpha);
  softmax_inplace(out.policy, w_.tau_strong);
  return out;
}

Evaluation WeakEvaluator::evaluate(const Position& p, std::span<const chess::Move> legal) {
  Evaluation out;
  out.value = std::tanh(w_.lambda * material_score(p, w_));
  out.policy.resize(legal.size());
  for (std::size_t i = 0; i < legal.size(); ++i) {
    const Position child = chess::apply_move_unchecked(p, legal[i]);
    out.policy[i] = -material_score(child, w_) + (chess::is_capture(p, legal[i]) ? w_.capture_bias : 0.0);
  }
  softmax_inplace(out.policy, w_.tau_weak);
  return out;
}

}  // namespace brilliant::search
