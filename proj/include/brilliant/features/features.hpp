#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "brilliant/search/tree.hpp"

namespace brilliant::features {

inline constexpr std::size_t kSubtreeDim = 22;
inline constexpr std::size_t kTreeDim = 18 * kSubtreeDim + 2;  // 398
inline constexpr std::size_t kBlocks = 10;
inline constexpr std::size_t kDatumDim = kBlocks * kTreeDim;  // 3980
inline constexpr std::size_t kKeyFeatures = 2 + 2 * kSubtreeDim;  // 46

// Offsets inside a subtree vector.
enum SubtreeIndex : std::size_t {
  kIncreasingCount = 0,
  kAdvantageCount = 1,
  kDecreasingCount = 2,
  kDisadvantageCount = 3,
  kRootQ = 4,
  kMaxChildQ = 5,
  kPrior = 6,
  kVisits = 7,
  kMaxChildPrior = 8,
  kMaxChildVisits = 9,
  kBranching = 10,
  kWidth1 = 11,  // widths at depths 1..7 occupy 11..17
  kWidthMean = 18,
  kWidthStd = 19,
  kWidthMax = 20,
  kHeight = 21,
};

// Offsets inside a tree block.
inline constexpr std::size_t kContainsMove = 0;
inline constexpr std::size_t kIsBest = 1;
inline constexpr std::size_t kParentSubtree = 2;
inline constexpr std::size_t kChildSubtree = 2 + kSubtreeDim;
inline constexpr std::size_t kGroupsOffset = kKeyFeatures;
inline constexpr std::size_t kGroupDim = 4 * kSubtreeDim;  // mean, std, min, max

enum class MoveGroup { Increasing = 0, Advantage = 1, Decreasing = 2, Disadvantage = 3 };

using SubtreeVector = std::array<double, kSubtreeDim>;

// Zeros except root Q and max child Q, which are -1.
SubtreeVector fill_vector();

// Q of a node from the perspective of the side to move at the tree root.
double mover_q(const search::SearchTree& t, search::NodeId id);

struct RootMoveClassification {
  double root_q = 0.0;
  // Root children (visited, excluding the move of interest) per group.
  std::array<std::vector<search::NodeId>, 4> groups;
  const std::vector<search::NodeId>& group(MoveGroup g) const { return groups[static_cast<int>(g)]; }
};

RootMoveClassification classify_root_moves(const search::SearchTree& t, chess::Move move_of_interest);

SubtreeVector subtree_features(const search::SearchTree& t, search::NodeId root);

std::vector<double> tree_features(const search::SearchTree& t, chess::Move move_of_interest);

// Block order of a datum: evaluators[0] then evaluators[1], budgets ascending
// within each.
struct DatumLayout {
  std::array<std::string, 2> evaluators{"strong", "weak"};
  std::array<std::uint64_t, 5> budgets{10, 100, 1000, 10000, 100000};

  std::size_t block_index(const std::string& evaluator, std::uint64_t budget) const;  // kBlocks if absent
  std::vector<std::string> block_names() const;
  nlohmann::json to_json() const;
  static DatumLayout from_json(const nlohmann::json& j);
};

// "10^4" for powers of ten, plain digits otherwise.
std::string format_budget(std::uint64_t budget);

// Concatenates the tree blocks in layout order regardless of input order.
// Throws DataError naming the first missing or duplicated (evaluator, budget)
// block, or a tree whose evaluator/budget is not in the layout.
std::vector<double> datum_features(std::span<const search::SearchTree> trees, chess::Move move_of_interest,
                                   const DatumLayout& layout = {});

}  // namespace brilliant::features
