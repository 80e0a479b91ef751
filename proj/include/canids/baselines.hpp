#pragma once

// Comparison classifiers over the same 16-wide prepared features: exact
// K-nearest neighbours, a Gini CART tree, and the two-hidden-layer MLP.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "canids/ingest.hpp"
#include "canids/nn.hpp"

namespace canids::baselines {

using Point = std::array<double, ingest::kFeatureWidth>;

struct KnnModel {
  std::vector<Point> points;
  std::vector<std::uint8_t> labels;
  std::size_t k = 12;
};

struct Vote {
  std::uint8_t label = 0;
  double attack_fraction = 0.0;
};

/// Throws EmptyTrainingSet, or KTooLarge when k exceeds the training size.
KnnModel knn_fit(std::span<const ingest::FeatureVector> train, std::size_t k = 12);

/// Exact Euclidean k-nearest neighbours; equal distances go to the lower
/// training index; an even vote split goes to Attack.
Vote knn_predict(const KnnModel& model, const Point& query, std::size_t k);
inline Vote knn_predict(const KnnModel& model, const Point& query) { return knn_predict(model, query, model.k); }
std::vector<Vote> knn_predict(const KnnModel& model, std::span<const ingest::FeatureVector> queries);

struct TreeNode {
  bool leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;  // x[feature] <= threshold goes left
  std::size_t left = 0;
  std::size_t right = 0;
  std::uint8_t label = 0;
  std::array<std::size_t, 2> counts{};  // training rows per class reaching this node
};

/// Nodes in creation order; nodes[0] is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

/// Greedy CART: each split minimizes weighted Gini impurity over midpoints of
/// consecutive distinct values (first feature, then lowest threshold, wins
/// ties). A node becomes a leaf when pure, at max_depth, or when no split
/// leaves min_leaf rows on both sides. Leaves predict the majority, ties to
/// Attack. Throws EmptyTrainingSet.
DecisionTree tree_fit(std::span<const ingest::FeatureVector> train, std::size_t max_depth, std::size_t min_leaf = 1);

const TreeNode& tree_leaf(const DecisionTree& tree, const Point& x);
std::uint8_t tree_predict(const DecisionTree& tree, const Point& x);
/// Attack share of the training rows in the leaf reached by x.
double tree_attack_score(const DecisionTree& tree, const Point& x);

inline constexpr std::size_t kMlpHidden = 68;

/// Dense(16,68) -> ReLU -> Dense(68,68) -> ReLU -> Dense(68,2) -> Softmax,
/// 5,986 parameters, Glorot-initialized. Train with plenet::train.
nn::Network build_mlp(std::uint64_t seed);

}  // namespace canids::baselines
