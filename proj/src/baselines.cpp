#include "canids/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "canids/error.hpp"
#include "canids/simd.hpp"

namespace canids::baselines {

KnnModel knn_fit(std::span<const ingest::FeatureVector> train, std::size_t k) {
  if (train.empty()) throw Error(Errc::EmptyTrainingSet, "KNN needs training points");
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
  if (k > train.size()) throw Error(Errc::KTooLarge, "k exceeds the training size");
  KnnModel m;
  m.k = k;
  m.points.reserve(train.size());
  m.labels.reserve(train.size());
  for (const auto& fv : train) {
    m.points.push_back(fv.x);
    m.labels.push_back(fv.y);
  }
  return m;
}

Vote knn_predict(const KnnModel& model, const Point& query, std::size_t k) {
  if (model.points.empty()) throw Error(Errc::EmptyTrainingSet, "KNN model is empty");
  if (k < 1) throw Error(Errc::InvalidArgument, "k must be >= 1");
  if (k > model.points.size()) throw Error(Errc::KTooLarge, "k exceeds the training size");
  const auto& kern = simd::active();
  std::vector<std::pair<double, std::size_t>> dist(model.points.size());
  for (std::size_t i = 0; i < model.points.size(); ++i) {
    dist[i] = {kern.l2sq(model.points[i].data(), query.data(), query.size()), i};
  }
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1), dist.end());
  std::size_t attack = 0;
  for (std::size_t i = 0; i < k; ++i) attack += model.labels[dist[i].second];
  Vote v;
  v.attack_fraction = static_cast<double>(attack) / static_cast<double>(k);
  v.label = 2 * attack >= k ? 1 : 0;
  return v;
}

std::vector<Vote> knn_predict(const KnnModel& model, std::span<const ingest::FeatureVector> queries) {
  std::vector<Vote> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(knn_predict(model, q.x, model.k));
  return out;
}

// --- CART --------------------------------------------------------------------

namespace {

double gini(std::size_t n0, std::size_t n1) {
  const double n = static_cast<double>(n0 + n1);
  if (n == 0.0) return 0.0;
  const double p0 = static_cast<double>(n0) / n;
  const double p1 = static_cast<double>(n1) / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct Split {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(std::span<const ingest::FeatureVector> rows, std::size_t max_depth, std::size_t min_leaf)
      : rows_(rows), max_depth_(max_depth), min_leaf_(std::max<std::size_t>(min_leaf, 1)) {}

  DecisionTree build() {
    std::vector<std::size_t> all(rows_.size());
    std::iota(all.begin(), all.end(), 0);
    grow(all, 0);
    return std::move(tree_);
  }

 private:
  std::size_t grow(std::vector<std::size_t>& idx, std::size_t depth) {
    const std::size_t id = tree_.nodes.size();
    tree_.nodes.emplace_back();
    TreeNode node;
    for (auto i : idx) ++node.counts[rows_[i].y];
    node.label = node.counts[1] >= node.counts[0] ? 1 : 0;
    const bool pure = node.counts[0] == 0 || node.counts[1] == 0;
    if (pure || depth >= max_depth_ || idx.size() < 2 * min_leaf_) {
      tree_.nodes[id] = node;
      return id;
    }
    const Split best = best_split(idx);
    if (!best.found) {
      tree_.nodes[id] = node;
      return id;
    }
    std::vector<std::size_t> left, right;
    for (auto i : idx) (rows_[i].x[best.feature] <= best.threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    node.leaf = false;
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = grow(left, depth + 1);
    node.right = grow(right, depth + 1);
    tree_.nodes[id] = node;
    return id;
  }

  Split best_split(const std::vector<std::size_t>& idx) const {
    Split best;
    const double n = static_cast<double>(idx.size());
    std::size_t total1 = 0;
    for (auto i : idx) total1 += rows_[i].y;
    const std::size_t total0 = idx.size() - total1;
    std::vector<std::pair<double, std::uint8_t>> col(idx.size());
    for (std::size_t f = 0; f < ingest::kFeatureWidth; ++f) {
      for (std::size_t j = 0; j < idx.size(); ++j) col[j] = {rows_[idx[j]].x[f], rows_[idx[j]].y};
      std::sort(col.begin(), col.end());
      std::size_t l0 = 0, l1 = 0;
      for (std::size_t j = 0; j + 1 < col.size(); ++j) {
        (col[j].second ? l1 : l0) += 1;
        if (col[j].first == col[j + 1].first) continue;
        const std::size_t nl = j + 1;
        const std::size_t nr = col.size() - nl;
        if (nl < min_leaf_ || nr < min_leaf_) continue;
        const double imp = (static_cast<double>(nl) * gini(l0, l1) +
                            static_cast<double>(nr) * gini(total0 - l0, total1 - l1)) / n;
        if (!best.found || imp < best.impurity - 1e-12) {
          best = Split{true, f, 0.5 * (col[j].first + col[j + 1].first), imp};
        }
      }
    }
    return best;
  }

  std::span<const ingest::FeatureVector> rows_;
  std::size_t max_depth_;
  std::size_t min_leaf_;
  DecisionTree tree_;
};

std::size_t depth_of(const DecisionTree& tree, std::size_t node) {
  const auto& n = tree.nodes[node];
  if (n.leaf) return 0;
  return 1 + std::max(depth_of(tree, n.left), depth_of(tree, n.right));
}

}  // namespace

std::size_t DecisionTree::depth() const { return nodes.empty() ? 0 : depth_of(*this, 0); }

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf; }));
}

DecisionTree tree_fit(std::span<const ingest::FeatureVector> train, std::size_t max_depth, std::size_t min_leaf) {
  if (train.empty()) throw Error(Errc::EmptyTrainingSet, "decision tree needs training rows");
  return TreeBuilder(train, max_depth, min_leaf).build();
}

const TreeNode& tree_leaf(const DecisionTree& tree, const Point& x) {
  if (tree.nodes.empty()) throw Error(Errc::EmptyTrainingSet, "tree is empty");
  const TreeNode* n = &tree.nodes[0];
  while (!n->leaf) n = &tree.nodes[x[n->feature] <= n->threshold ? n->left : n->right];
  return *n;
}

std::uint8_t tree_predict(const DecisionTree& tree, const Point& x) { return tree_leaf(tree, x).label; }

double tree_attack_score(const DecisionTree& tree, const Point& x) {
  const auto& leaf = tree_leaf(tree, x);
  return static_cast<double>(leaf.counts[1]) / static_cast<double>(leaf.counts[0] + leaf.counts[1]);
}

nn::Network build_mlp(std::uint64_t seed) {
  nn::Network net(nn::Shape{ingest::kFeatureWidth, 1},
                  {nn::Dense{ingest::kFeatureWidth, kMlpHidden}, nn::ReLU{}, nn::Dense{kMlpHidden, kMlpHidden},
                   nn::ReLU{}, nn::Dense{kMlpHidden, 2}, nn::Softmax{}});
  net.init_glorot(seed);
  return net;
}

}  // namespace canids::baselines
