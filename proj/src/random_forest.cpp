#include "attentiv/random_forest.hpp"

#include "attentiv/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

namespace attentiv {

double gini(const ClassCounts& counts) {
  const double total = static_cast<double>(counts[0]) + counts[1];
  if (total == 0.0) return 0.0;
  const double p0 = counts[0] / total;
  const double p1 = counts[1] / total;
  return 1.0 - p0 * p0 - p1 * p1;
}

int DecisionTree::predict(std::span<const double> x) const {
  std::size_t at = 0;
  while (!nodes[at].is_leaf()) {
    const TreeNode& node = nodes[at];
    at = static_cast<std::size_t>(
        x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                    : node.right);
  }
  const auto& c = nodes[at].counts;
  return c[1] > c[0] ? 1 : 0;
}

Prediction RandomForestModel::predict(std::span<const double> x) const {
  std::size_t ones = 0;
  for (const auto& tree : trees) ones += static_cast<std::size_t>(tree.predict(x));
  const double score =
      trees.empty() ? 0.0 : static_cast<double>(ones) / static_cast<double>(trees.size());
  return {label_for(score, kThreshold), score};
}

namespace {

ClassCounts count_classes(const FeatureMatrix& m, std::span<const std::size_t> rows) {
  ClassCounts c{};
  for (const auto r : rows) ++c[static_cast<std::size_t>(m.label(r))];
  return c;
}

// Split point strictly between lo and hi so that lo goes left and hi right.
double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

void split_on_feature(const FeatureMatrix& m, std::span<const std::size_t> rows,
                      std::size_t feature, const ClassCounts& parent_counts,
                      double parent_gini, std::vector<std::pair<double, int>>& scratch,
                      std::optional<SplitCandidate>& best) {
  scratch.clear();
  for (const auto r : rows) scratch.emplace_back(m.at(r, feature), m.label(r));
  std::sort(scratch.begin(), scratch.end());
  if (scratch.front().first == scratch.back().first) return;

  const double total = static_cast<double>(rows.size());
  ClassCounts left{};
  for (std::size_t k = 0; k + 1 < scratch.size(); ++k) {
    ++left[static_cast<std::size_t>(scratch[k].second)];
    if (scratch[k].first == scratch[k + 1].first) continue;
    const ClassCounts right{parent_counts[0] - left[0], parent_counts[1] - left[1]};
    const double nl = static_cast<double>(k + 1);
    const double nr = total - nl;
    const double child = (nl * gini(left) + nr * gini(right)) / total;
    const double decrease = parent_gini - child;
    if (!best || decrease > best->decrease) {
      best = SplitCandidate{feature, midpoint(scratch[k].first, scratch[k + 1].first),
                            decrease};
    }
  }
}

struct TreeBuilder {
  const FeatureMatrix& m;
  const ForestParams& params;
  std::mt19937_64& rng;
  std::size_t mtry;
  DecisionTree tree;
  std::vector<std::size_t> feature_order;
  std::vector<std::pair<double, int>> scratch;

  std::int32_t build(std::vector<std::size_t> rows) {
    const auto index = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const ClassCounts counts = count_classes(m, rows);
    tree.nodes[static_cast<std::size_t>(index)].counts = counts;
    if (counts[0] == 0 || counts[1] == 0 || rows.size() < params.min_samples_split) {
      return index;
    }

    std::shuffle(feature_order.begin(), feature_order.end(), rng);
    const double parent_gini = gini(counts);
    std::optional<SplitCandidate> best;
    for (std::size_t f = 0; f < feature_order.size(); ++f) {
      // Past the sampled mtry features, keep drawing only until a valid split exists.
      if (f >= mtry && best) break;
      split_on_feature(m, rows, feature_order[f], counts, parent_gini, scratch, best);
    }
    if (!best) return index;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (const auto r : rows) {
      (m.at(r, best->feature) <= best->threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const std::int32_t left = build(std::move(left_rows));
    const std::int32_t right = build(std::move(right_rows));
    TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
    node.feature = static_cast<int>(best->feature);
    node.threshold = best->threshold;
    node.left = left;
    node.right = right;
    return index;
  }
};

std::size_t resolve_mtry(const ForestParams& params, std::size_t d) {
  std::size_t mtry = params.max_features;
  if (mtry == 0) mtry = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d))));
  return std::clamp<std::size_t>(mtry, 1, std::max<std::size_t>(d, 1));
}

}  // namespace

std::optional<SplitCandidate> best_split(const FeatureMatrix& m,
                                         std::span<const std::size_t> rows,
                                         std::span<const std::size_t> features) {
  if (rows.size() < 2) return std::nullopt;
  const ClassCounts counts = count_classes(m, rows);
  const double parent = gini(counts);
  std::vector<std::pair<double, int>> scratch;
  std::optional<SplitCandidate> best;
  for (const auto f : features) split_on_feature(m, rows, f, counts, parent, scratch, best);
  return best;
}

DecisionTree grow_tree(const FeatureMatrix& m, std::span<const std::size_t> rows,
                       const ForestParams& params, std::mt19937_64& rng) {
  if (!m.labels) throw Error(ErrorKind::training, "tree growth needs labels");
  if (rows.empty()) throw Error(ErrorKind::training, "tree growth needs rows");
  TreeBuilder builder{m, params, rng, resolve_mtry(params, m.d), {}, {}, {}};
  builder.feature_order.resize(m.d);
  std::iota(builder.feature_order.begin(), builder.feature_order.end(), std::size_t{0});
  builder.build(std::vector<std::size_t>(rows.begin(), rows.end()));
  return std::move(builder.tree);
}

DecisionTree train_tree(const FeatureMatrix& m, const ForestParams& params,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> rows(m.n);
  if (params.bootstrap) {
    std::uniform_int_distribution<std::size_t> pick(0, m.n - 1);
    for (auto& r : rows) r = pick(rng);
  } else {
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }
  return grow_tree(m, rows, params, rng);
}

RandomForestModel train_rf(const FeatureMatrix& m, const ForestParams& params,
                           std::uint64_t seed) {
  if (params.trees < 1) throw Error(ErrorKind::parameter, "forest needs at least one tree");
  if (params.min_samples_split < 2) {
    throw Error(ErrorKind::parameter, "min_samples_split must be >= 2");
  }
  if (!m.labels) throw Error(ErrorKind::training, "forest needs labels");
  if (m.n < 2) throw Error(ErrorKind::training, "forest needs at least 2 rows");
  m.validate();
  RandomForestModel model;
  model.seed = seed;
  model.dims = m.d;
  model.trees.reserve(params.trees);
  for (std::size_t t = 0; t < params.trees; ++t) {
    model.trees.push_back(train_tree(m, params, derive_seed(seed, t)));
  }
  return model;
}

}  // namespace attentiv
