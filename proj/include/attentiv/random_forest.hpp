#pragma once

#include "attentiv/features.hpp"
#include "attentiv/prediction.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace attentiv {

using ClassCounts = std::array<std::uint32_t, 2>;

// feature < 0 marks a leaf. Children always sit at higher indices than
// their parent.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  ClassCounts counts{};

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  // Majority class of the reached leaf; ties go to 0.
  int predict(std::span<const double> x) const;
  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct ForestParams {
  std::size_t trees = 100;
  std::size_t max_features = 0;  // 0 -> floor(sqrt(d))
  std::size_t min_samples_split = 2;
  bool bootstrap = true;
};

struct RandomForestModel {
  std::vector<DecisionTree> trees;
  std::uint64_t seed = 0;
  std::size_t dims = 0;  // input width the trees were grown on

  static constexpr double kThreshold = 0.5;

  // score = fraction of trees voting class 1; label 1 iff score > 0.5.
  Prediction predict(std::span<const double> x) const;
};

double gini(const ClassCounts& counts);

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;  // parent gini - weighted child gini
};

// Best threshold over the given candidate features, scanning midpoints
// between consecutive distinct values. nullopt when every candidate is
// constant over rows. Ties keep the first candidate found.
std::optional<SplitCandidate> best_split(const FeatureMatrix& m,
                                         std::span<const std::size_t> rows,
                                         std::span<const std::size_t> features);

// Grow one tree on the given rows (bootstrap already applied by the caller).
DecisionTree grow_tree(const FeatureMatrix& m, std::span<const std::size_t> rows,
                       const ForestParams& params, std::mt19937_64& rng);

// Bootstrap (if enabled) from a generator seeded with seed, then grow.
DecisionTree train_tree(const FeatureMatrix& m, const ForestParams& params,
                        std::uint64_t seed);

// Tree t is train_tree(m, params, derive_seed(seed, t)).
RandomForestModel train_rf(const FeatureMatrix& m, const ForestParams& params,
                           std::uint64_t seed);

}  // namespace attentiv
