#pragma once

#include "attentiv/classifier.hpp"
#include "attentiv/features.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace attentiv {

// Class 1 is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  // Same counts with class 0 as the positive class.
  ConfusionMatrix transposed() const { return {tn, fn, tp, fp}; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // some ratio was 0/0 and reported as 0
};

struct MetricsReport {
  ConfusionMatrix counts;
  double accuracy = 0.0;
  std::array<ClassMetrics, 2> per_class{};  // [0] learned, [1] not learned
  bool degenerate = false;
};

// precision = TP/(TP+FP), recall = TP/(TP+FN), f1 = 2PR/(P+R),
// accuracy = (TP+TN)/total, per class by swapping the positive role.
MetricsReport metrics(const ConfusionMatrix& cm);

struct RocPoint {
  double threshold = 0.0;  // rows with score >= threshold count as positive
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// Thresholds are +inf followed by the distinct scores in descending order,
// so tied scores move as one block. AUC is the trapezoidal area.
RocCurve roc_curve(std::span<const int> truth, std::span<const double> scores);

struct CorrelationMatrix {
  std::size_t d = 0;
  std::vector<std::string> names;
  std::vector<double> values;              // d x d, row-major
  std::vector<bool> constant_column;       // degenerate flag per column

  double at(std::size_t i, std::size_t j) const { return values[i * d + j]; }
};

// Pearson correlation of every column pair. A constant column gets 0 in its
// whole row and column (diagonal included) and is flagged.
CorrelationMatrix correlation_matrix(const FeatureMatrix& m);

using Folds = std::vector<std::vector<std::size_t>>;

// Each class is shuffled with its own seed and dealt round-robin across the
// folds, continuing where the previous class stopped. Indices inside a fold
// are ascending.
Folds stratified_kfold(std::span<const int> truth, std::size_t k, std::uint64_t seed);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Per-class shuffle; round(test_fraction * class size) of each class go to test.
Split stratified_split(std::span<const int> truth, double test_fraction,
                       std::uint64_t seed);

// Whole groups (subjects) go to test until test_fraction of the rows is reached.
Split group_split(std::span<const double> groups, double test_fraction,
                  std::uint64_t seed);

struct EvaluationResult {
  MetricsReport report;
  RocCurve roc;
  std::vector<Prediction> predictions;
};

// Predicts labeled raw rows with a trained model and scores the result.
// The ROC is left empty when the matrix holds a single class.
EvaluationResult evaluate_model(const TrainedModel& model, const FeatureMatrix& raw);

struct CrossValidationResult {
  std::vector<MetricsReport> folds;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population standard deviation over folds
};

// Fold f is the held-out set; the scaler and model are fit on the other
// folds only, with a per-fold seed derived from seed.
CrossValidationResult cross_validate(const FeatureMatrix& raw,
                                     const AlgorithmConfig& config, std::size_t k,
                                     std::uint64_t seed);

}  // namespace attentiv
