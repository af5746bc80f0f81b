#pragma once

#include "attentiv/algorithm.hpp"
#include "attentiv/ensemble.hpp"
#include "attentiv/features.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace attentiv {

using Classifier =
    std::variant<SvmModel, NaiveBayesModel, RandomForestModel, EnsembleModel>;

struct AlgorithmConfig {
  Algorithm algorithm = Algorithm::ensemble;
  SvmParams svm;
  ForestParams forest;
  EnsembleParams ensemble;
  double nb_smoothing = kNbVarianceSmoothing;
};

Algorithm algorithm_of(const Classifier& c);
std::size_t input_dims(const Classifier& c);

// Train on an already-scaled matrix.
Classifier train_classifier(const FeatureMatrix& m, const AlgorithmConfig& config,
                            std::uint64_t seed);

Prediction predict_one(const Classifier& c, std::span<const double> x);

// One prediction per row. Throws schema error if m.d does not match.
std::vector<Prediction> predict(const Classifier& c, const FeatureMatrix& m);

struct TrainingInfo {
  std::uint64_t seed = 0;
  std::int64_t timestamp = 0;  // seconds since epoch, 0 under a fixed clock
  std::size_t rows = 0;
};

// Scaler plus classifier: the unit that is trained, persisted and served.
struct TrainedModel {
  ScalerParams scaler;
  Classifier classifier;
  TrainingInfo info;

  const std::vector<std::string>& feature_names() const {
    return scaler.feature_names;
  }
};

// Fit the scaler on m, train on the scaled rows.
TrainedModel fit_model(const FeatureMatrix& m, const AlgorithmConfig& config,
                       std::uint64_t seed, std::int64_t timestamp = 0);

// Scales raw (unscaled) rows, then predicts. Feature names must match.
std::vector<Prediction> predict(const TrainedModel& model, const FeatureMatrix& raw);
Prediction predict_one(const TrainedModel& model, std::span<const double> raw_row);

}  // namespace attentiv
