#include "attentiv/classifier.hpp"

#include "attentiv/error.hpp"

namespace attentiv {

Algorithm algorithm_of(const Classifier& c) {
  switch (c.index()) {
    case 0: return Algorithm::svm;
    case 1: return Algorithm::nb;
    case 2: return Algorithm::rf;
    default: return Algorithm::ensemble;
  }
}

namespace {

std::size_t dims_of(const SvmModel& m) { return m.weights.size(); }
std::size_t dims_of(const NaiveBayesModel& m) { return m.dims(); }

std::size_t dims_of(const RandomForestModel& m) { return m.dims; }

std::size_t dims_of(const EnsembleModel& m) {
  if (m.members.empty()) return 0;
  return std::visit([](const auto& x) { return dims_of(x); }, m.members.front());
}

}  // namespace

std::size_t input_dims(const Classifier& c) {
  return std::visit([](const auto& m) { return dims_of(m); }, c);
}

Classifier train_classifier(const FeatureMatrix& m, const AlgorithmConfig& config,
                            std::uint64_t seed) {
  switch (config.algorithm) {
    case Algorithm::svm: return train_svm(m, config.svm);
    case Algorithm::nb: return train_nb(m, config.nb_smoothing);
    case Algorithm::rf: return train_rf(m, config.forest, seed);
    case Algorithm::ensemble: return train_ensemble(m, config.ensemble, seed);
  }
  throw Error(ErrorKind::parameter, "unknown algorithm");
}

Prediction predict_one(const Classifier& c, std::span<const double> x) {
  return std::visit([&](const auto& model) { return model.predict(x); }, c);
}

std::vector<Prediction> predict(const Classifier& c, const FeatureMatrix& m) {
  std::vector<Prediction> out;
  if (m.n == 0) return out;
  const std::size_t d = input_dims(c);
  if (m.d != d) {
    throw Error(ErrorKind::schema, "model expects " + std::to_string(d) +
                                       " features, matrix has " + std::to_string(m.d));
  }
  out.reserve(m.n);
  for (std::size_t i = 0; i < m.n; ++i) out.push_back(predict_one(c, m.row(i)));
  return out;
}

TrainedModel fit_model(const FeatureMatrix& m, const AlgorithmConfig& config,
                       std::uint64_t seed, std::int64_t timestamp) {
  TrainedModel model;
  model.scaler = fit_scaler(m);
  const FeatureMatrix scaled = apply_scaler(m, model.scaler);
  model.classifier = train_classifier(scaled, config, seed);
  model.info = {seed, timestamp, m.n};
  return model;
}

std::vector<Prediction> predict(const TrainedModel& model, const FeatureMatrix& raw) {
  if (raw.n == 0) {
    if (raw.feature_names != model.feature_names()) {
      throw Error(ErrorKind::schema, "feature names do not match the model");
    }
    return {};
  }
  return predict(model.classifier, apply_scaler(raw, model.scaler));
}

Prediction predict_one(const TrainedModel& model, std::span<const double> raw_row) {
  if (raw_row.size() != model.scaler.means.size()) {
    throw Error(ErrorKind::schema, "row width does not match the model");
  }
  std::vector<double> x(raw_row.begin(), raw_row.end());
  scale_row(x, model.scaler);
  return predict_one(model.classifier, x);
}

}  // namespace attentiv
