#pragma once

#include "attentiv/algorithm.hpp"
#include "attentiv/features.hpp"
#include "attentiv/naive_bayes.hpp"
#include "attentiv/prediction.hpp"
#include "attentiv/random_forest.hpp"
#include "attentiv/svm.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace attentiv {

using BaseModel = std::variant<SvmModel, NaiveBayesModel, RandomForestModel>;

Algorithm algorithm_of(const BaseModel& m);
Prediction predict_base(const BaseModel& m, std::span<const double> x);

// Member score mapped onto [-1, 1] with the sign of its decision:
// SVM tanh(w.x + b), naive Bayes P(1|x) - P(0|x), forest 2 * fraction - 1.
double normalized_score(const BaseModel& m, const Prediction& p);

struct EnsembleParams {
  std::size_t bags = 3;  // members per algorithm
  std::vector<Algorithm> algorithms{Algorithm::svm, Algorithm::nb, Algorithm::rf};
  SvmParams svm;
  ForestParams forest;
  double nb_smoothing = kNbVarianceSmoothing;
};

struct EnsembleVotes {
  std::size_t votes0 = 0;
  std::size_t votes1 = 0;
  double mean_normalized = 0.0;
};

// Majority vote over all members. A tied vote goes to the sign of the mean
// normalized member score, and to label 0 if that is exactly 0.
struct EnsembleModel {
  std::vector<BaseModel> members;
  std::size_t skipped_members = 0;

  EnsembleVotes votes(std::span<const double> x) const;

  // score = (votes1 - votes0 + mean_normalized / 2) / members; label 1 iff > 0.
  Prediction predict(std::span<const double> x) const;
};

// Each member trains on its own bootstrap resample drawn with
// derive_seed(seed, member index). A member whose resample cannot be
// trained (one class only) is skipped while at least two algorithms (or all
// configured ones, if fewer) keep a member and three members remain.
EnsembleModel train_ensemble(const FeatureMatrix& m, const EnsembleParams& params,
                             std::uint64_t seed);

}  // namespace attentiv
