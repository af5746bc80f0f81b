#pragma once

#include "attentiv/features.hpp"
#include "attentiv/prediction.hpp"

#include <array>
#include <span>
#include <vector>

namespace attentiv {

// Gaussian naive Bayes over two classes.
struct NaiveBayesModel {
  std::array<double, 2> priors{};
  std::array<std::vector<double>, 2> means;
  std::array<std::vector<double>, 2> variances;  // epsilon already added
  double epsilon = 0.0;

  std::size_t dims() const { return means[0].size(); }

  // score = log P(1 | x) - log P(0 | x)
  Prediction predict(std::span<const double> x) const;
};

inline constexpr double kNbVarianceSmoothing = 1e-9;

NaiveBayesModel train_nb(const FeatureMatrix& m,
                         double var_smoothing = kNbVarianceSmoothing);

}  // namespace attentiv
