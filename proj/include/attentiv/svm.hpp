#pragma once

#include "attentiv/features.hpp"
#include "attentiv/prediction.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace attentiv {

struct SvmParams {
  double C = 1.0;
  double tol = 1e-3;
  // One sweep is n pair updates, n being the number of training rows.
  std::size_t max_sweeps = 1000;
};

// Linear soft-margin SVM, f(x) = w.x + b. Class 1 maps to y = +1.
struct SvmModel {
  std::vector<double> weights;
  double bias = 0.0;
  double C = 1.0;
  double tol = 1e-3;
  bool converged = true;
  std::size_t iterations = 0;

  double decision(std::span<const double> x) const;
  Prediction predict(std::span<const double> x) const;
};

struct SvmSolution {
  SvmModel model;
  std::vector<double> alphas;  // dual variables, one per training row
};

// SMO on the dual with maximal-violating-pair / second-order working set
// selection. Stops when the KKT gap drops to params.tol.
SvmSolution solve_svm(const FeatureMatrix& m, const SvmParams& params = {});

SvmModel train_svm(const FeatureMatrix& m, const SvmParams& params = {});

}  // namespace attentiv
