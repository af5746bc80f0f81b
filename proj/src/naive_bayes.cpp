#include "attentiv/naive_bayes.hpp"

#include "attentiv/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace attentiv {

Prediction NaiveBayesModel::predict(std::span<const double> x) const {
  std::array<double, 2> log_post{};
  for (int c = 0; c < 2; ++c) {
    double lp = std::log(priors[c]);
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double var = variances[c][j];
      const double dv = x[j] - means[c][j];
      lp -= 0.5 * std::log(2.0 * std::numbers::pi * var) + dv * dv / (2.0 * var);
    }
    log_post[c] = lp;
  }
  // The evidence term cancels in the difference.
  const double score = log_post[1] - log_post[0];
  return {label_for(score), score};
}

NaiveBayesModel train_nb(const FeatureMatrix& m, double var_smoothing) {
  if (!m.labels) throw Error(ErrorKind::training, "naive Bayes needs labels");
  if (m.n < 2) throw Error(ErrorKind::training, "naive Bayes needs at least 2 rows");
  m.validate();

  std::array<std::size_t, 2> counts{};
  for (std::size_t i = 0; i < m.n; ++i) ++counts[m.label(i)];
  if (counts[0] == 0 || counts[1] == 0) {
    throw Error(ErrorKind::training, "naive Bayes needs both classes present");
  }

  NaiveBayesModel model;
  for (int c = 0; c < 2; ++c) {
    model.priors[c] = static_cast<double>(counts[c]) / static_cast<double>(m.n);
    model.means[c].assign(m.d, 0.0);
    model.variances[c].assign(m.d, 0.0);
  }
  for (std::size_t i = 0; i < m.n; ++i) {
    const int c = m.label(i);
    for (std::size_t j = 0; j < m.d; ++j) model.means[c][j] += m.at(i, j);
  }
  for (int c = 0; c < 2; ++c) {
    for (double& v : model.means[c]) v /= static_cast<double>(counts[c]);
  }
  for (std::size_t i = 0; i < m.n; ++i) {
    const int c = m.label(i);
    for (std::size_t j = 0; j < m.d; ++j) {
      const double dv = m.at(i, j) - model.means[c][j];
      model.variances[c][j] += dv * dv;
    }
  }
  for (int c = 0; c < 2; ++c) {
    for (double& v : model.variances[c]) v /= static_cast<double>(counts[c]);
  }

  double max_var = 0.0;
  for (std::size_t j = 0; j < m.d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) mean += m.at(i, j);
    mean /= static_cast<double>(m.n);
    double ss = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
      const double dv = m.at(i, j) - mean;
      ss += dv * dv;
    }
    max_var = std::max(max_var, ss / static_cast<double>(m.n));
  }
  // All-constant data would give a zero floor; fall back to an absolute one.
  model.epsilon = var_smoothing * (max_var > 0.0 ? max_var : 1.0);
  for (int c = 0; c < 2; ++c) {
    for (double& v : model.variances[c]) v += model.epsilon;
  }
  return model;
}

}  // namespace attentiv
