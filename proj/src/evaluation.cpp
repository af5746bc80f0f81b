#include "attentiv/evaluation.hpp"

#include "attentiv/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

namespace attentiv {

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) {
    throw Error(ErrorKind::parameter, "truth and prediction lengths differ");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int t = truth[i];
    const int p = predicted[i];
    if ((t != 0 && t != 1) || (p != 0 && p != 1)) {
      throw Error(ErrorKind::parameter, "labels must be 0 or 1", i);
    }
    if (t == 1) (p == 1 ? cm.tp : cm.fn) += 1;
    else (p == 1 ? cm.fp : cm.tn) += 1;
  }
  return cm;
}

namespace {

double ratio(std::size_t num, std::size_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics positive_class_metrics(const ConfusionMatrix& cm) {
  ClassMetrics m;
  m.precision = ratio(cm.tp, cm.tp + cm.fp, m.degenerate);
  m.recall = ratio(cm.tp, cm.tp + cm.fn, m.degenerate);
  const double pr = m.precision + m.recall;
  if (pr == 0.0) {
    m.degenerate = true;
    m.f1 = 0.0;
  } else {
    m.f1 = 2.0 * (m.precision * m.recall) / pr;
  }
  return m;
}

}  // namespace

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorKind::parameter, "empty confusion matrix");
  MetricsReport r;
  r.counts = cm;
  r.accuracy = 1.0 - static_cast<double>(cm.fp + cm.fn) / static_cast<double>(cm.total());
  r.per_class[1] = positive_class_metrics(cm);
  r.per_class[0] = positive_class_metrics(cm.transposed());
  r.degenerate = r.per_class[0].degenerate || r.per_class[1].degenerate;
  return r;
}

RocCurve roc_curve(std::span<const int> truth, std::span<const double> scores) {
  if (truth.size() != scores.size()) {
    throw Error(ErrorKind::parameter, "truth and score lengths differ");
  }
  std::size_t pos = 0;
  for (const int t : truth) {
    if (t != 0 && t != 1) throw Error(ErrorKind::parameter, "labels must be 0 or 1");
    pos += static_cast<std::size_t>(t);
  }
  const std::size_t neg = truth.size() - pos;
  if (pos == 0 || neg == 0) {
    throw Error(ErrorKind::parameter, "ROC needs both classes present");
  }

  std::vector<std::size_t> order(truth.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve roc;
  roc.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double threshold = scores[order[k]];
    while (k < order.size() && scores[order[k]] == threshold) {
      (truth[order[k]] == 1 ? tp : fp) += 1;
      ++k;
    }
    roc.points.push_back({threshold, static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos)});
  }
  double area = 0.0;
  for (std::size_t p = 1; p < roc.points.size(); ++p) {
    const auto& a = roc.points[p - 1];
    const auto& b = roc.points[p];
    area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  roc.auc = area;
  return roc;
}

CorrelationMatrix correlation_matrix(const FeatureMatrix& m) {
  if (m.n < 2) throw Error(ErrorKind::parameter, "correlation needs at least 2 rows");
  CorrelationMatrix out;
  out.d = m.d;
  out.names = m.feature_names;
  out.values.assign(m.d * m.d, 0.0);
  out.constant_column.assign(m.d, false);

  std::vector<double> mean(m.d, 0.0);
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.d; ++j) mean[j] += m.at(i, j);
  }
  for (double& v : mean) v /= static_cast<double>(m.n);

  std::vector<double> ss(m.d, 0.0);
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < m.d; ++j) {
      const double dv = m.at(i, j) - mean[j];
      ss[j] += dv * dv;
    }
  }
  for (std::size_t j = 0; j < m.d; ++j) out.constant_column[j] = ss[j] == 0.0;

  for (std::size_t a = 0; a < m.d; ++a) {
    if (out.constant_column[a]) continue;
    out.values[a * m.d + a] = 1.0;
    for (std::size_t b = a + 1; b < m.d; ++b) {
      if (out.constant_column[b]) continue;
      double cross = 0.0;
      for (std::size_t i = 0; i < m.n; ++i) {
        cross += (m.at(i, a) - mean[a]) * (m.at(i, b) - mean[b]);
      }
      const double r = std::clamp(cross / std::sqrt(ss[a] * ss[b]), -1.0, 1.0);
      out.values[a * m.d + b] = r;
      out.values[b * m.d + a] = r;
    }
  }
  return out;
}

namespace {

std::array<std::vector<std::size_t>, 2> shuffled_by_class(std::span<const int> truth,
                                                          std::uint64_t seed) {
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] != 0 && truth[i] != 1) {
      throw Error(ErrorKind::parameter, "labels must be 0 or 1", i);
    }
    by_class[static_cast<std::size_t>(truth[i])].push_back(i);
  }
  for (std::size_t c = 0; c < 2; ++c) {
    std::mt19937_64 rng(derive_seed(seed, c));
    std::shuffle(by_class[c].begin(), by_class[c].end(), rng);
  }
  return by_class;
}

}  // namespace

Folds stratified_kfold(std::span<const int> truth, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::parameter, "k must be at least 2");
  const auto by_class = shuffled_by_class(truth, seed);
  for (std::size_t c = 0; c < 2; ++c) {
    if (by_class[c].size() < k) {
      throw Error(ErrorKind::stratification,
                  "class " + std::to_string(c) + " has " +
                      std::to_string(by_class[c].size()) + " rows, fewer than k = " +
                      std::to_string(k));
    }
  }
  Folds folds(k);
  std::size_t next = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    for (const auto idx : by_class[c]) {
      folds[next].push_back(idx);
      next = (next + 1) % k;
    }
  }
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

Split stratified_split(std::span<const int> truth, double test_fraction,
                       std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::parameter, "test fraction must lie in (0, 1)");
  }
  const auto by_class = shuffled_by_class(truth, seed);
  Split s;
  for (std::size_t c = 0; c < 2; ++c) {
    const auto& members = by_class[c];
    const auto n_test = static_cast<std::size_t>(
        std::llround(test_fraction * static_cast<double>(members.size())));
    for (std::size_t i = 0; i < members.size(); ++i) {
      (i < n_test ? s.test : s.train).push_back(members[i]);
    }
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

Split group_split(std::span<const double> groups, double test_fraction,
                  std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::parameter, "test fraction must lie in (0, 1)");
  }
  std::map<double, std::vector<std::size_t>> by_group;
  for (std::size_t i = 0; i < groups.size(); ++i) by_group[groups[i]].push_back(i);
  if (by_group.size() < 2) {
    throw Error(ErrorKind::parameter, "group split needs at least two groups");
  }
  std::vector<double> keys;
  for (const auto& [g, rows] : by_group) keys.push_back(g);
  std::mt19937_64 rng(seed);
  std::shuffle(keys.begin(), keys.end(), rng);

  const auto target = test_fraction * static_cast<double>(groups.size());
  Split s;
  std::size_t taken = 0;
  for (std::size_t g = 0; g < keys.size(); ++g) {
    const auto& rows = by_group[keys[g]];
    // Always leave at least one group for training.
    const bool to_test = g + 1 < keys.size() &&
                         (s.test.empty() || static_cast<double>(taken) < target);
    for (const auto r : rows) (to_test ? s.test : s.train).push_back(r);
    if (to_test) taken += rows.size();
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

EvaluationResult evaluate_model(const TrainedModel& model, const FeatureMatrix& raw) {
  if (!raw.labels) throw Error(ErrorKind::data, "evaluation needs labeled rows");
  EvaluationResult out;
  out.predictions = predict(model, raw);
  std::vector<int> predicted;
  std::vector<double> scores;
  for (const auto& p : out.predictions) {
    predicted.push_back(p.label);
    scores.push_back(p.score);
  }
  out.report = metrics(confusion(*raw.labels, predicted));
  const auto& cm = out.report.counts;
  if (cm.tp + cm.fn > 0 && cm.tn + cm.fp > 0) out.roc = roc_curve(*raw.labels, scores);
  return out;
}

CrossValidationResult cross_validate(const FeatureMatrix& raw,
                                     const AlgorithmConfig& config, std::size_t k,
                                     std::uint64_t seed) {
  if (!raw.labels) throw Error(ErrorKind::data, "cross-validation needs labeled rows");
  const Folds folds = stratified_kfold(*raw.labels, k, seed);
  CrossValidationResult out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds.size(); ++g) {
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    }
    std::sort(train.begin(), train.end());
    try {
      const TrainedModel model =
          fit_model(select_rows(raw, train), config, derive_seed(derive_seed(seed, f), 1));
      out.folds.push_back(evaluate_model(model, select_rows(raw, folds[f])).report);
    } catch (const Error& e) {
      throw Error(e.kind(), "fold " + std::to_string(f) + ": " + e.what(), f);
    }
  }
  double sum = 0.0;
  for (const auto& r : out.folds) sum += r.accuracy;
  out.mean_accuracy = sum / static_cast<double>(out.folds.size());
  double ss = 0.0;
  for (const auto& r : out.folds) {
    ss += (r.accuracy - out.mean_accuracy) * (r.accuracy - out.mean_accuracy);
  }
  out.std_accuracy = std::sqrt(ss / static_cast<double>(out.folds.size()));
  return out;
}

}  // namespace attentiv
