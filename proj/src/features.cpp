#include "attentiv/features.hpp"

#include "attentiv/error.hpp"

#include <algorithm>
#include <cmath>

namespace attentiv {

std::optional<std::size_t> Dataset::column(std::string_view name) const {
  const auto it = std::find(schema.begin(), schema.end(), name);
  if (it == schema.end()) return std::nullopt;
  return static_cast<std::size_t>(it - schema.begin());
}

std::vector<double> Dataset::column_values(std::size_t col) const {
  std::vector<double> out(rows());
  for (std::size_t r = 0; r < out.size(); ++r) out[r] = at(r, col);
  return out;
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::vector<std::string> names)
    : n(rows), d(names.size()), values(rows * names.size(), 0.0),
      feature_names(std::move(names)) {}

void FeatureMatrix::validate() const {
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (!std::isfinite(at(i, j))) {
        throw Error(ErrorKind::data,
                    "non-finite value at row " + std::to_string(i) +
                        ", column " + feature_names[j],
                    i);
      }
    }
  }
  if (labels) {
    if (labels->size() != n) {
      throw Error(ErrorKind::data, "label count does not match row count");
    }
    for (std::size_t i = 0; i < n; ++i) {
      const int y = (*labels)[i];
      if (y != 0 && y != 1) {
        throw Error(ErrorKind::data,
                    "label at row " + std::to_string(i) + " is not 0 or 1", i);
      }
    }
  }
}

FeatureMatrix select_rows(const FeatureMatrix& m,
                          std::span<const std::size_t> rows) {
  FeatureMatrix out(rows.size(), m.feature_names);
  if (m.labels) out.labels.emplace();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
    if (m.labels) out.labels->push_back((*m.labels)[rows[i]]);
  }
  return out;
}

ScalerParams fit_scaler(const FeatureMatrix& m) {
  if (m.n == 0) throw Error(ErrorKind::parameter, "cannot fit a scaler on zero rows");
  m.validate();
  ScalerParams p;
  p.feature_names = m.feature_names;
  p.means.assign(m.d, 0.0);
  p.stds.assign(m.d, 0.0);
  const auto count = static_cast<double>(m.n);
  for (std::size_t j = 0; j < m.d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) sum += m.at(i, j);
    const double mean = sum / count;
    double ss = 0.0;
    for (std::size_t i = 0; i < m.n; ++i) {
      const double dv = m.at(i, j) - mean;
      ss += dv * dv;
    }
    p.means[j] = mean;
    p.stds[j] = std::sqrt(ss / count);
  }
  return p;
}

namespace {

void check_schema(const std::vector<std::string>& names, const ScalerParams& params) {
  if (names.size() != params.feature_names.size()) {
    throw Error(ErrorKind::schema,
                "expected " + std::to_string(params.feature_names.size()) +
                    " features, got " + std::to_string(names.size()));
  }
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (names[j] != params.feature_names[j]) {
      throw Error(ErrorKind::schema, "feature " + std::to_string(j) + " is '" +
                                         names[j] + "', expected '" +
                                         params.feature_names[j] + "'");
    }
  }
}

}  // namespace

void scale_row(std::span<double> row, const ScalerParams& params) {
  for (std::size_t j = 0; j < row.size(); ++j) {
    const double s = params.stds[j];
    row[j] = s > 0.0 ? (row[j] - params.means[j]) / s : 0.0;
  }
}

FeatureMatrix apply_scaler(const FeatureMatrix& m, const ScalerParams& params) {
  check_schema(m.feature_names, params);
  FeatureMatrix out = m;
  for (std::size_t i = 0; i < out.n; ++i) scale_row(out.row(i), params);
  return out;
}

FeatureMatrix invert_scaler(const FeatureMatrix& m, const ScalerParams& params) {
  check_schema(m.feature_names, params);
  FeatureMatrix out = m;
  for (std::size_t i = 0; i < out.n; ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < out.d; ++j) {
      row[j] = row[j] * params.stds[j] + params.means[j];
    }
  }
  return out;
}

std::vector<std::string> default_selection(const Dataset& dataset) {
  std::vector<std::string> out;
  for (const auto& name : dataset.schema) {
    if (name != kPredefinedLabel && name != kUserLabel) out.push_back(name);
  }
  return out;
}

FeatureMatrix build_unlabeled(const Dataset& dataset,
                              std::span<const std::string> selection) {
  std::vector<std::string> names(selection.begin(), selection.end());
  if (names.empty()) names = default_selection(dataset);
  std::vector<std::size_t> cols;
  for (const auto& name : names) {
    const auto c = dataset.column(name);
    if (!c) throw Error(ErrorKind::schema, "unknown column '" + name + "'");
    cols.push_back(*c);
  }
  FeatureMatrix m(dataset.rows(), names);
  for (std::size_t i = 0; i < m.n; ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) m.at(i, j) = dataset.at(i, cols[j]);
  }
  return m;
}

FeatureMatrix build_matrix(const Dataset& dataset,
                           std::span<const std::string> selection, Target target) {
  FeatureMatrix m = build_unlabeled(dataset, selection);
  const std::string_view label_name =
      target == Target::predefined ? kPredefinedLabel : kUserLabel;
  const auto c = dataset.column(label_name);
  if (!c) {
    throw Error(ErrorKind::schema,
                "label column '" + std::string(label_name) + "' is missing");
  }
  m.labels.emplace(m.n);
  for (std::size_t i = 0; i < m.n; ++i) {
    const double v = dataset.at(i, *c);
    if (v != 0.0 && v != 1.0) {
      throw Error(ErrorKind::data,
                  "label at row " + std::to_string(i) + " is not binary", i);
    }
    (*m.labels)[i] = static_cast<int>(v);
  }
  return m;
}

}  // namespace attentiv
