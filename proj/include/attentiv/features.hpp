#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace attentiv {

// Binary target: 0 = learned, 1 = not learned.
inline constexpr int kLearned = 0;
inline constexpr int kNotLearned = 1;

// Column-named numeric table as loaded from disk.
struct Dataset {
  std::vector<std::string> schema;
  std::vector<double> values;  // row-major, rows() x schema.size()

  std::size_t rows() const {
    return schema.empty() ? 0 : values.size() / schema.size();
  }
  std::size_t cols() const { return schema.size(); }
  double at(std::size_t row, std::size_t col) const {
    return values[row * schema.size() + col];
  }
  std::optional<std::size_t> column(std::string_view name) const;
  std::vector<double> column_values(std::size_t col) const;
};

inline constexpr std::string_view kPredefinedLabel = "predefined_label";
inline constexpr std::string_view kUserLabel = "user_label";

struct FeatureMatrix {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> values;  // row-major n x d
  std::vector<std::string> feature_names;
  std::optional<std::vector<int>> labels;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::vector<std::string> names);

  std::span<const double> row(std::size_t i) const {
    return {values.data() + i * d, d};
  }
  std::span<double> row(std::size_t i) { return {values.data() + i * d, d}; }
  double at(std::size_t i, std::size_t j) const { return values[i * d + j]; }
  double& at(std::size_t i, std::size_t j) { return values[i * d + j]; }
  int label(std::size_t i) const { return (*labels)[i]; }

  // Throws data error if any entry is non-finite or a label is not 0/1.
  void validate() const;
};

// Rows picked by index, in the given order (duplicates allowed).
FeatureMatrix select_rows(const FeatureMatrix& m, std::span<const std::size_t> rows);

struct ScalerParams {
  std::vector<double> means;
  std::vector<double> stds;  // population standard deviation
  std::vector<std::string> feature_names;
};

ScalerParams fit_scaler(const FeatureMatrix& m);

// x' = (x - mean) / std; zero-std columns become 0.
FeatureMatrix apply_scaler(const FeatureMatrix& m, const ScalerParams& params);

// In-place variant used by the serving path for a single row.
void scale_row(std::span<double> row, const ScalerParams& params);

// x = x' * std + mean. Zero-std columns come back as their mean.
FeatureMatrix invert_scaler(const FeatureMatrix& m, const ScalerParams& params);

enum class Target { predefined, user };

// Project a dataset onto the selected columns (in the given order). An empty
// selection means every column except the two label columns. Labels come
// from the column chosen by target.
FeatureMatrix build_matrix(const Dataset& dataset,
                           std::span<const std::string> selection,
                           Target target);

// Same projection without labels (for scoring unlabeled data).
FeatureMatrix build_unlabeled(const Dataset& dataset,
                              std::span<const std::string> selection);

std::vector<std::string> default_selection(const Dataset& dataset);

}  // namespace attentiv
