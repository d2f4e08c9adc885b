#pragma once

#include <filesystem>
#include <set>
#include <vector>

#include "cbandit/types.hpp"

namespace cbandit {

/// Preprocessing configuration: winsor percentiles, which columns get a
/// log1p transform, and how many features the F-value selection keeps
/// (0 = keep all).
struct PipelineSpec {
  double winsor_lower_pct = 1.0;
  double winsor_upper_pct = 99.0;
  std::set<int> log_transform_columns;
  int select_top_s = 0;
};

/// Empirical percentile with linear interpolation between closest ranks
/// (the numpy default); pct in [0, 100].
double percentile_linear(std::vector<double> values, double pct);

struct WinsorBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Clips a column to its [lower_pct, upper_pct] empirical percentiles and
/// returns the fitted bounds alongside the clipped values.
std::pair<WinsorBounds, std::vector<double>> winsorize_fit_apply(
    const std::vector<double>& values, double lower_pct, double upper_pct);

/// log(1 + v) for v >= 0.
double log1p_transform(double value);

struct MinMaxBounds {
  double min = 0.0;
  double max = 0.0;
};

/// Scales a column to [0,1]; constant columns map to 0.0 so downstream dot
/// products stay finite. Applying fitted bounds to new data clips to [0,1].
std::pair<MinMaxBounds, std::vector<double>> min_max_fit_apply(
    const std::vector<double>& values);

struct FScore {
  int column = 0;
  double f_value = 0.0;
};

/// Univariate regression F-value per column, F = r^2 (n-2) / (1 - r^2) with
/// r the Pearson correlation against the target. Perfect correlation maps
/// to +inf, zero-variance columns to 0. Returns the top S columns by
/// descending F, ties broken by ascending column index.
std::vector<FScore> f_value_select(const Eigen::MatrixXd& features,
                                   const Eigen::VectorXd& target, int top_s);

struct ColumnParams {
  WinsorBounds winsor;
  MinMaxBounds min_max;
  bool log_transform = false;
};

/// Transform parameters fitted on training data only.
class FittedPipeline {
 public:
  FittedPipeline() = default;

  /// Fits winsor bounds, optional log transform and min-max scaling per
  /// column on the training matrix (rows = samples).
  static FittedPipeline fit(const Eigen::MatrixXd& train,
                            const PipelineSpec& spec);

  /// Applies the fitted transform; output values lie in [0,1].
  Eigen::MatrixXd transform(const Eigen::MatrixXd& rows) const;

  /// Restricts a transformed matrix to the selected columns
  /// (identity when no selection was fitted).
  Eigen::MatrixXd select(const Eigen::MatrixXd& rows) const;

  /// Runs F-value selection against a target on already-transformed
  /// training data and stores the selected columns.
  void fit_selection(const Eigen::MatrixXd& transformed_train,
                     const Eigen::VectorXd& target);

  const PipelineSpec& spec() const { return spec_; }
  const std::vector<ColumnParams>& columns() const { return columns_; }
  const std::vector<FScore>& selected() const { return selected_; }

  void save(const std::filesystem::path& path) const;
  static FittedPipeline load(const std::filesystem::path& path);

 private:
  PipelineSpec spec_;
  std::vector<ColumnParams> columns_;
  std::vector<FScore> selected_;  // empty = keep all columns
};

}  // namespace cbandit
