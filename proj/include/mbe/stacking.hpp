#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mbe/time_series.hpp"

namespace mbe {

enum class StackingMode { simplex, ridge_unconstrained };

struct StackingOptions {
  StackingMode mode = StackingMode::simplex;
  // z-score each prediction set and the truth on the stacking data; stats are
  // stored so apply_stacking restores the truth scale.
  bool standardize = false;
};

// Per-parcel linear combination of M prediction sets. Simplex mode constrains
// each parcel's weights to be nonnegative and sum to one (KKT tolerance
// 1e-10); ridge_unconstrained fits a closed-form ridge (alpha = 1e-6) with an
// intercept.
struct StackingModel {
  Eigen::MatrixXd weights;       // P x M
  Eigen::VectorXd intercept;     // P, zero in simplex mode
  StackingMode mode = StackingMode::simplex;
  bool standardized = false;
  Eigen::MatrixXd pred_mean, pred_std;    // P x M, populated when standardized
  Eigen::VectorXd truth_mean, truth_std;  // P, populated when standardized
  std::vector<Index> degenerate_parcels;  // zero-variance truth, weights uniform
  std::vector<std::string> model_names;   // column order, may be empty

  Index parcel_count() const { return weights.rows(); }
  Index model_count() const { return weights.cols(); }
};

StackingModel fit_stacking(const std::vector<TimeSeriesMatrix>& predictions,
                           const TimeSeriesMatrix& truth, const StackingOptions& options = {});

TimeSeriesMatrix apply_stacking(const StackingModel& model,
                                const std::vector<TimeSeriesMatrix>& predictions);

void save_stacking(const StackingModel& model, const std::filesystem::path& path);
StackingModel load_stacking(const std::filesystem::path& path);

// min ||q*w - y||^2 s.t. w >= 0, sum(w) = 1, by an active-set method with
// minimum-norm KKT solves. Exposed for tests.
Eigen::VectorXd solve_simplex_ls(const Eigen::MatrixXd& q, const Eigen::VectorXd& y);

}  // namespace mbe
