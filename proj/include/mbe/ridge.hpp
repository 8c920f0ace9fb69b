#pragma once

#include <filesystem>
#include <vector>

#include "mbe/time_series.hpp"

namespace mbe {

// 12 log-spaced decades. The challenge baseline's exact grid is not public;
// this spans under- to over-regularized for standardized features.
std::vector<double> default_alpha_grid();

struct RidgeOptions {
  std::vector<double> alpha_grid = default_alpha_grid();
  bool standardize = false;  // opt-in z-scoring of design columns
};

// Multi-target ridge with one regularization strength per target column,
// selected by exact leave-one-out CV computed in closed form from a single
// thin SVD of the centered design. Ties in LOO MSE break toward the larger
// alpha. Weights act on raw (uncentered) inputs; the intercept absorbs the
// column means.
struct RidgeModel {
  Eigen::MatrixXd weights;          // D x P
  Eigen::RowVectorXd intercept;     // P
  Eigen::VectorXd alpha_per_target; // P, each an element of alpha_grid
  std::vector<double> alpha_grid;
  Eigen::MatrixXd loo_mse;          // grid x P, the CV surface (diagnostic)

  Index input_dim() const { return weights.rows(); }
  Index target_count() const { return weights.cols(); }
};

RidgeModel fit_ridge_loocv(const TimeSeriesMatrix& design, const TimeSeriesMatrix& targets,
                           const RidgeOptions& options = {});

TimeSeriesMatrix predict(const RidgeModel& model, const TimeSeriesMatrix& design);

void save_ridge(const RidgeModel& model, const std::filesystem::path& path);
RidgeModel load_ridge(const std::filesystem::path& path);

}  // namespace mbe
