#pragma once

#include <filesystem>

#include "mbe/time_series.hpp"

namespace mbe {

// PCA fit on a strided row subsample. components rows are orthonormal and
// ordered by nonincreasing explained variance; the sign convention makes each
// component's largest-magnitude entry positive so fits are deterministic
// across SVD backends.
struct PcaModel {
  Eigen::RowVectorXd mean;        // D
  Eigen::MatrixXd components;     // n_comp x D
  Eigen::VectorXd explained_variance;  // n_comp, nonincreasing
  Index fit_rows = 0;             // subsample rows actually used

  Index n_components() const { return components.rows(); }
  Index input_dim() const { return components.cols(); }
};

// Fits on rows 0, stride, 2*stride, ... centered by the subsample mean.
PcaModel fit_pca(const TimeSeriesMatrix& data, Index n_comp, Index subsample_stride = 1);

// (data - mean) * components^T, T x n_comp.
TimeSeriesMatrix transform(const PcaModel& model, const TimeSeriesMatrix& data);

// reduced * components + mean, back to the original dimensionality.
TimeSeriesMatrix inverse_transform(const PcaModel& model, const TimeSeriesMatrix& reduced);

void save_pca(const PcaModel& model, const std::filesystem::path& path);
PcaModel load_pca(const std::filesystem::path& path);

}  // namespace mbe
