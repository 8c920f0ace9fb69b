#pragma once

#include <filesystem>

#include "mbe/alignment.hpp"
#include "mbe/pca.hpp"
#include "mbe/ridge.hpp"
#include "mbe/time_series.hpp"

namespace mbe {

// One feature source's encoding model: PCA on the per-TR features, lagged
// design, multi-target ridge.
struct EncoderConfig {
  Index n_comp = 100;
  AlignmentConfig align;
  Index pca_stride = 5;
  RidgeOptions ridge;
};

struct EncoderModel {
  PcaModel pca;
  RidgeModel ridge;
  EncoderConfig cfg;
};

// pca_source carries the features the PCA is estimated on (the pca_fit_split
// choice); features_fit/bold_fit train the regression. Under drop_rows the
// target rows are subset through the design's row map at fit time; prediction
// always uses zero_pad so outputs stay row-aligned with the stimulus.
EncoderModel train_encoder(const TimeSeriesMatrix& pca_source, const TimeSeriesMatrix& features_fit,
                           const TimeSeriesMatrix& bold_fit, const EncoderConfig& cfg);

TimeSeriesMatrix predict_encoder(const EncoderModel& model, const TimeSeriesMatrix& features);

void save_encoder(const EncoderModel& model, const std::filesystem::path& path);
EncoderModel load_encoder(const std::filesystem::path& path);

}  // namespace mbe
