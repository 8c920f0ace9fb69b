#include "mbe/alignment.hpp"

#include <string>

#include "mbe/errors.hpp"

namespace mbe {

DesignMatrix build_design(const TimeSeriesMatrix& features, const AlignmentConfig& cfg) {
  if (cfg.stimulus_window < 1) throw usage_error("stimulus_window must be >= 1");
  if (cfg.hrf_delay < 0) throw usage_error("hrf_delay must be >= 0");
  validate(features);

  const Index d = features.cols();
  const int sw = cfg.stimulus_window;
  const int delay = cfg.hrf_delay;
  const Index window_head = delay + sw - 1;  // rows at a run head lacking a full window

  DesignMatrix out;
  out.design.tr_seconds = features.tr_seconds;
  out.design.run_boundaries.clear();

  if (cfg.boundary_policy == BoundaryPolicy::zero_pad) {
    out.design.data = Eigen::MatrixXd::Zero(features.rows(), d * sw);
    out.design.run_boundaries = features.run_boundaries;
    out.kept_rows.resize(static_cast<std::size_t>(features.rows()));
    for (Index t = 0; t < features.rows(); ++t) out.kept_rows[static_cast<std::size_t>(t)] = t;
    for (Index r = 0; r < features.run_count(); ++r) {
      const auto [start, end] = features.run_span(r);
      for (Index t = start; t < end; ++t) {
        for (int lag = 0; lag < sw; ++lag) {
          const Index src = t - delay - lag;
          if (src >= start) out.design.data.block(t, d * lag, 1, d) = features.data.row(src);
        }
      }
    }
    return out;
  }

  // drop_rows: keep only rows with a complete in-run window.
  Index total = 0;
  for (Index r = 0; r < features.run_count(); ++r) {
    const auto [start, end] = features.run_span(r);
    total += std::max<Index>(0, (end - start) - window_head);
  }
  if (total == 0)
    throw data_error("window of " + std::to_string(window_head + 1) +
                     " rows empties every run under drop_rows");

  out.design.data.resize(total, d * sw);
  Index at = 0;
  for (Index r = 0; r < features.run_count(); ++r) {
    const auto [start, end] = features.run_span(r);
    if ((end - start) <= window_head) continue;  // run vanishes
    out.design.run_boundaries.push_back(at);
    for (Index t = start + window_head; t < end; ++t) {
      for (int lag = 0; lag < sw; ++lag)
        out.design.data.block(at, d * lag, 1, d) = features.data.row(t - delay - lag);
      out.kept_rows.push_back(t);
      ++at;
    }
  }
  return out;
}

void check_target_alignment(const TimeSeriesMatrix& features, const TimeSeriesMatrix& bold) {
  if (features.rows() != bold.rows())
    throw data_error("length mismatch: features have " + std::to_string(features.rows()) +
                     " rows, target has " + std::to_string(bold.rows()));
  const std::size_t n = std::max(features.run_boundaries.size(), bold.run_boundaries.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= features.run_boundaries.size() || i >= bold.run_boundaries.size() ||
        features.run_boundaries[i] != bold.run_boundaries[i])
      throw data_error("run boundary mismatch at index " + std::to_string(i));
  }
}

}  // namespace mbe
