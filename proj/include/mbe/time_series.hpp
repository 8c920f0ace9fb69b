#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "mbe/errors.hpp"

namespace mbe {

using Index = Eigen::Index;

// Dense T x D time series. Rows are TRs, columns are features or parcels.
// run_boundaries lists the start row of each run/session; the first entry is
// always 0 and the end of the last run is implicitly rows(). Immutable by
// convention after construction.
struct TimeSeriesMatrix {
  Eigen::MatrixXd data;
  std::vector<Index> run_boundaries{0};
  double tr_seconds = 1.49;

  Index rows() const { return data.rows(); }
  Index cols() const { return data.cols(); }
  Index run_count() const { return static_cast<Index>(run_boundaries.size()); }

  // [start, end) row span of run r.
  std::pair<Index, Index> run_span(Index r) const {
    const Index start = run_boundaries[static_cast<std::size_t>(r)];
    const Index end = (r + 1 < run_count()) ? run_boundaries[static_cast<std::size_t>(r) + 1] : rows();
    return {start, end};
  }
};

inline TimeSeriesMatrix make_series(Eigen::MatrixXd data, std::vector<Index> boundaries = {0},
                                    double tr_seconds = 1.49) {
  TimeSeriesMatrix m;
  m.data = std::move(data);
  m.run_boundaries = std::move(boundaries);
  m.tr_seconds = tr_seconds;
  return m;
}

// Enforces the type invariants: boundaries strictly increasing from 0, every
// run nonempty, all entries finite, positive TR.
inline void validate(const TimeSeriesMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) throw data_error("empty matrix");
  if (m.tr_seconds <= 0.0) throw data_error("tr_seconds must be positive");
  if (m.run_boundaries.empty() || m.run_boundaries.front() != 0)
    throw data_error("run_boundaries must start at 0");
  for (std::size_t i = 1; i < m.run_boundaries.size(); ++i) {
    if (m.run_boundaries[i] <= m.run_boundaries[i - 1])
      throw data_error("run_boundaries must be strictly increasing");
  }
  if (m.run_boundaries.back() >= m.rows()) throw data_error("run boundary beyond last row");
  if (!m.data.allFinite()) throw data_error("non-finite values in matrix");
}

// Stack runs end to end, concatenating their boundary lists.
inline TimeSeriesMatrix concat_runs(const std::vector<TimeSeriesMatrix>& parts) {
  if (parts.empty()) throw data_error("nothing to concatenate");
  Index total = 0;
  const Index cols = parts.front().cols();
  for (const auto& p : parts) {
    if (p.cols() != cols) throw dim_error("column mismatch while concatenating runs");
    total += p.rows();
  }
  TimeSeriesMatrix out;
  out.data.resize(total, cols);
  out.run_boundaries.clear();
  out.tr_seconds = parts.front().tr_seconds;
  Index at = 0;
  for (const auto& p : parts) {
    for (Index b : p.run_boundaries) out.run_boundaries.push_back(at + b);
    out.data.middleRows(at, p.rows()) = p.data;
    at += p.rows();
  }
  return out;
}

}  // namespace mbe
