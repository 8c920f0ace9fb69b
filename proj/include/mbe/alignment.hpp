#pragma once

#include <vector>

#include "mbe/time_series.hpp"

namespace mbe {

enum class BoundaryPolicy { zero_pad, drop_rows };

struct AlignmentConfig {
  int stimulus_window = 1;   // sw, number of lagged TRs concatenated
  int hrf_delay = 0;         // delay in TRs before the first lag
  BoundaryPolicy boundary_policy = BoundaryPolicy::zero_pad;
};

// Design matrix plus the map from its rows back to rows of the input
// (identity under zero_pad, the surviving rows under drop_rows).
struct DesignMatrix {
  TimeSeriesMatrix design;
  std::vector<Index> kept_rows;
};

// Row t of the design concatenates feature rows t-delay, t-delay-1, ...,
// t-delay-sw+1 (most recent lag first), giving D*sw columns. Lags never
// cross run boundaries: under zero_pad an out-of-run lag contributes a zero
// block, under drop_rows the row is removed (and runs that lose every row
// disappear from the output partition).
DesignMatrix build_design(const TimeSeriesMatrix& features, const AlignmentConfig& cfg);

// Throws unless both series have identical length and run segmentation.
void check_target_alignment(const TimeSeriesMatrix& features, const TimeSeriesMatrix& bold);

}  // namespace mbe
