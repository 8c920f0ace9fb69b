#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mbe/time_series.hpp"

namespace mbe {

// Challenge-style scoring: per-parcel Pearson r, its mean, optional group
// (network) means. Zero-variance columns on either side score 0 and are
// listed in degenerate_parcels.
struct ScoreReport {
  Eigen::VectorXd per_parcel_r;
  double mean_r = 0.0;
  std::map<std::string, double> per_group_r;
  std::string subject_id;
  std::vector<Index> degenerate_parcels;
};

ScoreReport pearson_per_parcel(const TimeSeriesMatrix& pred, const TimeSeriesMatrix& truth);

// Mean over subjects of each subject's mean_r.
double aggregate_subjects(const std::vector<ScoreReport>& reports);

// Mean of per_parcel_r over each named parcel subset.
std::map<std::string, double> group_scores(const ScoreReport& report,
                                           const std::map<std::string, std::vector<Index>>& groups);

// Report files: CSV of (parcel_index, r) and a JSON summary.
void write_score_csv(const ScoreReport& report, const std::filesystem::path& path);
void write_score_json(const ScoreReport& report, const std::filesystem::path& path);
ScoreReport read_score_json(const std::filesystem::path& path);

// Groups sidecar: JSON object mapping group name to parcel index array.
std::map<std::string, std::vector<Index>> read_groups(const std::filesystem::path& path);

}  // namespace mbe
