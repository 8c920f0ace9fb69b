#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mbe/time_series.hpp"

namespace mbe {

// One scanning run: a BOLD file plus one feature file per model name, tagged
// with the dataset it belongs to (e.g. "s05", "bourne").
struct RunSpec {
  std::string run_id;
  std::set<std::string> split_tags;
  std::map<std::string, std::filesystem::path> feature_sources;
  std::filesystem::path bold_source;
};

struct RunManifest {
  std::vector<RunSpec> runs;
  Index parcel_count = 0;
  double tr_seconds = 1.49;
  std::filesystem::path base_dir;  // relative paths resolve against this

  std::vector<std::string> model_names() const;
};

// Fit / stacking / test partition by tag. The shorthand grammar only covers
// fit and stacking; runs matching neither are the test set.
struct DatasetSplit {
  std::set<std::string> fit_tags;
  std::set<std::string> stack_tags;
  std::set<std::string> test_tags;
};

// Grammar: [1-7BWFL]+(-[1-7BWFL]+)?. Digits name seasons s01..s07, letters
// name movies (B=bourne, W=wolf, F=figures, L=life); the dash separates the
// fit segment from the stacking segment.
DatasetSplit parse_split_shorthand(std::string_view s);

// Single shorthand segment (no dash) to tag set; used for --eval-tags style
// flags.
std::set<std::string> parse_tag_segment(std::string_view s);

RunManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const RunManifest& m, const std::filesystem::path& path);

// Runs whose tag set intersects `tags`, in manifest order.
std::vector<const RunSpec*> select_runs(const RunManifest& m, const std::set<std::string>& tags);

// Load and concatenate the selected runs into one segmented series.
TimeSeriesMatrix load_bold(const RunManifest& m, const std::vector<const RunSpec*>& runs);
TimeSeriesMatrix load_features(const RunManifest& m, const std::vector<const RunSpec*>& runs,
                               const std::string& model_name);

}  // namespace mbe
