#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "mbe/container.hpp"
#include "mbe/manifest.hpp"
#include "mbe/time_series.hpp"

namespace mbe {

// Optional hidden-chain generation: the bold matrix becomes [x | y] where x
// (the first predictor_dims parcels) drives y through per-state regression.
struct HmmPlantConfig {
  Index states = 3;
  Index predictor_dims = 10;
  double separation = 5.0;   // state mean separation in emission-noise units
  double self_prob = 0.9;    // planted transition self-probability
  double coupling = 1.0;     // std of x's per-channel contribution to y
};

struct SynthConfig {
  Index runs = 2;
  Index trs_per_run = 200;
  std::map<std::string, Index> feature_dims;  // model name -> feature columns
  Index parcels = 50;
  double noise = 0.1;
  int stimulus_window = 1;
  int hrf_delay = 3;
  std::uint64_t seed = 0;
  double tr_seconds = 1.49;
  // Per-model parcel range [begin, end) the model's features drive; weights
  // outside the range are zero. Default: all parcels.
  std::map<std::string, std::pair<Index, Index>> coverage;
  std::optional<HmmPlantConfig> hmm;
};

// Everything planted is recorded in ground_truth: per-model weight matrices,
// and in hmm mode the state sequence, means, betas and transition matrix,
// with the config echoed into the meta block.
struct SynthDataset {
  std::map<std::string, TimeSeriesMatrix> features;
  TimeSeriesMatrix bold;
  Container ground_truth;
};

SynthDataset generate_synthetic(const SynthConfig& cfg);

// Writes per-run matrix files, manifest.json and ground_truth.mbec. Runs are
// tagged s01..s07, bourne, wolf, figures, life in order so the split
// shorthand addresses them directly.
RunManifest write_synth_dataset(const SynthDataset& data, const SynthConfig& cfg,
                                const std::filesystem::path& out_dir);

std::string run_tag_for_index(Index i);

}  // namespace mbe
