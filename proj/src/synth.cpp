#include "mbe/synth.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mbe/alignment.hpp"
#include "mbe/errors.hpp"
#include "mbe/matrix_io.hpp"
#include "mbe/rng.hpp"

namespace mbe {

namespace {

Eigen::MatrixXd random_matrix(Index rows, Index cols, std::mt19937_64& g) {
  Eigen::MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) m(r, c) = rng::normal(g);
  return m;
}

std::vector<Index> uniform_boundaries(Index runs, Index per_run) {
  std::vector<Index> b;
  for (Index r = 0; r < runs; ++r) b.push_back(r * per_run);
  return b;
}

void check_config(const SynthConfig& cfg) {
  if (cfg.runs < 1 || cfg.trs_per_run < 1 || cfg.parcels < 1)
    throw usage_error("runs, trs and parcels must be positive");
  if (cfg.noise < 0.0) throw usage_error("noise must be nonnegative");
  if (cfg.stimulus_window < 1 || cfg.hrf_delay < 0)
    throw usage_error("stimulus window must be >= 1 and delay >= 0");
  for (const auto& [name, dim] : cfg.feature_dims)
    if (dim < 1) throw usage_error("feature dims must be positive for model '" + name + "'");
  for (const auto& [name, range] : cfg.coverage) {
    if (!cfg.feature_dims.count(name))
      throw usage_error("coverage names unknown model '" + name + "'");
    if (range.first < 0 || range.second > cfg.parcels || range.first >= range.second)
      throw usage_error("bad coverage range for model '" + name + "'");
  }
  if (cfg.hmm) {
    if (cfg.hmm->states < 1) throw usage_error("hmm states must be positive");
    if (cfg.hmm->predictor_dims < 1 || cfg.hmm->predictor_dims >= cfg.parcels)
      throw usage_error("hmm predictor_dims must be in [1, parcels)");
    if (cfg.hmm->self_prob <= 0.0 || cfg.hmm->self_prob >= 1.0)
      throw usage_error("hmm self_prob must be in (0, 1)");
  }
}

}  // namespace

std::string run_tag_for_index(Index i) {
  static const char* movies[] = {"bourne", "wolf", "figures", "life"};
  if (i < 7) return "s0" + std::to_string(i + 1);
  if (i < 11) return movies[i - 7];
  return "x" + std::to_string(i);
}

SynthDataset generate_synthetic(const SynthConfig& cfg) {
  check_config(cfg);
  const Index t = cfg.runs * cfg.trs_per_run;
  const std::vector<Index> boundaries = uniform_boundaries(cfg.runs, cfg.trs_per_run);

  SynthDataset out;
  out.ground_truth.meta["seed"] = cfg.seed;
  out.ground_truth.meta["runs"] = cfg.runs;
  out.ground_truth.meta["trs_per_run"] = cfg.trs_per_run;
  out.ground_truth.meta["parcels"] = cfg.parcels;
  out.ground_truth.meta["noise"] = cfg.noise;
  out.ground_truth.meta["stimulus_window"] = cfg.stimulus_window;
  out.ground_truth.meta["hrf_delay"] = cfg.hrf_delay;

  for (const auto& [name, dim] : cfg.feature_dims) {
    auto g = rng::substream(cfg.seed, "synth-feat-" + name);
    TimeSeriesMatrix f = make_series(random_matrix(t, dim, g), boundaries, cfg.tr_seconds);
    out.features.emplace(name, std::move(f));
  }

  if (!cfg.hmm) {
    // Linear mode: bold = sum of lagged features through planted weights.
    Eigen::MatrixXd clean = Eigen::MatrixXd::Zero(t, cfg.parcels);
    for (const auto& [name, dim] : cfg.feature_dims) {
      const Index w_rows = dim * cfg.stimulus_window;
      auto g = rng::substream(cfg.seed, "synth-weights-" + name);
      Eigen::MatrixXd w = random_matrix(w_rows, cfg.parcels, g) / std::sqrt(static_cast<double>(w_rows));
      auto cov = cfg.coverage.find(name);
      if (cov != cfg.coverage.end()) {
        for (Index p = 0; p < cfg.parcels; ++p)
          if (p < cov->second.first || p >= cov->second.second) w.col(p).setZero();
      }
      AlignmentConfig align;
      align.stimulus_window = cfg.stimulus_window;
      align.hrf_delay = cfg.hrf_delay;
      const DesignMatrix design = build_design(out.features.at(name), align);
      clean += design.design.data * w;
      out.ground_truth.add("weights_" + name, std::move(w));
    }
    auto g = rng::substream(cfg.seed, "synth-noise");
    Eigen::MatrixXd bold = clean;
    if (cfg.noise > 0.0) bold += cfg.noise * random_matrix(t, cfg.parcels, g);
    out.bold = make_series(std::move(bold), boundaries, cfg.tr_seconds);
    out.ground_truth.meta["mode"] = "linear";
    return out;
  }

  // Planted-chain mode: bold columns are [x | y].
  const HmmPlantConfig& plant = *cfg.hmm;
  const Index k = plant.states;
  const Index dx = plant.predictor_dims;
  const Index dy = cfg.parcels - dx;
  const double sigma = cfg.noise > 0.0 ? cfg.noise : 1e-3;

  auto g = rng::substream(cfg.seed, "synth-hmm");
  Eigen::MatrixXd mu = plant.separation * sigma * random_matrix(k, dy, g);
  std::vector<Eigen::MatrixXd> betas;
  for (Index s = 0; s < k; ++s)
    betas.push_back(random_matrix(dx, dy, g) * (plant.coupling / std::sqrt(static_cast<double>(dx))));
  Eigen::MatrixXd trans;
  if (k == 1) {
    trans = Eigen::MatrixXd::Ones(1, 1);
  } else {
    trans = Eigen::MatrixXd::Constant(k, k, (1.0 - plant.self_prob) / static_cast<double>(k - 1));
    trans.diagonal().setConstant(plant.self_prob);
  }

  Eigen::MatrixXd x = random_matrix(t, dx, g);
  Eigen::MatrixXd bold(t, cfg.parcels);
  Eigen::MatrixXd states_col(t, 1);
  Index state = 0;
  auto draw = [&](const Eigen::VectorXd& p) {
    const double u = rng::uniform(g);
    double acc = 0.0;
    for (Index s = 0; s < k; ++s) {
      acc += p(s);
      if (u < acc) return s;
    }
    return k - 1;
  };
  const Eigen::VectorXd pi = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  std::size_t next_boundary = 1;
  for (Index i = 0; i < t; ++i) {
    const bool run_start =
        i == 0 || (next_boundary < boundaries.size() && i == boundaries[next_boundary]);
    if (run_start && i > 0) ++next_boundary;
    state = run_start ? draw(pi) : draw(trans.row(state).transpose());
    states_col(i, 0) = static_cast<double>(state);
    Eigen::VectorXd y = mu.row(state).transpose() +
                        betas[static_cast<std::size_t>(state)].transpose() * x.row(i).transpose();
    for (Index j = 0; j < dy; ++j) y(j) += sigma * rng::normal(g);
    bold.row(i).head(dx) = x.row(i);
    bold.row(i).tail(dy) = y;
  }

  out.bold = make_series(std::move(bold), boundaries, cfg.tr_seconds);
  out.ground_truth.add("state_sequence", std::move(states_col));
  out.ground_truth.add("hmm_mu", std::move(mu));
  out.ground_truth.add("hmm_trans", trans);
  for (Index s = 0; s < k; ++s)
    out.ground_truth.add("hmm_beta_" + std::to_string(s), betas[static_cast<std::size_t>(s)]);
  out.ground_truth.meta["mode"] = "hmm";
  out.ground_truth.meta["hmm_states"] = k;
  out.ground_truth.meta["hmm_predictor_dims"] = dx;
  out.ground_truth.meta["hmm_sigma"] = sigma;
  return out;
}

RunManifest write_synth_dataset(const SynthDataset& data, const SynthConfig& cfg,
                                const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  RunManifest manifest;
  manifest.parcel_count = cfg.parcels;
  manifest.tr_seconds = cfg.tr_seconds;
  manifest.base_dir = out_dir;

  for (Index r = 0; r < cfg.runs; ++r) {
    const Index start = r * cfg.trs_per_run;
    RunSpec run;
    run.run_id = "run" + std::to_string(r);
    run.split_tags.insert(run_tag_for_index(r));

    for (const auto& [name, series] : data.features) {
      const std::string file = run.run_id + "_" + name + ".mbem";
      TimeSeriesMatrix part = make_series(series.data.middleRows(start, cfg.trs_per_run), {0},
                                          cfg.tr_seconds);
      write_matrix(part, out_dir / file, MatrixFormat::binary);
      run.feature_sources[name] = file;
    }
    const std::string bold_file = run.run_id + "_bold.mbem";
    TimeSeriesMatrix part =
        make_series(data.bold.data.middleRows(start, cfg.trs_per_run), {0}, cfg.tr_seconds);
    write_matrix(part, out_dir / bold_file, MatrixFormat::binary);
    run.bold_source = bold_file;
    manifest.runs.push_back(std::move(run));
  }

  write_manifest(manifest, out_dir / "manifest.json");
  write_container(data.ground_truth, out_dir / "ground_truth.mbec");
  return manifest;
}

}  // namespace mbe
