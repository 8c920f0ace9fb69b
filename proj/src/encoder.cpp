#include "mbe/encoder.hpp"

#include "mbe/container.hpp"
#include "mbe/errors.hpp"

namespace mbe {

EncoderModel train_encoder(const TimeSeriesMatrix& pca_source, const TimeSeriesMatrix& features_fit,
                           const TimeSeriesMatrix& bold_fit, const EncoderConfig& cfg) {
  check_target_alignment(features_fit, bold_fit);

  EncoderModel model;
  model.cfg = cfg;
  model.pca = fit_pca(pca_source, cfg.n_comp, cfg.pca_stride);
  const TimeSeriesMatrix reduced = transform(model.pca, features_fit);
  const DesignMatrix design = build_design(reduced, cfg.align);

  if (cfg.align.boundary_policy == BoundaryPolicy::drop_rows) {
    TimeSeriesMatrix bold_kept;
    bold_kept.data.resize(static_cast<Index>(design.kept_rows.size()), bold_fit.cols());
    for (std::size_t i = 0; i < design.kept_rows.size(); ++i)
      bold_kept.data.row(static_cast<Index>(i)) = bold_fit.data.row(design.kept_rows[i]);
    bold_kept.run_boundaries = design.design.run_boundaries;
    bold_kept.tr_seconds = bold_fit.tr_seconds;
    model.ridge = fit_ridge_loocv(design.design, bold_kept, cfg.ridge);
  } else {
    model.ridge = fit_ridge_loocv(design.design, bold_fit, cfg.ridge);
  }
  return model;
}

TimeSeriesMatrix predict_encoder(const EncoderModel& model, const TimeSeriesMatrix& features) {
  const TimeSeriesMatrix reduced = transform(model.pca, features);
  AlignmentConfig align = model.cfg.align;
  align.boundary_policy = BoundaryPolicy::zero_pad;
  const DesignMatrix design = build_design(reduced, align);
  return predict(model.ridge, design.design);
}

void save_encoder(const EncoderModel& model, const std::filesystem::path& path) {
  Container c;
  c.add("pca_mean", model.pca.mean);
  c.add("pca_components", model.pca.components);
  c.add("pca_variance", model.pca.explained_variance);
  c.add("ridge_weights", model.ridge.weights);
  c.add("ridge_intercept", model.ridge.intercept);
  c.add("ridge_alphas", model.ridge.alpha_per_target);
  c.add("ridge_loo_mse", model.ridge.loo_mse);
  c.meta["kind"] = "encoder";
  c.meta["n_comp"] = model.cfg.n_comp;
  c.meta["pca_stride"] = model.cfg.pca_stride;
  c.meta["pca_fit_rows"] = model.pca.fit_rows;
  c.meta["stimulus_window"] = model.cfg.align.stimulus_window;
  c.meta["hrf_delay"] = model.cfg.align.hrf_delay;
  c.meta["drop_rows"] = model.cfg.align.boundary_policy == BoundaryPolicy::drop_rows;
  c.meta["alpha_grid"] = model.ridge.alpha_grid;
  c.meta["standardize"] = model.cfg.ridge.standardize;
  write_container(c, path);
}

EncoderModel load_encoder(const std::filesystem::path& path) {
  const Container c = read_container(path);
  if (c.meta.value("kind", "") != std::string("encoder"))
    throw format_error("not an encoder container: " + path.string());
  EncoderModel model;
  model.pca.mean = c.at("pca_mean");
  model.pca.components = c.at("pca_components");
  model.pca.explained_variance = c.at("pca_variance");
  model.pca.fit_rows = c.meta.value("pca_fit_rows", Index{0});
  model.ridge.weights = c.at("ridge_weights");
  model.ridge.intercept = c.at("ridge_intercept");
  model.ridge.alpha_per_target = c.at("ridge_alphas");
  model.ridge.loo_mse = c.at("ridge_loo_mse");
  model.ridge.alpha_grid = c.meta.at("alpha_grid").get<std::vector<double>>();
  model.cfg.n_comp = c.meta.value("n_comp", Index{0});
  model.cfg.pca_stride = c.meta.value("pca_stride", Index{1});
  model.cfg.align.stimulus_window = c.meta.value("stimulus_window", 1);
  model.cfg.align.hrf_delay = c.meta.value("hrf_delay", 0);
  model.cfg.align.boundary_policy =
      c.meta.value("drop_rows", false) ? BoundaryPolicy::drop_rows : BoundaryPolicy::zero_pad;
  model.cfg.ridge.alpha_grid = model.ridge.alpha_grid;
  model.cfg.ridge.standardize = c.meta.value("standardize", false);
  return model;
}

}  // namespace mbe
