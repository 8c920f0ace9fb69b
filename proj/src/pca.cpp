#include "mbe/pca.hpp"

#include <Eigen/SVD>
#include <string>

#include "mbe/container.hpp"
#include "mbe/errors.hpp"

namespace mbe {

PcaModel fit_pca(const TimeSeriesMatrix& data, Index n_comp, Index subsample_stride) {
  validate(data);
  if (n_comp < 1) throw usage_error("n_comp must be >= 1");
  if (subsample_stride < 1) throw usage_error("subsample_stride must be >= 1");

  const Index rows_used = (data.rows() + subsample_stride - 1) / subsample_stride;
  if (n_comp > std::min(rows_used, data.cols()))
    throw usage_error("n_comp " + std::to_string(n_comp) + " exceeds min(subsample rows " +
                      std::to_string(rows_used) + ", dims " + std::to_string(data.cols()) + ")");

  Eigen::MatrixXd sub(rows_used, data.cols());
  for (Index i = 0; i < rows_used; ++i) sub.row(i) = data.data.row(i * subsample_stride);

  PcaModel model;
  model.fit_rows = rows_used;
  model.mean = sub.colwise().mean();
  sub.rowwise() -= model.mean;
  if (sub.cwiseAbs().maxCoeff() == 0.0)
    throw data_error("zero-variance data: all subsample rows identical");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeThinV);
  model.components = svd.matrixV().leftCols(n_comp).transpose();
  const Index denom = std::max<Index>(1, rows_used - 1);
  model.explained_variance =
      svd.singularValues().head(n_comp).array().square() / static_cast<double>(denom);

  // Deterministic sign: largest-magnitude entry of each component positive.
  for (Index k = 0; k < n_comp; ++k) {
    Index at = 0;
    model.components.row(k).cwiseAbs().maxCoeff(&at);
    if (model.components(k, at) < 0.0) model.components.row(k) = -model.components.row(k);
  }
  return model;
}

TimeSeriesMatrix transform(const PcaModel& model, const TimeSeriesMatrix& data) {
  if (data.cols() != model.input_dim())
    throw dim_error("transform expects " + std::to_string(model.input_dim()) + " columns, got " +
                    std::to_string(data.cols()));
  TimeSeriesMatrix out;
  out.data = (data.data.rowwise() - model.mean) * model.components.transpose();
  out.run_boundaries = data.run_boundaries;
  out.tr_seconds = data.tr_seconds;
  return out;
}

TimeSeriesMatrix inverse_transform(const PcaModel& model, const TimeSeriesMatrix& reduced) {
  if (reduced.cols() != model.n_components())
    throw dim_error("inverse_transform expects " + std::to_string(model.n_components()) +
                    " columns, got " + std::to_string(reduced.cols()));
  TimeSeriesMatrix out;
  out.data = (reduced.data * model.components).rowwise() + model.mean;
  out.run_boundaries = reduced.run_boundaries;
  out.tr_seconds = reduced.tr_seconds;
  return out;
}

void save_pca(const PcaModel& model, const std::filesystem::path& path) {
  Container c;
  c.add("mean", model.mean);
  c.add("components", model.components);
  c.add("explained_variance", model.explained_variance);
  c.meta["kind"] = "pca";
  c.meta["fit_rows"] = model.fit_rows;
  write_container(c, path);
}

PcaModel load_pca(const std::filesystem::path& path) {
  const Container c = read_container(path);
  PcaModel model;
  model.mean = c.at("mean");
  model.components = c.at("components");
  model.explained_variance = c.at("explained_variance");
  model.fit_rows = c.meta.value("fit_rows", Index{0});
  return model;
}

}  // namespace mbe
