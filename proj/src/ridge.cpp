#include "mbe/ridge.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <string>

#include "mbe/container.hpp"
#include "mbe/errors.hpp"

namespace mbe {

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int e = -3; e <= 8; ++e) grid.push_back(std::pow(10.0, e));
  return grid;
}

// The LOO identity for ridge with an unpenalized intercept: with the design
// centered once, hat diagonal h_t = 1/T + sum_i d_i U(t,i)^2 where
// d_i = s_i^2 / (s_i^2 + alpha), and the held-out residual is
// (y_t - yhat_t) / (1 - h_t), exactly (Sherman-Morrison). One SVD serves the
// whole grid and every target.
RidgeModel fit_ridge_loocv(const TimeSeriesMatrix& design, const TimeSeriesMatrix& targets,
                           const RidgeOptions& options) {
  if (design.rows() != targets.rows())
    throw dim_error("design has " + std::to_string(design.rows()) + " rows, targets " +
                    std::to_string(targets.rows()));
  const Index t_rows = design.rows();
  const Index d = design.cols();
  const Index p = targets.cols();
  if (t_rows < 2) throw data_error("need at least 2 rows to cross-validate");
  if (options.alpha_grid.empty()) throw usage_error("alpha grid is empty");
  for (double a : options.alpha_grid)
    if (!(a > 0.0)) throw usage_error("alpha grid entries must be positive");
  if (!targets.data.allFinite()) throw data_error("non-finite targets");
  if (!design.data.allFinite()) throw data_error("non-finite design");

  std::vector<double> grid = options.alpha_grid;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const Index g = static_cast<Index>(grid.size());

  const Eigen::RowVectorXd x_mean = design.data.colwise().mean();
  const Eigen::RowVectorXd y_mean = targets.data.colwise().mean();
  Eigen::MatrixXd xc = design.data.rowwise() - x_mean;
  const Eigen::MatrixXd yc = targets.data.rowwise() - y_mean;

  Eigen::RowVectorXd col_scale = Eigen::RowVectorXd::Ones(d);
  if (options.standardize) {
    col_scale = (xc.colwise().squaredNorm() / static_cast<double>(std::max<Index>(1, t_rows - 1)))
                    .cwiseSqrt();
    for (Index j = 0; j < d; ++j) {
      if (col_scale(j) > 0.0) xc.col(j) /= col_scale(j);
      else col_scale(j) = 1.0;  // constant column, leave as-is
    }
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 0.0)
    throw numeric_error("rank-0 design: all columns constant after centering");
  const Eigen::MatrixXd& u = svd.matrixU();
  const Eigen::MatrixXd& v = svd.matrixV();
  const Index r = s.size();

  const Eigen::MatrixXd uty = u.transpose() * yc;       // r x P
  const Eigen::MatrixXd u_sq = u.cwiseAbs2();           // T x r, for hat diagonals
  const Eigen::VectorXd s_sq = s.array().square();

  RidgeModel model;
  model.alpha_grid = grid;
  model.loo_mse.resize(g, p);

  for (Index gi = 0; gi < g; ++gi) {
    const double alpha = grid[gi];
    const Eigen::VectorXd shrink = s_sq.array() / (s_sq.array() + alpha);
    const Eigen::VectorXd hat = (u_sq * shrink).array() + 1.0 / static_cast<double>(t_rows);
    const Eigen::MatrixXd resid = yc - u * shrink.asDiagonal() * uty;  // T x P
    const Eigen::ArrayXd denom = (1.0 - hat.array()).max(1e-12);
    model.loo_mse.row(gi) =
        (resid.array().colwise() / denom).square().colwise().mean();
  }

  // Per-target argmin; ties toward the larger alpha (scan from the top).
  model.alpha_per_target.resize(p);
  std::vector<Index> chosen(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) {
    Index best = g - 1;
    for (Index gi = g - 2; gi >= 0; --gi)
      if (model.loo_mse(gi, j) < model.loo_mse(best, j)) best = gi;
    chosen[static_cast<std::size_t>(j)] = best;
    model.alpha_per_target(j) = grid[best];
  }

  // Final refit on all rows at the selected alpha, grouping targets that
  // share one.
  model.weights.resize(d, p);
  for (Index gi = 0; gi < g; ++gi) {
    std::vector<Index> cols;
    for (Index j = 0; j < p; ++j)
      if (chosen[static_cast<std::size_t>(j)] == gi) cols.push_back(j);
    if (cols.empty()) continue;
    const Eigen::VectorXd factor = s.array() / (s_sq.array() + grid[gi]);
    Eigen::MatrixXd uty_sel(r, static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) uty_sel.col(static_cast<Index>(k)) = uty.col(cols[k]);
    const Eigen::MatrixXd w = v * (factor.asDiagonal() * uty_sel);
    for (std::size_t k = 0; k < cols.size(); ++k) model.weights.col(cols[k]) = w.col(static_cast<Index>(k));
  }
  if (options.standardize)
    model.weights.array().colwise() /= col_scale.transpose().array();
  model.intercept = y_mean - x_mean * model.weights;
  if (!model.weights.allFinite()) throw numeric_error("non-finite ridge weights");
  return model;
}

TimeSeriesMatrix predict(const RidgeModel& model, const TimeSeriesMatrix& design) {
  if (design.cols() != model.input_dim())
    throw dim_error("predict expects " + std::to_string(model.input_dim()) + " columns, got " +
                    std::to_string(design.cols()));
  TimeSeriesMatrix out;
  out.data = (design.data * model.weights).rowwise() + model.intercept;
  out.run_boundaries = design.run_boundaries;
  out.tr_seconds = design.tr_seconds;
  return out;
}

void save_ridge(const RidgeModel& model, const std::filesystem::path& path) {
  Container c;
  c.add("weights", model.weights);
  c.add("intercept", model.intercept);
  c.add("alpha_per_target", model.alpha_per_target);
  c.add("loo_mse", model.loo_mse);
  c.meta["kind"] = "ridge";
  c.meta["alpha_grid"] = model.alpha_grid;
  write_container(c, path);
}

RidgeModel load_ridge(const std::filesystem::path& path) {
  const Container c = read_container(path);
  RidgeModel model;
  model.weights = c.at("weights");
  model.intercept = c.at("intercept");
  model.alpha_per_target = c.at("alpha_per_target");
  model.loo_mse = c.at("loo_mse");
  model.alpha_grid = c.meta.at("alpha_grid").get<std::vector<double>>();
  return model;
}

}  // namespace mbe
