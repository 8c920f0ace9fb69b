#include "mbe/stacking.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <string>

#include "mbe/container.hpp"
#include "mbe/errors.hpp"

namespace mbe {

namespace {

// Solve the equality-constrained subproblem min ||Q_F w - y||^2, 1'w = 1 on
// the free set via its KKT system. COD gives the minimum-norm solution when
// predictions are collinear, which also realizes the uniform tie-break for
// duplicated prediction sets.
Eigen::VectorXd solve_on_face(const Eigen::MatrixXd& gram, const Eigen::VectorXd& qty,
                              const std::vector<Index>& free) {
  const Index f = static_cast<Index>(free.size());
  Eigen::MatrixXd kkt(f + 1, f + 1);
  Eigen::VectorXd rhs(f + 1);
  for (Index i = 0; i < f; ++i) {
    for (Index j = 0; j < f; ++j) kkt(i, j) = gram(free[i], free[j]);
    kkt(i, f) = 1.0;
    kkt(f, i) = 1.0;
    rhs(i) = qty(free[i]);
  }
  kkt(f, f) = 0.0;
  rhs(f) = 1.0;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
  const Eigen::VectorXd sol = cod.solve(rhs);
  return sol.head(f);
}

}  // namespace

Eigen::VectorXd solve_simplex_ls(const Eigen::MatrixXd& q, const Eigen::VectorXd& y) {
  const Index m = q.cols();
  if (m < 1) throw usage_error("need at least one column");
  const Eigen::MatrixXd gram = q.transpose() * q;
  const Eigen::VectorXd qty = q.transpose() * y;

  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, 1.0 / static_cast<double>(m));
  std::vector<bool> active(static_cast<std::size_t>(m), true);  // true = free
  const double scale = 1.0 + gram.cwiseAbs().maxCoeff() + qty.cwiseAbs().maxCoeff();
  const double tol = 1e-12 * scale;

  const int max_outer = 100 + 10 * static_cast<int>(m);
  for (int iter = 0; iter < max_outer; ++iter) {
    std::vector<Index> free;
    for (Index i = 0; i < m; ++i)
      if (active[static_cast<std::size_t>(i)]) free.push_back(i);

    Eigen::VectorXd cand_f = solve_on_face(gram, qty, free);

    if (cand_f.minCoeff() >= -tol) {
      Eigen::VectorXd cand = Eigen::VectorXd::Zero(m);
      for (std::size_t i = 0; i < free.size(); ++i) cand(free[i]) = std::max(0.0, cand_f(static_cast<Index>(i)));
      cand /= cand.sum();
      w = cand;
      // KKT check on clamped coordinates: gradient must not undercut the
      // face multiplier.
      const Eigen::VectorXd g = gram * w - qty;
      double lambda = 0.0;
      for (Index i : free) lambda += g(i);
      lambda /= static_cast<double>(free.size());
      Index worst = -1;
      double worst_gap = -tol;
      for (Index i = 0; i < m; ++i) {
        if (active[static_cast<std::size_t>(i)]) continue;
        const double gap = g(i) - lambda;
        if (gap < worst_gap) {
          worst_gap = gap;
          worst = i;
        }
      }
      if (worst < 0) return w;
      active[static_cast<std::size_t>(worst)] = true;
      continue;
    }

    // Step from the current feasible point toward the face solution until the
    // first coordinate hits zero; clamp it and re-solve.
    double theta = 1.0;
    Index hit = -1;
    for (std::size_t i = 0; i < free.size(); ++i) {
      const double cur = w(free[i]);
      const double nxt = cand_f(static_cast<Index>(i));
      if (nxt < 0.0 && cur > nxt) {
        const double step = cur / (cur - nxt);
        if (step < theta) {
          theta = step;
          hit = free[i];
        }
      }
    }
    Eigen::VectorXd next = w;
    for (std::size_t i = 0; i < free.size(); ++i)
      next(free[i]) = w(free[i]) + theta * (cand_f(static_cast<Index>(i)) - w(free[i]));
    if (hit >= 0) {
      next(hit) = 0.0;
      active[static_cast<std::size_t>(hit)] = false;
    }
    next = next.cwiseMax(0.0);
    next /= next.sum();
    w = next;
  }
  return w;  // iteration guard; feasible point, KKT within the guard's reach
}

StackingModel fit_stacking(const std::vector<TimeSeriesMatrix>& predictions,
                           const TimeSeriesMatrix& truth, const StackingOptions& options) {
  const Index m = static_cast<Index>(predictions.size());
  if (m < 2) throw usage_error("stacking needs at least 2 prediction sets");
  const Index t = truth.rows();
  const Index p = truth.cols();
  for (const auto& pred : predictions) {
    if (pred.rows() != t || pred.cols() != p)
      throw dim_error("prediction set shape " + std::to_string(pred.rows()) + "x" +
                      std::to_string(pred.cols()) + " does not match truth " + std::to_string(t) +
                      "x" + std::to_string(p));
  }

  StackingModel model;
  model.mode = options.mode;
  model.standardized = options.standardize;
  model.weights.resize(p, m);
  model.intercept = Eigen::VectorXd::Zero(p);
  if (options.standardize) {
    model.pred_mean.resize(p, m);
    model.pred_std.resize(p, m);
    model.truth_mean.resize(p);
    model.truth_std.resize(p);
  }

  Eigen::MatrixXd q(t, m);
  for (Index j = 0; j < p; ++j) {
    for (Index k = 0; k < m; ++k) q.col(k) = predictions[static_cast<std::size_t>(k)].data.col(j);
    Eigen::VectorXd y = truth.data.col(j);

    const double y_mean = y.mean();
    const bool degenerate = (y.array() - y_mean).abs().maxCoeff() == 0.0;

    if (options.standardize) {
      for (Index k = 0; k < m; ++k) {
        const double mu = q.col(k).mean();
        double sd = std::sqrt((q.col(k).array() - mu).square().sum() /
                              static_cast<double>(std::max<Index>(1, t - 1)));
        if (sd == 0.0) sd = 1.0;
        model.pred_mean(j, k) = mu;
        model.pred_std(j, k) = sd;
        q.col(k) = (q.col(k).array() - mu) / sd;
      }
      double tsd = std::sqrt((y.array() - y_mean).square().sum() /
                             static_cast<double>(std::max<Index>(1, t - 1)));
      if (tsd == 0.0) tsd = 1.0;
      model.truth_mean(j) = y_mean;
      model.truth_std(j) = tsd;
      y = (y.array() - y_mean) / tsd;
    }

    if (degenerate) {
      model.weights.row(j).setConstant(1.0 / static_cast<double>(m));
      model.degenerate_parcels.push_back(j);
      if (options.mode == StackingMode::ridge_unconstrained && !options.standardize)
        model.intercept(j) = y_mean - model.weights.row(j).dot(q.colwise().mean());
      continue;
    }

    if (options.mode == StackingMode::simplex) {
      model.weights.row(j) = solve_simplex_ls(q, y);
    } else {
      // Closed-form ridge with intercept, alpha fixed small.
      const double alpha = 1e-6;
      const Eigen::RowVectorXd qm = q.colwise().mean();
      const Eigen::MatrixXd qc = q.rowwise() - qm;
      const double ym = y.mean();
      const Eigen::VectorXd yc = y.array() - ym;
      Eigen::MatrixXd a = qc.transpose() * qc;
      a.diagonal().array() += alpha;
      const Eigen::VectorXd w = a.ldlt().solve(qc.transpose() * yc);
      model.weights.row(j) = w;
      model.intercept(j) = ym - qm * w;
    }
  }
  return model;
}

TimeSeriesMatrix apply_stacking(const StackingModel& model,
                                const std::vector<TimeSeriesMatrix>& predictions) {
  const Index m = model.model_count();
  if (static_cast<Index>(predictions.size()) != m)
    throw dim_error("model stacks " + std::to_string(m) + " prediction sets, got " +
                    std::to_string(predictions.size()));
  const Index t = predictions.front().rows();
  const Index p = model.parcel_count();
  for (const auto& pred : predictions) {
    if (pred.rows() != t || pred.cols() != p) throw dim_error("misaligned prediction set shapes");
  }

  TimeSeriesMatrix out;
  out.data = Eigen::MatrixXd::Zero(t, p);
  out.run_boundaries = predictions.front().run_boundaries;
  out.tr_seconds = predictions.front().tr_seconds;
  for (Index k = 0; k < m; ++k) {
    const auto& pred = predictions[static_cast<std::size_t>(k)].data;
    if (model.standardized) {
      for (Index j = 0; j < p; ++j)
        out.data.col(j) += model.weights(j, k) *
                           ((pred.col(j).array() - model.pred_mean(j, k)) / model.pred_std(j, k)).matrix();
    } else {
      out.data += pred * model.weights.col(k).asDiagonal();
    }
  }
  out.data.rowwise() += model.intercept.transpose();
  if (model.standardized) {
    out.data = out.data * model.truth_std.asDiagonal();
    out.data.rowwise() += model.truth_mean.transpose();
  }
  return out;
}

void save_stacking(const StackingModel& model, const std::filesystem::path& path) {
  Container c;
  c.add("weights", model.weights);
  c.add("intercept", model.intercept);
  if (model.standardized) {
    c.add("pred_mean", model.pred_mean);
    c.add("pred_std", model.pred_std);
    c.add("truth_mean", model.truth_mean);
    c.add("truth_std", model.truth_std);
  }
  c.meta["kind"] = "stacking";
  c.meta["mode"] = model.mode == StackingMode::simplex ? "simplex" : "ridge";
  c.meta["standardized"] = model.standardized;
  c.meta["model_names"] = model.model_names;
  c.meta["degenerate_parcels"] = model.degenerate_parcels;
  write_container(c, path);
}

StackingModel load_stacking(const std::filesystem::path& path) {
  const Container c = read_container(path);
  StackingModel model;
  model.weights = c.at("weights");
  model.intercept = c.at("intercept");
  model.mode = c.meta.value("mode", "simplex") == std::string("simplex")
                   ? StackingMode::simplex
                   : StackingMode::ridge_unconstrained;
  model.standardized = c.meta.value("standardized", false);
  if (model.standardized) {
    model.pred_mean = c.at("pred_mean");
    model.pred_std = c.at("pred_std");
    model.truth_mean = c.at("truth_mean");
    model.truth_std = c.at("truth_std");
  }
  model.model_names = c.meta.value("model_names", std::vector<std::string>{});
  model.degenerate_parcels = c.meta.value("degenerate_parcels", std::vector<Index>{});
  return model;
}

}  // namespace mbe
