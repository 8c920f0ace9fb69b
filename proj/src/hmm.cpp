#include "mbe/hmm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mbe/container.hpp"
#include "mbe/errors.hpp"
#include "mbe/rng.hpp"

namespace mbe {

namespace {

constexpr double kSigmaPenalty = 1e-6;   // trace penalty on each state covariance
constexpr double kCollapseTotal = 1e-8;  // responsibility mass below which a state collapsed
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Regressor matrix [1 | x]; the intercept column carries mu, the rest beta.
Eigen::MatrixXd build_regressors(const std::optional<TimeSeriesMatrix>& x, Index t) {
  const Index dx = x ? x->cols() : 0;
  Eigen::MatrixXd reg(t, 1 + dx);
  reg.col(0).setOnes();
  if (x) reg.rightCols(dx) = x->data;
  return reg;
}

struct EmissionEval {
  Eigen::MatrixXd log_density;  // T x K
  double sigma_inv_trace_sum = 0.0;
};

EmissionEval eval_emissions(const std::vector<HmmState>& states, const Eigen::MatrixXd& reg,
                            const Eigen::MatrixXd& y) {
  const Index t = y.rows();
  const Index d = y.cols();
  const Index k = static_cast<Index>(states.size());
  EmissionEval out;
  out.log_density.resize(t, k);
  for (Index s = 0; s < k; ++s) {
    const HmmState& st = states[static_cast<std::size_t>(s)];
    Eigen::LLT<Eigen::MatrixXd> llt(st.sigma);
    if (llt.info() != Eigen::Success) throw numeric_error("state covariance not positive definite");
    const Eigen::MatrixXd l = llt.matrixL();
    const double logdet = 2.0 * l.diagonal().array().log().sum();
    const Eigen::MatrixXd l_inv =
        l.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(d, d));
    out.sigma_inv_trace_sum += l_inv.squaredNorm();

    Eigen::MatrixXd resid = y;
    resid.rowwise() -= st.mu.transpose();
    if (st.beta.size() > 0) resid.noalias() -= reg.rightCols(st.beta.rows()) * st.beta;
    const Eigen::MatrixXd z = l_inv * resid.transpose();  // d x T
    out.log_density.col(s) =
        ((-0.5 * (static_cast<double>(d) * kLog2Pi + logdet)) -
         0.5 * z.colwise().squaredNorm().transpose().array())
            .matrix();
  }
  if (!out.log_density.allFinite()) throw numeric_error("non-finite emission likelihood");
  return out;
}

struct ChainStats {
  Eigen::MatrixXd gamma;         // T x K
  Eigen::MatrixXd trans_counts;  // K x K, summed xi
  Eigen::VectorXd start_counts;  // K, summed run-start gamma
  double loglik = 0.0;
};

// Scaled forward-backward over each run. Row-max shifting of the emission
// log densities keeps the pass underflow-free for arbitrarily long series.
ChainStats chain_posteriors(const Eigen::VectorXd& pi, const Eigen::MatrixXd& trans,
                            const Eigen::MatrixXd& logb, const std::vector<Index>& boundaries,
                            std::vector<Eigen::MatrixXd>* xi_out) {
  const Index t_total = logb.rows();
  const Index k = logb.cols();
  ChainStats stats;
  stats.gamma.resize(t_total, k);
  stats.trans_counts = Eigen::MatrixXd::Zero(k, k);
  stats.start_counts = Eigen::VectorXd::Zero(k);
  if (xi_out) xi_out->assign(static_cast<std::size_t>(std::max<Index>(0, t_total - 1)),
                             Eigen::MatrixXd::Zero(k, k));

  Eigen::MatrixXd fwd(t_total, k);  // scaled alpha
  Eigen::VectorXd scale(t_total);
  Eigen::MatrixXd b(t_total, k);
  Eigen::VectorXd shift(t_total);

  const std::size_t n_runs = boundaries.size();
  for (std::size_t r = 0; r < n_runs; ++r) {
    const Index start = boundaries[r];
    const Index end = (r + 1 < n_runs) ? boundaries[r + 1] : t_total;

    for (Index t = start; t < end; ++t) {
      shift(t) = logb.row(t).maxCoeff();
      b.row(t) = (logb.row(t).array() - shift(t)).exp();
    }

    double loglik = 0.0;
    for (Index t = start; t < end; ++t) {
      Eigen::VectorXd a;
      if (t == start) {
        a = pi.cwiseProduct(b.row(t).transpose());
      } else {
        a = (trans.transpose() * fwd.row(t - 1).transpose()).cwiseProduct(b.row(t).transpose());
      }
      const double c = a.sum();
      if (!(c > 0.0) || !std::isfinite(c)) throw numeric_error("forward pass underflow");
      fwd.row(t) = a / c;
      scale(t) = c;
      loglik += std::log(c) + shift(t);
    }
    stats.loglik += loglik;

    Eigen::VectorXd bwd = Eigen::VectorXd::Ones(k);
    stats.gamma.row(end - 1) = fwd.row(end - 1);
    for (Index t = end - 2; t >= start; --t) {
      const Eigen::VectorXd wb = b.row(t + 1).transpose().cwiseProduct(bwd);
      const Eigen::MatrixXd xi =
          (fwd.row(t).transpose() * wb.transpose()).cwiseProduct(trans) / scale(t + 1);
      stats.trans_counts += xi;
      if (xi_out) (*xi_out)[static_cast<std::size_t>(t)] = xi;
      bwd = trans * wb / scale(t + 1);
      Eigen::VectorXd post = fwd.row(t).transpose().cwiseProduct(bwd);
      const double post_sum = post.sum();
      if (!(post_sum > 0.0)) throw numeric_error("backward pass underflow");
      stats.gamma.row(t) = post / post_sum;
    }
    stats.start_counts += stats.gamma.row(start);
  }
  return stats;
}

// Lloyd k-means with a fixed number of restarts; used only to seed the
// responsibilities.
std::vector<int> kmeans_labels(const Eigen::MatrixXd& y, Index k, std::mt19937_64& g, int restarts) {
  const Index t = y.rows();
  std::vector<int> best(static_cast<std::size_t>(t), 0);
  if (k == 1) return best;
  double best_inertia = std::numeric_limits<double>::infinity();

  std::vector<int> labels(static_cast<std::size_t>(t));
  for (int r = 0; r < restarts; ++r) {
    Eigen::MatrixXd centers(k, y.cols());
    std::vector<Index> used;
    for (Index c = 0; c < k; ++c) {
      Index pick;
      do {
        pick = static_cast<Index>(rng::below(g, static_cast<std::uint64_t>(t)));
      } while (std::find(used.begin(), used.end(), pick) != used.end());
      used.push_back(pick);
      centers.row(c) = y.row(pick);
    }

    Eigen::MatrixXd dist(t, k);
    for (int it = 0; it < 100; ++it) {
      for (Index c = 0; c < k; ++c)
        dist.col(c) = (y.rowwise() - centers.row(c)).rowwise().squaredNorm();
      bool changed = false;
      for (Index i = 0; i < t; ++i) {
        Index c;
        dist.row(i).minCoeff(&c);
        if (labels[static_cast<std::size_t>(i)] != static_cast<int>(c)) {
          labels[static_cast<std::size_t>(i)] = static_cast<int>(c);
          changed = true;
        }
      }
      if (!changed && it > 0) break;
      for (Index c = 0; c < k; ++c) {
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(y.cols());
        Index n = 0;
        for (Index i = 0; i < t; ++i)
          if (labels[static_cast<std::size_t>(i)] == static_cast<int>(c)) {
            sum += y.row(i);
            ++n;
          }
        if (n > 0) {
          centers.row(c) = sum / static_cast<double>(n);
        } else {
          Index far;
          dist.rowwise().minCoeff().maxCoeff(&far);
          centers.row(c) = y.row(far);
        }
      }
    }

    double inertia = 0.0;
    for (Index i = 0; i < t; ++i)
      inertia += (y.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best = labels;
    }
  }
  return best;
}

// Weighted estimates for one state: B by minimum-norm weighted least squares
// (so all-zero regressor columns yield exactly zero beta) and sigma as the
// penalized weighted scatter.
void update_state(HmmState& st, const Eigen::VectorXd& resp, const Eigen::MatrixXd& reg,
                  const Eigen::MatrixXd& y, bool with_beta) {
  const double n = resp.sum();
  const Eigen::VectorXd sw = resp.cwiseSqrt();
  const Eigen::MatrixXd xw = reg.array().colwise() * sw.array();
  const Eigen::MatrixXd yw = y.array().colwise() * sw.array();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(xw);
  const Eigen::MatrixXd coeff = cod.solve(yw);  // m x d

  st.mu = coeff.row(0);
  if (with_beta) st.beta = coeff.bottomRows(coeff.rows() - 1);

  Eigen::MatrixXd resid = yw - xw * coeff;
  st.sigma = (resid.transpose() * resid + kSigmaPenalty * Eigen::MatrixXd::Identity(y.cols(), y.cols())) / n;
  // Keep the smallest eigenvalue above the documented floor even for huge n.
  const double floor_gap = 1e-10 - kSigmaPenalty / n;
  if (floor_gap > 0.0) st.sigma.diagonal().array() += floor_gap;
}

Eigen::RowVectorXd average_means(const std::vector<SessionStats>& stats) {
  Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(stats.front().mean.size());
  for (const auto& s : stats) m += s.mean;
  return m / static_cast<double>(stats.size());
}

Eigen::RowVectorXd average_stds(const std::vector<SessionStats>& stats) {
  Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(stats.front().std.size());
  for (const auto& s : stats) m += s.std;
  return m / static_cast<double>(stats.size());
}

}  // namespace

HmmModel fit_hmm(const std::optional<TimeSeriesMatrix>& x, const TimeSeriesMatrix& y, Index k,
                 const HmmFitConfig& cfg) {
  validate(y);
  if (k < 1) throw usage_error("state count must be >= 1");
  if (x) {
    validate(*x);
    if (x->rows() != y.rows() || x->run_boundaries != y.run_boundaries)
      throw dim_error("x and y must share length and run segmentation");
  }
  const Index t = y.rows();
  const Index d = y.cols();
  const bool with_beta = x.has_value();
  const Eigen::MatrixXd reg = build_regressors(x, t);

  HmmModel model;
  model.kind = with_beta ? HmmKind::gaussian_linear : HmmKind::gaussian;
  model.pi = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  if (k == 1) {
    model.trans = Eigen::MatrixXd::Ones(1, 1);
  } else {
    model.trans = Eigen::MatrixXd::Constant(k, k, 0.1 / static_cast<double>(k - 1));
    model.trans.diagonal().setConstant(0.9);
  }

  // Responsibilities seeded from k-means, softened so every state starts with
  // mass everywhere.
  auto g = rng::substream(cfg.seed, "hmm-init");
  const std::vector<int> labels = kmeans_labels(y.data, k, g, 10);
  Eigen::MatrixXd resp = Eigen::MatrixXd::Constant(t, k, k == 1 ? 1.0 : 0.1 / static_cast<double>(k - 1));
  if (k > 1)
    for (Index i = 0; i < t; ++i) resp(i, labels[static_cast<std::size_t>(i)]) = 0.9;

  model.states.assign(static_cast<std::size_t>(k), HmmState{});
  for (Index s = 0; s < k; ++s)
    update_state(model.states[static_cast<std::size_t>(s)], resp.col(s), reg, y.data, with_beta);

  const Eigen::RowVectorXd y_mean = y.data.colwise().mean();
  const Eigen::MatrixXd yc = y.data.rowwise() - y_mean;
  const Eigen::MatrixXd global_cov =
      (yc.transpose() * yc) / static_cast<double>(std::max<Index>(1, t - 1)) +
      kSigmaPenalty * Eigen::MatrixXd::Identity(d, d);

  std::vector<bool> reseeded(static_cast<std::size_t>(k), false);
  std::vector<bool> frozen(static_cast<std::size_t>(k), false);

  double f_prev = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const EmissionEval em = eval_emissions(model.states, reg, y.data);
    const ChainStats stats = chain_posteriors(model.pi, model.trans, em.log_density,
                                              y.run_boundaries, nullptr);
    const double f = -stats.loglik + 0.5 * kSigmaPenalty * em.sigma_inv_trace_sum;
    model.free_energy_trace.push_back(f);
    if (iter > 0 && (f_prev - f) < cfg.tol * std::max(1.0, std::abs(f_prev))) {
      model.converged = true;
      break;
    }
    f_prev = f;

    model.pi = stats.start_counts / stats.start_counts.sum();
    for (Index i = 0; i < k; ++i) {
      const double row_sum = stats.trans_counts.row(i).sum();
      if (row_sum > 0.0)
        model.trans.row(i) = stats.trans_counts.row(i) / row_sum;
      else
        model.trans.row(i).setConstant(1.0 / static_cast<double>(k));
    }

    for (Index s = 0; s < k; ++s) {
      if (frozen[static_cast<std::size_t>(s)]) continue;
      const double mass = stats.gamma.col(s).sum();
      if (mass < kCollapseTotal) {
        if (reseeded[static_cast<std::size_t>(s)]) {
          frozen[static_cast<std::size_t>(s)] = true;
          continue;
        }
        // Restart the state at the worst-fit time point.
        Index worst;
        em.log_density.rowwise().maxCoeff().minCoeff(&worst);
        HmmState& st = model.states[static_cast<std::size_t>(s)];
        st.mu = y.data.row(worst);
        if (with_beta) st.beta.setZero();
        st.sigma = global_cov;
        reseeded[static_cast<std::size_t>(s)] = true;
        ++model.reseed_events;
        continue;
      }
      update_state(model.states[static_cast<std::size_t>(s)], stats.gamma.col(s), reg, y.data,
                   with_beta);
    }
  }
  return model;
}

FbResult forward_backward(const HmmModel& model, const std::optional<TimeSeriesMatrix>& x,
                          const TimeSeriesMatrix& y) {
  validate(y);
  if (model.kind == HmmKind::gaussian_linear && !x)
    throw usage_error("gaussian_linear forward_backward needs x");
  if (x && (x->rows() != y.rows() || x->run_boundaries != y.run_boundaries))
    throw dim_error("x and y must share length and run segmentation");
  const Eigen::MatrixXd reg =
      build_regressors(model.kind == HmmKind::gaussian_linear ? x : std::nullopt, y.rows());
  const EmissionEval em = eval_emissions(model.states, reg, y.data);
  FbResult out;
  std::vector<Eigen::MatrixXd> xi;
  const ChainStats stats = chain_posteriors(model.pi, model.trans, em.log_density,
                                            y.run_boundaries, &xi);
  out.gamma = stats.gamma;
  out.xi = std::move(xi);
  out.loglik = stats.loglik;
  return out;
}

TimeSeriesMatrix sample_hmm(const HmmModel& model, Index t, const std::optional<TimeSeriesMatrix>& x,
                            const SampleOptions& options) {
  const Index k = model.state_count();
  const Index d = model.obs_dim();
  const bool regress = model.kind == HmmKind::gaussian_linear;
  if (regress) {
    if (!x) throw usage_error("gaussian_linear sampling needs x");
    if (x->cols() != model.input_dim())
      throw dim_error("x has " + std::to_string(x->cols()) + " columns, model expects " +
                      std::to_string(model.input_dim()));
    t = x->rows();
  }
  if (t < 1) throw usage_error("sample length must be >= 1");

  TimeSeriesMatrix out;
  out.data.resize(t, d);
  out.run_boundaries = regress ? x->run_boundaries : std::vector<Index>{0};
  out.tr_seconds = regress ? x->tr_seconds : 1.49;

  // Per-time-step emission means; state mixing differs by mode below.
  auto state_mean = [&](Index s, Index row) -> Eigen::VectorXd {
    const HmmState& st = model.states[static_cast<std::size_t>(s)];
    Eigen::VectorXd m = st.mu;
    if (regress) m += st.beta.transpose() * x->data.row(row).transpose();
    return m;
  };

  if (options.expectation) {
    // Marginal state occupancy pi, pi*A, ... restarting at each run boundary.
    Eigen::VectorXd occ = model.pi;
    std::size_t next_boundary = 1;
    for (Index i = 0; i < t; ++i) {
      if (next_boundary < out.run_boundaries.size() && i == out.run_boundaries[next_boundary]) {
        occ = model.pi;
        ++next_boundary;
      }
      Eigen::VectorXd m = Eigen::VectorXd::Zero(d);
      for (Index s = 0; s < k; ++s) m += occ(s) * state_mean(s, i);
      out.data.row(i) = m;
      occ = model.trans.transpose() * occ;
    }
    return out;
  }

  std::vector<Eigen::MatrixXd> chol(static_cast<std::size_t>(k));
  for (Index s = 0; s < k; ++s) {
    Eigen::LLT<Eigen::MatrixXd> llt(model.states[static_cast<std::size_t>(s)].sigma);
    if (llt.info() != Eigen::Success) throw numeric_error("state covariance not positive definite");
    chol[static_cast<std::size_t>(s)] = llt.matrixL();
  }

  auto g = rng::substream(options.seed, "hmm-sample");
  auto draw_state = [&](const Eigen::VectorXd& p) {
    const double u = rng::uniform(g);
    double acc = 0.0;
    for (Index s = 0; s < k; ++s) {
      acc += p(s);
      if (u < acc) return s;
    }
    return k - 1;
  };

  Index state = 0;
  std::size_t next_boundary = 1;
  Eigen::VectorXd noise(d);
  for (Index i = 0; i < t; ++i) {
    if (i == 0 || (next_boundary < out.run_boundaries.size() && i == out.run_boundaries[next_boundary])) {
      if (i > 0) ++next_boundary;
      state = draw_state(model.pi);
    } else {
      state = draw_state(model.trans.row(state).transpose());
    }
    for (Index j = 0; j < d; ++j) noise(j) = rng::normal(g);
    out.data.row(i) = state_mean(state, i) + chol[static_cast<std::size_t>(state)] * noise;
  }
  return out;
}

std::vector<SessionStats> session_stats(const TimeSeriesMatrix& m) {
  validate(m);
  std::vector<SessionStats> stats;
  for (Index r = 0; r < m.run_count(); ++r) {
    const auto [start, end] = m.run_span(r);
    const Index n = end - start;
    if (n < 2) throw data_error("session " + std::to_string(r) + " too short to standardize");
    SessionStats s;
    const auto block = m.data.middleRows(start, n);
    s.mean = block.colwise().mean();
    s.std = ((block.rowwise() - s.mean).colwise().squaredNorm() / static_cast<double>(n - 1))
                .cwiseSqrt();
    if (s.std.minCoeff() <= 0.0)
      throw data_error("zero-variance channel within session " + std::to_string(r));
    stats.push_back(std::move(s));
  }
  return stats;
}

TimeSeriesMatrix standardize_sessions(const TimeSeriesMatrix& m, const std::vector<SessionStats>& stats) {
  if (static_cast<Index>(stats.size()) != m.run_count())
    throw dim_error("session stats count does not match run count");
  TimeSeriesMatrix out = m;
  for (Index r = 0; r < m.run_count(); ++r) {
    const auto [start, end] = m.run_span(r);
    auto block = out.data.middleRows(start, end - start);
    block.rowwise() -= stats[static_cast<std::size_t>(r)].mean;
    block.array().rowwise() /= stats[static_cast<std::size_t>(r)].std.array();
  }
  return out;
}

TimeSeriesMatrix destandardize_sessions(const TimeSeriesMatrix& m,
                                        const std::vector<SessionStats>& stats) {
  if (static_cast<Index>(stats.size()) != m.run_count())
    throw dim_error("session stats count does not match run count");
  TimeSeriesMatrix out = m;
  for (Index r = 0; r < m.run_count(); ++r) {
    const auto [start, end] = m.run_span(r);
    auto block = out.data.middleRows(start, end - start);
    block.array().rowwise() *= stats[static_cast<std::size_t>(r)].std.array();
    block.rowwise() += stats[static_cast<std::size_t>(r)].mean;
  }
  return out;
}

PreprocessResult preprocess_hmm(const std::optional<TimeSeriesMatrix>& x, const TimeSeriesMatrix& y,
                                const HmmPreprocessConfig& cfg) {
  PreprocessResult out;
  out.pre.y.sessions = session_stats(y);
  const TimeSeriesMatrix y_std = standardize_sessions(y, out.pre.y.sessions);
  const Index rows_used = (y.rows() + cfg.pca_stride - 1) / cfg.pca_stride;
  const Index ny = std::min({cfg.pca_y, y.cols(), rows_used});
  out.pre.y.pca = fit_pca(y_std, ny, cfg.pca_stride);
  out.y_pc = transform(out.pre.y.pca, y_std);

  if (x) {
    if (x->rows() != y.rows() || x->run_boundaries != y.run_boundaries)
      throw dim_error("x and y must share length and run segmentation");
    StreamPreprocessor px;
    px.sessions = session_stats(*x);
    const TimeSeriesMatrix x_std = standardize_sessions(*x, px.sessions);
    const Index nx = std::min({cfg.pca_x, x->cols(), rows_used});
    px.pca = fit_pca(x_std, nx, cfg.pca_stride);
    out.x_pc = transform(px.pca, x_std);
    out.pre.x = std::move(px);
  }
  return out;
}

HmmPipelineResult predict_hmm_pipeline(const std::optional<TimeSeriesMatrix>& train_x,
                                       const TimeSeriesMatrix& train_y,
                                       const std::optional<TimeSeriesMatrix>& test_x, Index test_rows,
                                       const std::vector<Index>& test_boundaries,
                                       const HmmPipelineConfig& cfg) {
  HmmPipelineResult out;
  PreprocessResult pre = preprocess_hmm(train_x, train_y, cfg.pre);
  out.model = fit_hmm(pre.x_pc, pre.y_pc, cfg.k, cfg.fit);

  std::optional<TimeSeriesMatrix> x_pc;
  std::vector<Index> boundaries;
  Index rows = 0;
  if (out.model.kind == HmmKind::gaussian_linear) {
    if (!test_x) throw usage_error("gaussian_linear prediction needs a test predictor stream");
    const auto stats = session_stats(*test_x);
    x_pc = transform(pre.pre.x->pca, standardize_sessions(*test_x, stats));
    boundaries = test_x->run_boundaries;
    rows = test_x->rows();
  } else {
    if (test_rows < 1) throw usage_error("test_rows must be >= 1");
    boundaries = test_boundaries.empty() ? std::vector<Index>{0} : test_boundaries;
    rows = test_rows;
  }

  SampleOptions sample;
  sample.expectation = cfg.expectation;
  sample.seed = cfg.sample_seed;
  TimeSeriesMatrix pred_pc = sample_hmm(out.model, rows, x_pc, sample);
  pred_pc.run_boundaries = boundaries;

  TimeSeriesMatrix pred_std = inverse_transform(pre.pre.y.pca, pred_pc);
  const Eigen::RowVectorXd mean = average_means(pre.pre.y.sessions);
  const Eigen::RowVectorXd std = average_stds(pre.pre.y.sessions);
  pred_std.data.array().rowwise() *= std.array();
  pred_std.data.rowwise() += mean;

  out.predictions = std::move(pred_std);
  out.pre = std::move(pre.pre);
  return out;
}

void save_hmm(const HmmModel& model, const std::filesystem::path& path) {
  Container c;
  c.add("pi", model.pi);
  c.add("trans", model.trans);
  Eigen::MatrixXd mu(model.state_count(), model.obs_dim());
  for (Index s = 0; s < model.state_count(); ++s)
    mu.row(s) = model.states[static_cast<std::size_t>(s)].mu;
  c.add("mu", mu);
  for (Index s = 0; s < model.state_count(); ++s) {
    c.add("sigma_" + std::to_string(s), model.states[static_cast<std::size_t>(s)].sigma);
    if (model.kind == HmmKind::gaussian_linear)
      c.add("beta_" + std::to_string(s), model.states[static_cast<std::size_t>(s)].beta);
  }
  Eigen::MatrixXd trace(static_cast<Index>(model.free_energy_trace.size()), 1);
  for (Index i = 0; i < trace.rows(); ++i)
    trace(i, 0) = model.free_energy_trace[static_cast<std::size_t>(i)];
  c.add("free_energy", trace);
  c.meta["kind"] = model.kind == HmmKind::gaussian_linear ? "gaussian_linear" : "gaussian";
  c.meta["states"] = model.state_count();
  c.meta["converged"] = model.converged;
  c.meta["reseed_events"] = model.reseed_events;
  write_container(c, path);
}

namespace {

void add_stream(Container& c, const std::string& prefix, const StreamPreprocessor& s) {
  const Index n = static_cast<Index>(s.sessions.size());
  Eigen::MatrixXd means(n, s.sessions.front().mean.size());
  Eigen::MatrixXd stds(n, s.sessions.front().std.size());
  for (Index i = 0; i < n; ++i) {
    means.row(i) = s.sessions[static_cast<std::size_t>(i)].mean;
    stds.row(i) = s.sessions[static_cast<std::size_t>(i)].std;
  }
  c.add(prefix + "_session_mean", means);
  c.add(prefix + "_session_std", stds);
  c.add(prefix + "_pca_mean", s.pca.mean);
  c.add(prefix + "_pca_components", s.pca.components);
  c.add(prefix + "_pca_variance", s.pca.explained_variance);
}

StreamPreprocessor get_stream(const Container& c, const std::string& prefix) {
  StreamPreprocessor s;
  const Eigen::MatrixXd means = c.at(prefix + "_session_mean");
  const Eigen::MatrixXd stds = c.at(prefix + "_session_std");
  for (Index i = 0; i < means.rows(); ++i)
    s.sessions.push_back({means.row(i), stds.row(i)});
  s.pca.mean = c.at(prefix + "_pca_mean");
  s.pca.components = c.at(prefix + "_pca_components");
  s.pca.explained_variance = c.at(prefix + "_pca_variance");
  return s;
}

}  // namespace

void save_hmm_preprocessor(const HmmPreprocessor& pre, const std::filesystem::path& path) {
  Container c;
  c.meta["kind"] = "hmm_preprocessor";
  c.meta["has_x"] = pre.x.has_value();
  add_stream(c, "y", pre.y);
  if (pre.x) add_stream(c, "x", *pre.x);
  write_container(c, path);
}

HmmPreprocessor load_hmm_preprocessor(const std::filesystem::path& path) {
  const Container c = read_container(path);
  HmmPreprocessor pre;
  pre.y = get_stream(c, "y");
  if (c.meta.value("has_x", false)) pre.x = get_stream(c, "x");
  return pre;
}

HmmModel load_hmm(const std::filesystem::path& path) {
  const Container c = read_container(path);
  HmmModel model;
  model.kind = c.meta.value("kind", "gaussian") == std::string("gaussian_linear")
                   ? HmmKind::gaussian_linear
                   : HmmKind::gaussian;
  model.pi = c.at("pi");
  model.trans = c.at("trans");
  const Eigen::MatrixXd mu = c.at("mu");
  const Index k = model.pi.size();
  model.states.resize(static_cast<std::size_t>(k));
  for (Index s = 0; s < k; ++s) {
    auto& st = model.states[static_cast<std::size_t>(s)];
    st.mu = mu.row(s);
    st.sigma = c.at("sigma_" + std::to_string(s));
    if (model.kind == HmmKind::gaussian_linear) st.beta = c.at("beta_" + std::to_string(s));
  }
  const Eigen::MatrixXd trace = c.at("free_energy");
  for (Index i = 0; i < trace.rows(); ++i) model.free_energy_trace.push_back(trace(i, 0));
  model.converged = c.meta.value("converged", false);
  model.reseed_events = c.meta.value("reseed_events", 0);
  return model;
}

}  // namespace mbe
