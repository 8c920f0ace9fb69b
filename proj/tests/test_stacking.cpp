#include <doctest.h>

#include "mbe/errors.hpp"
#include "mbe/stacking.hpp"
#include "helpers.hpp"

using namespace mbe;

namespace {

// KKT residual for one parcel's simplex weights: active gradients must agree,
// clamped gradients must not undercut them.
double kkt_violation(const Eigen::MatrixXd& q, const Eigen::VectorXd& y, const Eigen::VectorXd& w) {
  const Eigen::VectorXd grad = q.transpose() * (q * w - y);
  double lambda = 0.0;
  int active = 0;
  for (Index i = 0; i < w.size(); ++i)
    if (w(i) > 1e-12) {
      lambda += grad(i);
      ++active;
    }
  lambda /= active;
  double worst = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) > 1e-12)
      worst = std::max(worst, std::abs(grad(i) - lambda));
    else
      worst = std::max(worst, std::max(0.0, lambda - grad(i)));
  }
  return worst;
}

}  // namespace

TEST_CASE("identical prediction sets get uniform weights") {
  auto g = rng::substream(51, "stack-test");
  const TimeSeriesMatrix pred = test_util::random_series(40, 3, g);
  const TimeSeriesMatrix truth = test_util::random_series(40, 3, g);
  const StackingModel model = fit_stacking({pred, pred}, truth);
  for (Index j = 0; j < 3; ++j) {
    CHECK(model.weights(j, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(model.weights(j, 1) == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("an exact convex combination is recovered") {
  auto g = rng::substream(52, "stack-test");
  const TimeSeriesMatrix p1 = test_util::random_series(60, 4, g);
  const TimeSeriesMatrix p2 = test_util::random_series(60, 4, g);
  TimeSeriesMatrix truth;
  truth.data = 0.7 * p1.data + 0.3 * p2.data;
  const StackingModel model = fit_stacking({p1, p2}, truth);
  for (Index j = 0; j < 4; ++j) {
    CHECK(model.weights(j, 0) == doctest::Approx(0.7).epsilon(1e-8));
    CHECK(model.weights(j, 1) == doctest::Approx(0.3).epsilon(1e-8));
  }
}

TEST_CASE("a dominant predictor takes all the weight") {
  auto g = rng::substream(53, "stack-test");
  const TimeSeriesMatrix truth = test_util::random_series(500, 2, g);
  TimeSeriesMatrix close = truth;
  close.data += 1e-4 * test_util::random_matrix(500, 2, g);
  const TimeSeriesMatrix junk = test_util::random_series(500, 2, g);
  const StackingModel model = fit_stacking({close, junk}, truth);
  for (Index j = 0; j < 2; ++j) {
    CHECK(model.weights(j, 0) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(model.weights(j, 1) == doctest::Approx(0.0).scale(1).epsilon(1e-3));
  }
}

TEST_CASE("simplex weights satisfy the constraints and KKT conditions") {
  auto g = rng::substream(54, "stack-test");
  const Index t = 80, p = 5;
  std::vector<TimeSeriesMatrix> preds;
  for (int m = 0; m < 4; ++m) preds.push_back(test_util::random_series(t, p, g));
  const TimeSeriesMatrix truth = test_util::random_series(t, p, g);
  const StackingModel model = fit_stacking(preds, truth);

  Eigen::MatrixXd q(t, 4);
  for (Index j = 0; j < p; ++j) {
    CHECK(model.weights.row(j).minCoeff() >= 0.0);
    CHECK(model.weights.row(j).sum() == doctest::Approx(1.0).epsilon(1e-10));
    for (Index m = 0; m < 4; ++m) q.col(m) = preds[static_cast<std::size_t>(m)].data.col(j);
    CHECK(kkt_violation(q, truth.data.col(j), model.weights.row(j).transpose()) < 1e-8);
  }
}

TEST_CASE("stacked residual never exceeds the best single model") {
  auto g = rng::substream(55, "stack-test");
  const Index t = 70, p = 4;
  std::vector<TimeSeriesMatrix> preds;
  for (int m = 0; m < 3; ++m) preds.push_back(test_util::random_series(t, p, g));
  const TimeSeriesMatrix truth = test_util::random_series(t, p, g);
  const StackingModel model = fit_stacking(preds, truth);
  const TimeSeriesMatrix stacked = apply_stacking(model, preds);

  for (Index j = 0; j < p; ++j) {
    const double stacked_res = (stacked.data.col(j) - truth.data.col(j)).squaredNorm();
    double best_single = std::numeric_limits<double>::infinity();
    for (const auto& pred : preds)
      best_single = std::min(best_single, (pred.data.col(j) - truth.data.col(j)).squaredNorm());
    CHECK(stacked_res <= best_single + 1e-12);
  }
}

TEST_CASE("permuting the prediction sets permutes the weights") {
  auto g = rng::substream(56, "stack-test");
  const Index t = 50, p = 3;
  std::vector<TimeSeriesMatrix> preds;
  for (int m = 0; m < 3; ++m) preds.push_back(test_util::random_series(t, p, g));
  const TimeSeriesMatrix truth = test_util::random_series(t, p, g);

  const StackingModel base = fit_stacking(preds, truth);
  const StackingModel swapped = fit_stacking({preds[2], preds[0], preds[1]}, truth);
  CHECK((swapped.weights.col(0) - base.weights.col(2)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((swapped.weights.col(1) - base.weights.col(0)).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((swapped.weights.col(2) - base.weights.col(1)).cwiseAbs().maxCoeff() < 1e-10);

  const Eigen::MatrixXd a = apply_stacking(base, preds).data;
  const Eigen::MatrixXd b = apply_stacking(swapped, {preds[2], preds[0], preds[1]}).data;
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("selection-limit weights reproduce a single prediction set") {
  auto g = rng::substream(57, "stack-test");
  const TimeSeriesMatrix p1 = test_util::random_series(30, 2, g);
  const TimeSeriesMatrix p2 = test_util::random_series(30, 2, g);
  StackingModel model;
  model.mode = StackingMode::simplex;
  model.weights.resize(2, 2);
  model.weights << 1, 0, 1, 0;
  model.intercept = Eigen::VectorXd::Zero(2);
  CHECK(apply_stacking(model, {p1, p2}).data == p1.data);

  // uniform weights over identical predictions return that prediction
  model.weights.setConstant(0.5);
  CHECK((apply_stacking(model, {p1, p1}).data - p1.data).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("degenerate truth parcels are flagged with uniform weights") {
  auto g = rng::substream(58, "stack-test");
  const TimeSeriesMatrix p1 = test_util::random_series(25, 3, g);
  const TimeSeriesMatrix p2 = test_util::random_series(25, 3, g);
  TimeSeriesMatrix truth = test_util::random_series(25, 3, g);
  truth.data.col(2).setConstant(1.5);
  const StackingModel model = fit_stacking({p1, p2}, truth);
  CHECK(model.degenerate_parcels == std::vector<Index>{2});
  CHECK(model.weights(2, 0) == 0.5);
  CHECK(model.weights(2, 1) == 0.5);
}

TEST_CASE("unconstrained ridge mode fits negative weights and an intercept") {
  auto g = rng::substream(59, "stack-test");
  const TimeSeriesMatrix p1 = test_util::random_series(100, 2, g);
  const TimeSeriesMatrix p2 = test_util::random_series(100, 2, g);
  TimeSeriesMatrix truth;
  truth.data = 2.0 * p1.data - 0.5 * p2.data;
  truth.data.array() += 3.0;

  StackingOptions opt;
  opt.mode = StackingMode::ridge_unconstrained;
  const StackingModel model = fit_stacking({p1, p2}, truth, opt);
  for (Index j = 0; j < 2; ++j) {
    CHECK(model.weights(j, 0) == doctest::Approx(2.0).epsilon(1e-4));
    CHECK(model.weights(j, 1) == doctest::Approx(-0.5).epsilon(1e-4));
    CHECK(model.intercept(j) == doctest::Approx(3.0).epsilon(1e-4));
  }
  const TimeSeriesMatrix out = apply_stacking(model, {p1, p2});
  CHECK((out.data - truth.data).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("standardized stacking restores the truth scale") {
  auto g = rng::substream(60, "stack-test");
  const TimeSeriesMatrix base = test_util::random_series(120, 2, g);
  TimeSeriesMatrix p1 = base, p2 = base;
  p1.data = 100.0 * base.data;  // wildly different scales
  p2.data = 0.01 * base.data.array() + 7.0;
  TimeSeriesMatrix truth = base;
  truth.data = 3.0 * base.data.array() - 2.0;

  StackingOptions opt;
  opt.standardize = true;
  const StackingModel model = fit_stacking({p1, p2}, truth, opt);
  const TimeSeriesMatrix out = apply_stacking(model, {p1, p2});
  CHECK((out.data - truth.data).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("usage errors") {
  auto g = rng::substream(61, "stack-test");
  const TimeSeriesMatrix p1 = test_util::random_series(20, 2, g);
  const TimeSeriesMatrix truth = test_util::random_series(20, 2, g);
  CHECK_THROWS_AS(fit_stacking({p1}, truth), usage_error);
  CHECK_THROWS_AS(fit_stacking({p1, test_util::random_series(21, 2, g)}, truth), dim_error);

  const StackingModel model = fit_stacking({p1, p1}, truth);
  CHECK_THROWS_AS(apply_stacking(model, {p1}), dim_error);
}

TEST_CASE("stacking model round trips through its container") {
  test_util::TempDir dir("stack");
  auto g = rng::substream(62, "stack-test");
  const TimeSeriesMatrix p1 = test_util::random_series(30, 3, g);
  const TimeSeriesMatrix p2 = test_util::random_series(30, 3, g);
  StackingModel model = fit_stacking({p1, p2}, test_util::random_series(30, 3, g));
  model.model_names = {"vision", "audio"};
  save_stacking(model, dir.path / "stack.mbec");
  const StackingModel back = load_stacking(dir.path / "stack.mbec");
  CHECK(back.weights == model.weights);
  CHECK(back.model_names == model.model_names);
  CHECK(back.mode == StackingMode::simplex);
}
