#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "mbe/errors.hpp"
#include "mbe/pca.hpp"
#include "helpers.hpp"
#include "property_checks.hpp"

using namespace mbe;

TEST_CASE("stride five on a hundred rows fits on twenty") {
  auto g = rng::substream(7, "pca-test");
  const TimeSeriesMatrix data = test_util::random_series(100, 6, g);
  const PcaModel model = fit_pca(data, 3, 5);
  CHECK(model.fit_rows == 20);
  // 21 components would exceed the subsample row count
  CHECK_THROWS_AS(fit_pca(data, 21, 5), usage_error);
}

TEST_CASE("rank-1 data concentrates the variance in one component") {
  auto g = rng::substream(8, "pca-test");
  Eigen::VectorXd coeffs(40);
  for (Index i = 0; i < 40; ++i) coeffs(i) = rng::normal(g);
  Eigen::RowVectorXd direction(5);
  direction << 1, 2, 3, 4, 5;
  TimeSeriesMatrix data;
  data.data = coeffs * direction;
  data.data.rowwise() += Eigen::RowVectorXd::Constant(5, 2.5);

  const PcaModel model = fit_pca(data, 2, 1);
  const double total = model.explained_variance.sum();
  CHECK(model.explained_variance(0) / total >= 0.999999);
}

TEST_CASE("components match a dense eigendecomposition of the covariance") {
  auto g = rng::substream(9, "pca-test");
  const TimeSeriesMatrix data = test_util::random_series(30, 8, g);
  const PcaModel model = fit_pca(data, 8, 1);

  // Independent oracle: dense symmetric eigensolver on the covariance.
  const Eigen::RowVectorXd mean = data.data.colwise().mean();
  const Eigen::MatrixXd centered = data.data.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / 29.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  REQUIRE(eig.info() == Eigen::Success);

  for (Index k = 0; k < 8; ++k) {
    const Index src = 7 - k;  // eigensolver sorts ascending
    CHECK(model.explained_variance(k) == doctest::Approx(eig.eigenvalues()(src)).epsilon(1e-8));
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Index at = 0;
    v.cwiseAbs().maxCoeff(&at);
    if (v(at) < 0) v = -v;
    CHECK((model.components.row(k).transpose() - v).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("transform centers and projects") {
  auto g = rng::substream(10, "pca-test");
  const TimeSeriesMatrix data = test_util::random_series(25, 6, g);
  const PcaModel model = fit_pca(data, 3, 1);

  TimeSeriesMatrix mean_row;
  mean_row.data = model.mean;
  CHECK(transform(model, mean_row).data.cwiseAbs().maxCoeff() < 1e-12);

  // per-component variance of the transformed fit data equals the stored
  // explained variance
  const TimeSeriesMatrix reduced = transform(model, data);
  for (Index k = 0; k < 3; ++k) {
    const double var = (reduced.data.col(k).array() - reduced.data.col(k).mean()).square().sum() / 24.0;
    CHECK(var == doctest::Approx(model.explained_variance(k)).epsilon(1e-6));
  }
}

TEST_CASE("inverse transform reconstructs the spanned subspace") {
  auto g = rng::substream(11, "pca-test");
  // data of rank 3 (plus mean): 3 latent factors
  const Eigen::MatrixXd latent = test_util::random_matrix(30, 3, g);
  const Eigen::MatrixXd basis = test_util::random_matrix(3, 7, g);
  TimeSeriesMatrix data;
  data.data = latent * basis;
  data.data.rowwise() += Eigen::RowVectorXd::Constant(7, 1.25);

  const PcaModel model = fit_pca(data, 3, 1);
  const TimeSeriesMatrix back = inverse_transform(model, transform(model, data));
  CHECK((back.data - data.data).norm() < 1e-8);

  TimeSeriesMatrix zero;
  zero.data = Eigen::MatrixXd::Zero(1, 3);
  CHECK((inverse_transform(model, zero).data - Eigen::MatrixXd(model.mean)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("discarded eigenvalues account for the reconstruction error") {
  auto g = rng::substream(12, "pca-test");
  const TimeSeriesMatrix data = test_util::random_series(40, 9, g);
  const Index n_comp = 4;
  const PcaModel model = fit_pca(data, n_comp, 1);

  const TimeSeriesMatrix back = inverse_transform(model, transform(model, data));
  const double err = (back.data - data.data).norm();

  const Eigen::RowVectorXd mean = data.data.colwise().mean();
  const Eigen::MatrixXd centered = data.data.rowwise() - mean;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(centered.transpose() * centered / 39.0);
  double discarded = 0.0;
  for (Index i = 0; i < 9 - n_comp; ++i) discarded += eig.eigenvalues()(i);
  CHECK(err == doctest::Approx(std::sqrt(discarded * 39.0)).epsilon(1e-6));
}

TEST_CASE("degenerate inputs are rejected") {
  TimeSeriesMatrix flat;
  flat.data = Eigen::MatrixXd::Constant(10, 4, 3.0);
  CHECK_THROWS_AS(fit_pca(flat, 2, 1), data_error);

  auto g = rng::substream(13, "pca-test");
  const TimeSeriesMatrix data = test_util::random_series(10, 4, g);
  CHECK_THROWS_AS(fit_pca(data, 5, 1), usage_error);
  const PcaModel model = fit_pca(data, 2, 1);
  CHECK_THROWS_AS(transform(model, test_util::random_series(3, 5, g)), dim_error);
  CHECK_THROWS_AS(inverse_transform(model, test_util::random_series(3, 3, g)), dim_error);
}

TEST_CASE("pca model round trips through its container") {
  test_util::TempDir dir("pca");
  auto g = rng::substream(14, "pca-test");
  const PcaModel model = fit_pca(test_util::random_series(20, 5, g), 3, 2);
  save_pca(model, dir.path / "pca.mbec");
  const PcaModel back = load_pca(dir.path / "pca.mbec");
  CHECK(back.mean == model.mean);
  CHECK(back.components == model.components);
  CHECK(back.explained_variance == model.explained_variance);
  CHECK(back.fit_rows == model.fit_rows);
}

TEST_CASE("dimred property suite") {
  CHECK(test_util::check_dimred_properties(120, 500) == "");
}
