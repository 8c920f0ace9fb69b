#include <doctest.h>

#include "mbe/alignment.hpp"
#include "mbe/errors.hpp"
#include "helpers.hpp"
#include "property_checks.hpp"

using namespace mbe;

TEST_CASE("identity configuration returns the input") {
  auto g = rng::substream(1, "align-test");
  const TimeSeriesMatrix f = test_util::random_series(12, 3, g, {0, 5});
  AlignmentConfig cfg;  // sw=1, delay=0
  const DesignMatrix out = build_design(f, cfg);
  CHECK(out.design.data == f.data);
  CHECK(out.design.run_boundaries == f.run_boundaries);
}

TEST_CASE("a two-lag window three TRs back picks rows t-3 and t-4") {
  TimeSeriesMatrix f;
  f.data.resize(8, 1);
  f.data << 0, 1, 2, 3, 4, 5, 6, 7;
  AlignmentConfig cfg;
  cfg.stimulus_window = 2;
  cfg.hrf_delay = 3;
  const DesignMatrix out = build_design(f, cfg);
  REQUIRE(out.design.cols() == 2);
  CHECK(out.design.data(5, 0) == 2.0);  // t-3, most recent lag first
  CHECK(out.design.data(5, 1) == 1.0);  // t-4
}

TEST_CASE("run heads are zero padded") {
  TimeSeriesMatrix f;
  f.data = Eigen::MatrixXd::Ones(10, 2);
  f.run_boundaries = {0, 3};
  AlignmentConfig cfg;
  cfg.stimulus_window = 2;
  cfg.hrf_delay = 3;
  const DesignMatrix out = build_design(f, cfg);
  // row 3 starts the second run: no in-run history yet
  CHECK(out.design.data.row(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.design.data.row(4).head(2).cwiseAbs().maxCoeff() == 0.0);
  // row 7 = 4th row of second run: lag 3 reaches row 4 >= run start
  CHECK(out.design.data(7, 0) == 1.0);
}

TEST_CASE("drop_rows that empties every run is an error") {
  TimeSeriesMatrix f;
  f.data = Eigen::MatrixXd::Ones(4, 1);
  f.run_boundaries = {0, 2};
  AlignmentConfig cfg;
  cfg.stimulus_window = 2;
  cfg.hrf_delay = 3;
  cfg.boundary_policy = BoundaryPolicy::drop_rows;
  CHECK_THROWS_AS(build_design(f, cfg), data_error);
}

TEST_CASE("drop_rows removes runs that lose every row but keeps the rest") {
  TimeSeriesMatrix f;
  f.data.resize(9, 1);
  f.data << 0, 1, 2, 3, 4, 5, 6, 7, 8;
  f.run_boundaries = {0, 2};  // first run too short for the window
  AlignmentConfig cfg;
  cfg.stimulus_window = 2;
  cfg.hrf_delay = 1;
  cfg.boundary_policy = BoundaryPolicy::drop_rows;
  const DesignMatrix out = build_design(f, cfg);
  CHECK(out.design.run_boundaries == std::vector<Index>{0});
  CHECK(out.kept_rows == std::vector<Index>{4, 5, 6, 7, 8});
  CHECK(out.design.data(0, 0) == 3.0);  // row 4, lag 1
}

TEST_CASE("target alignment check names the divergence") {
  auto g = rng::substream(2, "align-test");
  const TimeSeriesMatrix f = test_util::random_series(10, 2, g, {0, 4});
  CHECK_NOTHROW(check_target_alignment(f, f));

  TimeSeriesMatrix longer = f;
  longer.data.conservativeResize(11, Eigen::NoChange);
  CHECK_THROWS_WITH_AS(check_target_alignment(f, longer),
                       "length mismatch: features have 10 rows, target has 11", data_error);

  TimeSeriesMatrix shifted = f;
  shifted.run_boundaries = {0, 5};
  CHECK_THROWS_WITH_AS(check_target_alignment(f, shifted), "run boundary mismatch at index 1",
                       data_error);

  TimeSeriesMatrix extra = f;
  extra.run_boundaries = {0, 4, 8};
  CHECK_THROWS_WITH_AS(check_target_alignment(f, extra), "run boundary mismatch at index 2",
                       data_error);
}

TEST_CASE("alignment property suite") {
  CHECK(test_util::check_alignment_properties(120, 400) == "");
}
