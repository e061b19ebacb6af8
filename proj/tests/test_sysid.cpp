#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "skiff/errors.hpp"
#include "skiff/sysid.hpp"

using namespace skiff;

namespace {

sysid::StepResponseSeries series_from(double inertia, double drag,
                                      double input_scale, double input_level,
                                      double dt, int n) {
  sysid::StepResponseSeries series;
  series.input_level = input_level;
  for (int k = 1; k <= n; ++k) {
    const double t = k * dt;
    series.times.push_back(t);
    series.values.push_back(
        oracles::step_response(inertia, drag, input_scale, input_level, t));
  }
  return series;
}

}  // namespace

TEST_CASE("analytic step response value") {
  linsys::SecondOrderParams params;
  params.inertia = 0.469;
  params.drag = 0.311;
  params.input_scale = 1.0;
  CHECK(sysid::step_response_value(params, 1.0, 0.546) ==
        doctest::Approx(0.97671768493238823).epsilon(1e-14));
  CHECK(sysid::step_response_value(params, 1.0, 2.0) ==
        doctest::Approx(2.3618093860315134).epsilon(1e-14));
  CHECK(sysid::step_response_value(params, 1.0, 0.0) == 0.0);
}

TEST_CASE("series validation") {
  sysid::StepResponseSeries series;
  series.input_level = 1.0;
  series.times = {0.1, 0.2};
  series.values = {0.0, 0.1};
  CHECK_THROWS_AS(series.validate(), std::invalid_argument);  // too short

  series.times = {0.1, 0.2, 0.2};
  series.values = {0.0, 0.1, 0.2};
  CHECK_THROWS_AS(series.validate(), std::invalid_argument);  // not increasing

  series.times = {0.1, 0.2, 0.3};
  series.input_level = 0.0;
  CHECK_THROWS_AS(series.validate(), std::invalid_argument);  // no step

  series.input_level = 1.0;
  CHECK_NOTHROW(series.validate());
}

TEST_CASE("noiseless fits recover the generating parameters") {
  SUBCASE("surge mass and drag") {
    const auto series = series_from(0.469, 0.311, 1.0, 1.0, 0.25, 60);
    const auto fit = sysid::fit_step_response(series);
    CHECK(fit.converged);
    CHECK(std::abs(fit.params.inertia - 0.469) < 1e-6);
    CHECK(std::abs(fit.params.drag - 0.311) < 1e-6);
    CHECK(fit.params.input_scale == 1.0);
    CHECK(fit.residual_rms < 1e-9);
  }

  SUBCASE("yaw inertia and rotational drag") {
    const auto series = series_from(4.896, 9.087, 1.0, 1.0, 0.1, 40);
    const auto fit = sysid::fit_step_response(series);
    CHECK(fit.converged);
    CHECK(std::abs(fit.params.inertia - 4.896) < 1e-6);
    CHECK(std::abs(fit.params.drag - 9.087) < 1e-6);
  }

  SUBCASE("input scale with the inertia pinned") {
    const auto series = series_from(0.469, 0.311, 1.3, 0.8, 0.25, 60);
    const auto fit = sysid::fit_step_response(series, 0.469, true);
    CHECK(fit.converged);
    CHECK(fit.params.inertia == 0.469);
    CHECK(std::abs(fit.params.drag - 0.311) < 1e-6);
    CHECK(std::abs(fit.params.input_scale - 1.3) < 1e-6);
  }

  SUBCASE("nonunit step level") {
    const auto series = series_from(0.469, 0.311, 1.0, 2.5, 0.25, 60);
    const auto fit = sysid::fit_step_response(series);
    CHECK(std::abs(fit.params.inertia - 0.469) < 1e-6);
    CHECK(std::abs(fit.params.drag - 0.311) < 1e-6);
  }
}

TEST_CASE("scale estimation without a pinned inertia is rejected") {
  const auto series = series_from(0.469, 0.311, 1.0, 1.0, 0.25, 40);
  CHECK_THROWS_AS(sysid::fit_step_response(series, std::nullopt, true),
                  std::invalid_argument);
}

TEST_CASE("flat series carry no identifiable dynamics") {
  sysid::StepResponseSeries series;
  series.input_level = 1.0;
  for (int k = 1; k <= 10; ++k) {
    series.times.push_back(0.1 * k);
    series.values.push_back(3.0);
  }
  CHECK_THROWS_AS(sysid::fit_step_response(series), DegenerateDataError);
}

TEST_CASE("five percent noise keeps parameters within five percent") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double steady = 1.0 / 0.311;
  int good = 0;
  for (int trial = 0; trial < 10; ++trial) {
    // Sampling fast against the 1.5 s time constant keeps the inertia
    // identifiable through the noise.
    auto series = series_from(0.469, 0.311, 1.0, 1.0, 0.05, 300);
    for (double& v : series.values) {
      v += 0.05 * steady * gauss(rng);
    }
    const auto fit = sysid::fit_step_response(series);
    const bool ok = fit.converged &&
                    std::abs(fit.params.inertia - 0.469) / 0.469 < 0.05 &&
                    std::abs(fit.params.drag - 0.311) / 0.311 < 0.05;
    good += ok ? 1 : 0;
  }
  CHECK(good >= 9);
}
