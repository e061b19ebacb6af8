#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "skiff/errors.hpp"
#include "skiff/linsys.hpp"
#include "skiff/vehicle.hpp"

using namespace skiff;

namespace {

// Random stable single-output system with spectral radius below 0.95.
linsys::StateSpaceModel random_stable_model(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  linsys::StateSpaceModel model;
  model.A = Eigen::MatrixXd::NullaryExpr(n, n, [&] { return gauss(rng); });
  const double radius =
      model.A.eigenvalues().cwiseAbs().maxCoeff();
  model.A *= 0.95 / std::max(radius, 1e-6);
  model.B = Eigen::VectorXd::NullaryExpr(n, [&] { return gauss(rng); });
  model.C = Eigen::RowVectorXd::NullaryExpr(n, [&] { return gauss(rng); });
  model.sample_period = 1.0;
  return model;
}

linsys::NoiseSpec random_noise(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::MatrixXd m =
      Eigen::MatrixXd::NullaryExpr(n, n, [&] { return gauss(rng); });
  linsys::NoiseSpec noise;
  noise.process_cov = m * m.transpose() / n +
                      1e-3 * Eigen::MatrixXd::Identity(n, n);
  noise.measurement_var = 0.5;
  return noise;
}

}  // namespace

TEST_CASE("zero-order hold matches the closed-form first-order solution") {
  linsys::SecondOrderParams params;
  params.inertia = 0.469;
  params.drag = 0.311;
  params.input_scale = 1.0;
  const auto model = linsys::zoh_discretize(params, 0.546);

  REQUIRE(model.state_dim() == 2);
  // Velocity recursion entries, computed independently at high precision.
  CHECK(model.A(1, 1) == doctest::Approx(0.69624079998602726).epsilon(1e-14));
  CHECK(model.B(1) == doctest::Approx(0.97671768493238823).epsilon(1e-14));
  // Position row: integral of the velocity over one period.
  CHECK(model.A(0, 0) == 1.0);
  CHECK(model.A(0, 1) == doctest::Approx(0.45808059423329008).epsilon(1e-14));
  CHECK(model.B(0) == doctest::Approx(0.28269905391225055).epsilon(1e-13));
  CHECK(model.C(0) == 1.0);
  CHECK(model.C(1) == 0.0);

  linsys::SecondOrderParams yaw;
  yaw.inertia = 4.896;
  yaw.drag = 9.087;
  yaw.input_scale = 1.0;
  const auto ymodel = linsys::zoh_discretize(yaw, 0.546);
  CHECK(ymodel.A(1, 1) == doctest::Approx(0.36299047799844133).epsilon(1e-14));
  CHECK(ymodel.B(1) == doctest::Approx(0.07010119093227233).epsilon(1e-13));
  CHECK(ymodel.A(0, 1) == doctest::Approx(0.34321543080440533).epsilon(1e-14));
  CHECK(ymodel.B(0) == doctest::Approx(0.02231589844784799).epsilon(1e-13));
}

TEST_CASE("zero-order hold simulation tracks the continuous solution") {
  linsys::SecondOrderParams params;
  params.inertia = 2.0;
  params.drag = 0.8;
  params.input_scale = 1.5;
  const double T = 0.25;
  const auto model = linsys::zoh_discretize(params, T);

  // Constant input from rest: v(t) = (u s / d)(1 - e^{-(d/m) t}).
  Eigen::VectorXd x = Eigen::VectorXd::Zero(2);
  const double u = 0.7;
  for (int k = 1; k <= 40; ++k) {
    x = linsys::step_state(model, x, u);
    const double expected =
        oracles::step_response(params.inertia, params.drag,
                               params.input_scale, u, k * T);
    CHECK(x(1) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("zoh rejects bad parameters") {
  linsys::SecondOrderParams params;
  params.inertia = 1.0;
  params.drag = -0.1;
  CHECK_THROWS_AS(linsys::zoh_discretize(params, 0.5), std::invalid_argument);
  params.drag = 1.0;
  CHECK_THROWS_AS(linsys::zoh_discretize(params, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(linsys::zoh_discretize(params, -1.0), std::invalid_argument);
}

TEST_CASE("delay augmentation preserves the input-to-position transfer") {
  linsys::SecondOrderParams params;
  params.inertia = 0.469;
  params.drag = 0.311;
  const auto base = linsys::zoh_discretize(params, 0.546);
  const auto aug = linsys::augment_with_delay(base);

  REQUIRE(aug.state_dim() == 3);
  CHECK(aug.A(2, 0) == 1.0);
  CHECK(aug.A(2, 1) == 0.0);
  CHECK(aug.A(2, 2) == 0.0);
  CHECK(aug.B(2) == 0.0);
  CHECK(aug.C(2) == 0.0);
  for (double z : {1.7, 2.3, -1.4, 1.9}) {
    CHECK(linsys::transfer_at(aug, z) ==
          doctest::Approx(linsys::transfer_at(base, z)).epsilon(1e-12));
  }
}

TEST_CASE("transfer_at matches the scalar resolvent") {
  linsys::StateSpaceModel model;
  model.A = Eigen::MatrixXd::Constant(1, 1, 0.6);
  model.B = Eigen::VectorXd::Constant(1, 2.0);
  model.C = Eigen::RowVectorXd::Constant(1, 1.5);
  model.sample_period = 1.0;
  // C B / (z - a)
  CHECK(linsys::transfer_at(model, 2.0) == doctest::Approx(3.0 / 1.4));
  CHECK(linsys::transfer_at(model, 1.0) == doctest::Approx(3.0 / 0.4));
}

TEST_CASE("dc_gain settles to the algebraic value on stable systems") {
  linsys::StateSpaceModel model;
  model.A = Eigen::MatrixXd::Constant(1, 1, 0.5);
  model.B = Eigen::VectorXd::Constant(1, 1.0);
  model.C = Eigen::RowVectorXd::Constant(1, 1.0);
  model.sample_period = 1.0;
  CHECK(linsys::dc_gain(model) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(linsys::transfer_at(model, 1.0 + 1e-8) ==
        doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("dc_gain reports non-settling step responses") {
  // Position output of the raw double integrator chain never settles.
  linsys::SecondOrderParams params;
  const auto model = linsys::zoh_discretize(params, 0.5);
  CHECK_THROWS_AS(linsys::dc_gain(model), NonConvergentGainError);
}

TEST_CASE("incremental channel models have finite settling gain") {
  const auto surge = vehicle::surge_model(0.546);
  const auto heading = vehicle::heading_model(0.546);
  // The two evaluation routes agree and match the frozen references.
  CHECK(linsys::dc_gain(surge) ==
        doctest::Approx(4.37776057677027).epsilon(1e-9));
  CHECK(linsys::dc_gain(heading) ==
        doctest::Approx(0.170357152756413).epsilon(1e-9));
  CHECK(linsys::transfer_at(surge, 1.0 + 1e-8) ==
        doctest::Approx(linsys::dc_gain(surge)).epsilon(1e-6));
  CHECK(linsys::transfer_at(heading, 1.0 + 1e-8) ==
        doctest::Approx(linsys::dc_gain(heading)).epsilon(1e-6));
}

TEST_CASE("kalman filter matches the textbook recursion") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const auto model = random_stable_model(rng, 3);
    const auto noise = random_noise(rng, 3);
    auto state = linsys::KalmanState::initial(3);
    oracles::NaiveKalman naive{Eigen::VectorXd::Zero(3),
                               Eigen::MatrixXd::Identity(3, 3)};
    for (int k = 0; k < 30; ++k) {
      const double u = gauss(rng);
      const double y = gauss(rng);
      linsys::kalman_predict(state, model, noise, u);
      naive.predict(model, noise.process_cov, u);
      linsys::kalman_update(state, model, noise, y);
      const double naive_innovation = naive.update(model,
                                                   noise.measurement_var, y);
      CHECK((state.state - naive.x).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((state.covariance - naive.P).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(state.innovation == doctest::Approx(naive_innovation)
                                    .epsilon(1e-12));
    }
    CHECK(state.step == 30);
  }
}

TEST_CASE("covariance stays symmetric positive semidefinite") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto model = random_stable_model(rng, 4);
  const auto noise = random_noise(rng, 4);
  auto state = linsys::KalmanState::initial(4, 100.0);
  for (int k = 0; k < 200; ++k) {
    linsys::kalman_predict(state, model, noise, gauss(rng));
    linsys::kalman_update(state, model, noise, gauss(rng));
    const Eigen::MatrixXd& P = state.covariance;
    CHECK((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(P);
    CHECK(eig.eigenvalues().minCoeff() > -1e-12);
  }
}

TEST_CASE("degenerate innovation covariance is reported") {
  linsys::StateSpaceModel model;
  model.A = Eigen::MatrixXd::Constant(1, 1, 0.5);
  model.B = Eigen::VectorXd::Constant(1, 1.0);
  model.C = Eigen::RowVectorXd::Constant(1, 0.0);  // output sees nothing
  model.sample_period = 1.0;
  linsys::NoiseSpec noise;
  noise.process_cov = Eigen::MatrixXd::Zero(1, 1);
  noise.measurement_var = 1.0;  // NoiseSpec itself is fine
  auto state = linsys::KalmanState::initial(1);
  noise.measurement_var = 0.0;  // but the filter must reject S = 0
  CHECK_THROWS_AS(linsys::kalman_update(state, model, noise, 1.0),
                  DegenerateInnovationError);
}

TEST_CASE("noise and model validation reject malformed inputs") {
  linsys::NoiseSpec noise;
  noise.process_cov = Eigen::MatrixXd::Identity(2, 2);
  noise.measurement_var = 0.1;
  CHECK_NOTHROW(noise.validate(2));
  CHECK_THROWS_AS(noise.validate(3), std::invalid_argument);
  noise.process_cov(0, 1) = 5.0;  // asymmetric
  CHECK_THROWS_AS(noise.validate(2), std::invalid_argument);
  noise.process_cov(0, 1) = 0.0;
  noise.measurement_var = 0.0;
  CHECK_THROWS_AS(noise.validate(2), std::invalid_argument);

  linsys::StateSpaceModel model;
  model.A = Eigen::MatrixXd::Identity(2, 2);
  model.B = Eigen::VectorXd::Zero(1);  // wrong length
  model.C = Eigen::RowVectorXd::Zero(2);
  model.sample_period = 1.0;
  CHECK_THROWS_AS(model.validate(), std::invalid_argument);
}
