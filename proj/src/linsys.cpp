#include "skiff/linsys.hpp"

#include <cmath>
#include <stdexcept>

#include "skiff/errors.hpp"

namespace skiff::linsys {

void SecondOrderParams::validate() const {
  if (!(inertia > 0.0) || !std::isfinite(inertia)) {
    throw std::invalid_argument("SecondOrderParams: inertia must be > 0");
  }
  if (!(drag > 0.0) || !std::isfinite(drag)) {
    throw std::invalid_argument("SecondOrderParams: drag must be > 0");
  }
  if (!(input_scale > 0.0) || !std::isfinite(input_scale)) {
    throw std::invalid_argument("SecondOrderParams: input_scale must be > 0");
  }
}

void StateSpaceModel::validate() const {
  const auto n = A.rows();
  if (n == 0 || A.cols() != n) {
    throw std::invalid_argument("StateSpaceModel: A must be square");
  }
  if (B.rows() != n) {
    throw std::invalid_argument("StateSpaceModel: B must be n x 1");
  }
  if (C.cols() != n) {
    throw std::invalid_argument("StateSpaceModel: C must be 1 x n");
  }
  if (!(sample_period > 0.0)) {
    throw std::invalid_argument("StateSpaceModel: sample_period must be > 0");
  }
  if (!A.allFinite() || !B.allFinite() || !C.allFinite()) {
    throw std::invalid_argument("StateSpaceModel: entries must be finite");
  }
}

void NoiseSpec::validate(int state_dim) const {
  if (process_cov.rows() != state_dim || process_cov.cols() != state_dim) {
    throw std::invalid_argument("NoiseSpec: process_cov must be n x n");
  }
  if (!process_cov.isApprox(process_cov.transpose(), 1e-12)) {
    throw std::invalid_argument("NoiseSpec: process_cov must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(process_cov);
  if (eig.eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument("NoiseSpec: process_cov must be PSD");
  }
  if (!(measurement_var > 0.0)) {
    throw std::invalid_argument("NoiseSpec: measurement_var must be > 0");
  }
}

NoiseSpec NoiseSpec::isotropic(int state_dim, double q_scale,
                               double measurement_var) {
  NoiseSpec spec;
  spec.process_cov =
      q_scale * Eigen::MatrixXd::Identity(state_dim, state_dim);
  spec.measurement_var = measurement_var;
  return spec;
}

KalmanState KalmanState::initial(int state_dim, double p0_scale) {
  KalmanState state;
  state.state = Eigen::VectorXd::Zero(state_dim);
  state.covariance =
      p0_scale * Eigen::MatrixXd::Identity(state_dim, state_dim);
  state.gain = Eigen::VectorXd::Zero(state_dim);
  return state;
}

StateSpaceModel zoh_discretize(const SecondOrderParams& params,
                               double sample_period) {
  params.validate();
  if (!(sample_period > 0.0) || !std::isfinite(sample_period)) {
    throw std::invalid_argument("zoh_discretize: sample_period must be > 0");
  }

  const double a = params.decay_rate();
  const double g = params.input_scale / params.inertia;
  const double T = sample_period;
  const double decay = std::exp(-a * T);
  // expm1 keeps (1 - e^{-aT})/a accurate as aT -> 0.
  const double ramp = -std::expm1(-a * T) / a;  // (1 - e^{-aT}) / a

  StateSpaceModel model;
  model.A = Eigen::MatrixXd{{1.0, ramp}, {0.0, decay}};
  model.B = Eigen::VectorXd{{g * (T - ramp) / a, g * ramp}};
  model.C = Eigen::RowVectorXd{{1.0, 0.0}};
  model.sample_period = T;
  return model;
}

StateSpaceModel augment_with_delay(const StateSpaceModel& model) {
  model.validate();
  const int n = model.state_dim();

  StateSpaceModel aug;
  aug.A = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.A.topLeftCorner(n, n) = model.A;
  aug.A(n, 0) = 1.0;  // new state copies state 1
  aug.B = Eigen::VectorXd::Zero(n + 1);
  aug.B.head(n) = model.B;
  aug.C = Eigen::RowVectorXd::Zero(n + 1);
  aug.C.head(n) = model.C;
  aug.sample_period = model.sample_period;
  return aug;
}

double dc_gain(const StateSpaceModel& model) {
  model.validate();
  constexpr long kMaxSteps = 1000000;
  constexpr int kSettleWindow = 100;
  constexpr double kSettleTol = 1e-9;

  Eigen::VectorXd x = Eigen::VectorXd::Zero(model.state_dim());
  double previous = model.C * x;
  int settled = 0;
  for (long k = 0; k < kMaxSteps; ++k) {
    x = step_state(model, x, 1.0);
    const double y = model.C * x;
    const double scale = std::max({std::abs(y), std::abs(previous), 1e-30});
    if (std::abs(y - previous) / scale < kSettleTol) {
      if (++settled >= kSettleWindow) {
        return y;
      }
    } else {
      settled = 0;
    }
    previous = y;
    if (!std::isfinite(y)) {
      break;
    }
  }
  throw NonConvergentGainError(
      "dc_gain: unit-step response did not settle within 1e6 steps");
}

double transfer_at(const StateSpaceModel& model, double z) {
  model.validate();
  const int n = model.state_dim();
  const Eigen::MatrixXd resolvent =
      z * Eigen::MatrixXd::Identity(n, n) - model.A;
  const Eigen::VectorXd x = resolvent.fullPivLu().solve(model.B);
  return model.C * x;
}

void kalman_predict(KalmanState& state, const StateSpaceModel& model,
                    const NoiseSpec& noise, double input) {
  state.state = model.A * state.state + model.B * input;
  state.covariance =
      model.A * state.covariance * model.A.transpose() + noise.process_cov;
  state.covariance =
      0.5 * (state.covariance + state.covariance.transpose()).eval();
}

void kalman_update(KalmanState& state, const StateSpaceModel& model,
                   const NoiseSpec& noise, double measurement) {
  const double predicted = model.C * state.state;
  const double innovation = measurement - predicted;
  const double s = model.C * state.covariance * model.C.transpose() +
                   noise.measurement_var;
  if (!(s > 0.0)) {
    throw DegenerateInnovationError(
        "kalman_update: innovation covariance is not positive");
  }

  const Eigen::VectorXd gain =
      state.covariance * model.C.transpose() / s;
  state.state += gain * innovation;

  // Joseph form keeps P symmetric PSD under roundoff.
  const int n = model.state_dim();
  const Eigen::MatrixXd closed =
      Eigen::MatrixXd::Identity(n, n) - gain * model.C;
  state.covariance = closed * state.covariance * closed.transpose() +
                     gain * noise.measurement_var * gain.transpose();
  state.covariance =
      0.5 * (state.covariance + state.covariance.transpose()).eval();

  state.gain = gain;
  state.innovation = innovation;
  ++state.step;
}

Eigen::VectorXd step_state(const StateSpaceModel& model,
                           const Eigen::VectorXd& x, double input) {
  return model.A * x + model.B * input;
}

}  // namespace skiff::linsys
