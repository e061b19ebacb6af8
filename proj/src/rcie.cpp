#include "skiff/rcie.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skiff/errors.hpp"

namespace skiff::rcie {

namespace {

// Histories are tiny (at most order + window entries), so front insertion
// into a vector is cheaper than any fancier structure.
template <typename T>
void push_bounded(std::vector<T>& history, T value, size_t bound) {
  history.insert(history.begin(), std::move(value));
  if (history.size() > bound) {
    history.resize(bound);
  }
}

double history_at(const std::vector<double>& history, int lag) {
  // lag = 1 means the previous step; entries before step 0 are zero.
  const size_t index = static_cast<size_t>(lag - 1);
  return index < history.size() ? history[index] : 0.0;
}

}  // namespace

void Hyperparameters::validate() const {
  if (subsystem_order < 1) {
    throw std::invalid_argument("Hyperparameters: subsystem_order must be >= 1");
  }
  if (filter_window < 1) {
    throw std::invalid_argument("Hyperparameters: filter_window must be >= 1");
  }
  if (!(innovation_weight > 0.0) || !(damping_weight > 0.0) ||
      !(regularization_scale > 0.0)) {
    throw std::invalid_argument("Hyperparameters: weights must be > 0");
  }
  if (theta0.size() != 0 && theta0.size() != coeff_count()) {
    throw std::invalid_argument(
        "Hyperparameters: theta0 must have 2 * subsystem_order + 1 entries");
  }
}

Eigen::VectorXd Hyperparameters::initial_theta() const {
  return theta0.size() == 0 ? Eigen::VectorXd::Zero(coeff_count())
                            : theta0;
}

EstimatorState EstimatorState::initial(const Hyperparameters& hp) {
  hp.validate();
  EstimatorState state;
  state.theta = hp.initial_theta();
  state.covariance = Eigen::MatrixXd::Identity(hp.coeff_count(),
                                               hp.coeff_count()) /
                     hp.regularization_scale;
  return state;
}

Eigen::RowVectorXd build_regressor(const EstimatorState& state,
                                   const Hyperparameters& hp,
                                   double innovation) {
  const int order = hp.subsystem_order;
  Eigen::RowVectorXd phi = Eigen::RowVectorXd::Zero(hp.coeff_count());
  for (int i = 1; i <= order; ++i) {
    phi(i - 1) = history_at(state.input_history, i);
  }
  phi(order) = innovation;
  for (int i = 1; i <= order; ++i) {
    phi(order + i) = history_at(state.innovation_history, i);
  }
  return phi;
}

std::vector<double> filter_coefficients(
    const linsys::StateSpaceModel& model,
    std::span<const Eigen::VectorXd> gains_newest_first, long step,
    int window, int innovation_sign) {
  std::vector<double> weights(static_cast<size_t>(window), 0.0);
  if (step < 1) {
    return weights;
  }
  const double sign = static_cast<double>(innovation_sign);
  weights[0] = sign * model.C.dot(model.B);

  // Deeper taps multiply C by A (I + sign K C) across the recent gains.
  // The emitted coefficient carries the same overall sign, so -1 yields
  // -C [A (I - K C)]^{i-1} B, the innovation's actual sensitivity to the
  // inputs applied to the filter.
  Eigen::RowVectorXd row = model.C;
  const int deepest = static_cast<int>(std::min<long>(window, step));
  for (int i = 2; i <= deepest; ++i) {
    const size_t gain_index = static_cast<size_t>(i - 2);  // step k - (i-1)
    if (gain_index >= gains_newest_first.size()) {
      break;
    }
    const Eigen::VectorXd& gain = gains_newest_first[gain_index];
    const Eigen::RowVectorXd propagated = row * model.A;
    const double feedback = propagated * gain;
    row = propagated +
          static_cast<double>(innovation_sign) * feedback * model.C;
    weights[static_cast<size_t>(i - 1)] = sign * row.dot(model.B);
  }
  return weights;
}

FilteredSignals filtered_signals(const EstimatorState& state,
                                 const Hyperparameters& hp,
                                 std::span<const double> weights) {
  FilteredSignals out;
  out.regressor = Eigen::RowVectorXd::Zero(hp.coeff_count());
  for (size_t i = 1; i <= weights.size(); ++i) {
    const double h = weights[i - 1];
    if (h == 0.0) {
      continue;
    }
    if (i - 1 < state.regressor_history.size()) {
      out.regressor += h * state.regressor_history[i - 1];
    }
    out.input_estimate += h * history_at(state.input_history,
                                         static_cast<int>(i));
  }
  return out;
}

void rls_update(EstimatorState& state, const RlsWorkset& workset) {
  const Eigen::Matrix<double, 2, Eigen::Dynamic>& phi =
      workset.stacked_regressor;
  if (phi.cols() != state.theta.size()) {
    throw std::invalid_argument("rls_update: regressor width mismatch");
  }

  const Eigen::Matrix2d inflated =
      workset.weights.cwiseInverse().asDiagonal().toDenseMatrix() +
      phi * state.covariance * phi.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(
      0.5 * (inflated + inflated.transpose()));
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(1);
  if (!(lo > 0.0) || hi / lo > 1e14) {
    throw IllConditionedUpdateError(
        "rls_update: gain assembly is singular or badly conditioned");
  }
  const Eigen::Matrix2d gamma = inflated.inverse();

  const Eigen::MatrixXd cross = state.covariance * phi.transpose();  // l x 2
  const Eigen::Vector2d residual =
      workset.residual_offset + phi * state.theta;

  const Eigen::VectorXd theta_step = cross * (gamma * residual);
  state.theta -= theta_step;
  state.covariance -= cross * gamma * cross.transpose();
  state.covariance =
      0.5 * (state.covariance + state.covariance.transpose()).eval();
  state.last_theta_delta = theta_step.norm();
}

double estimate_input(const Eigen::VectorXd& theta,
                      const Eigen::RowVectorXd& regressor) {
  if (theta.size() != regressor.size()) {
    throw std::invalid_argument("estimate_input: dimension mismatch");
  }
  return regressor * theta;
}

StepResult aie_step(EstimatorState& estimator, linsys::KalmanState& kalman,
                    const linsys::StateSpaceModel& model,
                    const linsys::NoiseSpec& noise, double measurement,
                    const Hyperparameters& hp, const StepOptions& options) {
  const double previous_input =
      estimator.input_history.empty() ? 0.0 : estimator.input_history.front();

  linsys::kalman_predict(kalman, model, noise, previous_input);
  const double innovation = measurement - model.C * kalman.state;

  const Eigen::RowVectorXd phi = build_regressor(estimator, hp, innovation);
  estimator.filter_weights =
      filter_coefficients(model, estimator.gain_history, estimator.step,
                          hp.filter_window, options.innovation_sign);
  const FilteredSignals filtered =
      filtered_signals(estimator, hp, estimator.filter_weights);

  RlsWorkset workset;
  workset.stacked_regressor.resize(2, hp.coeff_count());
  workset.stacked_regressor.row(0) = filtered.regressor;
  workset.stacked_regressor.row(1) = phi;
  workset.residual_offset =
      Eigen::Vector2d(innovation - filtered.input_estimate, 0.0);
  workset.weights =
      Eigen::Vector2d(hp.innovation_weight, hp.damping_weight);

  rls_update(estimator, workset);

  const double input = estimate_input(estimator.theta, phi);
  if (!std::isfinite(input) ||
      std::abs(input) > options.divergence_bound) {
    throw DivergenceError(
        "aie_step: input estimate exceeded the divergence bound at step " +
            std::to_string(estimator.step),
        estimator.step);
  }

  linsys::kalman_update(kalman, model, noise, measurement);

  const size_t order = static_cast<size_t>(hp.subsystem_order);
  const size_t window = static_cast<size_t>(hp.filter_window);
  push_bounded(estimator.input_history, input, std::max(order, window));
  push_bounded(estimator.innovation_history, innovation, order + window);
  push_bounded(estimator.regressor_history, phi, window);
  push_bounded(estimator.gain_history, kalman.gain, window);
  ++estimator.step;

  StepResult result;
  result.input_estimate = input;
  result.innovation = innovation;
  result.theta_delta = estimator.last_theta_delta;
  result.workset = std::move(workset);
  return result;
}

}  // namespace skiff::rcie
