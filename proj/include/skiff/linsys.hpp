#pragma once

#include <Eigen/Dense>

namespace skiff::linsys {

/// Parameters of a second-order rigid-body channel
///   inertia * qddot + drag * qdot = input_scale * u
/// (mass/drag for surge, moment of inertia/rotational drag for yaw).
struct SecondOrderParams {
  double inertia = 1.0;      // kg or kg*m^2
  double drag = 1.0;         // N*s/m or N*m*s/rad
  double input_scale = 1.0;  // maps commanded input to force/torque

  /// drag/inertia, the continuous-time decay rate of the velocity state.
  double decay_rate() const { return drag / inertia; }

  /// Throws std::invalid_argument unless all parameters are positive
  /// and finite.
  void validate() const;
};

/// Discrete-time LTI triple (A, B, C) with a single input and a single
/// output, plus the sample period the discretization was taken at.
struct StateSpaceModel {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  double sample_period = 0.0;  // seconds

  int state_dim() const { return static_cast<int>(A.rows()); }

  /// Dimension consistency and finiteness checks; throws
  /// std::invalid_argument on violation.
  void validate() const;
};

/// Process/measurement noise description for the Kalman filter.
/// process_cov must be symmetric PSD, measurement_var strictly positive.
struct NoiseSpec {
  Eigen::MatrixXd process_cov;   // Q, n x n
  double measurement_var = 0.0;  // variance of the scalar sensor noise

  void validate(int state_dim) const;

  /// Q = q_scale * I, the shipped default shape.
  static NoiseSpec isotropic(int state_dim, double q_scale,
                             double measurement_var);
};

/// One estimation channel's Kalman filter state. `innovation` and `gain`
/// hold the values from the most recent update step.
struct KalmanState {
  Eigen::VectorXd state;       // x_hat
  Eigen::MatrixXd covariance;  // P
  Eigen::VectorXd gain;        // K from the last update
  double innovation = 0.0;     // z = y - C x_hat_prior from the last update
  long step = 0;

  static KalmanState initial(int state_dim, double p0_scale = 1.0);
};

/// Exact zero-order-hold discretization of the second-order channel as a
/// 2-state (position, velocity) model with C = [1 0].
///
/// With a = drag/inertia and g = input_scale/inertia:
///   v+ = e^{-aT} v + (g/a)(1 - e^{-aT}) u
///   q+ = q + ((1 - e^{-aT})/a) v + g (T/a - (1 - e^{-aT})/a^2) u
StateSpaceModel zoh_discretize(const SecondOrderParams& params,
                               double sample_period);

/// Appends one state that copies the previous step's position (state 1).
/// The new A row is [1 0 ... 0], the new B entry is 0 and C gains a
/// trailing 0, so the input-to-position transfer function is unchanged.
/// Callers typically replace C with an incremental output map afterward.
StateSpaceModel augment_with_delay(const StateSpaceModel& model);

/// Steady-state output of the unit-step response. Settles when the
/// relative change stays below 1e-9 for 100 consecutive steps; throws
/// NonConvergentGainError after 1e6 steps without settling. Models whose
/// only z = 1 pole is cancelled by the output map (the delay-augmented
/// incremental models) settle fine.
double dc_gain(const StateSpaceModel& model);

/// C (zI - A)^{-1} B at a real evaluation point. Used as the second,
/// algebraically independent route to the DC gain (z = 1 + 1e-8).
double transfer_at(const StateSpaceModel& model, double z);

/// Time update: x = A x + B u, P = A P A' + Q. Leaves `step` untouched.
void kalman_predict(KalmanState& state, const StateSpaceModel& model,
                    const NoiseSpec& noise, double input);

/// Measurement update with scalar output. Stores innovation and gain for
/// the input-estimation stage and applies the Joseph-form covariance
/// update. Throws DegenerateInnovationError when C P C' + R <= 0.
void kalman_update(KalmanState& state, const StateSpaceModel& model,
                   const NoiseSpec& noise, double measurement);

/// Advance the model one step: returns A x + B u.
Eigen::VectorXd step_state(const StateSpaceModel& model,
                           const Eigen::VectorXd& x, double input);

}  // namespace skiff::linsys
