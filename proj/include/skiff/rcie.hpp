#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "skiff/linsys.hpp"

namespace skiff::rcie {

/// Tuning knobs of one input-estimation channel. The coefficient vector
/// has 2 * subsystem_order + 1 entries (the feedback taps on past input
/// estimates plus the taps on the current and past innovations).
struct Hyperparameters {
  int subsystem_order = 1;            // number of past taps on each signal
  int filter_window = 1;              // length of the regressor filter
  double innovation_weight = 1.0;     // weight on the retrospective residual
  double damping_weight = 1.0;        // weight on the raw input estimate
  double regularization_scale = 1.0;  // theta prior weight, scale * I
  Eigen::VectorXd theta0;             // prior coefficients; empty means zero

  int coeff_count() const { return 2 * subsystem_order + 1; }

  /// theta0, when present, must match coeff_count(); all weights must be
  /// positive and the orders at least 1. Throws std::invalid_argument.
  void validate() const;

  /// theta0 resolved to a concrete vector (zeros when unset).
  Eigen::VectorXd initial_theta() const;
};

/// Runtime state of the estimator-coefficient recursion. Histories are
/// newest-first and bounded; entries before step 0 read as zero.
struct EstimatorState {
  Eigen::VectorXd theta;                           // coefficient vector
  Eigen::MatrixXd covariance;                      // RLS covariance, SPD
  std::vector<double> input_history;               // recent input estimates
  std::vector<double> innovation_history;          // recent innovations
  std::vector<Eigen::RowVectorXd> regressor_history;  // recent regressor rows
  std::vector<Eigen::VectorXd> gain_history;       // recent Kalman gains
  std::vector<double> filter_weights;              // H_i from the last step
  double last_theta_delta = 0.0;  // ||theta_{k+1} - theta_k|| last step
  long step = 0;

  static EstimatorState initial(const Hyperparameters& hp);
};

/// One RLS input: the stacked filtered/raw regressor pair with its
/// residual offsets and the diagonal weight pair.
struct RlsWorkset {
  Eigen::Matrix<double, 2, Eigen::Dynamic> stacked_regressor;  // 2 x l
  Eigen::Vector2d residual_offset;  // [z - filtered input estimate, 0]
  Eigen::Vector2d weights;          // [innovation_weight, damping_weight]
};

/// Behavior switches of the full estimation step.
struct StepOptions {
  /// Filter sign convention: coefficients are sign * C [A (I + sign K C)]^i B.
  /// +1 keeps the plus-sign formulation as written; -1 produces the negated
  /// ladder -C [A (I - K C)]^i B, the true sensitivity of the innovation to
  /// past applied inputs, under which the estimator tracks unknown inputs.
  int innovation_sign = +1;
  /// Abort threshold on |input estimate|.
  double divergence_bound = 1e6;
};

/// Diagnostics of one estimation step.
struct StepResult {
  double input_estimate = 0.0;
  double innovation = 0.0;
  double theta_delta = 0.0;  // ||theta_{k+1} - theta_k||
  RlsWorkset workset;        // exactly what the RLS consumed this step
};

/// Regressor row [u_{k-1} .. u_{k-ne}  z_k .. z_{k-ne}], zero-padded
/// below step 0.
Eigen::RowVectorXd build_regressor(const EstimatorState& state,
                                   const Hyperparameters& hp,
                                   double innovation);

/// Filter weights H_1..H_window at the given step. Once a step has happened
/// H_1 = sign * C B, deeper taps chain the gain-perturbed dynamics
/// A (I + sign * K C) over the recent gains with the same overall sign, and
/// any tap deeper than the step count is zero. `gains_newest_first[j]` is
/// the gain from step k - 1 - j. See StepOptions::innovation_sign for the
/// two conventions.
std::vector<double> filter_coefficients(
    const linsys::StateSpaceModel& model,
    std::span<const Eigen::VectorXd> gains_newest_first, long step,
    int window, int innovation_sign = +1);

struct FilteredSignals {
  Eigen::RowVectorXd regressor;  // weighted sum of recent regressor rows
  double input_estimate = 0.0;   // weighted sum of recent input estimates
};

/// Applies the filter weights to the state's histories.
FilteredSignals filtered_signals(const EstimatorState& state,
                                 const Hyperparameters& hp,
                                 std::span<const double> weights);

/// Regularized RLS step on the stacked workset:
///   Gamma = (W^{-1} + Phi P Phi')^{-1}
///   P    -= P Phi' Gamma Phi P
///   theta -= P_prev Phi' Gamma (offset + Phi theta)
/// Throws IllConditionedUpdateError when the Gamma assembly has condition
/// number above 1e14.
void rls_update(EstimatorState& state, const RlsWorkset& workset);

/// Inner product of the regressor with the coefficient vector.
double estimate_input(const Eigen::VectorXd& theta,
                      const Eigen::RowVectorXd& regressor);

/// One full estimation step: Kalman predict with the previous input
/// estimate, innovation, regressor and filtered signals, RLS update, the
/// fresh input estimate from the updated coefficients, Kalman update,
/// then history bookkeeping. Throws DivergenceError when the input
/// estimate leaves [-bound, bound].
StepResult aie_step(EstimatorState& estimator, linsys::KalmanState& kalman,
                    const linsys::StateSpaceModel& model,
                    const linsys::NoiseSpec& noise, double measurement,
                    const Hyperparameters& hp, const StepOptions& options = {});

}  // namespace skiff::rcie
