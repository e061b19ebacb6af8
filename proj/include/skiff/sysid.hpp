#pragma once

#include <optional>
#include <vector>

#include "skiff/linsys.hpp"

namespace skiff::sysid {

/// Measured response of a velocity-like quantity to a constant input step,
/// with time measured from the step onset.
struct StepResponseSeries {
  std::vector<double> times;   // seconds, strictly increasing
  std::vector<double> values;  // speed (m/s) or yaw rate (rad/s)
  double input_level = 0.0;    // applied step magnitude

  /// At least 3 samples, strictly increasing finite times, finite values,
  /// nonzero input level. Throws std::invalid_argument.
  void validate() const;
};

struct FitResult {
  linsys::SecondOrderParams params;
  double residual_rms = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Nonlinear least-squares fit of the analytic first-order step response
///   v(t) = (input_level * input_scale / drag) (1 - e^{-(drag/inertia) t})
/// by Gauss-Newton with backtracking. The initial guess comes from a
/// log-linear regression of the residual-to-steady-state decay.
///
/// With fixed_inertia set, only drag is estimated (plus input_scale when
/// estimate_input_scale is true); otherwise inertia and drag are free and
/// input_scale stays at 1. Non-convergence returns converged = false with
/// the best parameters found; a flat series throws DegenerateDataError.
FitResult fit_step_response(const StepResponseSeries& series,
                            std::optional<double> fixed_inertia = {},
                            bool estimate_input_scale = false);

/// The analytic step response the fit minimizes against.
double step_response_value(const linsys::SecondOrderParams& params,
                           double input_level, double t);

}  // namespace skiff::sysid
