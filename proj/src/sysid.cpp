#include "skiff/sysid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "skiff/errors.hpp"

namespace skiff::sysid {

namespace {

struct FreeSet {
  bool inertia = false;
  bool drag = false;
  bool input_scale = false;
  int count() const {
    return (inertia ? 1 : 0) + (drag ? 1 : 0) + (input_scale ? 1 : 0);
  }
};

Eigen::VectorXd pack(const linsys::SecondOrderParams& p, const FreeSet& f) {
  Eigen::VectorXd x(f.count());
  int i = 0;
  if (f.inertia) x(i++) = p.inertia;
  if (f.drag) x(i++) = p.drag;
  if (f.input_scale) x(i++) = p.input_scale;
  return x;
}

linsys::SecondOrderParams unpack(const Eigen::VectorXd& x,
                                 const linsys::SecondOrderParams& base,
                                 const FreeSet& f) {
  linsys::SecondOrderParams p = base;
  int i = 0;
  if (f.inertia) p.inertia = x(i++);
  if (f.drag) p.drag = x(i++);
  if (f.input_scale) p.input_scale = x(i++);
  return p;
}

bool positive(const linsys::SecondOrderParams& p) {
  return p.inertia > 0.0 && p.drag > 0.0 && p.input_scale > 0.0;
}

double cost_at(const StepResponseSeries& series,
               const linsys::SecondOrderParams& p) {
  double cost = 0.0;
  for (size_t j = 0; j < series.times.size(); ++j) {
    const double r = step_response_value(p, series.input_level,
                                         series.times[j]) -
                     series.values[j];
    cost += r * r;
  }
  return cost;
}

/// Steady-state estimate from the tail of the series and a decay-rate
/// estimate from a log-linear regression of the remaining transient.
linsys::SecondOrderParams initial_guess(const StepResponseSeries& series,
                                        std::optional<double> fixed_inertia) {
  const size_t n = series.times.size();
  const size_t tail = std::max<size_t>(3, n / 10);
  double steady = 0.0;
  for (size_t j = n - tail; j < n; ++j) {
    steady += series.values[j];
  }
  steady /= static_cast<double>(tail);
  if (std::abs(steady) < 1e-12) {
    throw DegenerateDataError(
        "fit_step_response: steady-state value is zero, drag is undetermined");
  }

  // ln((steady - v)/steady) = -(drag/inertia) t on the transient portion.
  double sxx = 0.0, sxy = 0.0, sx = 0.0, sy = 0.0;
  size_t used = 0;
  for (size_t j = 0; j < n; ++j) {
    const double w = (steady - series.values[j]) / steady;
    if (w > 1e-3 && w < 1.0) {
      const double t = series.times[j];
      const double y = std::log(w);
      sx += t;
      sy += y;
      sxx += t * t;
      sxy += t * y;
      ++used;
    }
  }
  double rate;
  if (used >= 2 && sxx * static_cast<double>(used) - sx * sx > 0.0) {
    const double slope = (static_cast<double>(used) * sxy - sx * sy) /
                         (static_cast<double>(used) * sxx - sx * sx);
    rate = -slope;
  } else {
    rate = 3.0 / std::max(series.times.back(), 1e-6);
  }
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    rate = 3.0 / std::max(series.times.back(), 1e-6);
  }

  linsys::SecondOrderParams guess;
  guess.input_scale = 1.0;
  guess.drag = std::abs(series.input_level / steady);
  guess.inertia = fixed_inertia.value_or(guess.drag / rate);
  if (fixed_inertia) {
    // With inertia pinned, the decay rate determines drag more directly.
    guess.drag = std::max(rate * *fixed_inertia, 1e-9);
  }
  return guess;
}

}  // namespace

void StepResponseSeries::validate() const {
  if (times.size() != values.size()) {
    throw std::invalid_argument(
        "StepResponseSeries: times and values differ in length");
  }
  if (times.size() < 3) {
    throw std::invalid_argument("StepResponseSeries: need at least 3 samples");
  }
  for (size_t j = 0; j < times.size(); ++j) {
    if (!std::isfinite(times[j]) || !std::isfinite(values[j])) {
      throw std::invalid_argument("StepResponseSeries: non-finite sample");
    }
    if (j > 0 && !(times[j] > times[j - 1])) {
      throw std::invalid_argument(
          "StepResponseSeries: times must be strictly increasing");
    }
  }
  if (input_level == 0.0 || !std::isfinite(input_level)) {
    throw std::invalid_argument(
        "StepResponseSeries: input_level must be nonzero");
  }
}

double step_response_value(const linsys::SecondOrderParams& params,
                           double input_level, double t) {
  const double rate = params.decay_rate();
  const double gain = input_level * params.input_scale / params.drag;
  return gain * -std::expm1(-rate * t);
}

FitResult fit_step_response(const StepResponseSeries& series,
                            std::optional<double> fixed_inertia,
                            bool estimate_input_scale) {
  series.validate();
  if (fixed_inertia && !(*fixed_inertia > 0.0)) {
    throw std::invalid_argument("fit_step_response: fixed_inertia must be > 0");
  }
  if (estimate_input_scale && !fixed_inertia) {
    // (inertia, drag, input_scale) are not jointly identifiable from a
    // single step response: it only determines a decay rate and a gain.
    throw std::invalid_argument(
        "fit_step_response: input_scale can only be estimated with "
        "fixed_inertia set");
  }

  const auto [min_it, max_it] =
      std::minmax_element(series.values.begin(), series.values.end());
  if (*max_it - *min_it < 1e-12 * std::max(1.0, std::abs(*max_it))) {
    throw DegenerateDataError("fit_step_response: series is flat");
  }

  FreeSet free;
  free.inertia = !fixed_inertia.has_value();
  free.drag = true;
  free.input_scale = estimate_input_scale;

  linsys::SecondOrderParams params = initial_guess(series, fixed_inertia);
  const size_t n = series.times.size();
  const double input = series.input_level;

  double cost = cost_at(series, params);
  constexpr int kMaxIterations = 100;
  int iterations = 0;
  bool converged = false;

  const int inertia_col = 0;
  const int drag_col = free.inertia ? 1 : 0;
  const int scale_col = drag_col + 1;

  for (; iterations < kMaxIterations; ++iterations) {
    Eigen::MatrixXd jacobian(n, free.count());
    Eigen::VectorXd residual(n);
    for (size_t j = 0; j < n; ++j) {
      const double t = series.times[j];
      const double rate = params.decay_rate();
      const double decay = std::exp(-rate * t);
      const double growth = -std::expm1(-rate * t);  // 1 - e^{-rate t}
      const double gain = input * params.input_scale / params.drag;

      residual(j) = gain * growth - series.values[j];
      if (free.inertia) {
        jacobian(j, inertia_col) = -input * params.input_scale * t * decay /
                                   (params.inertia * params.inertia);
      }
      // d/d(drag): gain shrinks with drag, rate grows with it.
      jacobian(j, drag_col) =
          -gain * growth / params.drag + gain * (t / params.inertia) * decay;
      if (free.input_scale) {
        jacobian(j, scale_col) = input * growth / params.drag;
      }
    }

    const Eigen::MatrixXd normal = jacobian.transpose() * jacobian;
    const Eigen::VectorXd gradient = jacobian.transpose() * residual;
    const Eigen::VectorXd full_step = normal.ldlt().solve(-gradient);
    if (!full_step.allFinite()) {
      break;
    }

    const Eigen::VectorXd x = pack(params, free);
    double lambda = 1.0;
    bool accepted = false;
    linsys::SecondOrderParams trial = params;
    double trial_cost = cost;
    for (int halving = 0; halving < 40; ++halving) {
      trial = unpack(x + lambda * full_step, params, free);
      if (positive(trial)) {
        trial_cost = cost_at(series, trial);
        if (trial_cost <= cost) {
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      break;
    }

    const double step_norm = (lambda * full_step).norm();
    const double improvement = cost - trial_cost;
    params = trial;
    cost = trial_cost;
    if (step_norm <= 1e-12 * (1.0 + x.norm()) ||
        improvement <= 1e-15 * (1.0 + cost)) {
      converged = true;
      ++iterations;
      break;
    }
  }

  FitResult result;
  result.params = params;
  result.residual_rms = std::sqrt(cost / static_cast<double>(n));
  result.iterations = iterations;
  result.converged = converged && std::isfinite(result.residual_rms);
  return result;
}

}  // namespace skiff::sysid
