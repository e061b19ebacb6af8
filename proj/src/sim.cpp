#include "skiff/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "skiff/errors.hpp"

namespace skiff::sim {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

/// Planar state advanced by the integrator: speed, yaw rate, heading, and
/// the local-plane position.
struct PlanarState {
  double speed;
  double yaw_rate;
  double heading;
  double x_north;
  double y_east;
};

PlanarState derivative(const PlanarState& s, double u, double r,
                       const SimConfig& cfg) {
  PlanarState d;
  d.speed = (u * cfg.surge.input_scale - cfg.surge.drag * s.speed) /
            cfg.surge.inertia;
  d.yaw_rate =
      (r * cfg.yaw.input_scale - cfg.yaw.drag * s.yaw_rate) / cfg.yaw.inertia;
  d.heading = s.yaw_rate;
  // Heading ray in the local plane: (east, north) = (cos, sin), matching the
  // trajectory-reconstruction convention.
  d.x_north = s.speed * std::sin(s.heading);
  d.y_east = s.speed * std::cos(s.heading);
  return d;
}

PlanarState axpy(const PlanarState& s, double h, const PlanarState& d) {
  return {s.speed + h * d.speed, s.yaw_rate + h * d.yaw_rate,
          s.heading + h * d.heading, s.x_north + h * d.x_north,
          s.y_east + h * d.y_east};
}

PlanarState rk4_step(const PlanarState& s, double t, double h,
                     const SimConfig& cfg) {
  const auto f = [&](const PlanarState& state, double time) {
    return derivative(state, cfg.surge_input.value_at(time),
                      cfg.yaw_input.value_at(time), cfg);
  };
  const PlanarState k1 = f(s, t);
  const PlanarState k2 = f(axpy(s, 0.5 * h, k1), t + 0.5 * h);
  const PlanarState k3 = f(axpy(s, 0.5 * h, k2), t + 0.5 * h);
  const PlanarState k4 = f(axpy(s, h, k3), t + h);

  PlanarState out = s;
  out.speed += h / 6.0 * (k1.speed + 2.0 * k2.speed + 2.0 * k3.speed + k4.speed);
  out.yaw_rate +=
      h / 6.0 * (k1.yaw_rate + 2.0 * k2.yaw_rate + 2.0 * k3.yaw_rate +
                 k4.yaw_rate);
  out.heading += h / 6.0 * (k1.heading + 2.0 * k2.heading + 2.0 * k3.heading +
                            k4.heading);
  out.x_north += h / 6.0 * (k1.x_north + 2.0 * k2.x_north + 2.0 * k3.x_north +
                            k4.x_north);
  out.y_east +=
      h / 6.0 * (k1.y_east + 2.0 * k2.y_east + 2.0 * k3.y_east + k4.y_east);
  return out;
}

}  // namespace

InputProfile InputProfile::constant(double level) {
  return step(level, 0.0);
}

InputProfile InputProfile::step(double level, double onset) {
  InputProfile p;
  p.kind = Kind::kStep;
  p.amplitude = level;
  p.onset = onset;
  return p;
}

InputProfile InputProfile::ramp(double slope, double onset) {
  InputProfile p;
  p.kind = Kind::kRamp;
  p.amplitude = slope;
  p.onset = onset;
  return p;
}

InputProfile InputProfile::sinusoid(double amplitude, double period,
                                    double phase, double offset) {
  InputProfile p;
  p.kind = Kind::kSinusoid;
  p.amplitude = amplitude;
  p.period = period;
  p.phase = phase;
  p.offset = offset;
  return p;
}

InputProfile InputProfile::piecewise(std::vector<double> switch_times,
                                     std::vector<double> levels) {
  InputProfile p;
  p.kind = Kind::kPiecewiseConstant;
  p.switch_times = std::move(switch_times);
  p.levels = std::move(levels);
  p.validate();
  return p;
}

void InputProfile::validate() const {
  if (!std::isfinite(amplitude) || !std::isfinite(onset) ||
      !std::isfinite(phase) || !std::isfinite(offset)) {
    throw std::invalid_argument("InputProfile: non-finite parameter");
  }
  if (kind == Kind::kSinusoid && !(period > 0.0)) {
    throw std::invalid_argument("InputProfile: sinusoid period must be > 0");
  }
  if (kind == Kind::kPiecewiseConstant) {
    if (levels.size() != switch_times.size() + 1) {
      throw std::invalid_argument(
          "InputProfile: piecewise needs one more level than switch time");
    }
    for (size_t i = 0; i < switch_times.size(); ++i) {
      if (!std::isfinite(switch_times[i]) ||
          (i > 0 && !(switch_times[i] > switch_times[i - 1]))) {
        throw std::invalid_argument(
            "InputProfile: switch times must be finite and increasing");
      }
    }
    for (double level : levels) {
      if (!std::isfinite(level)) {
        throw std::invalid_argument("InputProfile: non-finite level");
      }
    }
  }
}

double InputProfile::value_at(double t) const {
  switch (kind) {
    case Kind::kStep:
      return t >= onset ? amplitude : 0.0;
    case Kind::kRamp:
      return t >= onset ? amplitude * (t - onset) : 0.0;
    case Kind::kSinusoid:
      return offset + amplitude * std::sin(2.0 * std::numbers::pi * t / period +
                                           phase);
    case Kind::kPiecewiseConstant: {
      const auto it = std::upper_bound(switch_times.begin(),
                                       switch_times.end(), t);
      return levels[static_cast<size_t>(it - switch_times.begin())];
    }
  }
  return 0.0;
}

void SimConfig::validate() const {
  surge.validate();
  yaw.validate();
  surge_input.validate();
  yaw_input.validate();
  if (!(sample_period > 0.0) || !(horizon > sample_period)) {
    throw std::invalid_argument("SimConfig: need horizon > sample_period > 0");
  }
  if (substeps < 1) {
    throw std::invalid_argument("SimConfig: substeps must be >= 1");
  }
  if (noise.gps_sigma < 0.0 || noise.compass_sigma < 0.0) {
    throw std::invalid_argument("SimConfig: noise sigmas must be >= 0");
  }
  if (!std::isfinite(init_speed) || !std::isfinite(init_yaw_rate) ||
      !std::isfinite(init_heading)) {
    throw std::invalid_argument("SimConfig: non-finite initial state");
  }
  vehicle::SensorRecord origin{0.0, origin_latitude, origin_longitude, 0.0};
  origin.validate();
}

SimRun simulate(const SimConfig& config) {
  config.validate();

  SimRun run;
  run.config = config;

  const long samples =
      static_cast<long>(std::floor(config.horizon / config.sample_period +
                                   1e-9)) +
      1;
  run.records.reserve(samples);
  run.truth.reserve(samples);

  vehicle::SensorRecord origin{0.0, config.origin_latitude,
                               config.origin_longitude, 0.0};
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> unit_normal(0.0, 1.0);

  PlanarState state{config.init_speed, config.init_yaw_rate,
                    config.init_heading, 0.0, 0.0};
  const double h = config.sample_period / config.substeps;

  for (long k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) * config.sample_period;

    TruthSample truth;
    truth.t = t;
    truth.x_north = state.x_north;
    truth.y_east = state.y_east;
    truth.heading = state.heading;
    truth.speed = state.speed;
    truth.yaw_rate = state.yaw_rate;
    truth.u_true = config.surge_input.value_at(t);
    truth.r_true = config.yaw_input.value_at(t);
    run.truth.push_back(truth);

    const double east = state.y_east + config.noise.gps_sigma * unit_normal(rng);
    const double north =
        state.x_north + config.noise.gps_sigma * unit_normal(rng);
    const double heading_deg = state.heading * kRadToDeg +
                               config.noise.compass_sigma * unit_normal(rng);
    run.records.push_back(vehicle::from_local_enu(
        east, north, origin, t, vehicle::wrap_heading(heading_deg)));

    if (k + 1 < samples) {
      for (int sub = 0; sub < config.substeps; ++sub) {
        state = rk4_step(state, t + sub * h, h, config);
      }
    }
  }
  return run;
}

SimRun degrade(const SimRun& run, double dropout_prob, std::uint64_t seed) {
  if (!(dropout_prob >= 0.0) || dropout_prob >= 1.0) {
    throw std::invalid_argument("degrade: dropout_prob must be in [0, 1)");
  }
  SimRun degraded;
  degraded.config = run.config;
  degraded.truth = run.truth;
  degraded.dropped_timestamps = run.dropped_timestamps;

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution drop(dropout_prob);
  for (const vehicle::SensorRecord& record : run.records) {
    if (drop(rng)) {
      degraded.dropped_timestamps.push_back(record.timestamp);
    } else {
      degraded.records.push_back(record);
    }
  }
  if (degraded.records.size() < 3) {
    throw DegenerateRunError(
        "degrade: fewer than 3 sensor records remain after dropout");
  }
  return degraded;
}

}  // namespace skiff::sim
