#pragma once

#include <cstdint>
#include <vector>

#include "skiff/linsys.hpp"
#include "skiff/vehicle.hpp"

namespace skiff::sim {

/// Scalar input signal evaluable at any t >= 0.
struct InputProfile {
  enum class Kind { kStep, kRamp, kSinusoid, kPiecewiseConstant };

  Kind kind = Kind::kStep;
  double amplitude = 0.0;       // step level, ramp slope, or sine amplitude
  double onset = 0.0;           // seconds before a step/ramp starts
  double period = 1.0;          // sinusoid period, seconds
  double phase = 0.0;           // sinusoid phase, radians
  double offset = 0.0;          // sinusoid mean level
  std::vector<double> switch_times;  // piecewise: strictly increasing
  std::vector<double> levels;        // piecewise: switch_times.size() + 1

  static InputProfile constant(double level);
  static InputProfile step(double level, double onset);
  static InputProfile ramp(double slope, double onset = 0.0);
  static InputProfile sinusoid(double amplitude, double period,
                               double phase = 0.0, double offset = 0.0);
  static InputProfile piecewise(std::vector<double> switch_times,
                                std::vector<double> levels);

  void validate() const;
  double value_at(double t) const;
};

/// Sensor noise magnitudes; both may be zero for noiseless runs.
struct SensorNoise {
  double gps_sigma = 1.5;      // meters, per east/north axis
  double compass_sigma = 2.0;  // degrees
};

/// Everything needed to reproduce one synthetic run.
struct SimConfig {
  linsys::SecondOrderParams surge{0.469, 0.311, 1.0};  // mass, drag
  linsys::SecondOrderParams yaw{4.896, 9.087, 1.0};    // inertia, damping
  InputProfile surge_input = InputProfile::constant(0.0);
  InputProfile yaw_input = InputProfile::constant(0.0);
  double horizon = 60.0;                                // seconds
  double sample_period = vehicle::kDefaultSamplePeriod;  // seconds
  int substeps = 20;  // integrator substeps per sample period
  SensorNoise noise;
  std::uint64_t seed = 0;
  double origin_latitude = 40.0;    // degrees, anchors the GPS track
  double origin_longitude = -75.5;  // degrees
  double init_speed = 0.0;          // m/s
  double init_yaw_rate = 0.0;       // rad/s
  double init_heading = 0.0;        // radians

  void validate() const;
};

/// Noiseless state sampled at one sensor instant.
struct TruthSample {
  double t = 0.0;
  double x_north = 0.0;   // meters
  double y_east = 0.0;    // meters
  double heading = 0.0;   // radians, unwrapped
  double speed = 0.0;     // m/s
  double yaw_rate = 0.0;  // rad/s
  double u_true = 0.0;    // surge input at t
  double r_true = 0.0;    // yaw input at t
};

/// One synthetic run: noisy sensor records plus the retained truth.
struct SimRun {
  SimConfig config;
  std::vector<vehicle::SensorRecord> records;
  std::vector<TruthSample> truth;
  std::vector<double> dropped_timestamps;  // gap log filled by degrade()
};

/// Integrates the surge/yaw dynamics under the configured inputs and samples
/// noisy GPS/compass records at the sample period. Deterministic per seed.
SimRun simulate(const SimConfig& config);

/// Removes sensor records i.i.d. with the given probability, recording the
/// dropped timestamps. Throws DegenerateRunError if fewer than 3 remain.
SimRun degrade(const SimRun& run, double dropout_prob, std::uint64_t seed);

}  // namespace skiff::sim
