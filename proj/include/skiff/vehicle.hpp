#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "skiff/linsys.hpp"

namespace skiff::vehicle {

/// Sample period of the published surge/heading models, in seconds.
inline constexpr double kDefaultSamplePeriod = 0.546;

/// Mean Earth radius used by the local planar projection, in meters.
inline constexpr double kEarthRadius = 6371008.8;

/// One GPS + compass fix. Heading is degrees clockwise from true north.
struct SensorRecord {
  double timestamp = 0.0;  // seconds
  double latitude = 0.0;   // degrees, WGS-84
  double longitude = 0.0;  // degrees, WGS-84
  double heading = 0.0;    // degrees in [0, 360)

  void validate() const;
};

/// Displacement between consecutive fixes, expressed in the body frame of
/// the later fix. delta_s is the chord length between the fixes and is
/// invariant to the body-frame rotation.
struct IncrementalMeasurement {
  double delta_s = 0.0;      // meters, >= 0
  double delta_theta = 0.0;  // radians in (-pi, pi]
  double body_dx = 0.0;      // meters, along body x-forward
  double body_dy = 0.0;      // meters, along body y-starboard
};

/// One point of a reconstructed track in the local north/east plane.
struct TrajectoryPoint {
  double x_north = 0.0;  // meters
  double y_east = 0.0;   // meters
  long step = 0;
};

enum class ReconstructionMode {
  kLiteral,     // per-step half-angle recursion, no heading accumulation
  kCumulative,  // accumulates heading from an initial value (default)
};

/// Wraps an angle in radians to (-pi, pi].
double wrap_angle(double radians);

/// Wraps a compass heading in degrees to [0, 360).
double wrap_heading(double degrees);

/// Wraps a longitude in degrees to (-180, 180].
double wrap_longitude(double degrees);

/// Discrete surge model: states (position increment sum, speed, delayed
/// position), with the output row producing the per-step chord length.
linsys::StateSpaceModel surge_model(double sample_period = kDefaultSamplePeriod);

/// Discrete heading model with the same structure as surge_model; the output
/// row produces the per-step heading increment.
linsys::StateSpaceModel heading_model(
    double sample_period = kDefaultSamplePeriod);

/// Equirectangular projection of a fix into the local plane anchored at
/// origin. Returns (east, north) in meters. Valid only within 1 degree of
/// the origin in both latitude and longitude; beyond that throws
/// OutOfProjectionError.
std::pair<double, double> to_local_enu(const SensorRecord& record,
                                       const SensorRecord& origin);

/// Inverse of to_local_enu: maps local (east, north) meters back to a fix at
/// the given timestamp/heading.
SensorRecord from_local_enu(double east, double north,
                            const SensorRecord& origin, double timestamp = 0.0,
                            double heading = 0.0);

/// Chord length and heading increment between consecutive fixes, with the
/// displacement rotated into the body frame of `curr`.
IncrementalMeasurement chord_measurement(const SensorRecord& prev,
                                         const SensorRecord& curr,
                                         const SensorRecord& origin);

/// Integrates (delta_s, delta_theta) increments into a planar track starting
/// at `start`. Literal mode advances by the half turn angle alone each step;
/// cumulative mode adds it to the heading accumulated from initial_heading.
/// Returns increments.size() + 1 points, the first being `start`.
std::vector<TrajectoryPoint> reconstruct_trajectory(
    const std::vector<IncrementalMeasurement>& increments,
    const TrajectoryPoint& start, double initial_heading,
    ReconstructionMode mode = ReconstructionMode::kCumulative);

}  // namespace skiff::vehicle
