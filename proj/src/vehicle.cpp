#include "skiff/vehicle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "skiff/errors.hpp"

namespace skiff::vehicle {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kProjectionLimitDeg = 1.0;

}  // namespace

void SensorRecord::validate() const {
  if (!std::isfinite(timestamp) || !std::isfinite(latitude) ||
      !std::isfinite(longitude) || !std::isfinite(heading)) {
    throw std::invalid_argument("SensorRecord: non-finite field");
  }
  if (latitude < -90.0 || latitude > 90.0) {
    throw std::invalid_argument("SensorRecord: latitude out of [-90, 90]");
  }
  if (longitude <= -180.0 || longitude > 180.0) {
    throw std::invalid_argument(
        "SensorRecord: longitude out of (-180, 180]");
  }
  if (heading < 0.0 || heading >= 360.0) {
    throw std::invalid_argument("SensorRecord: heading out of [0, 360)");
  }
}

double wrap_angle(double radians) {
  double wrapped = std::remainder(radians, 2.0 * kPi);
  if (wrapped <= -kPi) {
    wrapped = kPi;  // remainder can return exactly -pi; we want +pi
  }
  return wrapped;
}

double wrap_heading(double degrees) {
  double wrapped = std::fmod(degrees, 360.0);
  if (wrapped < 0.0) {
    wrapped += 360.0;
  }
  if (wrapped >= 360.0) {
    wrapped = 0.0;  // fmod can round back up to 360 for tiny negatives
  }
  return wrapped;
}

double wrap_longitude(double degrees) {
  double wrapped = std::remainder(degrees, 360.0);
  if (wrapped <= -180.0) {
    wrapped = 180.0;
  }
  return wrapped;
}

linsys::StateSpaceModel surge_model(double sample_period) {
  if (!(sample_period > 0.0)) {
    throw std::invalid_argument("surge_model: sample_period must be > 0");
  }
  const double T = sample_period;
  const double decay = std::exp(-0.66397 * T);

  linsys::StateSpaceModel model;
  model.sample_period = T;
  model.A.setZero(3, 3);
  model.A(0, 0) = 1.0;
  model.A(0, 1) = 1.50625 * (1.0 - decay);
  model.A(1, 1) = decay;
  model.A(2, 0) = 1.0;
  model.B.setZero(3);
  model.B(0) = 1.50625 * T + 2.26879 * decay;
  model.B(1) = 1.50625 * (1.0 - decay);
  model.C.setZero(3);
  model.C << 1.4162, 0.0, -1.4162;
  return model;
}

linsys::StateSpaceModel heading_model(double sample_period) {
  if (!(sample_period > 0.0)) {
    throw std::invalid_argument("heading_model: sample_period must be > 0");
  }
  const double T = sample_period;
  const double decay = std::exp(-1.82249 * T);

  linsys::StateSpaceModel model;
  model.sample_period = T;
  model.A.setZero(3, 3);
  model.A(0, 0) = 1.0;
  model.A(0, 1) = 0.5487 * (1.0 - decay);
  model.A(1, 1) = decay;
  model.A(2, 0) = 1.0;
  model.B.setZero(3);
  model.B(0) = 0.5487 + 0.301072 * decay;
  model.B(1) = 0.5487 * (1.0 - decay);
  model.C.setZero(3);
  model.C << 0.200474, 0.0, -0.200474;
  return model;
}

std::pair<double, double> to_local_enu(const SensorRecord& record,
                                       const SensorRecord& origin) {
  const double dlat = record.latitude - origin.latitude;
  const double dlon = wrap_longitude(record.longitude - origin.longitude);
  if (std::abs(dlat) >= kProjectionLimitDeg ||
      std::abs(dlon) >= kProjectionLimitDeg) {
    throw OutOfProjectionError(
        "to_local_enu: fix more than 1 degree from the projection origin");
  }
  const double north = kEarthRadius * dlat * kDegToRad;
  const double east =
      kEarthRadius * std::cos(origin.latitude * kDegToRad) * dlon * kDegToRad;
  return {east, north};
}

SensorRecord from_local_enu(double east, double north,
                            const SensorRecord& origin, double timestamp,
                            double heading) {
  const double cos_lat = std::cos(origin.latitude * kDegToRad);
  if (std::abs(cos_lat) < 1e-12) {
    throw OutOfProjectionError("from_local_enu: origin at a pole");
  }
  SensorRecord record;
  record.timestamp = timestamp;
  record.latitude = origin.latitude + north / (kEarthRadius * kDegToRad);
  record.longitude =
      wrap_longitude(origin.longitude + east / (kEarthRadius * cos_lat) /
                                            kDegToRad);
  record.heading = wrap_heading(heading);
  return record;
}

IncrementalMeasurement chord_measurement(const SensorRecord& prev,
                                         const SensorRecord& curr,
                                         const SensorRecord& origin) {
  if (curr.timestamp < prev.timestamp) {
    throw std::invalid_argument("chord_measurement: records out of time order");
  }
  const auto [prev_east, prev_north] = to_local_enu(prev, origin);
  const auto [curr_east, curr_north] = to_local_enu(curr, origin);
  const double de = curr_east - prev_east;
  const double dn = curr_north - prev_north;

  // Body frame of the later fix: x-forward along the heading ray, whose
  // local-plane components are (east, north) = (cos, sin) of the heading,
  // matching the reconstruction recursion; y points to the right of it.
  const double psi = curr.heading * kDegToRad;
  IncrementalMeasurement m;
  m.body_dx = de * std::cos(psi) + dn * std::sin(psi);
  m.body_dy = de * std::sin(psi) - dn * std::cos(psi);
  m.delta_s = std::hypot(m.body_dx, m.body_dy);
  m.delta_theta = wrap_angle((curr.heading - prev.heading) * kDegToRad);
  return m;
}

std::vector<TrajectoryPoint> reconstruct_trajectory(
    const std::vector<IncrementalMeasurement>& increments,
    const TrajectoryPoint& start, double initial_heading,
    ReconstructionMode mode) {
  std::vector<TrajectoryPoint> track;
  track.reserve(increments.size() + 1);
  TrajectoryPoint point = start;
  track.push_back(point);

  double heading = initial_heading;
  for (const IncrementalMeasurement& inc : increments) {
    const double half_turn = 0.5 * inc.delta_theta;
    const double angle = mode == ReconstructionMode::kLiteral
                             ? half_turn
                             : heading + half_turn;
    point.x_north += inc.delta_s * std::sin(angle);
    point.y_east += inc.delta_s * std::cos(angle);
    ++point.step;
    track.push_back(point);
    heading += inc.delta_theta;
  }
  return track;
}

}  // namespace skiff::vehicle
