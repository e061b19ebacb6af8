#pragma once

#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "skiff/sim.hpp"
#include "skiff/sysid.hpp"
#include "skiff/vehicle.hpp"

namespace skiff::csv {

/// Shortest round-trip decimal form of a finite double ('.' separator).
std::string format_double(double value);

/// Strict double parse: the whole token must be consumed and finite.
/// `line` is reported on failure.
double parse_double(std::string_view token, long line);

/// Sensor log, header `t,lat,lon,heading_deg`. Timestamps must be strictly
/// increasing; violations raise ParseError with the offending line.
void write_sensor_log(std::ostream& out,
                      const std::vector<vehicle::SensorRecord>& records);
std::vector<vehicle::SensorRecord> read_sensor_log(std::istream& in);
void write_sensor_log(const std::filesystem::path& path,
                      const std::vector<vehicle::SensorRecord>& records);
std::vector<vehicle::SensorRecord> read_sensor_log(
    const std::filesystem::path& path);

/// Step-response series, header `t,value,input_level`. Rows before the step
/// onset carry input_level 0; the reader shifts times so the first row with
/// a nonzero level is t = 0 and requires the level constant from then on.
void write_step_response(std::ostream& out, const std::vector<double>& times,
                         const std::vector<double>& values,
                         double input_level, double onset);
sysid::StepResponseSeries read_step_response(std::istream& in);
sysid::StepResponseSeries read_step_response(
    const std::filesystem::path& path);

/// Noiseless simulator truth, header
/// `t,x_north,y_east,heading,speed,u_true,r_true` (heading in radians).
void write_truth(std::ostream& out, const std::vector<sim::TruthSample>& truth);
std::vector<sim::TruthSample> read_truth(std::istream& in);
void write_truth(const std::filesystem::path& path,
                 const std::vector<sim::TruthSample>& truth);
std::vector<sim::TruthSample> read_truth(const std::filesystem::path& path);

/// Reconstructed track, header `step,x_north,y_east`.
void write_trajectory(std::ostream& out,
                      const std::vector<vehicle::TrajectoryPoint>& track);
void write_trajectory(const std::filesystem::path& path,
                      const std::vector<vehicle::TrajectoryPoint>& track);

/// Splits one CSV line on commas (no quoting; the formats above never need
/// it). Returns the field count found.
std::vector<std::string_view> split_fields(std::string_view line);

}  // namespace skiff::csv
