#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "skiff/config.hpp"
#include "skiff/sim.hpp"
#include "skiff/vehicle.hpp"

namespace skiff::pipeline {

/// One estimation step over both channels. The k column counts sensor
/// records; row k covers the increment between fixes k-1 and k.
struct StepRow {
  long k = 0;
  double t = 0.0;
  double meas_delta_s = 0.0;
  double meas_delta_theta = 0.0;
  double aie_delta_s = 0.0;
  double aie_delta_theta = 0.0;
  double kf_delta_s = 0.0;
  double kf_delta_theta = 0.0;
  double u_hat_surge = 0.0;
  double u_hat_heading = 0.0;
  double theta_delta_surge = 0.0;
  double theta_delta_heading = 0.0;
};

/// Scalar metrics for one run. RMSE pools both channels; the reference is
/// the truth increments when truth is supplied, the measured ones otherwise.
struct Summary {
  std::string config_hash;
  double rmse_aie = 0.0;
  double rmse_kf = 0.0;
  long theta_convergence_step = -1;  // -1 when the coefficients never settle
  double dc_gain_surge = 0.0;
  double dc_gain_heading = 0.0;
  double endpoint_error_m = 0.0;
};

struct RunReport {
  std::vector<StepRow> rows;
  Summary summary;
  std::vector<vehicle::TrajectoryPoint> track_measured;
  std::vector<vehicle::TrajectoryPoint> track_aie;
  std::vector<vehicle::TrajectoryPoint> track_baseline;
  std::vector<vehicle::TrajectoryPoint> track_truth;  // empty without truth
};

/// Per-metric outcome of comparing two reports on the same step grid.
struct Comparison {
  size_t steps = 0;
  std::string config_hash_a;
  std::string config_hash_b;
  double rmse_aie_ratio = 1.0;        // a / b
  double rmse_kf_ratio = 1.0;
  double endpoint_error_ratio = 1.0;
  double max_delta_aie_s = 0.0;       // max |a - b| over steps
  double max_delta_aie_theta = 0.0;
  double max_delta_u_hat_surge = 0.0;
  double max_delta_u_hat_heading = 0.0;
  std::string rmse_aie_winner;        // "a", "b", or "tie"
  std::string rmse_kf_winner;
  std::string endpoint_winner;
};

/// Runs both channel estimators and the fixed-input Kalman baseline over a
/// sensor log, reconstructs the tracks, and fills the summary. `truth`, when
/// given, must share the log's sample instants.
RunReport run_estimate(const config::RunConfig& cfg,
                       const std::vector<vehicle::SensorRecord>& log,
                       const std::vector<sim::TruthSample>* truth = nullptr);

/// Writes report.csv, summary.json, and the trajectory CSVs into `dir`.
void write_report(const std::filesystem::path& dir, const RunReport& report);

/// Reads back what write_report produced (rows and summary only).
RunReport read_report(const std::filesystem::path& dir);

/// Per-step deltas and summary ratios; throws IncompatibleReportError when
/// the step grids differ.
Comparison run_compare(const RunReport& a, const RunReport& b);

config::json comparison_to_json(const Comparison& c);

}  // namespace skiff::pipeline
