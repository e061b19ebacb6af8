#include "skiff/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "skiff/csv.hpp"
#include "skiff/errors.hpp"
#include "skiff/linsys.hpp"
#include "skiff/rcie.hpp"

namespace skiff::pipeline {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

/// Coefficient motion below this for the rest of a run counts as settled.
constexpr double kThetaSettleTol = 1e-3;

constexpr const char* kReportHeader =
    "k,t,meas_delta_s,meas_delta_theta,aie_delta_s,aie_delta_theta,"
    "kf_delta_s,kf_delta_theta,u_hat_surge,u_hat_heading,"
    "theta_delta_surge,theta_delta_heading";

/// Per-step outputs of one channel's estimators.
struct ChannelSeries {
  std::vector<double> u_hat;
  std::vector<double> aie_estimate;
  std::vector<double> kf_estimate;
  std::vector<double> theta_delta;
};

ChannelSeries run_channel(const config::ChannelConfig& channel,
                          const linsys::StateSpaceModel& model,
                          const config::RunConfig& cfg,
                          const std::vector<double>& measurements,
                          const char* name) {
  const linsys::NoiseSpec noise = linsys::NoiseSpec::isotropic(
      model.state_dim(), channel.process_noise, channel.measurement_noise);
  rcie::StepOptions options;
  options.innovation_sign = cfg.innovation_sign;
  options.divergence_bound = cfg.divergence_bound;

  rcie::EstimatorState estimator = rcie::EstimatorState::initial(channel.hyper);
  linsys::KalmanState aie_kalman =
      linsys::KalmanState::initial(model.state_dim());
  linsys::KalmanState baseline =
      linsys::KalmanState::initial(model.state_dim());

  ChannelSeries series;
  series.u_hat.reserve(measurements.size());
  series.aie_estimate.reserve(measurements.size());
  series.kf_estimate.reserve(measurements.size());
  series.theta_delta.reserve(measurements.size());

  for (double y : measurements) {
    rcie::StepResult result;
    try {
      result = rcie::aie_step(estimator, aie_kalman, model, noise, y,
                              channel.hyper, options);
    } catch (const DivergenceError& e) {
      throw DivergenceError(std::string(name) + " channel: " + e.what(),
                            e.step());
    }
    series.u_hat.push_back(result.input_estimate);
    series.theta_delta.push_back(result.theta_delta);
    series.aie_estimate.push_back(model.C.dot(aie_kalman.state));

    linsys::kalman_predict(baseline, model, noise, cfg.baseline_input);
    linsys::kalman_update(baseline, model, noise, y);
    series.kf_estimate.push_back(model.C.dot(baseline.state));
  }
  return series;
}

double pooled_rmse(const std::vector<double>& est_s,
                   const std::vector<double>& est_theta,
                   const std::vector<double>& ref_s,
                   const std::vector<double>& ref_theta) {
  double sum = 0.0;
  for (size_t i = 0; i < est_s.size(); ++i) {
    const double es = est_s[i] - ref_s[i];
    const double et = est_theta[i] - ref_theta[i];
    sum += es * es + et * et;
  }
  return std::sqrt(sum / (2.0 * static_cast<double>(est_s.size())));
}

std::vector<vehicle::IncrementalMeasurement> as_increments(
    const std::vector<double>& delta_s, const std::vector<double>& delta_theta) {
  std::vector<vehicle::IncrementalMeasurement> increments(delta_s.size());
  for (size_t i = 0; i < delta_s.size(); ++i) {
    increments[i].delta_s = delta_s[i];
    increments[i].delta_theta = delta_theta[i];
  }
  return increments;
}

double ratio_of(double a, double b) {
  if (a == b) {
    return 1.0;
  }
  if (b == 0.0) {
    return std::numeric_limits<double>::max();
  }
  return a / b;
}

std::string winner_of(double a, double b) {
  if (a < b) {
    return "a";
  }
  if (b < a) {
    return "b";
  }
  return "tie";
}

long parse_long(std::string_view token, long line) {
  long value = 0;
  const char* first = token.data();
  const char* last = first + token.size();
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc{} || result.ptr != last) {
    throw ParseError("bad integer '" + std::string(token) + "'", line);
  }
  return value;
}

}  // namespace

RunReport run_estimate(const config::RunConfig& cfg,
                       const std::vector<vehicle::SensorRecord>& log,
                       const std::vector<sim::TruthSample>* truth) {
  cfg.validate();
  if (log.size() < 2) {
    throw ValidationError(
        "run_estimate: need at least 2 sensor records to form an increment");
  }
  if (truth) {
    if (truth->size() != log.size()) {
      throw ValidationError(
          "run_estimate: truth and sensor log differ in length");
    }
    for (size_t i = 0; i < log.size(); ++i) {
      if (std::abs((*truth)[i].t - log[i].timestamp) > 1e-9) {
        throw ValidationError(
            "run_estimate: truth and sensor log sample instants differ");
      }
    }
  }

  // Measured increments, anchored at the first fix.
  const vehicle::SensorRecord& origin = log.front();
  const size_t steps = log.size() - 1;
  std::vector<vehicle::IncrementalMeasurement> increments;
  increments.reserve(steps);
  for (size_t i = 0; i + 1 < log.size(); ++i) {
    increments.push_back(
        vehicle::chord_measurement(log[i], log[i + 1], origin));
  }

  std::vector<double> meas_s(steps), meas_theta(steps);
  for (size_t i = 0; i < steps; ++i) {
    meas_s[i] = increments[i].delta_s;
    meas_theta[i] = increments[i].delta_theta;
  }

  const linsys::StateSpaceModel surge_model =
      vehicle::surge_model(cfg.sample_period);
  const linsys::StateSpaceModel heading_model =
      vehicle::heading_model(cfg.sample_period);

  const ChannelSeries surge =
      run_channel(cfg.surge, surge_model, cfg, meas_s, "surge");
  const ChannelSeries heading =
      run_channel(cfg.heading, heading_model, cfg, meas_theta, "heading");

  RunReport report;
  report.rows.resize(steps);
  for (size_t i = 0; i < steps; ++i) {
    StepRow& row = report.rows[i];
    row.k = static_cast<long>(i) + 1;
    row.t = log[i + 1].timestamp;
    row.meas_delta_s = meas_s[i];
    row.meas_delta_theta = meas_theta[i];
    row.aie_delta_s = surge.aie_estimate[i];
    row.aie_delta_theta = heading.aie_estimate[i];
    row.kf_delta_s = surge.kf_estimate[i];
    row.kf_delta_theta = heading.kf_estimate[i];
    row.u_hat_surge = surge.u_hat[i];
    row.u_hat_heading = heading.u_hat[i];
    row.theta_delta_surge = surge.theta_delta[i];
    row.theta_delta_heading = heading.theta_delta[i];
  }

  // Reference increments: truth when available, the measurements otherwise.
  std::vector<double> ref_s = meas_s;
  std::vector<double> ref_theta = meas_theta;
  if (truth) {
    for (size_t i = 0; i < steps; ++i) {
      const sim::TruthSample& a = (*truth)[i];
      const sim::TruthSample& b = (*truth)[i + 1];
      ref_s[i] = std::hypot(b.x_north - a.x_north, b.y_east - a.y_east);
      ref_theta[i] = vehicle::wrap_angle(b.heading - a.heading);
    }
    report.track_truth.reserve(truth->size());
    for (size_t i = 0; i < truth->size(); ++i) {
      report.track_truth.push_back(
          {(*truth)[i].x_north, (*truth)[i].y_east, static_cast<long>(i)});
    }
  }

  const double initial_heading = log.front().heading * kDegToRad;
  const vehicle::TrajectoryPoint start{0.0, 0.0, 0};
  report.track_measured = vehicle::reconstruct_trajectory(
      increments, start, initial_heading, cfg.reconstruction_mode);
  report.track_aie = vehicle::reconstruct_trajectory(
      as_increments(surge.aie_estimate, heading.aie_estimate), start,
      initial_heading, cfg.reconstruction_mode);
  report.track_baseline = vehicle::reconstruct_trajectory(
      as_increments(surge.kf_estimate, heading.kf_estimate), start,
      initial_heading, cfg.reconstruction_mode);

  Summary& summary = report.summary;
  summary.config_hash = config::config_hash(cfg);
  summary.rmse_aie =
      pooled_rmse(surge.aie_estimate, heading.aie_estimate, ref_s, ref_theta);
  summary.rmse_kf =
      pooled_rmse(surge.kf_estimate, heading.kf_estimate, ref_s, ref_theta);

  summary.theta_convergence_step = -1;
  for (size_t i = steps; i-- > 0;) {
    if (std::max(report.rows[i].theta_delta_surge,
                 report.rows[i].theta_delta_heading) >= kThetaSettleTol) {
      break;
    }
    summary.theta_convergence_step = report.rows[i].k;
  }

  summary.dc_gain_surge = linsys::dc_gain(surge_model);
  summary.dc_gain_heading = linsys::dc_gain(heading_model);

  const std::vector<vehicle::TrajectoryPoint>& reference_track =
      report.track_truth.empty() ? report.track_measured : report.track_truth;
  const vehicle::TrajectoryPoint& end_est = report.track_aie.back();
  const vehicle::TrajectoryPoint& end_ref = reference_track.back();
  summary.endpoint_error_m =
      std::hypot(end_est.x_north - end_ref.x_north,
                 end_est.y_east - end_ref.y_east);
  return report;
}

void write_report(const std::filesystem::path& dir, const RunReport& report) {
  std::filesystem::create_directories(dir);

  std::ofstream out(dir / "report.csv", std::ios::binary);
  if (!out) {
    throw ParseError("cannot open for writing: " +
                     (dir / "report.csv").string());
  }
  out << kReportHeader << '\n';
  for (const StepRow& row : report.rows) {
    out << row.k << ',' << csv::format_double(row.t) << ','
        << csv::format_double(row.meas_delta_s) << ','
        << csv::format_double(row.meas_delta_theta) << ','
        << csv::format_double(row.aie_delta_s) << ','
        << csv::format_double(row.aie_delta_theta) << ','
        << csv::format_double(row.kf_delta_s) << ','
        << csv::format_double(row.kf_delta_theta) << ','
        << csv::format_double(row.u_hat_surge) << ','
        << csv::format_double(row.u_hat_heading) << ','
        << csv::format_double(row.theta_delta_surge) << ','
        << csv::format_double(row.theta_delta_heading) << '\n';
  }
  out.close();

  config::json summary;
  summary["config_hash"] = report.summary.config_hash;
  summary["rmse_aie"] = report.summary.rmse_aie;
  summary["rmse_kf"] = report.summary.rmse_kf;
  summary["theta_convergence_step"] = report.summary.theta_convergence_step;
  summary["dc_gain_surge"] = report.summary.dc_gain_surge;
  summary["dc_gain_heading"] = report.summary.dc_gain_heading;
  summary["endpoint_error_m"] = report.summary.endpoint_error_m;
  std::ofstream summary_out(dir / "summary.json", std::ios::binary);
  summary_out << summary.dump(2) << '\n';
  summary_out.close();

  csv::write_trajectory(dir / "trajectory_measured.csv",
                        report.track_measured);
  csv::write_trajectory(dir / "trajectory_aie.csv", report.track_aie);
  csv::write_trajectory(dir / "trajectory_baseline.csv",
                        report.track_baseline);
  if (!report.track_truth.empty()) {
    csv::write_trajectory(dir / "trajectory_truth.csv", report.track_truth);
  }
}

RunReport read_report(const std::filesystem::path& dir) {
  std::ifstream in(dir / "report.csv", std::ios::binary);
  if (!in) {
    throw ParseError("cannot open for reading: " +
                     (dir / "report.csv").string());
  }
  RunReport report;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line_no == 1) {
      if (line != kReportHeader) {
        throw ParseError("bad report header", 1);
      }
      continue;
    }
    if (line.empty()) {
      continue;
    }
    const auto fields = csv::split_fields(line);
    if (fields.size() != 12) {
      throw ParseError("expected 12 fields", line_no);
    }
    StepRow row;
    row.k = parse_long(fields[0], line_no);
    row.t = csv::parse_double(fields[1], line_no);
    row.meas_delta_s = csv::parse_double(fields[2], line_no);
    row.meas_delta_theta = csv::parse_double(fields[3], line_no);
    row.aie_delta_s = csv::parse_double(fields[4], line_no);
    row.aie_delta_theta = csv::parse_double(fields[5], line_no);
    row.kf_delta_s = csv::parse_double(fields[6], line_no);
    row.kf_delta_theta = csv::parse_double(fields[7], line_no);
    row.u_hat_surge = csv::parse_double(fields[8], line_no);
    row.u_hat_heading = csv::parse_double(fields[9], line_no);
    row.theta_delta_surge = csv::parse_double(fields[10], line_no);
    row.theta_delta_heading = csv::parse_double(fields[11], line_no);
    report.rows.push_back(row);
  }

  std::ifstream summary_in(dir / "summary.json", std::ios::binary);
  if (!summary_in) {
    throw ParseError("cannot open for reading: " +
                     (dir / "summary.json").string());
  }
  config::json summary;
  try {
    summary = config::json::parse(summary_in);
  } catch (const config::json::parse_error& e) {
    throw ParseError(std::string("summary.json is not valid JSON: ") +
                     e.what());
  }
  try {
    report.summary.config_hash = summary.at("config_hash").get<std::string>();
    report.summary.rmse_aie = summary.at("rmse_aie").get<double>();
    report.summary.rmse_kf = summary.at("rmse_kf").get<double>();
    report.summary.theta_convergence_step =
        summary.at("theta_convergence_step").get<long>();
    report.summary.dc_gain_surge = summary.at("dc_gain_surge").get<double>();
    report.summary.dc_gain_heading =
        summary.at("dc_gain_heading").get<double>();
    report.summary.endpoint_error_m =
        summary.at("endpoint_error_m").get<double>();
  } catch (const config::json::exception& e) {
    throw ParseError(std::string("summary.json is missing keys: ") + e.what());
  }
  return report;
}

Comparison run_compare(const RunReport& a, const RunReport& b) {
  if (a.rows.size() != b.rows.size()) {
    throw IncompatibleReportError(
        "run_compare: reports have different step counts (" +
        std::to_string(a.rows.size()) + " vs " + std::to_string(b.rows.size()) +
        ")");
  }
  for (size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].k != b.rows[i].k || a.rows[i].t != b.rows[i].t) {
      throw IncompatibleReportError(
          "run_compare: step grids diverge at row " + std::to_string(i + 1));
    }
  }

  Comparison c;
  c.steps = a.rows.size();
  c.config_hash_a = a.summary.config_hash;
  c.config_hash_b = b.summary.config_hash;
  for (size_t i = 0; i < a.rows.size(); ++i) {
    c.max_delta_aie_s = std::max(
        c.max_delta_aie_s, std::abs(a.rows[i].aie_delta_s - b.rows[i].aie_delta_s));
    c.max_delta_aie_theta =
        std::max(c.max_delta_aie_theta,
                 std::abs(a.rows[i].aie_delta_theta - b.rows[i].aie_delta_theta));
    c.max_delta_u_hat_surge =
        std::max(c.max_delta_u_hat_surge,
                 std::abs(a.rows[i].u_hat_surge - b.rows[i].u_hat_surge));
    c.max_delta_u_hat_heading =
        std::max(c.max_delta_u_hat_heading,
                 std::abs(a.rows[i].u_hat_heading - b.rows[i].u_hat_heading));
  }
  c.rmse_aie_ratio = ratio_of(a.summary.rmse_aie, b.summary.rmse_aie);
  c.rmse_kf_ratio = ratio_of(a.summary.rmse_kf, b.summary.rmse_kf);
  c.endpoint_error_ratio =
      ratio_of(a.summary.endpoint_error_m, b.summary.endpoint_error_m);
  c.rmse_aie_winner = winner_of(a.summary.rmse_aie, b.summary.rmse_aie);
  c.rmse_kf_winner = winner_of(a.summary.rmse_kf, b.summary.rmse_kf);
  c.endpoint_winner =
      winner_of(a.summary.endpoint_error_m, b.summary.endpoint_error_m);
  return c;
}

config::json comparison_to_json(const Comparison& c) {
  config::json doc;
  doc["steps"] = c.steps;
  doc["config_hash_a"] = c.config_hash_a;
  doc["config_hash_b"] = c.config_hash_b;
  doc["rmse_aie_ratio"] = c.rmse_aie_ratio;
  doc["rmse_kf_ratio"] = c.rmse_kf_ratio;
  doc["endpoint_error_ratio"] = c.endpoint_error_ratio;
  doc["max_delta_aie_s"] = c.max_delta_aie_s;
  doc["max_delta_aie_theta"] = c.max_delta_aie_theta;
  doc["max_delta_u_hat_surge"] = c.max_delta_u_hat_surge;
  doc["max_delta_u_hat_heading"] = c.max_delta_u_hat_heading;
  doc["rmse_aie_winner"] = c.rmse_aie_winner;
  doc["rmse_kf_winner"] = c.rmse_kf_winner;
  doc["endpoint_winner"] = c.endpoint_winner;
  return doc;
}

}  // namespace skiff::pipeline
