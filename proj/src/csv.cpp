#include "skiff/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "skiff/errors.hpp"

namespace skiff::csv {

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot open for writing: " + path.string());
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open for reading: " + path.string());
  }
  return in;
}

/// Reads one line, tolerating a trailing CR so foreign files still parse;
/// our own writers emit LF only.
bool get_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) {
    return false;
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  return true;
}

void expect_header(std::istream& in, std::string_view expected) {
  std::string line;
  if (!get_line(in, line)) {
    throw ParseError("empty file, expected header", 1);
  }
  if (line != expected) {
    throw ParseError("bad header, expected '" + std::string(expected) + "'",
                     1);
  }
}

std::vector<std::string_view> expect_fields(std::string_view line,
                                            size_t count, long line_no) {
  auto fields = split_fields(line);
  if (fields.size() != count) {
    throw ParseError("expected " + std::to_string(count) + " fields, got " +
                         std::to_string(fields.size()),
                     line_no);
  }
  return fields;
}

}  // namespace

std::string format_double(double value) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument("format_double: non-finite value");
  }
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

double parse_double(std::string_view token, long line) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = first + token.size();
  const auto result = std::from_chars(first, last, value);
  if (result.ec != std::errc{} || result.ptr != last ||
      !std::isfinite(value)) {
    throw ParseError("bad number '" + std::string(token) + "'", line);
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

void write_sensor_log(std::ostream& out,
                      const std::vector<vehicle::SensorRecord>& records) {
  out << "t,lat,lon,heading_deg\n";
  for (const vehicle::SensorRecord& r : records) {
    out << format_double(r.timestamp) << ',' << format_double(r.latitude)
        << ',' << format_double(r.longitude) << ','
        << format_double(r.heading) << '\n';
  }
}

std::vector<vehicle::SensorRecord> read_sensor_log(std::istream& in) {
  expect_header(in, "t,lat,lon,heading_deg");
  std::vector<vehicle::SensorRecord> records;
  std::string line;
  long line_no = 1;
  while (get_line(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto fields = expect_fields(line, 4, line_no);
    vehicle::SensorRecord r;
    r.timestamp = parse_double(fields[0], line_no);
    r.latitude = parse_double(fields[1], line_no);
    r.longitude = parse_double(fields[2], line_no);
    r.heading = parse_double(fields[3], line_no);
    try {
      r.validate();
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!records.empty() && r.timestamp <= records.back().timestamp) {
      throw ParseError("timestamps must be strictly increasing", line_no);
    }
    records.push_back(r);
  }
  if (records.empty()) {
    throw ParseError("sensor log contains no records", line_no);
  }
  return records;
}

void write_sensor_log(const std::filesystem::path& path,
                      const std::vector<vehicle::SensorRecord>& records) {
  auto out = open_output(path);
  write_sensor_log(out, records);
}

std::vector<vehicle::SensorRecord> read_sensor_log(
    const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_sensor_log(in);
}

void write_step_response(std::ostream& out, const std::vector<double>& times,
                         const std::vector<double>& values,
                         double input_level, double onset) {
  if (times.size() != values.size()) {
    throw std::invalid_argument(
        "write_step_response: times and values differ in length");
  }
  out << "t,value,input_level\n";
  for (size_t i = 0; i < times.size(); ++i) {
    const double level = times[i] >= onset ? input_level : 0.0;
    out << format_double(times[i]) << ',' << format_double(values[i]) << ','
        << format_double(level) << '\n';
  }
}

sysid::StepResponseSeries read_step_response(std::istream& in) {
  expect_header(in, "t,value,input_level");
  sysid::StepResponseSeries series;
  std::string line;
  long line_no = 1;
  bool onset_seen = false;
  double onset_time = 0.0;
  double last_time = 0.0;
  while (get_line(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto fields = expect_fields(line, 3, line_no);
    const double t = parse_double(fields[0], line_no);
    const double value = parse_double(fields[1], line_no);
    const double level = parse_double(fields[2], line_no);
    if ((onset_seen || !series.times.empty()) && t <= last_time) {
      throw ParseError("times must be strictly increasing", line_no);
    }
    last_time = t;
    if (!onset_seen) {
      if (level == 0.0) {
        continue;  // pre-onset rest samples
      }
      onset_seen = true;
      onset_time = t;
      series.input_level = level;
    } else if (level != series.input_level) {
      throw ParseError("input_level must stay constant after the step onset",
                       line_no);
    }
    series.times.push_back(t - onset_time);
    series.values.push_back(value);
  }
  if (!onset_seen) {
    throw ParseError("no step onset found (input_level never nonzero)",
                     line_no);
  }
  try {
    series.validate();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what(), line_no);
  }
  return series;
}

sysid::StepResponseSeries read_step_response(
    const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_step_response(in);
}

void write_truth(std::ostream& out,
                 const std::vector<sim::TruthSample>& truth) {
  out << "t,x_north,y_east,heading,speed,u_true,r_true\n";
  for (const sim::TruthSample& s : truth) {
    out << format_double(s.t) << ',' << format_double(s.x_north) << ','
        << format_double(s.y_east) << ',' << format_double(s.heading) << ','
        << format_double(s.speed) << ',' << format_double(s.u_true) << ','
        << format_double(s.r_true) << '\n';
  }
}

std::vector<sim::TruthSample> read_truth(std::istream& in) {
  expect_header(in, "t,x_north,y_east,heading,speed,u_true,r_true");
  std::vector<sim::TruthSample> truth;
  std::string line;
  long line_no = 1;
  while (get_line(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    const auto fields = expect_fields(line, 7, line_no);
    sim::TruthSample s;
    s.t = parse_double(fields[0], line_no);
    s.x_north = parse_double(fields[1], line_no);
    s.y_east = parse_double(fields[2], line_no);
    s.heading = parse_double(fields[3], line_no);
    s.speed = parse_double(fields[4], line_no);
    s.u_true = parse_double(fields[5], line_no);
    s.r_true = parse_double(fields[6], line_no);
    if (!truth.empty() && s.t <= truth.back().t) {
      throw ParseError("timestamps must be strictly increasing", line_no);
    }
    truth.push_back(s);
  }
  if (truth.empty()) {
    throw ParseError("truth file contains no samples", line_no);
  }
  return truth;
}

void write_truth(const std::filesystem::path& path,
                 const std::vector<sim::TruthSample>& truth) {
  auto out = open_output(path);
  write_truth(out, truth);
}

std::vector<sim::TruthSample> read_truth(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_truth(in);
}

void write_trajectory(std::ostream& out,
                      const std::vector<vehicle::TrajectoryPoint>& track) {
  out << "step,x_north,y_east\n";
  for (const vehicle::TrajectoryPoint& p : track) {
    out << p.step << ',' << format_double(p.x_north) << ','
        << format_double(p.y_east) << '\n';
  }
}

void write_trajectory(const std::filesystem::path& path,
                      const std::vector<vehicle::TrajectoryPoint>& track) {
  auto out = open_output(path);
  write_trajectory(out, track);
}

}  // namespace skiff::csv
