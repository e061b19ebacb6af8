#include "skiff/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string_view>

#include "skiff/errors.hpp"

namespace skiff::config {

namespace {

void require_object(const json& node, const std::string& context) {
  if (!node.is_object()) {
    throw ValidationError(context + ": expected an object");
  }
}

void reject_unknown_keys(const json& obj,
                         std::initializer_list<std::string_view> allowed,
                         const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (std::string_view name : allowed) {
      if (key == name) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ValidationError(context + ": unknown key '" + key + "'");
    }
  }
}

double read_number(const json& obj, const char* key, double fallback,
                   const std::string& context) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const json& node = obj.at(key);
  if (!node.is_number()) {
    throw ValidationError(context + "." + key + ": expected a number");
  }
  const double value = node.get<double>();
  if (!std::isfinite(value)) {
    throw ValidationError(context + "." + key + ": must be finite");
  }
  return value;
}

long read_integer(const json& obj, const char* key, long fallback,
                  const std::string& context) {
  if (!obj.contains(key)) {
    return fallback;
  }
  const json& node = obj.at(key);
  if (!node.is_number_integer()) {
    throw ValidationError(context + "." + key + ": expected an integer");
  }
  return node.get<long>();
}

sim::InputProfile parse_profile(const json& node, const std::string& context) {
  require_object(node, context);
  if (!node.contains("kind") || !node.at("kind").is_string()) {
    throw ValidationError(context + ": missing string key 'kind'");
  }
  const std::string kind = node.at("kind").get<std::string>();
  sim::InputProfile profile;
  if (kind == "step") {
    reject_unknown_keys(node, {"kind", "level", "onset"}, context);
    profile = sim::InputProfile::step(
        read_number(node, "level", 0.0, context),
        read_number(node, "onset", 0.0, context));
  } else if (kind == "ramp") {
    reject_unknown_keys(node, {"kind", "slope", "onset"}, context);
    profile = sim::InputProfile::ramp(
        read_number(node, "slope", 0.0, context),
        read_number(node, "onset", 0.0, context));
  } else if (kind == "sinusoid") {
    reject_unknown_keys(node, {"kind", "amplitude", "period", "phase",
                               "offset"},
                        context);
    profile = sim::InputProfile::sinusoid(
        read_number(node, "amplitude", 0.0, context),
        read_number(node, "period", 1.0, context),
        read_number(node, "phase", 0.0, context),
        read_number(node, "offset", 0.0, context));
  } else if (kind == "piecewise") {
    reject_unknown_keys(node, {"kind", "switch_times", "levels"}, context);
    std::vector<double> switch_times;
    std::vector<double> levels;
    for (const char* key : {"switch_times", "levels"}) {
      if (!node.contains(key) || !node.at(key).is_array()) {
        throw ValidationError(context + ": piecewise needs array '" +
                              std::string(key) + "'");
      }
    }
    for (const json& v : node.at("switch_times")) {
      if (!v.is_number()) {
        throw ValidationError(context + ".switch_times: expected numbers");
      }
      switch_times.push_back(v.get<double>());
    }
    for (const json& v : node.at("levels")) {
      if (!v.is_number()) {
        throw ValidationError(context + ".levels: expected numbers");
      }
      levels.push_back(v.get<double>());
    }
    try {
      profile = sim::InputProfile::piecewise(std::move(switch_times),
                                             std::move(levels));
    } catch (const std::invalid_argument& e) {
      throw ValidationError(context + ": " + e.what());
    }
  } else {
    throw ValidationError(context + ": unknown profile kind '" + kind + "'");
  }
  return profile;
}

json profile_to_json(const sim::InputProfile& p) {
  json node;
  switch (p.kind) {
    case sim::InputProfile::Kind::kStep:
      node["kind"] = "step";
      node["level"] = p.amplitude;
      node["onset"] = p.onset;
      break;
    case sim::InputProfile::Kind::kRamp:
      node["kind"] = "ramp";
      node["slope"] = p.amplitude;
      node["onset"] = p.onset;
      break;
    case sim::InputProfile::Kind::kSinusoid:
      node["kind"] = "sinusoid";
      node["amplitude"] = p.amplitude;
      node["period"] = p.period;
      node["phase"] = p.phase;
      node["offset"] = p.offset;
      break;
    case sim::InputProfile::Kind::kPiecewiseConstant:
      node["kind"] = "piecewise";
      node["switch_times"] = p.switch_times;
      node["levels"] = p.levels;
      break;
  }
  return node;
}

linsys::SecondOrderParams parse_params(const json& node,
                                       const linsys::SecondOrderParams& base,
                                       const std::string& context) {
  require_object(node, context);
  reject_unknown_keys(node, {"inertia", "drag", "input_scale"}, context);
  linsys::SecondOrderParams params = base;
  params.inertia = read_number(node, "inertia", base.inertia, context);
  params.drag = read_number(node, "drag", base.drag, context);
  params.input_scale =
      read_number(node, "input_scale", base.input_scale, context);
  return params;
}

ChannelConfig parse_channel(const json& node, const ChannelConfig& base,
                            const std::string& context) {
  require_object(node, context);
  reject_unknown_keys(node,
                      {"subsystem_order", "filter_window",
                       "innovation_weight", "damping_weight",
                       "regularization_scale", "theta0", "process_noise",
                       "measurement_noise"},
                      context);
  ChannelConfig channel = base;
  channel.hyper.subsystem_order = static_cast<int>(read_integer(
      node, "subsystem_order", base.hyper.subsystem_order, context));
  channel.hyper.filter_window = static_cast<int>(
      read_integer(node, "filter_window", base.hyper.filter_window, context));
  channel.hyper.innovation_weight = read_number(
      node, "innovation_weight", base.hyper.innovation_weight, context);
  channel.hyper.damping_weight =
      read_number(node, "damping_weight", base.hyper.damping_weight, context);
  channel.hyper.regularization_scale =
      read_number(node, "regularization_scale",
                  base.hyper.regularization_scale, context);
  channel.process_noise =
      read_number(node, "process_noise", base.process_noise, context);
  channel.measurement_noise =
      read_number(node, "measurement_noise", base.measurement_noise, context);
  if (node.contains("theta0")) {
    const json& arr = node.at("theta0");
    if (!arr.is_array()) {
      throw ValidationError(context + ".theta0: expected an array");
    }
    const long expected = channel.hyper.coeff_count();
    if (static_cast<long>(arr.size()) != expected) {
      throw ValidationError(
          context + ".theta0: needs exactly 2*subsystem_order + 1 = " +
          std::to_string(expected) + " entries, got " +
          std::to_string(arr.size()));
    }
    channel.hyper.theta0.resize(expected);
    for (long i = 0; i < expected; ++i) {
      const json& v = arr.at(static_cast<size_t>(i));
      if (!v.is_number()) {
        throw ValidationError(context + ".theta0: expected numbers");
      }
      channel.hyper.theta0(i) = v.get<double>();
    }
  }
  return channel;
}

json channel_to_json(const ChannelConfig& c) {
  json node;
  node["subsystem_order"] = c.hyper.subsystem_order;
  node["filter_window"] = c.hyper.filter_window;
  node["innovation_weight"] = c.hyper.innovation_weight;
  node["damping_weight"] = c.hyper.damping_weight;
  node["regularization_scale"] = c.hyper.regularization_scale;
  if (c.hyper.theta0.size() > 0) {
    node["theta0"] = std::vector<double>(
        c.hyper.theta0.data(), c.hyper.theta0.data() + c.hyper.theta0.size());
  }
  node["process_noise"] = c.process_noise;
  node["measurement_noise"] = c.measurement_noise;
  return node;
}

}  // namespace

void ChannelConfig::validate() const {
  hyper.validate();
  if (!(process_noise > 0.0) || !(measurement_noise > 0.0)) {
    throw ValidationError("channel noise intensities must be > 0");
  }
}

void RunConfig::validate() const {
  if (!(sample_period > 0.0)) {
    throw ValidationError("sample_period must be > 0");
  }
  if (!std::isfinite(baseline_input)) {
    throw ValidationError("baseline_input must be finite");
  }
  if (innovation_sign != 1 && innovation_sign != -1) {
    throw ValidationError("innovation_sign must be +1 or -1");
  }
  if (!(divergence_bound > 0.0)) {
    throw ValidationError("divergence_bound must be > 0");
  }
  surge.validate();
  heading.validate();
  try {
    simulator.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.surge.hyper.subsystem_order = 4;
  cfg.surge.hyper.filter_window = 8;
  cfg.surge.hyper.innovation_weight = 1.0;
  cfg.surge.hyper.damping_weight = 50.0;
  cfg.surge.hyper.regularization_scale = std::pow(10.0, -0.01);

  cfg.heading.hyper.subsystem_order = 3;
  cfg.heading.hyper.filter_window = 4;
  cfg.heading.hyper.innovation_weight = 1.0;
  cfg.heading.hyper.damping_weight = 0.1;
  cfg.heading.hyper.regularization_scale = 1e-2;

  cfg.simulator.sample_period = cfg.sample_period;
  cfg.simulator.seed = cfg.seed;
  return cfg;
}

RunConfig parse_config(const json& doc) {
  require_object(doc, "config");
  reject_unknown_keys(doc,
                      {"sample_period", "seed", "baseline_input",
                       "reconstruction_mode", "innovation_sign",
                       "divergence_bound", "surge", "heading", "simulator"},
                      "config");
  RunConfig cfg = default_config();
  cfg.sample_period =
      read_number(doc, "sample_period", cfg.sample_period, "config");
  const long seed = read_integer(
      doc, "seed", static_cast<long>(cfg.seed), "config");
  if (seed < 0) {
    throw ValidationError("config.seed: must be >= 0");
  }
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.baseline_input =
      read_number(doc, "baseline_input", cfg.baseline_input, "config");
  if (doc.contains("reconstruction_mode")) {
    const json& node = doc.at("reconstruction_mode");
    if (!node.is_string()) {
      throw ValidationError("config.reconstruction_mode: expected a string");
    }
    const std::string mode = node.get<std::string>();
    if (mode == "literal") {
      cfg.reconstruction_mode = vehicle::ReconstructionMode::kLiteral;
    } else if (mode == "cumulative") {
      cfg.reconstruction_mode = vehicle::ReconstructionMode::kCumulative;
    } else {
      throw ValidationError(
          "config.reconstruction_mode: must be 'literal' or 'cumulative'");
    }
  }
  cfg.innovation_sign = static_cast<int>(
      read_integer(doc, "innovation_sign", cfg.innovation_sign, "config"));
  cfg.divergence_bound =
      read_number(doc, "divergence_bound", cfg.divergence_bound, "config");
  if (doc.contains("surge")) {
    cfg.surge = parse_channel(doc.at("surge"), cfg.surge, "config.surge");
  }
  if (doc.contains("heading")) {
    cfg.heading =
        parse_channel(doc.at("heading"), cfg.heading, "config.heading");
  }
  if (doc.contains("simulator")) {
    const json& node = doc.at("simulator");
    require_object(node, "config.simulator");
    reject_unknown_keys(node,
                        {"horizon", "substeps", "gps_sigma", "compass_sigma",
                         "origin_latitude", "origin_longitude", "init_speed",
                         "init_yaw_rate", "init_heading", "surge_input",
                         "yaw_input", "surge_params", "yaw_params"},
                        "config.simulator");
    sim::SimConfig& s = cfg.simulator;
    s.horizon = read_number(node, "horizon", s.horizon, "config.simulator");
    s.substeps = static_cast<int>(
        read_integer(node, "substeps", s.substeps, "config.simulator"));
    s.noise.gps_sigma =
        read_number(node, "gps_sigma", s.noise.gps_sigma, "config.simulator");
    s.noise.compass_sigma = read_number(node, "compass_sigma",
                                        s.noise.compass_sigma,
                                        "config.simulator");
    s.origin_latitude = read_number(node, "origin_latitude", s.origin_latitude,
                                    "config.simulator");
    s.origin_longitude = read_number(node, "origin_longitude",
                                     s.origin_longitude, "config.simulator");
    s.init_speed =
        read_number(node, "init_speed", s.init_speed, "config.simulator");
    s.init_yaw_rate =
        read_number(node, "init_yaw_rate", s.init_yaw_rate,
                    "config.simulator");
    s.init_heading =
        read_number(node, "init_heading", s.init_heading, "config.simulator");
    if (node.contains("surge_input")) {
      s.surge_input =
          parse_profile(node.at("surge_input"), "config.simulator.surge_input");
    }
    if (node.contains("yaw_input")) {
      s.yaw_input =
          parse_profile(node.at("yaw_input"), "config.simulator.yaw_input");
    }
    if (node.contains("surge_params")) {
      s.surge = parse_params(node.at("surge_params"), s.surge,
                             "config.simulator.surge_params");
    }
    if (node.contains("yaw_params")) {
      s.yaw = parse_params(node.at("yaw_params"), s.yaw,
                           "config.simulator.yaw_params");
    }
  }
  // One seed and one clock govern everything, including the simulator.
  cfg.simulator.sample_period = cfg.sample_period;
  cfg.simulator.seed = cfg.seed;

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open config file: " + path.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config is not valid JSON: ") +
                          e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& cfg) {
  json doc;
  doc["sample_period"] = cfg.sample_period;
  doc["seed"] = cfg.seed;
  doc["baseline_input"] = cfg.baseline_input;
  doc["reconstruction_mode"] =
      cfg.reconstruction_mode == vehicle::ReconstructionMode::kLiteral
          ? "literal"
          : "cumulative";
  doc["innovation_sign"] = cfg.innovation_sign;
  doc["divergence_bound"] = cfg.divergence_bound;
  doc["surge"] = channel_to_json(cfg.surge);
  doc["heading"] = channel_to_json(cfg.heading);

  json simulator;
  simulator["horizon"] = cfg.simulator.horizon;
  simulator["substeps"] = cfg.simulator.substeps;
  simulator["gps_sigma"] = cfg.simulator.noise.gps_sigma;
  simulator["compass_sigma"] = cfg.simulator.noise.compass_sigma;
  simulator["origin_latitude"] = cfg.simulator.origin_latitude;
  simulator["origin_longitude"] = cfg.simulator.origin_longitude;
  simulator["init_speed"] = cfg.simulator.init_speed;
  simulator["init_yaw_rate"] = cfg.simulator.init_yaw_rate;
  simulator["init_heading"] = cfg.simulator.init_heading;
  simulator["surge_input"] = profile_to_json(cfg.simulator.surge_input);
  simulator["yaw_input"] = profile_to_json(cfg.simulator.yaw_input);
  json surge_params;
  surge_params["inertia"] = cfg.simulator.surge.inertia;
  surge_params["drag"] = cfg.simulator.surge.drag;
  surge_params["input_scale"] = cfg.simulator.surge.input_scale;
  simulator["surge_params"] = surge_params;
  json yaw_params;
  yaw_params["inertia"] = cfg.simulator.yaw.inertia;
  yaw_params["drag"] = cfg.simulator.yaw.drag;
  yaw_params["input_scale"] = cfg.simulator.yaw.input_scale;
  simulator["yaw_params"] = yaw_params;
  doc["simulator"] = simulator;
  return doc;
}

std::string config_hash(const RunConfig& cfg) {
  const std::string canonical = to_json(cfg).dump();
  std::uint64_t hash = 14695981039346656037ULL;
  for (unsigned char byte : canonical) {
    hash ^= byte;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    buf[i] = digits[hash & 0xF];
    hash >>= 4;
  }
  buf[16] = '\0';
  return std::string(buf, 16);
}

}  // namespace skiff::config
