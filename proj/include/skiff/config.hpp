#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "skiff/rcie.hpp"
#include "skiff/sim.hpp"
#include "skiff/vehicle.hpp"

namespace skiff::config {

using json = nlohmann::ordered_json;

/// Estimator settings for one output channel (surge or heading).
struct ChannelConfig {
  rcie::Hyperparameters hyper;
  double process_noise = 1e-4;      // isotropic state noise intensity
  double measurement_noise = 1e-2;  // output noise variance

  void validate() const;
};

/// Fully-resolved run configuration. Defaults reproduce the published
/// estimator settings for both channels.
struct RunConfig {
  double sample_period = vehicle::kDefaultSamplePeriod;
  std::uint64_t seed = 0;
  double baseline_input = 1.0;  // fixed input assumed by the Kalman baseline
  vehicle::ReconstructionMode reconstruction_mode =
      vehicle::ReconstructionMode::kCumulative;
  int innovation_sign = 1;        // filter sign convention; -1 selects the
                                  // true input-to-innovation sensitivity
  double divergence_bound = 1e6;  // abort when |u_hat| exceeds this
  ChannelConfig surge;
  ChannelConfig heading;
  sim::SimConfig simulator;

  void validate() const;
};

/// The shipped defaults (also what an empty JSON document resolves to).
RunConfig default_config();

/// Strict parse: unknown keys, wrong types, or sizing violations raise
/// ValidationError before any run starts.
RunConfig parse_config(const json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical document with every field resolved, in fixed key order.
json to_json(const RunConfig& cfg);

/// FNV-1a 64-bit hash of the canonical document, as 16 lowercase hex digits.
std::string config_hash(const RunConfig& cfg);

}  // namespace skiff::config
