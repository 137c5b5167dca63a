#ifndef CFMIMO_CONFIG_HPP
#define CFMIMO_CONFIG_HPP

#include <cstdint>
#include <iosfwd>
#include <string>

#include "cfmimo/channel.hpp"
#include "cfmimo/link_metrics.hpp"

namespace cfm {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class PowerMode { Off, Fp };
enum class AntennaMode { Fixed, Fas };
enum class BitMode { Equal, Optimize };

struct ExperimentConfig {
  ScenarioConfig scenario;
  PowerModel power;
  double region_side_lambda = 1.0;
  double p_u_w = 0.1;       // from p_u_dbm, default 20 dBm
  double noise_w = 2.5e-13; // from noise_dbm, default -96 dBm

  PowerMode power_mode = PowerMode::Fp;
  AntennaMode antenna_mode = AntennaMode::Fas;
  BitMode bit_mode = BitMode::Optimize;
  double equal_bits = 4.0;
  double b_min = 1.0;
  double b_max = 5.0;
  double s_min = 0.0;
  ZetaMode zeta_mode = ZetaMode::ExactTable;
  double tolerance = 1e-5;
  int max_outer = 100;
  int inner_max_iter = 100;

  int realizations = 200;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 = hardware concurrency

  std::string sweep_param;  // empty = single run
  std::vector<double> sweep_values;
};

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// INI-style parser: [scenario], [power], [optimization], [run], [sweep]
/// sections, '#'/';' comments. Unknown sections or keys are config errors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_file(const std::string& path);

/// Overrides the swept parameter; throws ConfigError on unknown names.
void apply_sweep_value(ExperimentConfig& config, const std::string& param, double value);

/// Stable one-line-per-field serialization used for the manifest hash.
std::string canonical_string(const ExperimentConfig& config);

}  // namespace cfm

#endif
