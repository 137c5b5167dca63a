#include "cfmimo/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace cfm {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double d;
  try {
    d = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("bad numeric value for " + key + ": '" + value + "'");
  }
  if (pos != value.size()) throw ConfigError("trailing characters in value for " + key);
  return d;
}

int to_int(const std::string& key, const std::string& value) {
  const double d = to_double(key, value);
  const int i = static_cast<int>(d);
  if (static_cast<double>(i) != d) throw ConfigError("expected integer for " + key);
  return i;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const std::uint64_t v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad unsigned value for " + key + ": '" + value + "'");
  }
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  if (out.empty()) throw ConfigError("empty list for " + key);
  return out;
}

void set_key(ExperimentConfig& c, const std::string& section, const std::string& key,
             const std::string& value) {
  auto bad_key = [&]() -> ConfigError {
    return ConfigError("unknown key [" + section + "] " + key);
  };
  if (section == "scenario") {
    ScenarioConfig& s = c.scenario;
    if (key == "num_aps")
      s.num_aps = to_int(key, value);
    else if (key == "num_users")
      s.num_users = to_int(key, value);
    else if (key == "array_h")
      s.array_h = to_int(key, value);
    else if (key == "array_v")
      s.array_v = to_int(key, value);
    else if (key == "num_paths")
      s.num_paths = to_int(key, value);
    else if (key == "area_side_m")
      s.area_side_m = to_double(key, value);
    else if (key == "ricean")
      s.ricean = to_double(key, value);
    else if (key == "wavelength_m")
      s.wavelength = to_double(key, value);
    else if (key == "region_side_lambda")
      c.region_side_lambda = to_double(key, value);
    else if (key == "carrier_mhz")
      s.path_loss.carrier_mhz = to_double(key, value);
    else if (key == "breakpoint_near_m")
      s.path_loss.breakpoint_near_m = to_double(key, value);
    else if (key == "breakpoint_far_m")
      s.path_loss.breakpoint_far_m = to_double(key, value);
    else if (key == "ap_height_m")
      s.path_loss.ap_height_m = to_double(key, value);
    else if (key == "user_height_m")
      s.path_loss.user_height_m = to_double(key, value);
    else if (key == "shadow_sigma_db")
      s.path_loss.shadow_sigma_db = to_double(key, value);
    else
      throw bad_key();
  } else if (section == "power") {
    if (key == "p_u_dbm")
      c.p_u_w = dbm_to_watt(to_double(key, value));
    else if (key == "noise_dbm")
      c.noise_w = dbm_to_watt(to_double(key, value));
    else if (key == "amplifier_efficiency")
      c.power.amplifier_efficiency = to_double(key, value);
    else if (key == "user_circuit_w")
      c.power.user_circuit_w = to_double(key, value);
    else if (key == "agc_w")
      c.power.agc_w = to_double(key, value);
    else if (key == "residual_w")
      c.power.residual_w = to_double(key, value);
    else if (key == "fom_w_j")
      c.power.fom_w_j = to_double(key, value);
    else if (key == "sampling_hz")
      c.power.sampling_hz = to_double(key, value);
    else if (key == "backhaul_traffic_w_per_bps")
      c.power.backhaul_traffic_w_per_bps = to_double(key, value);
    else if (key == "backhaul_fixed_w")
      c.power.backhaul_fixed_w = to_double(key, value);
    else if (key == "bandwidth_hz")
      c.power.bandwidth_hz = to_double(key, value);
    else
      throw bad_key();
  } else if (section == "optimization") {
    if (key == "power_control") {
      if (value == "fp")
        c.power_mode = PowerMode::Fp;
      else if (value == "off")
        c.power_mode = PowerMode::Off;
      else
        throw ConfigError("power_control must be fp|off");
    } else if (key == "antenna_mode") {
      if (value == "fas")
        c.antenna_mode = AntennaMode::Fas;
      else if (value == "fixed")
        c.antenna_mode = AntennaMode::Fixed;
      else
        throw ConfigError("antenna_mode must be fas|fixed");
    } else if (key == "bit_mode") {
      if (value == "optimize")
        c.bit_mode = BitMode::Optimize;
      else if (value == "equal")
        c.bit_mode = BitMode::Equal;
      else
        throw ConfigError("bit_mode must be optimize|equal");
    } else if (key == "zeta_mode") {
      if (value == "table")
        c.zeta_mode = ZetaMode::ExactTable;
      else if (value == "analytic")
        c.zeta_mode = ZetaMode::Analytic;
      else
        throw ConfigError("zeta_mode must be table|analytic");
    } else if (key == "equal_bits")
      c.equal_bits = to_double(key, value);
    else if (key == "b_min")
      c.b_min = to_double(key, value);
    else if (key == "b_max")
      c.b_max = to_double(key, value);
    else if (key == "s_min")
      c.s_min = to_double(key, value);
    else if (key == "tolerance")
      c.tolerance = to_double(key, value);
    else if (key == "max_outer")
      c.max_outer = to_int(key, value);
    else if (key == "inner_max_iter")
      c.inner_max_iter = to_int(key, value);
    else
      throw bad_key();
  } else if (section == "run") {
    if (key == "realizations")
      c.realizations = to_int(key, value);
    else if (key == "seed")
      c.seed = to_u64(key, value);
    else if (key == "threads")
      c.threads = to_int(key, value);
    else
      throw bad_key();
  } else if (section == "sweep") {
    if (key == "param")
      c.sweep_param = value;
    else if (key == "values")
      c.sweep_values = to_list(key, value);
    else
      throw bad_key();
  } else {
    throw ConfigError("unknown section [" + section + "]");
  }
}

void validate(const ExperimentConfig& c) {
  const ScenarioConfig& s = c.scenario;
  if (s.num_aps < 1 || s.num_users < 1) throw ConfigError("num_aps and num_users must be >= 1");
  if (s.array_h < 1 || s.array_v < 1) throw ConfigError("array dimensions must be >= 1");
  if (s.num_paths < 2) throw ConfigError("num_paths must be >= 2");
  if (s.area_side_m <= 0.0 || s.wavelength <= 0.0) throw ConfigError("lengths must be positive");
  if (c.region_side_lambda < 0.0) throw ConfigError("region_side_lambda must be >= 0");
  if (c.p_u_w <= 0.0 || c.noise_w <= 0.0) throw ConfigError("powers must be positive");
  if (c.power.amplifier_efficiency <= 0.0 || c.power.bandwidth_hz <= 0.0 ||
      c.power.sampling_hz <= 0.0)
    throw ConfigError("power-model constants must be positive");
  if (c.b_min < 1.0 || c.b_max < c.b_min) throw ConfigError("need 1 <= b_min <= b_max");
  if (c.equal_bits < 1.0) throw ConfigError("equal_bits must be >= 1");
  if (c.tolerance <= 0.0) throw ConfigError("tolerance must be positive");
  if (c.max_outer < 1 || c.inner_max_iter < 1) throw ConfigError("iteration caps must be >= 1");
  if (c.realizations < 1) throw ConfigError("realizations must be >= 1");
  if (c.threads < 0) throw ConfigError("threads must be >= 0");
  if (!c.sweep_param.empty() && c.sweep_values.empty())
    throw ConfigError("sweep.values required when sweep.param is set");
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t cut = line.find_first_of("#;");
    if (cut != std::string::npos) line.erase(cut);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section at line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at line " + std::to_string(lineno));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError("key outside any section at line " + std::to_string(lineno));
    if (key.empty() || value.empty())
      throw ConfigError("empty key or value at line " + std::to_string(lineno));
    set_key(c, section, key, value);
  }
  c.scenario.region_side_m = c.region_side_lambda * c.scenario.wavelength;
  validate(c);
  return c;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

void apply_sweep_value(ExperimentConfig& config, const std::string& param, double value) {
  if (param == "bits" || param == "equal_bits") {
    config.equal_bits = value;
  } else if (param == "region_side_lambda") {
    config.region_side_lambda = value;
    config.scenario.region_side_m = value * config.scenario.wavelength;
  } else if (param == "num_aps") {
    if (value < 1.0 || value != std::floor(value))
      throw ConfigError("num_aps sweep values must be positive integers");
    config.scenario.num_aps = static_cast<int>(value);
  } else if (param == "num_users") {
    if (value < 1.0 || value != std::floor(value))
      throw ConfigError("num_users sweep values must be positive integers");
    config.scenario.num_users = static_cast<int>(value);
  } else if (param == "p_u_dbm") {
    config.p_u_w = dbm_to_watt(value);
  } else {
    throw ConfigError("unknown sweep parameter: " + param);
  }
}

std::string canonical_string(const ExperimentConfig& c) {
  std::ostringstream os;
  auto put = [&](const char* name, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << name << '=' << buf << '\n';
  };
  const ScenarioConfig& s = c.scenario;
  put("num_aps", s.num_aps);
  put("num_users", s.num_users);
  put("array_h", s.array_h);
  put("array_v", s.array_v);
  put("num_paths", s.num_paths);
  put("area_side_m", s.area_side_m);
  put("ricean", s.ricean);
  put("wavelength_m", s.wavelength);
  put("region_side_lambda", c.region_side_lambda);
  put("region_side_m", s.region_side_m);
  put("carrier_mhz", s.path_loss.carrier_mhz);
  put("breakpoint_near_m", s.path_loss.breakpoint_near_m);
  put("breakpoint_far_m", s.path_loss.breakpoint_far_m);
  put("ap_height_m", s.path_loss.ap_height_m);
  put("user_height_m", s.path_loss.user_height_m);
  put("shadow_sigma_db", s.path_loss.shadow_sigma_db);
  put("p_u_w", c.p_u_w);
  put("noise_w", c.noise_w);
  put("amplifier_efficiency", c.power.amplifier_efficiency);
  put("user_circuit_w", c.power.user_circuit_w);
  put("agc_w", c.power.agc_w);
  put("residual_w", c.power.residual_w);
  put("fom_w_j", c.power.fom_w_j);
  put("sampling_hz", c.power.sampling_hz);
  put("backhaul_traffic_w_per_bps", c.power.backhaul_traffic_w_per_bps);
  put("backhaul_fixed_w", c.power.backhaul_fixed_w);
  put("bandwidth_hz", c.power.bandwidth_hz);
  os << "power_control=" << (c.power_mode == PowerMode::Fp ? "fp" : "off") << '\n';
  os << "antenna_mode=" << (c.antenna_mode == AntennaMode::Fas ? "fas" : "fixed") << '\n';
  os << "bit_mode=" << (c.bit_mode == BitMode::Optimize ? "optimize" : "equal") << '\n';
  os << "zeta_mode=" << (c.zeta_mode == ZetaMode::ExactTable ? "table" : "analytic") << '\n';
  put("equal_bits", c.equal_bits);
  put("b_min", c.b_min);
  put("b_max", c.b_max);
  put("s_min", c.s_min);
  put("tolerance", c.tolerance);
  put("max_outer", c.max_outer);
  put("inner_max_iter", c.inner_max_iter);
  put("realizations", c.realizations);
  os << "seed=" << c.seed << '\n';
  os << "sweep_param=" << c.sweep_param << '\n';
  os << "sweep_values=";
  for (std::size_t i = 0; i < c.sweep_values.size(); ++i) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", c.sweep_values[i]);
    os << (i ? "," : "") << buf;
  }
  os << '\n';
  return os.str();
}

}  // namespace cfm
