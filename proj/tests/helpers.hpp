#ifndef CFMIMO_TEST_HELPERS_HPP
#define CFMIMO_TEST_HELPERS_HPP

#include <random>

#include "cfmimo/channel.hpp"
#include "cfmimo/link_metrics.hpp"

namespace cfm::test {

struct Instance {
  Scenario scenario;
  FasPositions positions;
  LinkState state;
  Vec bits;
};

struct InstanceSpec {
  int m = 2;
  int k = 2;
  int array_h = 2;
  int array_v = 1;
  int paths = 3;
  double region_lambda = 1.0;
  double p_u = 0.1;                 // 20 dBm
  double noise_w = 2.51188643150958e-13;  // -96 dBm
  Vec bits;  // empty -> all 4, table mode
  ZetaMode zeta_mode = ZetaMode::ExactTable;
};

inline Instance make_instance(std::uint64_t seed, const InstanceSpec& spec = {}) {
  ScenarioConfig cfg;
  cfg.num_aps = spec.m;
  cfg.num_users = spec.k;
  cfg.array_h = spec.array_h;
  cfg.array_v = spec.array_v;
  cfg.num_paths = spec.paths;
  cfg.area_side_m = 200.0;
  cfg.wavelength = 0.15;
  cfg.region_side_m = spec.region_lambda * cfg.wavelength;

  Instance inst;
  inst.scenario = generate_scenario(cfg, seed);
  inst.positions.u.assign(spec.k, Vec2::Zero());
  inst.bits = spec.bits.size() ? spec.bits : Vec::Constant(spec.m, 4.0);

  inst.state.channels = build_channels(inst.scenario.topology, inst.scenario.geometry,
                                       inst.positions);
  inst.state.zeta = quantization_factors(inst.bits, spec.zeta_mode);
  inst.state.eta = Vec::Ones(spec.k);
  inst.state.p_u = spec.p_u;
  inst.state.noise_w = spec.noise_w;
  inst.state.combiners = mmse_combiners(inst.state.channels, inst.state.zeta, inst.state.eta,
                                        inst.state.p_u, inst.state.noise_w);
  return inst;
}

}  // namespace cfm::test

#endif
