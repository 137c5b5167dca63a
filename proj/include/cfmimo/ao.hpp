#ifndef CFMIMO_AO_HPP
#define CFMIMO_AO_HPP

#include <string>

#include "cfmimo/apga.hpp"
#include "cfmimo/power_control.hpp"

namespace cfm {

struct AoOptions {
  bool optimize_power = true;
  bool optimize_positions = true;
  bool optimize_bits = true;
  double tolerance = 1e-5;  // on |EE_i - EE_{i-1}|^2
  int max_outer = 100;
  double s_min = 0.0;  // propagated into every stage
  PowerControlOptions power;
  ApgaOptions position;
  BitAllocOptions bits;
};

struct StageRecord {
  std::string stage;  // init | power | position | bits | refresh
  int outer_iter = 0;
  double sum_se = 0.0;
  double p_tot = 0.0;
  double ee = 0.0;
  bool reverted = false;      // stage result discarded because EE dropped
  std::vector<double> trace;  // inner-iteration objective values, if any
  Vec eta;
  std::vector<Vec2> u;
  Vec bits;
};

struct AoResult {
  std::vector<StageRecord> stages;
  double ee = 0.0;
  double sum_se = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Alternating optimization over transmit powers, FAS positions and ADC bit
/// allocation. Any stage (including the combiner refresh) that would lower the
/// energy efficiency is reverted, so the outer EE sequence is non-decreasing.
/// `state`, `positions` and `bits` carry the starting point and the result.
AoResult ao_optimize(LinkState& state, const Topology& topology, const LinkGeometry& geometry,
                     FasPositions& positions, Vec& bits, const PowerModel& model,
                     const AoOptions& options);

}  // namespace cfm

#endif
