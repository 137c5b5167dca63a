#include "cfmimo/ao.hpp"

namespace cfm {

namespace {

double current_ee(const LinkState& state, const PowerModel& model, const Vec& bits) {
  return energy_efficiency(model, state.eta, state.p_u, bits, state.antennas(), sum_se(state));
}

/// EE of `state` with hypothetical MMSE combiners; `state` is left untouched.
double refreshed_ee(const LinkState& state, const PowerModel& model, const Vec& bits) {
  LinkState probe = state;
  probe.combiners =
      mmse_combiners(probe.channels, probe.zeta, probe.eta, probe.p_u, probe.noise_w);
  return current_ee(probe, model, bits);
}

}  // namespace

AoResult ao_optimize(LinkState& state, const Topology& topology, const LinkGeometry& geometry,
                     FasPositions& positions, Vec& bits, const PowerModel& model,
                     const AoOptions& options) {
  AoOptions opt = options;
  opt.power.s_min = options.s_min;
  opt.position.s_min = options.s_min;
  opt.bits.s_min = options.s_min;

  AoResult result;
  double ee = current_ee(state, model, bits);

  auto record = [&](const char* name, int iter, bool reverted, std::vector<double> trace) {
    const double se = sum_se(state);
    StageRecord rec{name,
                    iter,
                    se,
                    total_power(model, state.eta, state.p_u, bits, state.antennas(), se),
                    ee,
                    reverted,
                    std::move(trace),
                    state.eta,
                    positions.u,
                    bits};
    result.stages.push_back(std::move(rec));
  };
  record("init", 0, false, {});

  // Runs one stage and keeps its result only if EE does not drop.
  auto guard = [&](const char* name, int iter, const std::function<std::vector<double>()>& run,
                   const std::function<void()>& snapshot, const std::function<void()>& restore) {
    snapshot();
    std::vector<double> trace = run();
    const double ee_next = current_ee(state, model, bits);
    bool reverted = false;
    if (ee_next < ee - 1e-12) {
      restore();
      reverted = true;
    } else {
      ee = ee_next;
    }
    record(name, iter, reverted, std::move(trace));
  };

  struct Snapshot {
    Vec eta, bits, zeta;
    FasPositions positions;
    ChannelSet channels;
    Grid<CRow> combiners;
  };
  auto take = [&] {
    return Snapshot{state.eta, bits, state.zeta, positions, state.channels, state.combiners};
  };
  auto put = [&](const Snapshot& s) {
    state.eta = s.eta;
    bits = s.bits;
    state.zeta = s.zeta;
    positions = s.positions;
    state.channels = s.channels;
    state.combiners = s.combiners;
  };

  Vec eta_snap;
  FasPositions pos_snap;
  ChannelSet ch_snap;
  Vec bits_snap, zeta_snap;
  Grid<CRow> comb_snap;

  for (int iter = 1; iter <= options.max_outer; ++iter) {
    const double ee_prev = ee;
    // Best state seen this iteration; the position stage may accept a
    // stale-filter dip the later stages fail to recover from.
    double best_ee = ee;
    Snapshot best_snap = take();
    auto track_best = [&] {
      if (ee > best_ee) {
        best_ee = ee;
        best_snap = take();
      }
    };

    if (options.optimize_power) {
      guard(
          "power", iter,
          [&] {
            PowerControlResult r = power_control(state, model, bits, opt.power);
            return r.ee_trace;
          },
          [&] { eta_snap = state.eta; }, [&] { state.eta = eta_snap; });
      track_best();
    }

    if (options.optimize_positions) {
      // Judged with refreshed filters: a good move can look bad through
      // combiners matched to the old positions.
      pos_snap = positions;
      ch_snap = state.channels;
      const double ref_before = refreshed_ee(state, model, bits);
      ApgaResult r = apga_positions(state, topology, geometry, positions, opt.position);
      const double ref_after = refreshed_ee(state, model, bits);
      bool reverted = false;
      if (ref_after < ref_before - 1e-12) {
        positions = pos_snap;
        state.channels = ch_snap;
        reverted = true;
      } else {
        ee = current_ee(state, model, bits);  // stale-filter EE may dip here
      }
      record("position", iter, reverted, std::move(r.trace));
      track_best();
    }

    if (options.optimize_bits) {
      guard(
          "bits", iter,
          [&] {
            ApgaResult r = apga_bits(state, model, bits, opt.bits);
            return r.trace;
          },
          [&] {
            bits_snap = bits;
            zeta_snap = state.zeta;
          },
          [&] {
            bits = bits_snap;
            state.zeta = zeta_snap;
          });
      track_best();
    }

    guard(
        "refresh", iter,
        [&] {
          state.combiners =
              mmse_combiners(state.channels, state.zeta, state.eta, state.p_u, state.noise_w);
          return std::vector<double>{};
        },
        [&] { comb_snap = state.combiners; }, [&] { state.combiners = comb_snap; });
    track_best();

    result.iterations = iter;
    if (ee < best_ee - 1e-12) {
      // The tail of the iteration lost ground; rewind to the best checkpoint.
      put(best_snap);
      ee = best_ee;
      record("rollback", iter, true, {});
    }
    // EE in Mbit/J for the stop test, matching the tolerance's scale.
    const double delta = (ee - ee_prev) * 1e-6;
    if (delta * delta <= options.tolerance) {
      result.converged = true;
      break;
    }
  }

  result.ee = ee;
  result.sum_se = sum_se(state);
  return result;
}

}  // namespace cfm
