#ifndef CFMIMO_APGA_HPP
#define CFMIMO_APGA_HPP

#include <functional>

#include "cfmimo/channel.hpp"
#include "cfmimo/link_metrics.hpp"

namespace cfm {

struct LineSearchOptions {
  double shrink = 0.5;     // iota
  double control = 1e-4;   // varrho
  double initial_step = 1.0;
  int max_shrinks = 50;
};

struct LineSearchResult {
  Vec point;
  double value = 0.0;  // objective at the accepted point
  double step = 0.0;
  bool stalled = false;
};

/// Ascent Armijo backtracking with projection: accepts the largest
/// alpha * shrink^j whose projected candidate satisfies
/// f(x+) >= f(x) + control * alpha * ||x+ - x||.
LineSearchResult backtracking_step(const Vec& x, double fx, const Vec& gradient,
                                   const std::function<double(const Vec&)>& objective,
                                   const std::function<Vec(const Vec&)>& project,
                                   const LineSearchOptions& options);

/// Nesterov-style momentum recurrence t_{n+1} = (1 + sqrt(4 t_n^2 + 1)) / 2.
inline double next_momentum(double t) { return (1.0 + std::sqrt(4.0 * t * t + 1.0)) / 2.0; }

struct PenaltyOptions {
  double coefficient = 100.0;  // xi, escalated while QoS losses stay positive
  double growth = 10.0;
  double max_coefficient = 1e6;
};

struct ApgaOptions {
  double tolerance = 1e-5;  // on |f_xi^{n+1} - f_xi^n|
  int max_iter = 100;
  double s_min = 0.0;
  // Starting point for the position ascent: greedy per-user scan over an
  // init_grid x init_grid lattice of the movement region (0/1 disables). The
  // objective oscillates at wavelength scale, so a plain center start often
  // lands in a poor basin.
  int init_grid = 0;
  // Evaluate scan candidates (and run the ascent) with MMSE combiners matched
  // to the scan winner instead of the caller's combiners. Lets the stage leave
  // the coherence basin of the stale filters; the caller's combiners are not
  // modified.
  bool scan_refresh = false;
  LineSearchOptions line_search;
  PenaltyOptions penalty;
};

struct ApgaResult {
  std::vector<double> trace;  // penalized objective at accepted iterates (final xi stage)
  double objective = 0.0;
  double penalty_coefficient = 0.0;
  int iterations = 0;
  bool stalled = false;
};

/// QoS gaps g_k = (2^{S_min} - 1) B_k - A_k; g_k <= 0 iff SE_k >= S_min.
Vec qos_gap(const LinkState& state, double s_min);

/// sum_k SE_k - xi * sum_k max(0, g_k)^2 with combiners, eta and bits fixed.
double penalized_sum_se(const LinkState& state, double xi, double s_min);

/// Analytic gradient of penalized_sum_se with respect to the stacked FAS
/// positions [x_1, y_1, ..., x_K, y_K]. Channels in `state` must match `positions`.
Vec position_gradient(const LinkState& state, const Topology& topology,
                      const LinkGeometry& geometry, const FasPositions& positions, double xi,
                      double s_min);

Vec project_region(const Vec& stacked_positions, const std::vector<MoveRegion>& regions);

/// Accelerated projected gradient ascent over FAS positions. Mutates `state`
/// channels and `positions` to the returned iterate.
ApgaResult apga_positions(LinkState& state, const Topology& topology,
                          const LinkGeometry& geometry, FasPositions& positions,
                          const ApgaOptions& options);

/// f_xi(b) = sum_k SE_k(b) - theta * Pbar(b) - xi * sum_k max(0, g_k(b))^2,
/// with the analytic distortion factor throughout.
double bit_objective(const LinkState& state, const PowerModel& model, const Vec& bits,
                     double theta, double xi, double s_min);

Vec bit_gradient(const LinkState& state, const PowerModel& model, const Vec& bits, double theta,
                 double xi, double s_min);

/// Clamp to [b_min, b_max] and round interior values to the nearest integer
/// (half away from zero).
Vec project_bits(const Vec& bits, double b_min, double b_max);

struct BitAllocOptions : ApgaOptions {
  double b_min = 1.0;
  double b_max = 5.0;

  // A gradient step must move a coordinate by >= 0.5 to clear the integer
  // rounding; bit gradients are often small, so start the backtracking high.
  BitAllocOptions() { line_search.initial_step = 64.0; }
};

/// Accelerated projected gradient ascent over the relaxed per-AP bit counts,
/// with integer projection after every update and a per-iteration Dinkelbach
/// auxiliary refresh. Mutates `bits` and `state.zeta` (analytic mode).
ApgaResult apga_bits(LinkState& state, const PowerModel& model, Vec& bits,
                     const BitAllocOptions& options);

}  // namespace cfm

#endif
