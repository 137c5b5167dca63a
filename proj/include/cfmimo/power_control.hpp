#ifndef CFMIMO_POWER_CONTROL_HPP
#define CFMIMO_POWER_CONTROL_HPP

#include "cfmimo/link_metrics.hpp"

namespace cfm {

/// SINR_k split into numerator A_k, denominator B_k and the stripped gain
/// Abar_k = A_k / (p_u eta_k).
struct RatioParts {
  Vec a;     // desired power
  Vec b;     // interference + noise + quantization
  Vec abar;  // |sum_m zeta_m v_mk h_mk|^2
};

RatioParts sinr_ratio_parts(const LinkState& state);

/// min{1, max{eta_min, x}} box-and-QoS clamp applied to the closed-form update.
inline double clamp_power_coefficient(double closed_form, double eta_min) {
  return std::min(1.0, std::max(eta_min, closed_form));
}

struct PowerControlOptions {
  double s_min = 0.0;       // per-user SE floor, bit/s/Hz
  double tolerance = 1e-5;  // on |EE_i - EE_{i-1}|^2
  int max_iter = 100;
};

struct PowerControlResult {
  Vec eta;
  std::vector<double> ee_trace;
  bool converged = false;
  std::vector<int> infeasible_users;  // QoS floor above 1, pinned to full power
};

/// Dinkelbach fractional-programming power control; combiners and channels in
/// `state` are held fixed, `state.eta` provides the starting point and receives
/// the optimized coefficients.
PowerControlResult power_control(LinkState& state, const PowerModel& model, const Vec& bits,
                                 const PowerControlOptions& options);

/// Lagrangian-dual surrogate value (natural-log SE scale; theta on the same scale).
double fp_dual_objective(const Vec& a, const Vec& b, const Vec& gamma, double theta,
                         double dinkelbach_power_value);

/// Quadratic-transform surrogate value at auxiliaries (gamma, varpi).
double fp_quadratic_objective(const Vec& a, const Vec& b, const Vec& gamma, const Vec& varpi,
                              double theta, double dinkelbach_power_value);

}  // namespace cfm

#endif
