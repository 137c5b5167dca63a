#include "cfmimo/power_control.hpp"

#include <cmath>

namespace cfm {

namespace {
constexpr double kLn2 = 0.6931471805599453;

/// eta-independent couplings extracted from fixed channels and combiners.
struct Couplings {
  CMat cross;  // (k, k') -> sum_m zeta_m v_mk h_mk'
  Mat qsig;    // (k, k') -> p_u sum_m zeta_m (1-zeta_m) sum_n |v_mk[n]|^2 |h_mk'[n]|^2
  Vec ns;      // sigma^2 sum_m zeta_m^2 ||v_mk||^2
  Vec qn0;     // sigma^2 sum_m zeta_m (1-zeta_m) ||v_mk||^2
};

Couplings precompute(const LinkState& state) {
  const int m_count = state.num_aps();
  const int k_count = state.num_users();
  Couplings c;
  c.cross = CMat::Zero(k_count, k_count);
  c.qsig = Mat::Zero(k_count, k_count);
  c.ns = Vec::Zero(k_count);
  c.qn0 = Vec::Zero(k_count);
  for (int k = 0; k < k_count; ++k) {
    for (int m = 0; m < m_count; ++m) {
      const CRow& v = state.combiners(m, k);
      const double z = state.zeta[m];
      const double zq = z * (1.0 - z);
      const double v2 = v.squaredNorm();
      c.ns[k] += state.noise_w * z * z * v2;
      c.qn0[k] += state.noise_w * zq * v2;
      for (int kp = 0; kp < k_count; ++kp) {
        const CVec& h = state.channels.h(m, kp);
        c.cross(k, kp) += z * (v * h).value();
        c.qsig(k, kp) +=
            state.p_u * zq * (v.cwiseAbs2().transpose().cwiseProduct(h.cwiseAbs2())).sum();
      }
    }
  }
  return c;
}

void ratio_parts(const Couplings& c, const Vec& eta, double p_u, Vec& a, Vec& b) {
  const Eigen::Index k_count = eta.size();
  a.resize(k_count);
  b.resize(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    a[k] = p_u * eta[k] * std::norm(c.cross(k, k));
    double den = c.ns[k] + c.qn0[k];
    for (Eigen::Index kp = 0; kp < k_count; ++kp) {
      if (kp != k) den += p_u * eta[kp] * std::norm(c.cross(k, kp));
      den += eta[kp] * c.qsig(k, kp);
    }
    b[k] = den;
  }
}

double sum_se_of(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k)
    if (b[k] > 0.0) s += std::log2(1.0 + a[k] / b[k]);
  return s;
}
}  // namespace

RatioParts sinr_ratio_parts(const LinkState& state) {
  const Couplings c = precompute(state);
  RatioParts parts;
  ratio_parts(c, state.eta, state.p_u, parts.a, parts.b);
  parts.abar.resize(state.num_users());
  for (int k = 0; k < state.num_users(); ++k) parts.abar[k] = std::norm(c.cross(k, k));
  return parts;
}

double fp_dual_objective(const Vec& a, const Vec& b, const Vec& gamma, double theta,
                         double dinkelbach_power_value) {
  double s = -theta * dinkelbach_power_value;
  for (Eigen::Index k = 0; k < a.size(); ++k)
    s += std::log(1.0 + gamma[k]) - gamma[k] + (1.0 + gamma[k]) * a[k] / (a[k] + b[k]);
  return s;
}

double fp_quadratic_objective(const Vec& a, const Vec& b, const Vec& gamma, const Vec& varpi,
                              double theta, double dinkelbach_power_value) {
  double s = -theta * dinkelbach_power_value;
  for (Eigen::Index k = 0; k < a.size(); ++k)
    s += std::log(1.0 + gamma[k]) - gamma[k] +
         2.0 * varpi[k] * std::sqrt((1.0 + gamma[k]) * a[k]) -
         varpi[k] * varpi[k] * (a[k] + b[k]);
  return s;
}

PowerControlResult power_control(LinkState& state, const PowerModel& model, const Vec& bits,
                                 const PowerControlOptions& options) {
  const int k_count = state.num_users();
  const int n = state.antennas();
  const Couplings c = precompute(state);
  const double qos_factor = std::exp2(options.s_min) - 1.0;

  PowerControlResult result;
  Vec eta = state.eta;
  Vec a, b;
  ratio_parts(c, eta, state.p_u, a, b);
  double ee =
      energy_efficiency(model, eta, state.p_u, bits, n, sum_se_of(a, b));
  result.ee_trace.push_back(ee);

  std::vector<bool> flagged(k_count, false);
  for (int iter = 0; iter < options.max_iter; ++iter) {
    const double pbar = dinkelbach_power(model, eta, state.p_u, bits, n);
    const double theta = kLn2 * sum_se_of(a, b) / pbar;  // natural-log objective scale

    // Inner quadratic-transform ascent at fixed theta; refreshing theta after
    // every single surrogate step converges far too slowly.
    Vec eta_next = eta;
    Vec a_next = a, b_next = b;
    for (int inner_iter = 0; inner_iter < 200; ++inner_iter) {
      Vec eta_min(k_count), gamma(k_count), varpi(k_count);
      for (int k = 0; k < k_count; ++k) {
        const double abar = std::norm(c.cross(k, k));
        // A zero combiner strips the user's gain entirely; keep it silent.
        if (abar <= 0.0 || b_next[k] <= 0.0) {
          if (abar <= 0.0 && qos_factor > 0.0) flagged[k] = true;
          eta_min[k] = 0.0;
          gamma[k] = 0.0;
          varpi[k] = 0.0;
          continue;
        }
        double floor = qos_factor * b_next[k] / (state.p_u * abar);
        if (floor > 1.0) {
          flagged[k] = true;
          floor = 1.0;
        }
        eta_min[k] = floor;
        gamma[k] = a_next[k] / b_next[k];
        varpi[k] = std::sqrt((1.0 + gamma[k]) * a_next[k]) / (a_next[k] + b_next[k]);
      }

      Vec eta_trial(k_count);
      for (int k = 0; k < k_count; ++k) {
        const double num = (1.0 + gamma[k]) * varpi[k] * varpi[k] * std::norm(c.cross(k, k));
        if (num <= 0.0) {
          eta_trial[k] = eta_min[k];
          continue;
        }
        double inner = theta / model.amplifier_efficiency;
        for (int kp = 0; kp < k_count; ++kp)
          inner += varpi[kp] * varpi[kp] *
                   (std::norm(c.cross(kp, k)) + c.qsig(kp, k) / state.p_u);
        eta_trial[k] = clamp_power_coefficient(num / (state.p_u * inner * inner), eta_min[k]);
      }
      const double move = (eta_trial - eta_next).lpNorm<Eigen::Infinity>();
      eta_next = eta_trial;
      ratio_parts(c, eta_next, state.p_u, a_next, b_next);
      if (move <= 1e-12) break;
    }
    const double ee_next = energy_efficiency(model, eta_next, state.p_u, bits, n,
                                             sum_se_of(a_next, b_next));
    if (ee_next < ee - 1e-12) {
      // Safeguard: stop at the last improving iterate.
      result.converged = true;
      break;
    }
    eta = eta_next;
    a = a_next;
    b = b_next;
    result.ee_trace.push_back(ee_next);
    // Stopping rule evaluated with EE in Mbit/J so the default tolerance bites.
    const double delta = (ee_next - ee) * 1e-6;
    ee = ee_next;
    if (delta * delta <= options.tolerance) {
      result.converged = true;
      break;
    }
  }

  for (int k = 0; k < k_count; ++k)
    if (flagged[k]) result.infeasible_users.push_back(k);
  result.eta = eta;
  state.eta = eta;
  return result;
}

}  // namespace cfm
