#include "cfmimo/link_metrics.hpp"

#include <cmath>

namespace cfm {

double PowerModel::adc_w(double bits) const { return std::exp2(bits) * fom_w_j * sampling_hz; }

double PowerModel::ap_circuit_w(double bits, int antennas) const {
  const double c = std::min(bits - 1.0, 1.0);
  return c * agc_w + 2.0 * antennas * adc_w(bits) + antennas * residual_w;
}

Grid<CRow> mmse_combiners(const ChannelSet& channels, const Vec& zeta, const Vec& eta, double p_u,
                          double noise_w) {
  const Eigen::Index m_count = channels.h.rows();
  const Eigen::Index k_count = channels.h.cols();
  const Eigen::Index n = channels.h(0, 0).size();
  Grid<CRow> v(m_count, k_count);
  for (Eigen::Index m = 0; m < m_count; ++m) {
    CMat gram = CMat::Zero(n, n);
    for (Eigen::Index k = 0; k < k_count; ++k) {
      const CVec& h = channels.h(m, k);
      gram.noalias() += (p_u * eta[k]) * (h * h.adjoint());
    }
    CMat a = zeta[m] * gram;
    a.diagonal() += (1.0 - zeta[m]) * gram.diagonal();
    a.diagonal().array() += noise_w;
    Eigen::LDLT<CMat> ldlt(a);
    for (Eigen::Index k = 0; k < k_count; ++k) {
      const CVec x = ldlt.solve(channels.h(m, k));
      if (!x.allFinite())
        throw std::runtime_error("mmse_combiners: singular interference covariance");
      v(m, k) = std::sqrt(p_u * eta[k]) * x.adjoint();
    }
  }
  return v;
}

SinrTerms sinr_terms_with_zeta(const LinkState& state, const Vec& zeta, int k) {
  const int m_count = state.num_aps();
  const int k_count = state.num_users();
  SinrTerms t;

  Complex desired_amp = 0.0;
  for (int m = 0; m < m_count; ++m)
    desired_amp += zeta[m] * (state.combiners(m, k) * state.channels.h(m, k)).value();
  t.desired = state.p_u * state.eta[k] * std::norm(desired_amp);

  for (int kp = 0; kp < k_count; ++kp) {
    if (kp == k) continue;
    Complex amp = 0.0;
    for (int m = 0; m < m_count; ++m)
      amp += zeta[m] * (state.combiners(m, k) * state.channels.h(m, kp)).value();
    t.interference += state.p_u * state.eta[kp] * std::norm(amp);
  }

  for (int m = 0; m < m_count; ++m) {
    const double v2 = state.combiners(m, k).squaredNorm();
    t.noise += state.noise_w * zeta[m] * zeta[m] * v2;
    const Vec r =
        quantization_noise_diag(zeta[m], state.channels, m, state.eta, state.p_u, state.noise_w);
    t.quantization += (state.combiners(m, k).cwiseAbs2().transpose().cwiseProduct(r)).sum();
  }
  return t;
}

SinrTerms sinr_terms(const LinkState& state, int k) {
  return sinr_terms_with_zeta(state, state.zeta, k);
}

double sinr(const LinkState& state, int k) {
  const SinrTerms t = sinr_terms(state, k);
  const double den = t.interference + t.noise + t.quantization;
  if (den <= 0.0) return 0.0;
  return t.desired / den;
}

Vec all_sinr(const LinkState& state) {
  Vec out(state.num_users());
  for (int k = 0; k < state.num_users(); ++k) out[k] = sinr(state, k);
  return out;
}

Vec user_se(const LinkState& state) {
  Vec out = all_sinr(state);
  for (Eigen::Index k = 0; k < out.size(); ++k) out[k] = spectral_efficiency(out[k]);
  return out;
}

double sum_se(const LinkState& state) { return user_se(state).sum(); }

double total_power(const PowerModel& model, const Vec& eta, double p_u, const Vec& bits,
                   int antennas, double sum_se_value) {
  double p = 0.0;
  for (Eigen::Index k = 0; k < eta.size(); ++k)
    p += p_u * eta[k] / model.amplifier_efficiency + model.user_circuit_w;
  for (Eigen::Index m = 0; m < bits.size(); ++m) {
    p += model.ap_circuit_w(bits[m], antennas);
    p += model.backhaul_traffic_w_per_bps * model.bandwidth_hz * sum_se_value +
         model.backhaul_fixed_w;
  }
  return p;
}

double dinkelbach_power(const PowerModel& model, const Vec& eta, double p_u, const Vec& bits,
                        int antennas) {
  double p = 0.0;
  for (Eigen::Index k = 0; k < eta.size(); ++k)
    p += p_u * eta[k] / model.amplifier_efficiency + model.user_circuit_w;
  for (Eigen::Index m = 0; m < bits.size(); ++m)
    p += model.ap_circuit_w(bits[m], antennas) + model.backhaul_fixed_w;
  return p;
}

double energy_efficiency(const PowerModel& model, const Vec& eta, double p_u, const Vec& bits,
                         int antennas, double sum_se_value) {
  if (sum_se_value <= 0.0) return 0.0;
  return model.bandwidth_hz * sum_se_value /
         total_power(model, eta, p_u, bits, antennas, sum_se_value);
}

double energy_efficiency_reciprocal(const PowerModel& model, const Vec& eta, double p_u,
                                    const Vec& bits, int antennas, double sum_se_value) {
  if (sum_se_value <= 0.0) return 0.0;
  const double static_over_se = dinkelbach_power(model, eta, p_u, bits, antennas) / sum_se_value;
  const double traffic = bits.size() * model.backhaul_traffic_w_per_bps * model.bandwidth_hz;
  return model.bandwidth_hz / (static_over_se + traffic);
}

}  // namespace cfm
