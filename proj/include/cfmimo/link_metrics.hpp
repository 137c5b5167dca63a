#ifndef CFMIMO_LINK_METRICS_HPP
#define CFMIMO_LINK_METRICS_HPP

#include "cfmimo/quantization.hpp"
#include "cfmimo/types.hpp"

namespace cfm {

/// Uplink power consumption model. All entries in SI units.
struct PowerModel {
  double amplifier_efficiency = 0.3;       // epsilon_k
  double user_circuit_w = 0.1;             // P_{k,tc}
  double agc_w = 0.002;                    // P_{m,AGC}
  double residual_w = 0.01;                // P_{m,res}, per antenna
  double fom_w_j = 15e-15;                 // Walden figure-of-merit, J per conversion step
  double sampling_hz = 2e9;                // f_s
  double backhaul_traffic_w_per_bps = 0.25e-9;  // P_{m,bc}
  double backhaul_fixed_w = 0.1;           // P_{m,0}
  double bandwidth_hz = 20e6;              // B

  double adc_w(double bits) const;                       // 2^b FOM f_s
  double ap_circuit_w(double bits, int antennas) const;  // P_{m,tc}
};

/// Full system state for SE/EE evaluation at one channel realization.
struct LinkState {
  ChannelSet channels;
  Vec zeta;  // M
  Vec eta;   // K
  double p_u = 0.0;
  double noise_w = 0.0;     // sigma^2
  Grid<CRow> combiners;     // M x K, v_mk

  int num_aps() const { return static_cast<int>(channels.h.rows()); }
  int num_users() const { return static_cast<int>(channels.h.cols()); }
  int antennas() const { return static_cast<int>(channels.h(0, 0).size()); }
};

/// Local MMSE combiners: one N x N Hermitian solve per AP, reused across users.
Grid<CRow> mmse_combiners(const ChannelSet& channels, const Vec& zeta, const Vec& eta, double p_u,
                          double noise_w);

struct SinrTerms {
  double desired = 0.0;
  double interference = 0.0;
  double noise = 0.0;
  double quantization = 0.0;
};

SinrTerms sinr_terms(const LinkState& state, int k);
SinrTerms sinr_terms_with_zeta(const LinkState& state, const Vec& zeta, int k);
double sinr(const LinkState& state, int k);
Vec all_sinr(const LinkState& state);

inline double spectral_efficiency(double sinr_value) { return std::log2(1.0 + sinr_value); }
Vec user_se(const LinkState& state);
double sum_se(const LinkState& state);

/// Total consumed power including the traffic-dependent backhaul term.
double total_power(const PowerModel& model, const Vec& eta, double p_u, const Vec& bits,
                   int antennas, double sum_se_value);

/// Backhaul-traffic-free denominator used by the Dinkelbach transform.
double dinkelbach_power(const PowerModel& model, const Vec& eta, double p_u, const Vec& bits,
                        int antennas);

double energy_efficiency(const PowerModel& model, const Vec& eta, double p_u, const Vec& bits,
                         int antennas, double sum_se_value);

/// Algebraically equivalent reciprocal form of the energy efficiency.
double energy_efficiency_reciprocal(const PowerModel& model, const Vec& eta, double p_u,
                                    const Vec& bits, int antennas, double sum_se_value);

}  // namespace cfm

#endif
