#ifndef CFMIMO_QUANTIZATION_HPP
#define CFMIMO_QUANTIZATION_HPP

#include "cfmimo/types.hpp"

namespace cfm {

enum class ZetaMode {
  ExactTable,  // tabulated distortion factors for integer b <= 5, analytic above
  Analytic     // smooth 1 - (pi*sqrt(3)/2) * 2^(-2b) for every b
};

/// AQNM distortion factor for a given ADC bit depth. Non-integer bit depths
/// (relaxed variables) always use the analytic formula.
double quantization_factor(double bits, ZetaMode mode);

/// Per-AP distortion factors for a bit-allocation vector.
Vec quantization_factors(const Vec& bits, ZetaMode mode);

/// Diagonal of the quantization-noise covariance at AP m:
/// R_m = zeta (1 - zeta) diag(p_u sum_k eta_k h_mk h_mk^H + sigma^2 I).
Vec quantization_noise_diag(double zeta, const ChannelSet& channels, int ap, const Vec& eta,
                            double p_u, double noise_w);

}  // namespace cfm

#endif
