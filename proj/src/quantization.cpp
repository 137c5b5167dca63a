#include "cfmimo/quantization.hpp"

#include <array>
#include <cmath>

namespace cfm {

namespace {
constexpr std::array<double, 5> kExactZeta = {0.6366, 0.8825, 0.9655, 0.9905, 0.9975};
constexpr double kPi = 3.14159265358979323846;

double analytic_zeta(double bits) {
  return 1.0 - (kPi * std::sqrt(3.0) / 2.0) * std::exp2(-2.0 * bits);
}
}  // namespace

double quantization_factor(double bits, ZetaMode mode) {
  if (!(bits >= 1.0)) throw std::invalid_argument("quantization_factor: bits must be >= 1");
  if (mode == ZetaMode::ExactTable) {
    const double rounded = std::round(bits);
    const bool integral = std::abs(bits - rounded) < 1e-12;
    if (integral && rounded <= 5.0) return kExactZeta[static_cast<int>(rounded) - 1];
  }
  return analytic_zeta(bits);
}

Vec quantization_factors(const Vec& bits, ZetaMode mode) {
  Vec out(bits.size());
  for (Eigen::Index m = 0; m < bits.size(); ++m) out[m] = quantization_factor(bits[m], mode);
  return out;
}

Vec quantization_noise_diag(double zeta, const ChannelSet& channels, int ap, const Vec& eta,
                            double p_u, double noise_w) {
  if (!(zeta > 0.0) || zeta > 1.0)
    throw std::invalid_argument("quantization_noise_diag: zeta must be in (0, 1]");
  if (p_u < 0.0 || noise_w < 0.0)
    throw std::invalid_argument("quantization_noise_diag: negative power");
  const Eigen::Index n = channels.h(ap, 0).size();
  Vec diag = Vec::Constant(n, noise_w);
  for (Eigen::Index k = 0; k < eta.size(); ++k) {
    if (eta[k] < 0.0 || eta[k] > 1.0)
      throw std::invalid_argument("quantization_noise_diag: eta out of [0, 1]");
    diag += p_u * eta[k] * channels.h(ap, k).cwiseAbs2();
  }
  return zeta * (1.0 - zeta) * diag;
}

}  // namespace cfm
