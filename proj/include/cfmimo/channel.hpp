#ifndef CFMIMO_CHANNEL_HPP
#define CFMIMO_CHANNEL_HPP

#include <cstdint>
#include <utility>

#include "cfmimo/types.hpp"

namespace cfm {

/// Per-path phase response of an antenna displaced from its local origin.
/// Element l is exp(j (2pi/lambda) (x sin(theta_l) cos(phi_l) + y cos(theta_l))).
CVec field_response(const Vec2& displacement, const Vec& elevation, const Vec& azimuth,
                    double wavelength);

CVec rx_field_response(const Vec2& ap_antenna_offset, const PathSet& link, double wavelength);
CVec tx_field_response(const Vec2& user_position, const PathSet& link, double wavelength);

/// Receive responses for all N antennas of one AP, stacked as L_r x N.
CMat rx_response_matrix(const Eigen::Matrix2Xd& antenna_offsets, const PathSet& link,
                        double wavelength);

/// h = G^H Sigma f.
CVec channel_vector(const CMat& rx_response, const CMat& path_response, const CVec& tx_response);

ChannelSet build_channels(const Topology& topology, const LinkGeometry& geometry,
                          const FasPositions& positions);

/// Recomputes the tx responses and channels of user k only; all other links untouched.
void update_user_channels(ChannelSet& channels, const Topology& topology,
                          const LinkGeometry& geometry, int k, const Vec2& position);

/// Three-slope distance-power law with a Hata-COST231 constant; distances in meters.
struct PathLossModel {
  double breakpoint_near_m = 10.0;
  double breakpoint_far_m = 50.0;
  double ap_height_m = 15.0;
  double user_height_m = 1.65;
  double carrier_mhz = 2000.0;
  double shadow_sigma_db = 0.0;  // log-normal shadowing, off by default

  double attenuation_db(double distance_m) const;
};

struct ScenarioConfig {
  int num_aps = 1;
  int num_users = 1;
  int array_h = 2;
  int array_v = 2;
  int num_paths = 10;  // L, shared by tx and rx
  double area_side_m = 200.0;
  double ricean = 1.0;
  double wavelength = 0.15;
  double region_side_m = 0.15;  // FAS movement square side, default one wavelength
  PathLossModel path_loss;
};

struct Scenario {
  Topology topology;
  LinkGeometry geometry;
};

/// Random drop: uniform AP/user placement, i.i.d. uniform angles on [-pi/2, pi/2],
/// diagonal path-response matrices with Ricean power split. Deterministic per seed.
Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed);

}  // namespace cfm

#endif
