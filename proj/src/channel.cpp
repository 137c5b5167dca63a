#include "cfmimo/channel.hpp"

#include <cmath>
#include <random>

namespace cfm {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void Topology::validate() const {
  if (num_aps < 1 || num_users < 1 || array_h < 1 || array_v < 1)
    throw std::invalid_argument("topology: counts must be positive");
  if (!(wavelength > 0.0)) throw std::invalid_argument("topology: wavelength must be positive");
  if (static_cast<int>(ap_positions.size()) != num_aps ||
      static_cast<int>(user_positions.size()) != num_users ||
      static_cast<int>(ap_antenna_offsets.size()) != num_aps ||
      static_cast<int>(fas_regions.size()) != num_users)
    throw std::invalid_argument("topology: inconsistent field sizes");
  for (const auto& r : fas_regions)
    if (!(r.d_min < r.d_max) && r.d_min != r.d_max)
      throw std::invalid_argument("topology: region requires d_min <= d_max");
  for (const auto& p : ap_positions)
    if (!p.allFinite()) throw std::invalid_argument("topology: non-finite AP position");
  for (const auto& p : user_positions)
    if (!p.allFinite()) throw std::invalid_argument("topology: non-finite user position");
  for (const auto& t : ap_antenna_offsets) {
    if (t.cols() != antennas_per_ap())
      throw std::invalid_argument("topology: antenna offset count != N_h * N_v");
    if (!t.allFinite()) throw std::invalid_argument("topology: non-finite antenna offset");
  }
}

CVec field_response(const Vec2& displacement, const Vec& elevation, const Vec& azimuth,
                    double wavelength) {
  if (!(wavelength > 0.0)) throw std::invalid_argument("field_response: wavelength must be > 0");
  if (elevation.size() != azimuth.size())
    throw std::invalid_argument("field_response: angle vectors disagree");
  if (!displacement.allFinite())
    throw std::invalid_argument("field_response: non-finite displacement");
  const double scale = 2.0 * kPi / wavelength;
  CVec out(elevation.size());
  for (Eigen::Index l = 0; l < elevation.size(); ++l) {
    const double rho = displacement.x() * std::sin(elevation[l]) * std::cos(azimuth[l]) +
                       displacement.y() * std::cos(elevation[l]);
    out[l] = std::polar(1.0, scale * rho);
  }
  return out;
}

CVec rx_field_response(const Vec2& ap_antenna_offset, const PathSet& link, double wavelength) {
  return field_response(ap_antenna_offset, link.rx_elevation, link.rx_azimuth, wavelength);
}

CVec tx_field_response(const Vec2& user_position, const PathSet& link, double wavelength) {
  return field_response(user_position, link.tx_elevation, link.tx_azimuth, wavelength);
}

CMat rx_response_matrix(const Eigen::Matrix2Xd& antenna_offsets, const PathSet& link,
                        double wavelength) {
  CMat g(link.rx_elevation.size(), antenna_offsets.cols());
  for (Eigen::Index n = 0; n < antenna_offsets.cols(); ++n)
    g.col(n) = rx_field_response(antenna_offsets.col(n), link, wavelength);
  return g;
}

CVec channel_vector(const CMat& rx_response, const CMat& path_response, const CVec& tx_response) {
  if (rx_response.rows() != path_response.rows() || path_response.cols() != tx_response.size())
    throw std::invalid_argument("channel_vector: dimension mismatch");
  return rx_response.adjoint() * (path_response * tx_response);
}

ChannelSet build_channels(const Topology& topology, const LinkGeometry& geometry,
                          const FasPositions& positions) {
  topology.validate();
  const int m_count = topology.num_aps;
  const int k_count = topology.num_users;
  if (static_cast<int>(positions.u.size()) != k_count)
    throw std::invalid_argument("build_channels: position count != num_users");
  for (int k = 0; k < k_count; ++k) {
    const auto& r = topology.fas_regions[k];
    const auto& u = positions.u[k];
    if (u.x() < r.d_min || u.x() > r.d_max || u.y() < r.d_min || u.y() > r.d_max)
      throw std::invalid_argument("build_channels: position outside movement region");
  }

  ChannelSet out;
  out.h = Grid<CVec>(m_count, k_count);
  out.rx_response = Grid<CMat>(m_count, k_count);
  out.tx_response = Grid<CVec>(m_count, k_count);
  for (int m = 0; m < m_count; ++m) {
    for (int k = 0; k < k_count; ++k) {
      const PathSet& link = geometry.links(m, k);
      out.rx_response(m, k) =
          rx_response_matrix(topology.ap_antenna_offsets[m], link, topology.wavelength);
      out.tx_response(m, k) = tx_field_response(positions.u[k], link, topology.wavelength);
      out.h(m, k) = channel_vector(out.rx_response(m, k), link.path_response, out.tx_response(m, k));
    }
  }
  return out;
}

void update_user_channels(ChannelSet& channels, const Topology& topology,
                          const LinkGeometry& geometry, int k, const Vec2& position) {
  for (int m = 0; m < topology.num_aps; ++m) {
    const PathSet& link = geometry.links(m, k);
    channels.tx_response(m, k) = tx_field_response(position, link, topology.wavelength);
    channels.h(m, k) =
        channel_vector(channels.rx_response(m, k), link.path_response, channels.tx_response(m, k));
  }
}

double PathLossModel::attenuation_db(double distance_m) const {
  const double log_f = std::log10(carrier_mhz);
  const double fixed = 46.3 + 33.9 * log_f - 13.82 * std::log10(ap_height_m) -
                       (1.1 * log_f - 0.7) * user_height_m + (1.56 * log_f - 0.8);
  const double d0 = breakpoint_near_m * 1e-3;  // km
  const double d1 = breakpoint_far_m * 1e-3;
  const double d = std::max(distance_m, 1e-3) * 1e-3;
  double pl;
  if (d > d1) {
    pl = -fixed - 35.0 * std::log10(d);
  } else if (d > d0) {
    pl = -fixed - 15.0 * std::log10(d1) - 20.0 * std::log10(d);
  } else {
    pl = -fixed - 15.0 * std::log10(d1) - 20.0 * std::log10(d0);
  }
  return pl;
}

Scenario generate_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  if (!(config.area_side_m > 0.0))
    throw std::invalid_argument("generate_scenario: area side must be positive");
  if (config.num_paths < 2)
    throw std::invalid_argument("generate_scenario: need at least two paths for the Ricean split");
  if (!(config.wavelength > 0.0))
    throw std::invalid_argument("generate_scenario: wavelength must be positive");
  if (config.region_side_m < 0.0)
    throw std::invalid_argument("generate_scenario: region side must be non-negative");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni_pos(0.0, config.area_side_m);
  std::uniform_real_distribution<double> uni_angle(-kPi / 2.0, kPi / 2.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Scenario sc;
  Topology& topo = sc.topology;
  topo.num_aps = config.num_aps;
  topo.num_users = config.num_users;
  topo.array_h = config.array_h;
  topo.array_v = config.array_v;
  topo.wavelength = config.wavelength;

  for (int m = 0; m < config.num_aps; ++m) {
    const double x = uni_pos(rng);
    const double y = uni_pos(rng);
    topo.ap_positions.emplace_back(x, y);
  }
  for (int k = 0; k < config.num_users; ++k) {
    const double x = uni_pos(rng);
    const double y = uni_pos(rng);
    topo.user_positions.emplace_back(x, y);
  }

  // Half-wavelength uniform planar array, centered on the AP reference point.
  const int n_total = topo.antennas_per_ap();
  Eigen::Matrix2Xd offsets(2, n_total);
  int idx = 0;
  for (int nv = 0; nv < config.array_v; ++nv) {
    for (int nh = 0; nh < config.array_h; ++nh) {
      offsets(0, idx) = (nh - (config.array_h - 1) / 2.0) * config.wavelength / 2.0;
      offsets(1, idx) = (nv - (config.array_v - 1) / 2.0) * config.wavelength / 2.0;
      ++idx;
    }
  }
  topo.ap_antenna_offsets.assign(config.num_aps, offsets);
  topo.fas_regions.assign(config.num_users,
                          MoveRegion{-config.region_side_m / 2.0, config.region_side_m / 2.0});

  LinkGeometry& geom = sc.geometry;
  geom.ricean = config.ricean;
  geom.links = Grid<PathSet>(config.num_aps, config.num_users);
  const int l = config.num_paths;
  const double kappa = config.ricean;
  for (int m = 0; m < config.num_aps; ++m) {
    for (int k = 0; k < config.num_users; ++k) {
      PathSet& link = geom.links(m, k);
      link.rx_elevation = Vec(l);
      link.rx_azimuth = Vec(l);
      link.tx_elevation = Vec(l);
      link.tx_azimuth = Vec(l);
      for (int i = 0; i < l; ++i) link.rx_elevation[i] = uni_angle(rng);
      for (int i = 0; i < l; ++i) link.rx_azimuth[i] = uni_angle(rng);
      for (int i = 0; i < l; ++i) link.tx_elevation[i] = uni_angle(rng);
      for (int i = 0; i < l; ++i) link.tx_azimuth[i] = uni_angle(rng);

      const double dist = (topo.ap_positions[m] - topo.user_positions[k]).norm();
      double pl_db = config.path_loss.attenuation_db(dist);
      if (config.path_loss.shadow_sigma_db > 0.0)
        pl_db += config.path_loss.shadow_sigma_db * gauss(rng);
      link.large_scale = std::pow(10.0, pl_db / 10.0);

      const double var_los = link.large_scale * kappa / (kappa + 1.0);
      const double var_nlos = link.large_scale / ((kappa + 1.0) * (l - 1));
      link.path_response = CMat::Zero(l, l);
      for (int i = 0; i < l; ++i) {
        const double sd = std::sqrt((i == 0 ? var_los : var_nlos) / 2.0);
        link.path_response(i, i) = Complex(sd * gauss(rng), sd * gauss(rng));
      }
    }
  }
  return sc;
}

}  // namespace cfm
