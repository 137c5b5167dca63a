#ifndef CFMIMO_TYPES_HPP
#define CFMIMO_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace cfm {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using CRow = Eigen::RowVectorXcd;
using Vec2 = Eigen::Vector2d;

/// Dense M-by-K storage for per-(AP, user) link quantities.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(Eigen::Index rows, Eigen::Index cols)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols)) {}

  T& operator()(Eigen::Index m, Eigen::Index k) { return data_[idx(m, k)]; }
  const T& operator()(Eigen::Index m, Eigen::Index k) const { return data_[idx(m, k)]; }

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }

 private:
  std::size_t idx(Eigen::Index m, Eigen::Index k) const {
    return static_cast<std::size_t>(m * cols_ + k);
  }
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  std::vector<T> data_;
};

/// Axis-aligned square movement region [d_min, d_max]^2 in local user coordinates.
struct MoveRegion {
  double d_min = 0.0;
  double d_max = 0.0;
};

struct Topology {
  int num_aps = 0;
  int num_users = 0;
  int array_h = 1;  // N_h
  int array_v = 1;  // N_v
  double wavelength = 0.0;
  std::vector<Vec2> ap_positions;
  std::vector<Vec2> user_positions;
  std::vector<Eigen::Matrix2Xd> ap_antenna_offsets;  // per AP, 2 x N local coordinates
  std::vector<MoveRegion> fas_regions;               // per user

  int antennas_per_ap() const { return array_h * array_v; }
  void validate() const;
};

/// Multipath description of one (AP, user) link. Angles in radians.
struct PathSet {
  Vec tx_elevation, tx_azimuth;  // L_t
  Vec rx_elevation, rx_azimuth;  // L_r
  CMat path_response;            // L_r x L_t
  double large_scale = 0.0;      // linear power gain
};

struct LinkGeometry {
  Grid<PathSet> links;  // M x K
  double ricean = 0.0;
};

struct FasPositions {
  std::vector<Vec2> u;  // per-user local position within its movement region
};

struct ChannelSet {
  Grid<CVec> h;            // N, uplink channel per link
  Grid<CMat> rx_response;  // L_r x N
  Grid<CVec> tx_response;  // L_t
};

}  // namespace cfm

#endif
