#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cfmimo/channel.hpp"

using namespace cfm;

namespace {
constexpr double kLambda = 0.15;
constexpr double kPi = 3.14159265358979323846;

PathSet make_paths(std::mt19937_64& rng, int l, double sigma_scale = 1.0) {
  std::uniform_real_distribution<double> angle(-kPi / 2.0, kPi / 2.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  PathSet p;
  p.tx_elevation = Vec(l);
  p.tx_azimuth = Vec(l);
  p.rx_elevation = Vec(l);
  p.rx_azimuth = Vec(l);
  for (int i = 0; i < l; ++i) {
    p.tx_elevation[i] = angle(rng);
    p.tx_azimuth[i] = angle(rng);
    p.rx_elevation[i] = angle(rng);
    p.rx_azimuth[i] = angle(rng);
  }
  p.path_response = CMat::Zero(l, l);
  for (int i = 0; i < l; ++i)
    p.path_response(i, i) = sigma_scale * Complex(gauss(rng), gauss(rng));
  p.large_scale = 1.0;
  return p;
}
}  // namespace

TEST_CASE("field response at the local origin is all ones") {
  Vec elev(3), azim(3);
  elev << 0.3, -0.7, 1.1;
  azim << -0.2, 0.5, 0.0;
  const CVec r = field_response(Vec2::Zero(), elev, azim, kLambda);
  for (Eigen::Index l = 0; l < r.size(); ++l) CHECK(r[l] == Complex(1.0, 0.0));
}

TEST_CASE("one-wavelength displacement along a unit direction wraps the phase") {
  // sin(theta)cos(phi) = 1 at theta = pi/2, phi = 0.
  Vec elev(1), azim(1);
  elev << kPi / 2.0;
  azim << 0.0;
  const CVec r = field_response(Vec2(kLambda, 0.0), elev, azim, kLambda);
  CHECK(r[0].real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r[0].imag() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("field response entries are unit modulus") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(-kPi / 2.0, kPi / 2.0);
  std::uniform_real_distribution<double> pos(-0.5, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    Vec elev(4), azim(4);
    for (int l = 0; l < 4; ++l) {
      elev[l] = angle(rng);
      azim[l] = angle(rng);
    }
    const CVec r = field_response(Vec2(pos(rng), pos(rng)), elev, azim, kLambda);
    for (Eigen::Index l = 0; l < r.size(); ++l)
      CHECK(std::abs(r[l]) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("single-path transmit response matches the closed form") {
  Vec elev(1), azim(1);
  elev << 0.4;
  azim << -0.9;
  const double s = std::sin(0.4) * std::cos(-0.9);
  const double x = 0.033;
  PathSet link;
  link.tx_elevation = elev;
  link.tx_azimuth = azim;
  const CVec r = tx_field_response(Vec2(x, 0.0), link, kLambda);
  const Complex expected = std::polar(1.0, 2.0 * kPi * x * s / kLambda);
  CHECK(std::abs(r[0] - expected) < 1e-14);
}

TEST_CASE("transmit response has conjugate symmetry in the position") {
  std::mt19937_64 rng(5);
  PathSet link = make_paths(rng, 4);
  const Vec2 u(0.021, -0.047);
  const CVec a = tx_field_response(u, link, kLambda);
  const CVec b = tx_field_response(-u, link, kLambda);
  for (Eigen::Index l = 0; l < a.size(); ++l) CHECK(std::abs(a[l] - std::conj(b[l])) < 1e-14);
}

TEST_CASE("wavelength must be positive") {
  Vec elev(1), azim(1);
  elev << 0.0;
  azim << 0.0;
  CHECK_THROWS_AS(field_response(Vec2::Zero(), elev, azim, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(field_response(Vec2::Zero(), elev, azim, -1.0), std::invalid_argument);
}

TEST_CASE("channel vector scalar case and zero path response") {
  CMat g(1, 1), sigma(1, 1);
  CVec f(1);
  g << Complex(1.0, 0.0);
  sigma << Complex(0.3, -0.4);
  f << Complex(1.0, 0.0);
  const CVec h = channel_vector(g, sigma, f);
  CHECK(h[0] == sigma(0, 0));
  sigma.setZero();
  CHECK(channel_vector(g, sigma, f).norm() == 0.0);
}

TEST_CASE("channel vector matches a triple-loop oracle") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int lr = 3, lt = 4, n = 2;
  CMat g(lr, n), sigma(lr, lt);
  CVec f(lt);
  for (int i = 0; i < lr; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = Complex(gauss(rng), gauss(rng));
  for (int i = 0; i < lr; ++i)
    for (int j = 0; j < lt; ++j) sigma(i, j) = Complex(gauss(rng), gauss(rng));
  for (int j = 0; j < lt; ++j) f[j] = Complex(gauss(rng), gauss(rng));

  const CVec h = channel_vector(g, sigma, f);
  for (int a = 0; a < n; ++a) {
    Complex acc = 0.0;
    for (int i = 0; i < lr; ++i)
      for (int j = 0; j < lt; ++j) acc += std::conj(g(i, a)) * sigma(i, j) * f[j];
    CHECK(std::abs(h[a] - acc) < 1e-12);
  }
}

TEST_CASE("channel vector rejects mismatched dimensions") {
  CMat g(2, 2), sigma(3, 3);
  CVec f(3);
  CHECK_THROWS_AS(channel_vector(g, sigma, f), std::invalid_argument);
}

namespace {
Scenario tiny_scenario(std::uint64_t seed, int m, int k, int l, double region = 0.15) {
  ScenarioConfig cfg;
  cfg.num_aps = m;
  cfg.num_users = k;
  cfg.array_h = 2;
  cfg.array_v = 1;
  cfg.num_paths = l;
  cfg.wavelength = kLambda;
  cfg.region_side_m = region;
  return generate_scenario(cfg, seed);
}
}  // namespace

TEST_CASE("single-link single-path channel collapses to the path coefficient") {
  Topology topo;
  topo.num_aps = 1;
  topo.num_users = 1;
  topo.array_h = 3;
  topo.array_v = 1;
  topo.wavelength = kLambda;
  topo.ap_positions = {Vec2(0, 0)};
  topo.user_positions = {Vec2(10, 0)};
  topo.ap_antenna_offsets = {Eigen::Matrix2Xd::Zero(2, 3)};  // all offsets at the origin
  topo.fas_regions = {MoveRegion{0.0, 0.0}};

  LinkGeometry geom;
  geom.links = Grid<PathSet>(1, 1);
  PathSet& link = geom.links(0, 0);
  link.tx_elevation = Vec::Constant(1, 0.2);
  link.tx_azimuth = Vec::Constant(1, -0.3);
  link.rx_elevation = Vec::Constant(1, 0.7);
  link.rx_azimuth = Vec::Constant(1, 0.1);
  link.path_response = CMat::Constant(1, 1, Complex(0.5, -1.25));

  FasPositions pos;
  pos.u = {Vec2::Zero()};
  const ChannelSet ch = build_channels(topo, geom, pos);
  for (int n = 0; n < 3; ++n) CHECK(std::abs(ch.h(0, 0)[n] - Complex(0.5, -1.25)) < 1e-14);
}

TEST_CASE("moving one user leaves other users' channels bit-identical") {
  const Scenario sc = tiny_scenario(3, 2, 3, 4);
  FasPositions pos;
  pos.u.assign(3, Vec2::Zero());
  const ChannelSet before = build_channels(sc.topology, sc.geometry, pos);
  pos.u[1] = Vec2(0.03, -0.05);
  const ChannelSet after = build_channels(sc.topology, sc.geometry, pos);
  for (int m = 0; m < 2; ++m) {
    for (int k = 0; k < 3; ++k) {
      if (k == 1) {
        CHECK((before.h(m, k) - after.h(m, k)).norm() > 0.0);
      } else {
        CHECK(before.h(m, k) == after.h(m, k));
      }
    }
  }
}

TEST_CASE("channel set has M x K vectors of length N") {
  const Scenario sc = tiny_scenario(9, 3, 2, 4);
  FasPositions pos;
  pos.u.assign(2, Vec2::Zero());
  const ChannelSet ch = build_channels(sc.topology, sc.geometry, pos);
  CHECK(ch.h.rows() == 3);
  CHECK(ch.h.cols() == 2);
  for (int m = 0; m < 3; ++m)
    for (int k = 0; k < 2; ++k) CHECK(ch.h(m, k).size() == sc.topology.antennas_per_ap());
}

TEST_CASE("incremental user update equals a full rebuild") {
  const Scenario sc = tiny_scenario(21, 2, 2, 5);
  FasPositions pos;
  pos.u.assign(2, Vec2::Zero());
  ChannelSet incremental = build_channels(sc.topology, sc.geometry, pos);
  pos.u[0] = Vec2(-0.04, 0.06);
  update_user_channels(incremental, sc.topology, sc.geometry, 0, pos.u[0]);
  const ChannelSet full = build_channels(sc.topology, sc.geometry, pos);
  for (int m = 0; m < 2; ++m)
    for (int k = 0; k < 2; ++k) CHECK(incremental.h(m, k) == full.h(m, k));
}

TEST_CASE("positions outside the movement region are rejected") {
  const Scenario sc = tiny_scenario(4, 1, 1, 3);
  FasPositions pos;
  pos.u = {Vec2(10.0, 0.0)};
  CHECK_THROWS_AS(build_channels(sc.topology, sc.geometry, pos), std::invalid_argument);
}

TEST_CASE("scenario generation is deterministic per seed") {
  const Scenario a = tiny_scenario(77, 2, 2, 4);
  const Scenario b = tiny_scenario(77, 2, 2, 4);
  const Scenario c = tiny_scenario(78, 2, 2, 4);
  CHECK(a.topology.ap_positions[0] == b.topology.ap_positions[0]);
  CHECK(a.geometry.links(1, 1).path_response == b.geometry.links(1, 1).path_response);
  CHECK(a.geometry.links(0, 0).path_response != c.geometry.links(0, 0).path_response);
}

TEST_CASE("scenario respects documented ranges and shapes") {
  const Scenario sc = tiny_scenario(123, 3, 4, 6);
  for (const auto& p : sc.topology.ap_positions) {
    CHECK(p.x() >= 0.0);
    CHECK(p.x() <= 200.0);
  }
  for (int m = 0; m < 3; ++m) {
    for (int k = 0; k < 4; ++k) {
      const PathSet& link = sc.geometry.links(m, k);
      for (int l = 0; l < 6; ++l) {
        CHECK(std::abs(link.tx_elevation[l]) <= kPi / 2.0);
        CHECK(std::abs(link.rx_azimuth[l]) <= kPi / 2.0);
        for (int j = 0; j < 6; ++j)
          if (l != j) CHECK(link.path_response(l, j) == Complex(0.0, 0.0));
      }
      CHECK(link.large_scale > 0.0);
    }
  }
}

TEST_CASE("scenario rejects invalid parameters") {
  ScenarioConfig cfg;
  cfg.area_side_m = -1.0;
  CHECK_THROWS_AS(generate_scenario(cfg, 1), std::invalid_argument);
  cfg = ScenarioConfig{};
  cfg.num_paths = 1;
  CHECK_THROWS_AS(generate_scenario(cfg, 1), std::invalid_argument);
}

TEST_CASE("line-of-sight path variance is half the link gain at unit ricean factor") {
  // kappa = 1: var(Sigma[1,1]) = beta/2. Monte-Carlo estimate over scenarios,
  // normalized per draw so the random path loss divides out.
  const int draws = 100000;
  double acc = 0.0;
  ScenarioConfig cfg;
  cfg.num_aps = 1;
  cfg.num_users = 1;
  cfg.array_h = 1;
  cfg.array_v = 1;
  cfg.num_paths = 2;
  cfg.ricean = 1.0;
  for (int i = 0; i < draws; ++i) {
    const Scenario sc = generate_scenario(cfg, 1000000 + i);
    const PathSet& link = sc.geometry.links(0, 0);
    acc += std::norm(link.path_response(0, 0)) / link.large_scale;
  }
  CHECK(acc / draws == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("total path energy matches the link gain on average") {
  const int draws = 20000;
  double acc = 0.0;
  ScenarioConfig cfg;
  cfg.num_aps = 1;
  cfg.num_users = 1;
  cfg.array_h = 1;
  cfg.array_v = 1;
  cfg.num_paths = 5;
  for (int i = 0; i < draws; ++i) {
    const Scenario sc = generate_scenario(cfg, 5000000 + i);
    const PathSet& link = sc.geometry.links(0, 0);
    acc += link.path_response.squaredNorm() / link.large_scale;
  }
  CHECK(acc / draws == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("three-slope attenuation is continuous and monotone") {
  PathLossModel pl;
  const double at_far_minus = pl.attenuation_db(49.999);
  const double at_far_plus = pl.attenuation_db(50.001);
  CHECK(at_far_minus == doctest::Approx(at_far_plus).epsilon(1e-4));
  CHECK(pl.attenuation_db(5.0) == pl.attenuation_db(9.0));  // flat below the near breakpoint
  double prev = pl.attenuation_db(10.0);
  for (double d = 20.0; d <= 1000.0; d += 10.0) {
    const double cur = pl.attenuation_db(d);
    CHECK(cur <= prev);
    prev = cur;
  }
}
