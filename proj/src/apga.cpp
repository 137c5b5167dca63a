#include "cfmimo/apga.hpp"

#include <cmath>

namespace cfm {

namespace {
constexpr double kLn2 = 0.6931471805599453;
constexpr double kPi = 3.14159265358979323846;

double penalty_loss(const Vec& gaps) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < gaps.size(); ++k) {
    const double g = std::max(0.0, gaps[k]);
    s += g * g;
  }
  return s;
}

double analytic_zeta_deriv(double bits) {
  return (kPi * std::sqrt(3.0) / 2.0) * std::log(4.0) * std::exp2(-2.0 * bits);
}
}  // namespace

LineSearchResult backtracking_step(const Vec& x, double fx, const Vec& gradient,
                                   const std::function<double(const Vec&)>& objective,
                                   const std::function<Vec(const Vec&)>& project,
                                   const LineSearchOptions& options) {
  double alpha = options.initial_step;
  for (int j = 0; j <= options.max_shrinks; ++j) {
    Vec candidate = project(x + alpha * gradient);
    const double fc = objective(candidate);
    if (fc >= fx + options.control * alpha * (candidate - x).norm())
      return {std::move(candidate), fc, alpha, false};
    alpha *= options.shrink;
  }
  return {x, fx, 0.0, true};
}

Vec qos_gap(const LinkState& state, double s_min) {
  const double qos_factor = std::exp2(s_min) - 1.0;
  Vec gaps(state.num_users());
  for (int k = 0; k < state.num_users(); ++k) {
    const SinrTerms t = sinr_terms(state, k);
    gaps[k] = qos_factor * (t.interference + t.noise + t.quantization) - t.desired;
  }
  return gaps;
}

double penalized_sum_se(const LinkState& state, double xi, double s_min) {
  const double qos_factor = std::exp2(s_min) - 1.0;
  double f = 0.0;
  double psi = 0.0;
  for (int k = 0; k < state.num_users(); ++k) {
    const SinrTerms t = sinr_terms(state, k);
    const double den = t.interference + t.noise + t.quantization;
    if (den <= 0.0) continue;  // silenced user, zero combiner
    f += std::log2(1.0 + t.desired / den);
    const double g = std::max(0.0, qos_factor * den - t.desired);
    psi += g * g;
  }
  return f - xi * psi;
}

Vec position_gradient(const LinkState& state, const Topology& topology,
                      const LinkGeometry& geometry, const FasPositions& positions, double xi,
                      double s_min) {
  const int m_count = state.num_aps();
  const int k_count = state.num_users();
  const double qos_factor = std::exp2(s_min) - 1.0;
  const Complex jscale(0.0, 2.0 * kPi / topology.wavelength);
  (void)positions;

  // Channel derivatives with respect to each user's two position coordinates.
  Grid<CVec> dhdx(m_count, k_count), dhdy(m_count, k_count);
  for (int m = 0; m < m_count; ++m) {
    for (int k = 0; k < k_count; ++k) {
      const PathSet& link = geometry.links(m, k);
      const CVec& f = state.channels.tx_response(m, k);
      CVec dfx(f.size()), dfy(f.size());
      for (Eigen::Index l = 0; l < f.size(); ++l) {
        dfx[l] = jscale * std::sin(link.tx_elevation[l]) * std::cos(link.tx_azimuth[l]) * f[l];
        dfy[l] = jscale * std::cos(link.tx_elevation[l]) * f[l];
      }
      const CMat& g = state.channels.rx_response(m, k);
      dhdx(m, k) = g.adjoint() * (link.path_response * dfx);
      dhdy(m, k) = g.adjoint() * (link.path_response * dfy);
    }
  }

  // Aggregate link gains F(k,k') and their derivatives; quantization-noise
  // couplings and their derivatives.
  CMat cross = CMat::Zero(k_count, k_count);
  CMat dcx = CMat::Zero(k_count, k_count), dcy = CMat::Zero(k_count, k_count);
  Mat dqx = Mat::Zero(k_count, k_count), dqy = Mat::Zero(k_count, k_count);
  Vec den(k_count), desired(k_count);
  for (int k = 0; k < k_count; ++k) {
    double ns = 0.0, qn = 0.0;
    for (int kp = 0; kp < k_count; ++kp) {
      const double sqeta = std::sqrt(state.eta[kp]);
      Complex f_sum = 0.0, dx_sum = 0.0, dy_sum = 0.0;
      double dq_x = 0.0, dq_y = 0.0, q_pow = 0.0;
      for (int m = 0; m < m_count; ++m) {
        const double z = state.zeta[m];
        const CRow& v = state.combiners(m, k);
        const CVec& h = state.channels.h(m, kp);
        f_sum += z * (v * h).value();
        dx_sum += z * (v * dhdx(m, kp)).value();
        dy_sum += z * (v * dhdy(m, kp)).value();
        const double zq = z * (1.0 - z);
        const Vec v2 = v.cwiseAbs2().transpose();
        q_pow += zq * v2.dot(h.cwiseAbs2());
        const CVec weighted = v2.cwiseProduct(h.conjugate());
        dq_x += zq * 2.0 * (weighted.transpose() * dhdx(m, kp)).value().real();
        dq_y += zq * 2.0 * (weighted.transpose() * dhdy(m, kp)).value().real();
      }
      cross(k, kp) = sqeta * f_sum;
      dcx(k, kp) = sqeta * dx_sum;
      dcy(k, kp) = sqeta * dy_sum;
      dqx(k, kp) = state.p_u * state.eta[kp] * dq_x;
      dqy(k, kp) = state.p_u * state.eta[kp] * dq_y;
      qn += state.p_u * state.eta[kp] * q_pow;
    }
    for (int m = 0; m < m_count; ++m) {
      const double z = state.zeta[m];
      const double v2 = state.combiners(m, k).squaredNorm();
      ns += state.noise_w * z * z * v2;
      qn += state.noise_w * z * (1.0 - z) * v2;
    }
    desired[k] = state.p_u * std::norm(cross(k, k));
    double interference = 0.0;
    for (int kp = 0; kp < k_count; ++kp)
      if (kp != k) interference += state.p_u * std::norm(cross(k, kp));
    den[k] = interference + ns + qn;
  }

  Vec grad = Vec::Zero(2 * k_count);
  for (int i = 0; i < k_count; ++i) {
    double gx = 0.0, gy = 0.0;
    for (int k = 0; k < k_count; ++k) {
      if (den[k] <= 0.0) continue;  // silenced user, zero combiner
      const double d_cross_x = 2.0 * (std::conj(cross(k, i)) * dcx(k, i)).real();
      const double d_cross_y = 2.0 * (std::conj(cross(k, i)) * dcy(k, i)).real();
      const double d_den_x = (i != k ? state.p_u * d_cross_x : 0.0) + dqx(k, i);
      const double d_den_y = (i != k ? state.p_u * d_cross_y : 0.0) + dqy(k, i);
      const double d_des_x = (i == k ? state.p_u * d_cross_x : 0.0);
      const double d_des_y = (i == k ? state.p_u * d_cross_y : 0.0);
      const double total = den[k] + desired[k];
      gx += ((d_den_x + d_des_x) / total - d_den_x / den[k]) / kLn2;
      gy += ((d_den_y + d_des_y) / total - d_den_y / den[k]) / kLn2;

      const double gap = qos_factor * den[k] - desired[k];
      if (gap > 0.0) {
        gx -= xi * 2.0 * gap * (qos_factor * d_den_x - d_des_x);
        gy -= xi * 2.0 * gap * (qos_factor * d_den_y - d_des_y);
      }
    }
    grad[2 * i] = gx;
    grad[2 * i + 1] = gy;
  }
  return grad;
}

Vec project_region(const Vec& stacked_positions, const std::vector<MoveRegion>& regions) {
  Vec out = stacked_positions;
  for (std::size_t k = 0; k < regions.size(); ++k) {
    out[2 * k] = std::clamp(out[2 * k], regions[k].d_min, regions[k].d_max);
    out[2 * k + 1] = std::clamp(out[2 * k + 1], regions[k].d_min, regions[k].d_max);
  }
  return out;
}

namespace {

/// Shared accelerated-ascent loop (Nesterov extrapolation, two projected
/// candidates per iteration, best-of-two with explicit rejection of
/// non-improving steps).
struct CoreResult {
  Vec x;
  double objective = 0.0;
  std::vector<double> trace;
  int iterations = 0;
  bool stalled = false;
};

CoreResult apga_core(Vec x0, const std::function<double(const Vec&)>& objective,
                     const std::function<Vec(const Vec&)>& gradient,
                     const std::function<Vec(const Vec&)>& project,
                     const std::function<double(const Vec&)>& trace_value,
                     const ApgaOptions& options) {
  CoreResult res;
  Vec x_prev = x0, x_cur = x0, z = x0;
  double t_prev = 1.0, t_cur = 1.0;
  double f_cur = objective(x_cur);
  res.trace.push_back(trace_value(x_cur));
  for (int n = 1; n <= options.max_iter; ++n) {
    const Vec y =
        x_cur + (t_prev / t_cur) * (z - x_cur) + ((t_prev - 1.0) / t_cur) * (x_cur - x_prev);

    const LineSearchResult plain =
        backtracking_step(x_cur, f_cur, gradient(x_cur), objective, project, options.line_search);
    const Vec y_feasible = project(y);
    const double fy = objective(y_feasible);
    const LineSearchResult accel = backtracking_step(
        y_feasible, fy, gradient(y_feasible), objective, project, options.line_search);
    z = accel.point;

    Vec candidate = accel.value > plain.value ? accel.point : plain.point;
    double f_candidate = std::max(accel.value, plain.value);
    if (f_candidate < f_cur) {  // reject non-improving steps
      candidate = x_cur;
      f_candidate = f_cur;
    }

    x_prev = x_cur;
    x_cur = candidate;
    t_prev = t_cur;
    t_cur = next_momentum(t_cur);
    res.trace.push_back(trace_value(x_cur));
    res.iterations = n;
    res.stalled = plain.stalled && accel.stalled;
    const double delta = std::abs(f_candidate - f_cur);
    f_cur = f_candidate;
    if (delta <= options.tolerance) break;
  }
  res.x = x_cur;
  res.objective = f_cur;
  return res;
}

}  // namespace

ApgaResult apga_positions(LinkState& state, const Topology& topology,
                          const LinkGeometry& geometry, FasPositions& positions,
                          const ApgaOptions& options) {
  const int k_count = state.num_users();
  Vec x(2 * k_count);
  for (int k = 0; k < k_count; ++k) {
    x[2 * k] = positions.u[k].x();
    x[2 * k + 1] = positions.u[k].y();
  }

  LinkState scratch = state;
  auto apply = [&](const Vec& v) {
    for (int k = 0; k < k_count; ++k)
      update_user_channels(scratch.channels, topology, geometry, k, Vec2(v[2 * k], v[2 * k + 1]));
  };
  auto unstack = [&](const Vec& v) {
    FasPositions p;
    for (int k = 0; k < k_count; ++k) p.u.emplace_back(v[2 * k], v[2 * k + 1]);
    return p;
  };

  double xi = options.penalty.coefficient;

  if (options.init_grid >= 2) {
    // Greedy lattice scan, one user at a time, to seed the ascent in a good
    // basin; later users see earlier users' updated positions.
    apply(x);
    auto scan_value = [&] {
      if (options.scan_refresh)
        scratch.combiners = mmse_combiners(scratch.channels, scratch.zeta, scratch.eta,
                                           scratch.p_u, scratch.noise_w);
      return penalized_sum_se(scratch, xi, options.s_min);
    };
    for (int k = 0; k < k_count; ++k) {
      const MoveRegion& r = topology.fas_regions[k];
      if (r.d_max <= r.d_min) continue;
      double best = scan_value();
      Vec2 best_u(x[2 * k], x[2 * k + 1]);
      const int g = options.init_grid;
      for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
          const Vec2 cand(r.d_min + (r.d_max - r.d_min) * i / (g - 1.0),
                          r.d_min + (r.d_max - r.d_min) * j / (g - 1.0));
          update_user_channels(scratch.channels, topology, geometry, k, cand);
          const double f = scan_value();
          if (f > best) {
            best = f;
            best_u = cand;
          }
        }
      }
      x[2 * k] = best_u.x();
      x[2 * k + 1] = best_u.y();
      update_user_channels(scratch.channels, topology, geometry, k, best_u);
    }
    if (options.scan_refresh)
      // Fixed filters for the ascent, matched to the scan winner.
      scratch.combiners = mmse_combiners(scratch.channels, scratch.zeta, scratch.eta, scratch.p_u,
                                         scratch.noise_w);
  }

  ApgaResult result;
  while (true) {
    auto objective = [&](const Vec& v) {
      apply(v);
      return penalized_sum_se(scratch, xi, options.s_min);
    };
    auto gradient = [&](const Vec& v) {
      apply(v);
      return position_gradient(scratch, topology, geometry, unstack(v), xi, options.s_min);
    };
    auto project = [&](const Vec& v) { return project_region(v, topology.fas_regions); };
    CoreResult core = apga_core(x, objective, gradient, project, objective, options);
    x = core.x;
    result.trace = std::move(core.trace);
    result.objective = core.objective;
    result.iterations = core.iterations;
    result.stalled = core.stalled;
    result.penalty_coefficient = xi;

    apply(x);
    const double psi = penalty_loss(qos_gap(scratch, options.s_min));
    if (psi <= 0.0 || xi >= options.penalty.max_coefficient) break;
    xi *= options.penalty.growth;
  }

  positions = unstack(x);
  for (int k = 0; k < k_count; ++k)
    update_user_channels(state.channels, topology, geometry, k, positions.u[k]);
  return result;
}

double bit_objective(const LinkState& state, const PowerModel& model, const Vec& bits,
                     double theta, double xi, double s_min) {
  const Vec zeta = quantization_factors(bits, ZetaMode::Analytic);
  const double qos_factor = std::exp2(s_min) - 1.0;
  double se = 0.0, psi = 0.0;
  for (int k = 0; k < state.num_users(); ++k) {
    const SinrTerms t = sinr_terms_with_zeta(state, zeta, k);
    const double den = t.interference + t.noise + t.quantization;
    if (den <= 0.0) continue;  // silenced user, zero combiner
    se += std::log2(1.0 + t.desired / den);
    const double g = std::max(0.0, qos_factor * den - t.desired);
    psi += g * g;
  }
  const double pbar = dinkelbach_power(model, state.eta, state.p_u, bits, state.antennas());
  return se - theta * pbar - xi * psi;
}

Vec bit_gradient(const LinkState& state, const PowerModel& model, const Vec& bits, double theta,
                 double xi, double s_min) {
  const int m_count = state.num_aps();
  const int k_count = state.num_users();
  const int n = state.antennas();
  const double qos_factor = std::exp2(s_min) - 1.0;
  const Vec zeta = quantization_factors(bits, ZetaMode::Analytic);
  Vec dzeta(m_count);
  for (int m = 0; m < m_count; ++m) dzeta[m] = analytic_zeta_deriv(bits[m]);

  // Per-AP raw couplings, independent of zeta.
  std::vector<CMat> w(m_count, CMat(k_count, k_count));  // v_mk h_mk'
  std::vector<Mat> q(m_count, Mat(k_count, k_count));    // sum_n |v|^2 |h|^2
  Mat nv(m_count, k_count);
  for (int m = 0; m < m_count; ++m) {
    for (int k = 0; k < k_count; ++k) {
      const CRow& v = state.combiners(m, k);
      nv(m, k) = v.squaredNorm();
      const Vec v2 = v.cwiseAbs2().transpose();
      for (int kp = 0; kp < k_count; ++kp) {
        w[m](k, kp) = (v * state.channels.h(m, kp)).value();
        q[m](k, kp) = v2.dot(state.channels.h(m, kp).cwiseAbs2());
      }
    }
  }

  CMat cross = CMat::Zero(k_count, k_count);
  Vec den(k_count), desired(k_count), qweight(k_count);
  Mat qsum(k_count, m_count);  // p_u sum_k' eta_k' q[m](k,k') + sigma^2 ||v_mk||^2
  for (int k = 0; k < k_count; ++k) {
    double ns = 0.0, qn = 0.0, interference = 0.0;
    for (int m = 0; m < m_count; ++m) {
      double acc = state.noise_w * nv(m, k);
      for (int kp = 0; kp < k_count; ++kp)
        acc += state.p_u * state.eta[kp] * q[m](k, kp);
      qsum(k, m) = acc;
      ns += state.noise_w * zeta[m] * zeta[m] * nv(m, k);
      qn += zeta[m] * (1.0 - zeta[m]) * acc;
    }
    for (int kp = 0; kp < k_count; ++kp) {
      Complex f_sum = 0.0;
      for (int m = 0; m < m_count; ++m) f_sum += zeta[m] * w[m](k, kp);
      cross(k, kp) = std::sqrt(state.eta[kp]) * f_sum;
    }
    desired[k] = state.p_u * std::norm(cross(k, k));
    for (int kp = 0; kp < k_count; ++kp)
      if (kp != k) interference += state.p_u * std::norm(cross(k, kp));
    den[k] = interference + ns + qn;
    (void)qweight;
  }

  Vec grad = Vec::Zero(m_count);
  for (int i = 0; i < m_count; ++i) {
    double g = 0.0;
    for (int k = 0; k < k_count; ++k) {
      if (den[k] <= 0.0) continue;  // silenced user, zero combiner
      auto d_cross2 = [&](int kp) {
        return 2.0 *
               (std::conj(cross(k, kp)) * (std::sqrt(state.eta[kp]) * dzeta[i] * w[i](k, kp)))
                   .real();
      };
      double d_den = 2.0 * zeta[i] * dzeta[i] * state.noise_w * nv(i, k) +
                     (1.0 - 2.0 * zeta[i]) * dzeta[i] * qsum(k, i);
      for (int kp = 0; kp < k_count; ++kp)
        if (kp != k) d_den += state.p_u * d_cross2(kp);
      const double d_des = state.p_u * d_cross2(k);
      const double total = den[k] + desired[k];
      g += ((d_den + d_des) / total - d_den / den[k]) / kLn2;

      const double gap = qos_factor * den[k] - desired[k];
      if (gap > 0.0) g -= xi * 2.0 * gap * (qos_factor * d_den - d_des);
    }
    // Circuit-power derivative; the AGC indicator min(b-1, 1) uses the
    // right-continuous subgradient at b = 2.
    const double d_power = (bits[i] < 2.0 ? model.agc_w : 0.0) +
                           2.0 * n * kLn2 * std::exp2(bits[i]) * model.fom_w_j * model.sampling_hz;
    grad[i] = g - theta * d_power;
  }
  return grad;
}

Vec project_bits(const Vec& bits, double b_min, double b_max) {
  Vec out(bits.size());
  for (Eigen::Index m = 0; m < bits.size(); ++m) {
    if (bits[m] <= b_min)
      out[m] = b_min;
    else if (bits[m] >= b_max)
      out[m] = b_max;
    else
      out[m] = std::round(bits[m]);
  }
  return out;
}

ApgaResult apga_bits(LinkState& state, const PowerModel& model, Vec& bits,
                     const BitAllocOptions& options) {
  LinkState& s = state;
  const int n = s.antennas();
  double xi = options.penalty.coefficient;
  double theta = 0.0;
  Vec x = project_bits(bits, options.b_min, options.b_max);

  auto clamp_box = [&](const Vec& v) {
    Vec out = v;
    for (Eigen::Index m = 0; m < out.size(); ++m)
      out[m] = std::clamp(out[m], options.b_min, options.b_max);
    return out;
  };
  auto ratio_value = [&](const Vec& b) {
    // Penalized Dinkelbach ratio; the quantity the per-iteration theta
    // refresh drives upward.
    const double f0 = bit_objective(s, model, b, 0.0, 0.0, options.s_min);
    const double fpen = bit_objective(s, model, b, 0.0, xi, options.s_min);
    const double pbar = dinkelbach_power(model, s.eta, s.p_u, b, n);
    return f0 / pbar + (fpen - f0);
  };

  ApgaResult result;
  while (true) {
    auto objective = [&](const Vec& b) {
      return bit_objective(s, model, clamp_box(b), theta, xi, options.s_min);
    };
    auto gradient = [&](const Vec& b) {
      return bit_gradient(s, model, clamp_box(b), theta, xi, options.s_min);
    };
    auto project = [&](const Vec& b) { return project_bits(b, options.b_min, options.b_max); };
    // Dinkelbach refreshes on the auxiliary ratio variable wrap the ascent;
    // theta stays fixed inside each core run.
    result.trace.clear();
    result.iterations = 0;
    for (int refresh = 0; refresh < 30; ++refresh) {
      const double se = bit_objective(s, model, x, 0.0, 0.0, options.s_min);
      theta = se / dinkelbach_power(model, s.eta, s.p_u, x, n);
      CoreResult core = apga_core(x, objective, gradient, project, ratio_value, options);
      const bool moved = (core.x - x).lpNorm<Eigen::Infinity>() > 0.0;
      x = core.x;
      if (result.trace.empty())
        result.trace = std::move(core.trace);
      else
        result.trace.insert(result.trace.end(), core.trace.begin() + 1, core.trace.end());
      result.objective = core.objective;
      result.iterations += core.iterations;
      result.stalled = core.stalled;
      if (!moved) break;
    }
    result.penalty_coefficient = xi;

    const double f0 = bit_objective(s, model, x, 0.0, 0.0, options.s_min);
    const double fpen = bit_objective(s, model, x, 0.0, xi, options.s_min);
    if (fpen >= f0 - 1e-15 || xi >= options.penalty.max_coefficient) break;
    xi *= options.penalty.growth;
  }

  bits = x;
  state.zeta = quantization_factors(bits, ZetaMode::Analytic);
  return result;
}

}  // namespace cfm
