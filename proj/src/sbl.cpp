#include "asvkit/sbl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace asv::sbl {

ReceiverArray ReceiverArray::square(double side_m, double depth_m) {
  const double h = side_m / 2.0;
  ReceiverArray a;
  a.offsets = {Eigen::Vector3d(h, h, depth_m), Eigen::Vector3d(h, -h, depth_m),
               Eigen::Vector3d(-h, -h, depth_m),
               Eigen::Vector3d(-h, h, depth_m)};
  return a;
}

std::vector<std::string> ReceiverArray::validate() const {
  for (const auto& o : offsets) {
    if (!o.allFinite()) {
      throw std::invalid_argument("receiver offsets must be finite");
    }
  }
  // Horizontal collinearity makes the inverse problem rank-deficient.
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& o : offsets) c += o.head<2>();
  c /= 4.0;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& o : offsets) {
    const Eigen::Vector2d d = o.head<2>() - c;
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  if (es.eigenvalues().minCoeff() < 1e-6) {
    throw std::invalid_argument(
        "receiver array is horizontally collinear (degenerate geometry)");
  }

  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < offsets.size(); ++j) {
      if (i == j) continue;
      nearest = std::min(
          nearest, (offsets[i].head<2>() - offsets[j].head<2>()).norm());
    }
    if (nearest < 1.5 || nearest > 2.5) {
      warnings.push_back("receiver " + std::to_string(i) +
                         " nearest-neighbor spacing " +
                         std::to_string(nearest) +
                         " m outside the recommended 1.5..2.5 m");
    }
  }
  return warnings;
}

namespace {

std::array<Eigen::Vector3d, 4> receiver_world_positions(
    const geo::Pose& vehicle, const ReceiverArray& array) {
  std::array<Eigen::Vector3d, 4> out;
  const Eigen::Matrix3d r = vehicle.attitude.body_to_enu();
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = vehicle.position.vec() + r * array.offsets[i];
  }
  return out;
}

struct GnResult {
  Eigen::Vector3d p = Eigen::Vector3d::Zero();
  double ssr = std::numeric_limits<double>::infinity();
  Eigen::Matrix3d jtj = Eigen::Matrix3d::Zero();
  bool converged = false;
};

/// Levenberg-damped Gauss-Newton on f_i(p) = |p - o_i| - rho_i, body frame.
GnResult gauss_newton(const std::array<Eigen::Vector3d, 4>& offsets,
                      const std::array<double, 4>& rho,
                      const Eigen::Vector3d& start, const SblConfig& cfg) {
  GnResult res;
  Eigen::Vector3d p = start;
  auto eval = [&](const Eigen::Vector3d& q, Eigen::Vector4d& f,
                  Eigen::Matrix<double, 4, 3>& jac) {
    for (int i = 0; i < 4; ++i) {
      const Eigen::Vector3d d = q - offsets[i];
      const double r = std::max(d.norm(), 1e-9);
      f(i) = r - rho[i];
      jac.row(i) = d.transpose() / r;
    }
  };
  Eigen::Vector4d f;
  Eigen::Matrix<double, 4, 3> jac;
  eval(p, f, jac);
  double ssr = f.squaredNorm();
  double lambda = 1e-8;
  for (int it = 0; it < cfg.max_iterations; ++it) {
    const Eigen::Matrix3d jtj = jac.transpose() * jac;
    const Eigen::Vector3d g = jac.transpose() * f;
    bool stepped = false;
    for (int trial = 0; trial < 12; ++trial) {
      const Eigen::Matrix3d a = jtj + lambda * Eigen::Matrix3d::Identity();
      const Eigen::Vector3d delta = a.ldlt().solve(-g);
      if (!delta.allFinite()) break;
      const Eigen::Vector3d cand = p + delta;
      Eigen::Vector4d fc;
      Eigen::Matrix<double, 4, 3> jc;
      eval(cand, fc, jc);
      const double ssr_c = fc.squaredNorm();
      if (ssr_c <= ssr) {
        const bool small_step =
            delta.norm() < cfg.step_tolerance * (1.0 + p.norm());
        p = cand;
        f = fc;
        jac = jc;
        ssr = ssr_c;
        lambda = std::max(lambda / 10.0, 1e-12);
        stepped = true;
        if (small_step) {
          res.converged = true;
        }
        break;
      }
      lambda *= 10.0;
    }
    if (res.converged || !stepped) break;
  }
  res.converged = res.converged || ssr < 1e-18;
  res.p = p;
  res.ssr = ssr;
  res.jtj = jac.transpose() * jac;
  return res;
}

/// Best-fit plane through the receivers, for mirror-image rejection.
void array_plane(const std::array<Eigen::Vector3d, 4>& offsets,
                 Eigen::Vector3d& point, Eigen::Vector3d& normal) {
  point = Eigen::Vector3d::Zero();
  for (const auto& o : offsets) point += o;
  point /= 4.0;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& o : offsets) {
    const Eigen::Vector3d d = o - point;
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  normal = es.eigenvectors().col(0);  // smallest eigenvalue
}

/// Closed-form multilateration start: range differences pin the in-plane
/// coordinates linearly; an absolute range recovers the out-of-plane
/// offset up to the mirror sign, resolved toward the requested side.
Eigen::Vector3d closed_form_start(
    const std::array<Eigen::Vector3d, 4>& offsets,
    const std::array<double, 4>& rho, const Eigen::Vector3d& plane_point,
    const Eigen::Vector3d& normal, bool below,
    const Eigen::Matrix3d& r_body_to_enu, const SblConfig& cfg) {
  Eigen::Matrix3d a;
  Eigen::Vector3d b;
  for (int i = 1; i < 4; ++i) {
    a.row(i - 1) = 2.0 * (offsets[i] - offsets[0]).transpose();
    b(i - 1) = rho[0] * rho[0] - rho[i] * rho[i] +
               offsets[i].squaredNorm() - offsets[0].squaredNorm();
  }
  Eigen::Vector3d n = normal;
  if (n.z() < 0.0) n = -n;  // orient toward body-down
  const Eigen::Vector3d ls =
      a.jacobiSvd(Eigen::ComputeFullU | Eigen::ComputeFullV).solve(b);
  const Eigen::Vector3d in_plane = ls - n * n.dot(ls);

  const Eigen::Vector3d d = in_plane - offsets[0];
  const double h0 = n.dot(offsets[0]);
  const double disc = h0 * h0 - d.squaredNorm() + rho[0] * rho[0];
  if (disc <= 0.0) {
    // Inconsistent ranges; fall back to the below-centroid guess.
    return plane_point + Eigen::Vector3d(0, 0, cfg.initial_depth_m);
  }
  const double s = std::sqrt(disc);
  const Eigen::Vector3d below_plane = in_plane + (h0 + s) * n;
  const Eigen::Vector3d above_plane = in_plane + (h0 - s) * n;
  if (below) {
    // Prefer the root under the hull; fall back to the other only when it
    // is the sole underwater candidate.
    if ((r_body_to_enu * below_plane).z() < 0.0) return below_plane;
    if ((r_body_to_enu * above_plane).z() < 0.0) return above_plane;
    return below_plane;
  }
  return above_plane;
}

}  // namespace

std::optional<ToaSet> simulate_toa(const geo::EnuPoint& beacon,
                                   const geo::Pose& vehicle,
                                   const ReceiverArray& array,
                                   const AcousticNoiseModel& noise,
                                   const SblConfig& cfg,
                                   std::mt19937_64& rng) {
  if (!(beacon.up < 0.0)) {
    throw std::domain_error("simulate_toa: beacon must be below the surface");
  }
  for (double p :
       {noise.surface_spike_probability, noise.dropout_probability}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument(
          "simulate_toa: noise probabilities must be in [0, 1]");
    }
  }
  const auto receivers = receiver_world_positions(vehicle, array);
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& r : receivers) centroid += r;
  centroid /= 4.0;
  const double range = (beacon.vec() - centroid).norm();
  if (range > 2.0 * cfg.max_range_m) {
    return std::nullopt;  // guaranteed dropout beyond twice the rated range
  }

  std::normal_distribution<double> unit_normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < noise.dropout_probability) {
    return std::nullopt;
  }
  const double common = unit_normal(rng) * noise.range_fraction_sigma * range;
  const bool spiking = (-beacon.up < noise.surface_depth_threshold_m) &&
                       unit(rng) < noise.surface_spike_probability;

  ToaSet toa;
  toa.t = vehicle.t;
  toa.sound_speed = cfg.sound_speed;
  for (int i = 0; i < 4; ++i) {
    double r = (beacon.vec() - receivers[i]).norm() + common;
    if (noise.receiver_jitter_sigma_m > 0.0) {
      r += unit_normal(rng) * noise.receiver_jitter_sigma_m;
    }
    if (spiking) {
      r += unit_normal(rng) * noise.spike_magnitude_sigma_m;
    }
    toa.arrival_s[i] = std::max(r, 0.01) / cfg.sound_speed;
  }
  return toa;
}

SblFix solve_fix(const ToaSet& toa, const geo::Pose& vehicle,
                 const ReceiverArray& array,
                 const std::optional<Eigen::Vector3d>& prior,
                 const SblConfig& cfg, const geo::GeoPoint& origin) {
  array.validate();  // throws on degenerate geometry

  std::array<double, 4> rho;
  for (int i = 0; i < 4; ++i) rho[i] = toa.arrival_s[i] * toa.sound_speed;

  const Eigen::Matrix3d r_body_to_enu = vehicle.attitude.body_to_enu();
  auto world_up = [&](const Eigen::Vector3d& p_body) {
    return (r_body_to_enu * p_body).z();
  };

  Eigen::Vector3d plane_pt, plane_n;
  array_plane(array.offsets, plane_pt, plane_n);
  const Eigen::Vector3d start =
      prior ? *prior
            : closed_form_start(array.offsets, rho, plane_pt, plane_n,
                                /*below=*/true, r_body_to_enu, cfg);

  GnResult best = gauss_newton(array.offsets, rho, start, cfg);
  if (world_up(best.p) > 0.0) {
    // Planar arrays admit a mirror solution; re-solve from the reflection
    // and keep the underwater root.
    const Eigen::Vector3d mirrored =
        best.p - 2.0 * ((best.p - plane_pt).dot(plane_n)) * plane_n;
    const GnResult alt = gauss_newton(array.offsets, rho, mirrored, cfg);
    if (alt.converged && world_up(alt.p) <= 0.0 &&
        alt.ssr <= best.ssr + 1e-9 * (1.0 + best.ssr)) {
      best = alt;
    }
  }

  SblFix fix;
  fix.t = toa.t;
  fix.rel_position = best.p;
  const Eigen::Vector3d beacon_world =
      vehicle.position.vec() + r_body_to_enu * best.p;
  fix.geo_position = geo::enu_to_geo(geo::EnuPoint(beacon_world), origin);

  // 1-sigma quality from the post-fit residual mapped through the local
  // geometry (4 ranges, 3 unknowns -> 1 degree of freedom).
  const double sigma_hat = std::sqrt(best.ssr / 1.0);
  const auto ldlt = best.jtj.ldlt();
  double trace_cov = std::numeric_limits<double>::infinity();
  if (ldlt.info() == Eigen::Success) {
    const Eigen::Matrix3d cov =
        sigma_hat * sigma_hat *
        ldlt.solve(Eigen::Matrix3d::Identity());
    trace_cov = cov.trace();
  }
  fix.std_m = std::isfinite(trace_cov) && trace_cov >= 0.0
                  ? std::sqrt(trace_cov)
                  : std::numeric_limits<double>::infinity();

  fix.valid = best.converged && fix.std_m <= cfg.fix_std_threshold_m &&
              best.p.norm() <= cfg.max_range_m && world_up(best.p) < 0.0;
  return fix;
}

std::vector<SblFix> filter_track(const std::vector<SblFix>& fixes,
                                 double std_threshold_m,
                                 const geo::GeoPoint& origin) {
  auto keep = [&](const SblFix& f) {
    return f.valid && f.std_m <= std_threshold_m;
  };
  std::vector<int> good;
  for (std::size_t i = 0; i < fixes.size(); ++i) {
    if (keep(fixes[i])) good.push_back(static_cast<int>(i));
  }
  if (good.size() < 2) {
    throw FilterError(
        "filter_track: fewer than 2 fixes pass the std threshold");
  }

  std::vector<SblFix> out = fixes;
  std::size_t g = 0;  // index into good: first good at or after i
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (keep(fixes[i])) continue;
    while (g < good.size() && static_cast<std::size_t>(good[g]) < i) ++g;
    const int next = g < good.size() ? good[g] : -1;
    const int prev = g > 0 ? good[g - 1] : -1;

    SblFix& f = out[i];
    f.interpolated = true;
    f.valid = true;
    if (prev >= 0 && next >= 0) {
      const SblFix& a = fixes[prev];
      const SblFix& b = fixes[next];
      const double span = b.t - a.t;
      const double alpha = span > 0.0 ? (f.t - a.t) / span : 0.0;
      const Eigen::Vector3d ea = geo::geo_to_enu(a.geo_position, origin).vec();
      const Eigen::Vector3d eb = geo::geo_to_enu(b.geo_position, origin).vec();
      const Eigen::Vector3d e = ea + alpha * (eb - ea);
      f.geo_position = geo::enu_to_geo(geo::EnuPoint(e), origin);
      f.rel_position = a.rel_position + alpha * (b.rel_position -
                                                 a.rel_position);
      f.std_m = a.std_m + alpha * (b.std_m - a.std_m);
    } else {
      const SblFix& nearest = fixes[prev >= 0 ? prev : next];
      f.geo_position = nearest.geo_position;
      f.rel_position = nearest.rel_position;
      f.std_m = nearest.std_m;
    }
  }
  return out;
}

}  // namespace asv::sbl
