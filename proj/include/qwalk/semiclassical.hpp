#pragma once

// Semiclassical picture of the walk: free Dirac-walk bands, group velocity,
// and Landau-Lifshitz integrators for the edge-spin density driven by the
// walker's color polarization.
//
// Time is measured in walk steps. `dt` is the integrator substep; the walk step
// itself (which enters the damping and gradient coefficients) is kWalkStep = 1.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qwalk {

using Vec3 = Eigen::Vector3d;

inline constexpr double kWalkStep = 1.0;

struct Quasienergy {
  double energy = 0.0;  // E in [0, pi]; the bands are +E and -E
  std::optional<Vec3> direction;  // d_hat, undefined where sin E = 0

  double upper() const { return energy; }
  double lower() const { return -energy; }
};

/// Bands of the free walk W(k, theta): cos E = -sin k sin theta.
inline Quasienergy quasienergy(double k, double theta) {
  const double cos_e = std::clamp(-std::sin(k) * std::sin(theta), -1.0, 1.0);
  Quasienergy q;
  q.energy = std::acos(cos_e);
  const double sin_e = std::sin(q.energy);
  if (sin_e > 1e-12) {
    q.direction = Vec3(std::cos(k) * std::cos(theta), std::sin(k) * std::cos(theta), std::cos(k) * std::sin(theta)) / sin_e;
  }
  return q;
}

/// v_g(p, theta) with p = k - pi/2.
inline double group_velocity(double p, double theta) {
  const double cp = std::cos(p);
  const double st = std::sin(theta);
  const double denominator = 1.0 - cp * cp * st * st;
  if (denominator <= 1e-14) throw std::domain_error("group velocity is singular at the Dirac cone tip");
  return std::sin(p) * st / std::sqrt(denominator);
}

/// Mass (d0) and kinetic (d1) vectors of the linearized walk around momentum p,
/// with cos E = cos p sin theta.
struct DiracCoefficients {
  double p = 0.0;
  double theta = 0.0;
  double energy = 0.0;
  Vec3 d0 = Vec3::Zero();
  Vec3 d1 = Vec3::Zero();
};

inline DiracCoefficients dirac_coefficients(double p, double theta) {
  DiracCoefficients out;
  out.p = p;
  out.theta = theta;
  out.energy = std::acos(std::clamp(std::cos(p) * std::sin(theta), -1.0, 1.0));
  const double sin_e = std::sin(out.energy);
  if (sin_e <= 1e-12) throw std::domain_error("Dirac coefficients are undefined where sin E = 0");
  const double sp = std::sin(p), cp = std::cos(p), st = std::sin(theta), ct = std::cos(theta);
  out.d0 = Vec3(-sp * ct, cp * ct, -sp * st) / sin_e;
  out.d1 = -out.energy / sin_e * Vec3(cp * ct, sp * ct, cp * st);
  return out;
}

namespace detail {

template <class Rhs>
Vec3 rk4(const Vec3& s, double dt, Rhs&& rhs) {
  const Vec3 k1 = rhs(s);
  const Vec3 k2 = rhs(s + 0.5 * dt * k1);
  const Vec3 k3 = rhs(s + 0.5 * dt * k2);
  const Vec3 k4 = rhs(s + dt * k3);
  return s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline Vec3 precession_rate(const Vec3& s, const Vec3& d_hat, double coupling, int num_nodes) {
  return -coupling / (2.0 * num_nodes) * s.cross(d_hat);
}

// Homogeneous damping coefficient J^3 dt / (16 |V| v_g). The magnitude of v_g
// is used: it enters through the (positive) density of states.
inline double damping_coefficient(double coupling, int num_nodes, double group_velocity) {
  if (group_velocity == 0.0) throw std::domain_error("damping needs a nonzero group velocity");
  return coupling * coupling * coupling * kWalkStep / (16.0 * num_nodes * std::abs(group_velocity));
}

inline Vec3 dissipative_rate(const Vec3& s, const Vec3& d_hat, double coupling, int num_nodes, double damping) {
  return precession_rate(s, d_hat, coupling, num_nodes) + damping * s.squaredNorm() * d_hat.cross(d_hat.cross(s));
}

}  // namespace detail

/// s' = -(J / 2|V|) s x d_hat, one RK4 substep.
inline Vec3 ll_precession_step(const Vec3& s, const Vec3& d_hat, double coupling, int num_nodes, double dt) {
  return detail::rk4(s, dt, [&](const Vec3& v) { return detail::precession_rate(v, d_hat, coupling, num_nodes); });
}

/// Precession plus damping toward d_hat:
///   s' = -(J / 2|V|) s x d + (J^3 / 16 |V| v_g) |s|^2 d x (d x s).
inline Vec3 ll_dissipative_step(const Vec3& s, const Vec3& d_hat, double coupling, int num_nodes,
                                double group_velocity, double dt) {
  const double damping = detail::damping_coefficient(coupling, num_nodes, group_velocity);
  return detail::rk4(s, dt, [&](const Vec3& v) { return detail::dissipative_rate(v, d_hat, coupling, num_nodes, damping); });
}

/// Spin density s(x) on a periodic chain of nodes.
struct SpinField {
  std::vector<Vec3> s;

  int size() const { return static_cast<int>(s.size()); }

  static SpinField uniform(int num_nodes, const Vec3& value) {
    return SpinField{std::vector<Vec3>(static_cast<std::size_t>(num_nodes), value)};
  }

  /// Central difference with dx = 1 and periodic wrap.
  std::vector<Vec3> gradient() const {
    const int n = size();
    std::vector<Vec3> g(s.size());
    for (int x = 0; x < n; ++x) {
      const auto& right = s[static_cast<std::size_t>((x + 1) % n)];
      const auto& left = s[static_cast<std::size_t>((x - 1 + n) % n)];
      g[static_cast<std::size_t>(x)] = 0.5 * (right - left);
    }
    return g;
  }
};

namespace detail {

struct GradientModel {
  int num_nodes;
  double coupling;
  Vec3 d0;
  Vec3 d1;
  Vec3 torque_axis;  // d0 x d1 + d0 x (d0 x d1)
  double damping;

  GradientModel(const DiracCoefficients& coeffs, double j, int nodes)
      : num_nodes(nodes),
        coupling(j),
        d0(coeffs.d0),
        d1(coeffs.d1),
        torque_axis(coeffs.d0.cross(coeffs.d1) + coeffs.d0.cross(coeffs.d0.cross(coeffs.d1))),
        damping(damping_coefficient(j, nodes, group_velocity(coeffs.p, coeffs.theta))) {}

  std::vector<Vec3> rate(const SpinField& field) const {
    const auto grad = field.gradient();
    const double j = coupling;
    const double n = num_nodes;
    const double gradient_torque = j * j * kWalkStep / (8.0 * n);
    std::vector<Vec3> out(field.s.size());
    for (std::size_t x = 0; x < field.s.size(); ++x) {
      const Vec3& s = field.s[x];
      const Vec3& ds = grad[x];
      // Color polarization induced by the gradient, projected on d0.
      const double response = d1.dot(ds) + d0.dot(d1.cross(ds));
      const double gradient_damping = 0.5 * j * (j * kWalkStep / (8.0 * n)) * response / n;
      out[x] = dissipative_rate(s, d0, j, num_nodes, damping) + gradient_torque * torque_axis.cross(s.cross(ds)) +
               gradient_damping * d0.cross(d0.cross(s));
    }
    return out;
  }
};

inline SpinField axpy(const SpinField& base, double scale, const std::vector<Vec3>& rate) {
  SpinField out = base;
  for (std::size_t i = 0; i < out.s.size(); ++i) out.s[i] += scale * rate[i];
  return out;
}

}  // namespace detail

/// One RK4 substep of the gradient-corrected Landau-Lifshitz equation on a
/// periodic chain; reduces to ll_dissipative_step (d_hat = d0) for a uniform field.
inline SpinField ll_gradient_step(const SpinField& field, const DiracCoefficients& coeffs, double coupling, double dt) {
  if (field.size() < 4) throw std::invalid_argument("gradient integrator needs at least 4 nodes");
  const detail::GradientModel model(coeffs, coupling, field.size());
  const auto k1 = model.rate(field);
  const auto k2 = model.rate(detail::axpy(field, 0.5 * dt, k1));
  const auto k3 = model.rate(detail::axpy(field, 0.5 * dt, k2));
  const auto k4 = model.rate(detail::axpy(field, dt, k3));
  SpinField out = field;
  for (std::size_t i = 0; i < out.s.size(); ++i) out.s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

/// Integrates a spin vector over `steps` walk steps, sampling once per step.
template <class Stepper>
std::vector<Vec3> integrate_per_step(Vec3 s, int steps, double dt, Stepper&& stepper) {
  const int substeps = std::max(1, static_cast<int>(std::lround(1.0 / dt)));
  const double h = 1.0 / substeps;
  std::vector<Vec3> out{s};
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (int t = 0; t < steps; ++t) {
    for (int k = 0; k < substeps; ++k) s = stepper(s, h);
    out.push_back(s);
  }
  return out;
}

}  // namespace qwalk
