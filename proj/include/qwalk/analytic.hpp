#pragma once

// Closed-form results used as oracles: the free walk (J = 0) through its
// Fourier-space bands, and the fully solvable two-node chain.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/evolution.hpp"
#include "qwalk/hilbert.hpp"

namespace qwalk {

/// Particle density of the J = 0 walk after t steps. Every initial state here
/// is a product of walker and spin parts, so only the walker part matters.
///
/// With phi(k) = sum_x e^{ikx} psi(x), one step is W(k) = i(cos E - i sin E d.tau),
/// hence W^t = i^t (cos tE - i U_{t-1}(cos E) n.tau) with n = sin E d.
inline std::vector<double> free_walk_density(double theta, const Lattice& lattice, const InitialStateSpec& initial,
                                             int t) {
  using namespace std::complex_literals;
  if (!lattice.periodic()) throw UnsupportedError("free-walk propagator needs a periodic lattice");
  if (t < 0) throw std::invalid_argument("negative time");
  initial.validate(lattice);
  const int n = lattice.num_nodes();

  // Walker amplitudes (color 0 only) before the transform.
  std::vector<Amplitude> start(static_cast<std::size_t>(n));
  if (initial.uniform_position) {
    for (auto& a : start) a = 1.0 / std::sqrt(static_cast<double>(n));
  } else {
    start[static_cast<std::size_t>(initial.x0)] = 1.0;
  }

  const double ct = std::cos(theta), st = std::sin(theta);
  Amplitude global = 1.0;
  for (int i = 0; i < t % 4; ++i) global *= 1i;

  std::vector<Amplitude> up(static_cast<std::size_t>(n)), down(static_cast<std::size_t>(n));
  for (int m = 0; m < n; ++m) {
    const double k = 2.0 * std::numbers::pi * m / n;
    Amplitude phi0 = 0.0;
    for (int x = 0; x < n; ++x) phi0 += std::polar(1.0, k * x) * start[static_cast<std::size_t>(x)];

    const double cos_e = -std::sin(k) * st;
    // U_{t-1}(cos E) by the three-term recurrence; well defined at sin E = 0.
    double u_prev = 0.0, u = t > 0 ? 1.0 : 0.0;
    for (int j = 1; j < t; ++j) {
      const double next = 2.0 * cos_e * u - u_prev;
      u_prev = u;
      u = next;
    }
    const double cos_te = std::cos(t * std::acos(std::clamp(cos_e, -1.0, 1.0)));
    const double nx = ct * std::cos(k), ny = ct * std::sin(k), nz = st * std::cos(k);
    // (n.tau) applied to (phi0, 0): first column of the Pauli combination.
    const Amplitude r0 = nz * phi0;
    const Amplitude r1 = Amplitude(nx, ny) * phi0;
    const Amplitude f0 = global * (cos_te * phi0 - 1i * u * r0);
    const Amplitude f1 = global * (-1i * u * r1);
    for (int x = 0; x < n; ++x) {
      const Amplitude phase = std::polar(1.0 / n, -k * x);
      up[static_cast<std::size_t>(x)] += phase * f0;
      down[static_cast<std::size_t>(x)] += phase * f1;
    }
  }
  std::vector<double> density(static_cast<std::size_t>(n));
  for (std::size_t x = 0; x < density.size(); ++x) density[x] = std::norm(up[x]) + std::norm(down[x]);
  return density;
}

/// The sixteen eigenvalues of the two-node step operator: +-e^{iJ/4} four times
/// each and the four lambda_n twice each.
inline std::vector<Amplitude> two_node_spectrum(double theta, double coupling) {
  using namespace std::complex_literals;
  std::vector<Amplitude> out;
  out.reserve(16);
  const Amplitude plus = std::exp(1i * (coupling / 4.0));
  for (int i = 0; i < 4; ++i) {
    out.push_back(plus);
    out.push_back(-plus);
  }
  const double g = std::sin(coupling / 2.0) * std::sin(theta);
  const double g2 = g * g;
  const double root = std::abs(g) * std::sqrt(4.0 - g2);
  const Amplitude prefactor = std::exp(-1i * (coupling / 4.0)) / std::numbers::sqrt2;
  for (const double inner : {1.0, -1.0}) {
    const Amplitude lambda = prefactor * std::sqrt(Amplitude(2.0 - g2, inner * root));
    for (int i = 0; i < 2; ++i) {
      out.push_back(lambda);
      out.push_back(-lambda);
    }
  }
  return out;
}

/// Flat index of component `k` of the edge vector e_x(r): k < 2 picks
/// psi[x, 0, s_x = k], k >= 2 picks psi[x+1, 1, s_x = k-2], the other spin fixed to r.
inline std::size_t two_node_edge_component(int x, int r, int k) {
  const BasisIndex basis(Lattice(2, Boundary::Periodic));
  const int node = k < 2 ? x : (x + 1) % 2;
  const int color = k < 2 ? 0 : 1;
  const std::uint64_t own = static_cast<std::uint64_t>(k % 2) << x;
  const std::uint64_t other = static_cast<std::uint64_t>(r) << (1 - x);
  return basis.encode(node, color, own | other);
}

/// Two-node step operator assembled from the edge recurrence in the edge
/// basis (e_0(0), e_0(1), e_1(0), e_1(1)), then mapped to the flat basis.
inline Eigen::MatrixXcd two_node_operator(double theta, double coupling) {
  const auto m = edge_recurrence(theta, coupling);
  const Eigen::Matrix4cd hop = m.a + m.c;
  // Selectors M_{s r}: which spin of the neighboring edge vector feeds each row.
  std::array<Eigen::Matrix4cd, 4> select;
  for (auto& s : select) s.setZero();
  select[0](0, 0) = 1.0;  // M_00
  select[0](2, 2) = 1.0;
  select[1](1, 0) = 1.0;  // M_01
  select[1](3, 2) = 1.0;
  select[2](0, 1) = 1.0;  // M_10
  select[2](2, 3) = 1.0;
  select[3](1, 1) = 1.0;  // M_11
  select[3](3, 3) = 1.0;

  Eigen::MatrixXcd edge = Eigen::MatrixXcd::Zero(16, 16);
  for (int blk = 0; blk < 4; ++blk) edge.block<4, 4>(4 * blk, 4 * blk) = m.b;
  for (int s = 0; s < 2; ++s) {
    for (int r = 0; r < 2; ++r) {
      const Eigen::Matrix4cd a = hop * select[static_cast<std::size_t>(2 * s + r)];
      edge.block<4, 4>(4 * s, 8 + 4 * r) = a;
      edge.block<4, 4>(8 + 4 * s, 4 * r) = a;
    }
  }

  Eigen::MatrixXcd perm = Eigen::MatrixXcd::Zero(16, 16);
  for (int x = 0; x < 2; ++x) {
    for (int r = 0; r < 2; ++r) {
      for (int k = 0; k < 4; ++k) perm(static_cast<Eigen::Index>(two_node_edge_component(x, r, k)), 8 * x + 4 * r + k) = 1.0;
    }
  }
  return perm * edge * perm.transpose();
}

/// Spin-spin correlation after one step from 'x' on two nodes.
inline double two_node_correlation_t1(double theta, double coupling) {
  const double s2t = std::sin(2.0 * theta);
  const double sj = std::sin(coupling);
  return s2t * s2t * sj * sj / 16.0;
}

}  // namespace qwalk
