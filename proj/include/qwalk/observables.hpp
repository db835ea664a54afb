#pragma once

// Diagnostics of a walk state: densities, spin expectations, von Neumann
// entropies of the position/color/spin partitions and of spin subsets,
// two-spin concurrence and correlation, and localization measures.
//
// Entropies are in bits. Reduced matrices are Gram matrices of the amplitude
// array reshaped as (kept subsystem) x (traced subsystem); whichever side is
// smaller is used, since both share the nonzero spectrum of a pure state.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/hilbert.hpp"

namespace qwalk {

inline constexpr double kEigenvalueFloor = 1e-12;

/// p(x) = sum_{c,s} |psi[x,c,s]|^2.
inline std::vector<double> particle_density(const StateVector& state) {
  const auto& basis = state.basis();
  const int nodes = basis.lattice().num_nodes();
  const std::size_t block = 2 * basis.spin_states();
  std::vector<double> p(static_cast<std::size_t>(nodes), 0.0);
  auto amps = state.amplitudes();
  for (int x = 0; x < nodes; ++x) {
    double sum = 0.0;
    const Amplitude* a = amps.data() + basis.block_offset(x, 0);
    for (std::size_t i = 0; i < block; ++i) sum += std::norm(a[i]);
    p[static_cast<std::size_t>(x)] = sum;
  }
  return p;
}

/// -Tr rho log2 rho of a Hermitian matrix; eigenvalues below 1e-12 count as zero.
inline double von_neumann_entropy(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (double lambda : solver.eigenvalues()) {
    if (lambda > kEigenvalueFloor) s -= lambda * std::log2(lambda);
  }
  return s;
}

namespace detail {

// Splits flat indices into (kept spin bits a, everything else r). `edges` are
// the kept bits, in order: bit k of a is the spin on edges[k].
struct SpinSplit {
  std::vector<int> edges;
  std::uint64_t kept_mask = 0;

  std::uint64_t kept(std::uint64_t s) const {
    std::uint64_t a = 0;
    for (std::size_t k = 0; k < edges.size(); ++k) a |= ((s >> edges[k]) & 1u) << k;
    return a;
  }
};

inline SpinSplit make_split(const BasisIndex& basis, std::span<const int> edges) {
  if (edges.empty()) throw std::invalid_argument("spin subset is empty");
  SpinSplit split;
  std::set<int> seen;
  for (int e : edges) {
    if (e < 0 || e >= basis.num_spins()) throw std::out_of_range("edge " + std::to_string(e) + " out of range");
    if (!seen.insert(e).second) throw std::invalid_argument("spin subset has duplicate edge " + std::to_string(e));
    split.edges.push_back(e);
    split.kept_mask |= std::uint64_t{1} << e;
  }
  return split;
}

// Compresses a flat index to its complement label once the kept spin bits are removed.
inline std::uint64_t drop_bits(std::uint64_t index, std::uint64_t mask) {
  std::uint64_t out = 0;
  int pos = 0;
  for (int bit = 0; bit < 64 && (index >> bit) != 0; ++bit) {
    if ((mask >> bit) & 1u) continue;
    out |= ((index >> bit) & 1u) << pos;
    ++pos;
  }
  return out;
}

// Amplitudes reshaped as a (complement) x (2^|A|) matrix.
inline Eigen::MatrixXcd spin_subset_matrix(const StateVector& state, const SpinSplit& split, std::size_t memory_cap) {
  const std::size_t kept_dim = std::size_t{1} << split.edges.size();
  const std::size_t rest_dim = state.size() / kept_dim;
  check_memory(state.size() * sizeof(Amplitude), memory_cap, "spin subset reshape");
  Eigen::MatrixXcd m(static_cast<Eigen::Index>(rest_dim), static_cast<Eigen::Index>(kept_dim));
  const std::uint64_t block = state.basis().spin_states();
  for (std::size_t i = 0; i < state.size(); ++i) {
    const std::uint64_t s = i % block;
    const std::uint64_t a = split.kept(s);
    const std::uint64_t r = drop_bits(i, split.kept_mask);
    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) = state[i];
  }
  return m;
}

}  // namespace detail

/// Reduced density matrix of a set of edge spins. Index bit k refers to edges[k].
inline Eigen::MatrixXcd reduced_spin_density(const StateVector& state, std::span<const int> edges,
                                             std::size_t memory_cap = kDefaultMemoryCap) {
  const auto split = detail::make_split(state.basis(), edges);
  const std::size_t kept_dim = std::size_t{1} << split.edges.size();
  check_memory(kept_dim * kept_dim * sizeof(Amplitude), memory_cap, "reduced spin density");
  const auto m = detail::spin_subset_matrix(state, split, memory_cap);
  return m.transpose() * m.conjugate();
}

inline Eigen::MatrixXcd reduced_spin_density(const StateVector& state, std::initializer_list<int> edges) {
  return reduced_spin_density(state, std::span<const int>(edges.begin(), edges.size()));
}

struct SpinExpectation {
  double sx = 0.0;
  double sy = 0.0;
  double sz = 0.0;

  double norm() const { return std::sqrt(sx * sx + sy * sy + sz * sz); }
};

/// (Tr X rho_e, Tr Y rho_e, Tr Z rho_e) with |0> = spin up (sz = +1).
inline SpinExpectation spin_expectation(const StateVector& state, int edge) {
  const auto& basis = state.basis();
  if (edge < 0 || edge >= basis.num_spins()) throw std::out_of_range("edge " + std::to_string(edge) + " out of range");
  const std::uint64_t mask = std::uint64_t{1} << edge;
  const std::uint64_t block = basis.spin_states();
  const std::size_t num_blocks = state.size() / block;
  double up = 0.0;
  double down = 0.0;
  Amplitude coherence{};  // rho_01 = sum psi(s_e=0) conj(psi(s_e=1))
  auto amps = state.amplitudes();
  for (std::size_t b = 0; b < num_blocks; ++b) {
    const Amplitude* a = amps.data() + b * block;
    for (std::uint64_t high = 0; high < block; high += 2 * mask) {
      for (std::uint64_t s = high; s < high + mask; ++s) {
        up += std::norm(a[s]);
        down += std::norm(a[s + mask]);
        coherence += a[s] * std::conj(a[s + mask]);
      }
    }
  }
  return {2.0 * coherence.real(), -2.0 * coherence.imag(), up - down};
}

inline std::vector<SpinExpectation> spin_profile(const StateVector& state) {
  std::vector<SpinExpectation> out;
  for (int e = 0; e < state.basis().num_spins(); ++e) out.push_back(spin_expectation(state, e));
  return out;
}

/// Average of the per-edge spin expectations.
inline std::array<double, 3> mean_spin(const StateVector& state) {
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  const int edges = state.basis().num_spins();
  for (int e = 0; e < edges; ++e) {
    const auto s = spin_expectation(state, e);
    mean[0] += s.sx;
    mean[1] += s.sy;
    mean[2] += s.sz;
  }
  for (auto& m : mean) m /= edges;
  return mean;
}

enum class Partition { Positions, Colors, Spins };

/// Reduced density matrix of one basis label (positions, colors, or the
/// complement (x,c) of the spins, which has the same spectrum as rho_spins).
inline Eigen::MatrixXcd partition_density(const StateVector& state, Partition part) {
  const auto& basis = state.basis();
  const auto nodes = static_cast<Eigen::Index>(basis.lattice().num_nodes());
  const auto spins = static_cast<Eigen::Index>(basis.spin_states());
  // Row-major view: rows (x,c), columns s.
  using RowMajor = Eigen::Matrix<Amplitude, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> xc_s(state.amplitudes().data(), 2 * nodes, spins);
  switch (part) {
    case Partition::Spins:
      return xc_s * xc_s.adjoint();
    case Partition::Positions: {
      Eigen::Map<const RowMajor> x_cs(state.amplitudes().data(), nodes, 2 * spins);
      return x_cs * x_cs.adjoint();
    }
    case Partition::Colors: {
      Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
      for (Eigen::Index x = 0; x < nodes; ++x) {
        const auto c0 = xc_s.row(2 * x);
        const auto c1 = xc_s.row(2 * x + 1);
        rho(0, 0) += c0.squaredNorm();
        rho(1, 1) += c1.squaredNorm();
        rho(0, 1) += c1.dot(c0);  // dot() conjugates its left operand
      }
      rho(1, 0) = std::conj(rho(0, 1));
      return rho;
    }
  }
  throw std::logic_error("unknown partition");
}

inline double partition_entropy(const StateVector& state, Partition part) {
  return von_neumann_entropy(partition_density(state, part));
}

/// Entanglement entropy of a set of edge spins against everything else.
inline double spin_set_entropy(const StateVector& state, std::span<const int> edges,
                               std::size_t memory_cap = kDefaultMemoryCap) {
  const auto split = detail::make_split(state.basis(), edges);
  const std::size_t kept_dim = std::size_t{1} << split.edges.size();
  const std::size_t rest_dim = state.size() / kept_dim;
  const std::size_t side = std::min(kept_dim, rest_dim);
  check_memory(side * side * sizeof(Amplitude), memory_cap, "spin subset density");
  const auto m = detail::spin_subset_matrix(state, split, memory_cap);
  if (kept_dim <= rest_dim) return von_neumann_entropy(m.transpose() * m.conjugate());
  return von_neumann_entropy(m * m.adjoint());
}

inline double spin_set_entropy(const StateVector& state, std::initializer_list<int> edges) {
  return spin_set_entropy(state, std::span<const int>(edges.begin(), edges.size()));
}

namespace detail {

inline Eigen::Matrix4cd two_spin_density(const StateVector& state, int e1, int e2) {
  if (e1 == e2) throw std::invalid_argument("two-spin quantities need distinct edges");
  const std::array<int, 2> edges{e1, e2};
  return reduced_spin_density(state, edges);
}

inline Eigen::Matrix2cd pauli(int k) {
  using namespace std::complex_literals;
  Eigen::Matrix2cd p;
  switch (k) {
    case 0: p << 0.0, 1.0, 1.0, 0.0; break;
    case 1: p << 0.0, -1i, 1i, 0.0; break;
    default: p << 1.0, 0.0, 0.0, -1.0; break;
  }
  return p;
}

// Operator on the two-spin space where index bit 0 is the first spin.
inline Eigen::Matrix4cd two_spin_operator(const Eigen::Matrix2cd& first, const Eigen::Matrix2cd& second) {
  Eigen::Matrix4cd out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out(i, j) = first(i & 1, j & 1) * second(i >> 1, j >> 1);
  return out;
}

}  // namespace detail

/// Wootters concurrence of the two-spin reduced state.
inline double concurrence_of(const Eigen::Matrix4cd& rho) {
  const Eigen::Matrix4cd yy = detail::two_spin_operator(detail::pauli(1), detail::pauli(1));
  const Eigen::Matrix4cd r = rho * yy * rho.conjugate() * yy;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> solver(r, false);
  std::array<double, 4> roots{};
  for (int i = 0; i < 4; ++i) roots[static_cast<std::size_t>(i)] = std::sqrt(std::max(0.0, solver.eigenvalues()(i).real()));
  std::sort(roots.begin(), roots.end(), std::greater<>());
  return std::max(0.0, roots[0] - roots[1] - roots[2] - roots[3]);
}

inline double concurrence(const StateVector& state, int e1, int e2) {
  return concurrence_of(detail::two_spin_density(state, e1, e2));
}

/// <sigma_1 . sigma_2> - <sigma_1> . <sigma_2> on the two-spin reduced state.
inline double spin_correlation(const StateVector& state, int e1, int e2) {
  const Eigen::Matrix4cd rho = detail::two_spin_density(state, e1, e2);
  const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
  double result = 0.0;
  for (int k = 0; k < 3; ++k) {
    const auto p = detail::pauli(k);
    const double joint = (rho * detail::two_spin_operator(p, p)).trace().real();
    const double first = (rho * detail::two_spin_operator(p, id)).trace().real();
    const double second = (rho * detail::two_spin_operator(id, p)).trace().real();
    result += joint - first * second;
  }
  return result;
}

/// max_x |F_x - (x+1)/|V|| with F the cumulative of the (time-averaged) density.
inline double ks_distance(std::span<const double> density) {
  if (density.empty()) throw std::invalid_argument("empty density");
  double total = 0.0;
  for (double p : density) total += p;
  if (std::abs(total - 1.0) > 1e-6) throw std::invalid_argument("density does not sum to 1");
  const double n = static_cast<double>(density.size());
  double cumulative = 0.0;
  double distance = 0.0;
  for (std::size_t x = 0; x < density.size(); ++x) {
    cumulative += density[x];
    distance = std::max(distance, std::abs(cumulative - static_cast<double>(x + 1) / n));
  }
  return distance;
}

/// Average entanglement entropy of |A| spins in a random pure state of the full register.
inline double page_entropy(int subset_size, int num_nodes) {
  if (subset_size < 1) throw std::invalid_argument("subset size must be positive");
  const double d_a = std::exp2(subset_size);
  const double d_v = 2.0 * num_nodes * std::exp2(num_nodes);
  return std::log2(d_a) - d_a * d_a / (2.0 * d_v * std::numbers::ln2);
}

/// Sampled observables of one trajectory. Optional channels are left empty.
struct ObservableSeries {
  std::vector<int> times;
  std::vector<std::vector<double>> density;
  std::vector<std::vector<SpinExpectation>> spin;
  std::vector<std::array<double, 3>> mean_spin;
  std::vector<std::array<double, 3>> entropy;  // S_x, S_c, S_s
  std::vector<double> spin_set_entropy;
  std::vector<std::vector<double>> concurrence;  // one column per requested edge pair

  std::size_t size() const noexcept { return times.size(); }
};

/// Inclusive step range [first, last] for time averages.
struct TimeWindow {
  int first = 0;
  int last = 0;

  /// Second half of a run of `steps` steps.
  static TimeWindow second_half(int steps) { return {steps / 2, steps}; }
};

struct TimeAverage {
  int samples = 0;
  std::vector<double> density;
  std::array<double, 3> mean_spin{0.0, 0.0, 0.0};
  double mean_spin_norm = 0.0;
  std::array<double, 3> entropy{0.0, 0.0, 0.0};
};

/// Arithmetic mean of every recorded channel over the samples whose time lies in the window.
inline TimeAverage time_average(const ObservableSeries& series, TimeWindow window) {
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    if (series.times[i] >= window.first && series.times[i] <= window.last) picked.push_back(i);
  }
  if (picked.empty()) {
    throw std::invalid_argument("averaging window [" + std::to_string(window.first) + ", " +
                                std::to_string(window.last) + "] holds no samples");
  }
  TimeAverage avg;
  avg.samples = static_cast<int>(picked.size());
  const double weight = 1.0 / static_cast<double>(picked.size());
  for (std::size_t i : picked) {
    if (!series.density.empty()) {
      const auto& row = series.density[i];
      if (avg.density.empty()) avg.density.assign(row.size(), 0.0);
      for (std::size_t x = 0; x < row.size(); ++x) avg.density[x] += weight * row[x];
    }
    if (!series.mean_spin.empty()) {
      const auto& m = series.mean_spin[i];
      for (int k = 0; k < 3; ++k) avg.mean_spin[static_cast<std::size_t>(k)] += weight * m[static_cast<std::size_t>(k)];
      avg.mean_spin_norm += weight * std::sqrt(m[0] * m[0] + m[1] * m[1] + m[2] * m[2]);
    }
    if (!series.entropy.empty()) {
      for (int k = 0; k < 3; ++k)
        avg.entropy[static_cast<std::size_t>(k)] += weight * series.entropy[i][static_cast<std::size_t>(k)];
    }
  }
  return avg;
}

}  // namespace qwalk
