#pragma once

// Hilbert space of a walker on a 1D chain with one spin-1/2 per edge.
//
// Basis kets |x c s> are flattened as (2x + c) * 2^|E| + s, so the spin word
// occupies the low bits. Bit e of s is the spin on edge e = (e, e+1 mod |V|),
// with bit value 0 meaning spin up.

#include <Eigen/Dense>

#include <bit>
#include <cmath>
#include <complex>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qwalk/errors.hpp"

namespace qwalk {

using Amplitude = std::complex<double>;

inline constexpr std::size_t kDefaultMemoryCap = std::size_t{1} << 30;

enum class Boundary { Periodic, Reflective };

class Lattice {
 public:
  Lattice(int num_nodes, Boundary boundary) : num_nodes_(num_nodes), boundary_(boundary) {
    if (num_nodes < 2) throw ConfigError("nodes", "a lattice needs at least 2 nodes");
  }

  int num_nodes() const noexcept { return num_nodes_; }
  int num_edges() const noexcept { return periodic() ? num_nodes_ : num_nodes_ - 1; }
  Boundary boundary() const noexcept { return boundary_; }
  bool periodic() const noexcept { return boundary_ == Boundary::Periodic; }

  // Edge e links node e (left) to node e+1 (right, wrapped on periodic chains).
  int left_node(int edge) const noexcept { return edge; }
  int right_node(int edge) const noexcept { return (edge + 1) % num_nodes_; }

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  int num_nodes_;
  Boundary boundary_;
};

struct BasisLabel {
  int x = 0;
  int color = 0;
  std::uint64_t spins = 0;

  friend auto operator<=>(const BasisLabel&, const BasisLabel&) = default;
};

class BasisIndex {
 public:
  explicit BasisIndex(Lattice lattice) : lattice_(lattice) {
    const int edges = lattice_.num_edges();
    if (edges > 40) throw ResourceError("spin register of " + std::to_string(edges) + " edges is not addressable");
    spin_states_ = std::uint64_t{1} << edges;
    dim_ = static_cast<std::size_t>(lattice_.num_nodes()) * 2 * spin_states_;
  }

  const Lattice& lattice() const noexcept { return lattice_; }
  std::size_t dim() const noexcept { return dim_; }
  std::uint64_t spin_states() const noexcept { return spin_states_; }
  int num_spins() const noexcept { return lattice_.num_edges(); }
  std::size_t state_bytes() const noexcept { return dim_ * sizeof(Amplitude); }

  // First flat index of the contiguous spin block belonging to (x, color).
  std::size_t block_offset(int x, int color) const noexcept {
    return static_cast<std::size_t>(2 * x + color) * spin_states_;
  }

  std::size_t encode(int x, int color, std::uint64_t spins) const {
    if (x < 0 || x >= lattice_.num_nodes()) throw std::out_of_range("node index " + std::to_string(x) + " out of range");
    if (color != 0 && color != 1) throw std::out_of_range("color must be 0 or 1");
    if (spins >= spin_states_) throw std::out_of_range("spin word out of range");
    return block_offset(x, color) + spins;
  }

  BasisLabel decode(std::size_t index) const {
    if (index >= dim_) throw std::out_of_range("flat index out of range");
    const std::size_t block = index / spin_states_;
    return {static_cast<int>(block / 2), static_cast<int>(block % 2), index % spin_states_};
  }

  friend bool operator==(const BasisIndex&, const BasisIndex&) = default;

 private:
  Lattice lattice_;
  std::uint64_t spin_states_ = 0;
  std::size_t dim_ = 0;
};

inline void check_memory(std::size_t bytes, std::size_t memory_cap, std::string_view what) {
  if (bytes > memory_cap) {
    throw ResourceError(std::string(what) + " needs " + std::to_string(bytes) + " bytes, above the memory cap of " +
                        std::to_string(memory_cap) + " bytes");
  }
}

class StateVector {
 public:
  explicit StateVector(BasisIndex basis, std::size_t memory_cap = kDefaultMemoryCap) : basis_(basis) {
    check_memory(basis_.state_bytes(), memory_cap, "state vector");
    amplitudes_.assign(basis_.dim(), Amplitude{});
  }

  const BasisIndex& basis() const noexcept { return basis_; }
  const Lattice& lattice() const noexcept { return basis_.lattice(); }
  std::size_t size() const noexcept { return amplitudes_.size(); }

  std::span<Amplitude> amplitudes() noexcept { return amplitudes_; }
  std::span<const Amplitude> amplitudes() const noexcept { return amplitudes_; }

  Amplitude& operator[](std::size_t i) noexcept { return amplitudes_[i]; }
  const Amplitude& operator[](std::size_t i) const noexcept { return amplitudes_[i]; }

  Amplitude& at(int x, int color, std::uint64_t spins) { return amplitudes_[basis_.encode(x, color, spins)]; }
  const Amplitude& at(int x, int color, std::uint64_t spins) const {
    return amplitudes_[basis_.encode(x, color, spins)];
  }

  double norm_squared() const noexcept {
    double sum = 0.0;
    for (const auto& a : amplitudes_) sum += std::norm(a);
    return sum;
  }
  double norm() const noexcept { return std::sqrt(norm_squared()); }

  void normalize() {
    const double n = norm();
    if (n == 0.0) throw std::domain_error("cannot normalize the zero vector");
    for (auto& a : amplitudes_) a /= n;
  }

 private:
  BasisIndex basis_;
  std::vector<Amplitude> amplitudes_;
};

// Initial conditions: 'z' spins up, 'x' spins along +x, 'zx' spin up on edge
// (x0, x0+1) over an 'x' background, 'e' superposition of all-up and the last
// edge flipped. The walker always starts with color 0.
enum class InitialKind { Z, X, ZX, E };

struct InitialStateSpec {
  InitialKind kind = InitialKind::Z;
  bool uniform_position = false;
  int x0 = 0;

  // Parses the 'z', 'x', 'zx', 'e' labels with an optional 'i' prefix.
  static InitialStateSpec parse(std::string_view label, int x0 = 0) {
    InitialStateSpec spec;
    spec.x0 = x0;
    if (label.size() > 1 && label.front() == 'i') {
      spec.uniform_position = true;
      label.remove_prefix(1);
    }
    if (label == "z") {
      spec.kind = InitialKind::Z;
    } else if (label == "x") {
      spec.kind = InitialKind::X;
    } else if (label == "zx") {
      spec.kind = InitialKind::ZX;
    } else if (label == "e") {
      spec.kind = InitialKind::E;
    } else {
      throw ConfigError("initial", "unknown initial state label '" + std::string(label) + "'");
    }
    return spec;
  }

  std::string label() const {
    std::string out = uniform_position ? "i" : "";
    switch (kind) {
      case InitialKind::Z: return out + "z";
      case InitialKind::X: return out + "x";
      case InitialKind::ZX: return out + "zx";
      case InitialKind::E: return out + "e";
    }
    return out;
  }

  void validate(const Lattice& lattice) const {
    if (x0 < 0 || x0 >= lattice.num_nodes()) throw ConfigError("x0", "initial node outside the lattice");
    if (kind == InitialKind::ZX && x0 >= lattice.num_edges()) {
      throw ConfigError("x0", "'zx' needs the edge (x0, x0+1) to exist");
    }
  }
};

inline StateVector build_initial_state(const InitialStateSpec& spec, const BasisIndex& basis,
                                       std::size_t memory_cap = kDefaultMemoryCap) {
  spec.validate(basis.lattice());
  StateVector state(basis, memory_cap);
  const std::uint64_t spin_states = basis.spin_states();
  const int edges = basis.num_spins();

  std::vector<std::pair<std::uint64_t, double>> spin_part;
  switch (spec.kind) {
    case InitialKind::Z:
      spin_part.emplace_back(0, 1.0);
      break;
    case InitialKind::X: {
      const double a = std::pow(2.0, -0.5 * edges);
      for (std::uint64_t s = 0; s < spin_states; ++s) spin_part.emplace_back(s, a);
      break;
    }
    case InitialKind::ZX: {
      const double a = std::pow(2.0, -0.5 * (edges - 1));
      const std::uint64_t fixed = std::uint64_t{1} << spec.x0;
      for (std::uint64_t s = 0; s < spin_states; ++s) {
        if ((s & fixed) == 0) spin_part.emplace_back(s, a);
      }
      break;
    }
    case InitialKind::E:
      spin_part.emplace_back(0, std::numbers::sqrt2 / 2);
      spin_part.emplace_back(std::uint64_t{1} << (edges - 1), std::numbers::sqrt2 / 2);
      break;
  }

  const int nodes = basis.lattice().num_nodes();
  const double position_weight = spec.uniform_position ? 1.0 / std::sqrt(static_cast<double>(nodes)) : 1.0;
  for (int x = 0; x < nodes; ++x) {
    if (!spec.uniform_position && x != spec.x0) continue;
    const std::size_t offset = basis.block_offset(x, 0);
    for (const auto& [s, a] : spin_part) state[offset + s] = position_weight * a;
  }
  return state;
}

/// Grover diffusion coin G(d) = (2/d) J_d - I_d.
inline Eigen::MatrixXd grover_coin(int degree) {
  if (degree < 1) throw std::invalid_argument("coin degree must be positive");
  Eigen::MatrixXd g = Eigen::MatrixXd::Constant(degree, degree, 2.0 / degree);
  g -= Eigen::MatrixXd::Identity(degree, degree);
  return g;
}

/// Discrete Fourier coin F[j,k] = exp(2 pi i j k / d) / sqrt(d).
inline Eigen::MatrixXcd fourier_coin(int degree) {
  if (degree < 1) throw std::invalid_argument("coin degree must be positive");
  Eigen::MatrixXcd f(degree, degree);
  const double scale = 1.0 / std::sqrt(static_cast<double>(degree));
  for (int j = 0; j < degree; ++j) {
    for (int k = 0; k < degree; ++k) {
      // Reduce j*k mod d first so large degrees keep full phase accuracy.
      const double phase = 2.0 * std::numbers::pi * static_cast<double>((j * k) % degree) / degree;
      f(j, k) = std::polar(scale, phase);
    }
  }
  return f;
}

}  // namespace qwalk
