#pragma once

// One-step evolution U(J, theta) = V(J) M R(theta), applied in place.
//
// The coin mixes the two color blocks of each node, the shift permutes whole
// spin blocks, and the interaction mixes the 4-amplitude quadruple
//   (psi[x,0,s_e=0], psi[x,0,s_e=1], psi[x+1,1,s_e=0], psi[x+1,1,s_e=1])
// of every edge e = (x, x+1), i.e. the edge side (tau) times the edge spin (sigma).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/hilbert.hpp"

namespace qwalk {

inline constexpr std::size_t kDefaultMaterializeCap = 4096;

/// Per-node coin angle theta(x) of the rotation R(theta).
class CoinField {
 public:
  explicit CoinField(std::vector<double> theta) : theta_(std::move(theta)) {
    if (theta_.empty()) throw ConfigError("theta", "coin field is empty");
    uniform_ = std::all_of(theta_.begin(), theta_.end(), [&](double t) { return t == theta_.front(); });
    cos_.reserve(theta_.size());
    sin_.reserve(theta_.size());
    for (double t : theta_) {
      cos_.push_back(std::cos(t));
      sin_.push_back(std::sin(t));
    }
  }

  static CoinField uniform(int num_nodes, double theta) {
    return CoinField(std::vector<double>(static_cast<std::size_t>(num_nodes), theta));
  }

  /// theta(x) = theta_minus for x < interface, theta_plus for x >= interface.
  static CoinField interface(int num_nodes, double theta_minus, double theta_plus, int interface_node) {
    if (interface_node < 0 || interface_node >= num_nodes) {
      throw ConfigError("interface", "interface node outside the lattice");
    }
    std::vector<double> theta(static_cast<std::size_t>(num_nodes));
    for (int x = 0; x < num_nodes; ++x) theta[static_cast<std::size_t>(x)] = x < interface_node ? theta_minus : theta_plus;
    return CoinField(std::move(theta));
  }

  int size() const noexcept { return static_cast<int>(theta_.size()); }
  bool is_uniform() const noexcept { return uniform_; }
  double theta(int x) const { return theta_[static_cast<std::size_t>(x)]; }
  double cos(int x) const { return cos_[static_cast<std::size_t>(x)]; }
  double sin(int x) const { return sin_[static_cast<std::size_t>(x)]; }
  std::span<const double> values() const noexcept { return theta_; }

 private:
  std::vector<double> theta_;
  std::vector<double> cos_;
  std::vector<double> sin_;
  bool uniform_ = true;
};

/// V_xy(J) = exp(i J/4 tau.sigma) on the (side, spin) quadruple of one edge.
inline Eigen::Matrix4cd interaction_matrix(double coupling) {
  using namespace std::complex_literals;
  const Amplitude global = std::exp(-1i * (coupling / 4.0));
  const Amplitude diagonal = std::exp(1i * (coupling / 2.0));
  const double c = std::cos(coupling / 2.0);
  const Amplitude is = 1i * std::sin(coupling / 2.0);
  Eigen::Matrix4cd v = Eigen::Matrix4cd::Zero();
  v(0, 0) = diagonal;
  v(1, 1) = c;
  v(1, 2) = is;
  v(2, 1) = is;
  v(2, 2) = c;
  v(3, 3) = diagonal;
  return global * v;
}

class Coupling {
 public:
  explicit Coupling(double value) : value_(value), matrix_(interaction_matrix(value)) {}

  double value() const noexcept { return value_; }
  const Eigen::Matrix4cd& edge_matrix() const noexcept { return matrix_; }

 private:
  double value_;
  Eigen::Matrix4cd matrix_;
};

class StepOperator {
 public:
  StepOperator(Lattice lattice, CoinField coin, Coupling coupling, Amplitude bounce_phase = 1.0)
      : lattice_(lattice), coin_(std::move(coin)), coupling_(std::move(coupling)), bounce_phase_(bounce_phase) {
    if (coin_.size() != lattice_.num_nodes()) {
      throw ConfigError("theta", "coin field has " + std::to_string(coin_.size()) + " entries for " +
                                     std::to_string(lattice_.num_nodes()) + " nodes");
    }
    if (std::abs(std::abs(bounce_phase_) - 1.0) > 1e-12) throw ConfigError("bounce_phase", "must have unit modulus");
  }

  StepOperator(Lattice lattice, double theta, double coupling)
      : StepOperator(lattice, CoinField::uniform(lattice.num_nodes(), theta), Coupling(coupling)) {}

  const Lattice& lattice() const noexcept { return lattice_; }
  const CoinField& coin() const noexcept { return coin_; }
  const Coupling& coupling() const noexcept { return coupling_; }
  Amplitude bounce_phase() const noexcept { return bounce_phase_; }

 private:
  Lattice lattice_;
  CoinField coin_;
  Coupling coupling_;
  Amplitude bounce_phase_;
};

/// (psi[x,0,s], psi[x,1,s]) <- R(theta(x)) (psi[x,0,s], psi[x,1,s]).
inline void apply_coin(StateVector& state, const CoinField& coin) {
  const auto& basis = state.basis();
  if (coin.size() != basis.lattice().num_nodes()) throw std::invalid_argument("coin field does not match the lattice");
  const std::size_t block = basis.spin_states();
  auto amps = state.amplitudes();
  for (int x = 0; x < coin.size(); ++x) {
    const double c = coin.cos(x);
    const double s = coin.sin(x);
    Amplitude* up = amps.data() + basis.block_offset(x, 0);
    Amplitude* down = amps.data() + basis.block_offset(x, 1);
    for (std::size_t i = 0; i < block; ++i) {
      const Amplitude a = up[i];
      const Amplitude b = down[i];
      up[i] = c * a - s * b;
      down[i] = s * a + c * b;
    }
  }
}

namespace detail {

// Block index b = 2x + c. Returns, for every destination block, the block it
// receives amplitude from, plus whether that move is a boundary bounce.
struct ShiftPlan {
  std::vector<int> source;
  std::vector<bool> bounced;
};

inline ShiftPlan shift_plan(const Lattice& lattice) {
  const int nodes = lattice.num_nodes();
  ShiftPlan plan{std::vector<int>(static_cast<std::size_t>(2 * nodes)), std::vector<bool>(static_cast<std::size_t>(2 * nodes))};
  for (int x = 0; x < nodes; ++x) {
    // Color 0 hops right and becomes color 1; color 1 hops left and becomes color 0.
    int dest_right = 2 * ((x + 1) % nodes) + 1;
    int dest_left = 2 * ((x - 1 + nodes) % nodes);
    bool bounce_right = false;
    bool bounce_left = false;
    if (!lattice.periodic()) {
      if (x == nodes - 1) {
        dest_right = 2 * x;
        bounce_right = true;
      }
      if (x == 0) {
        dest_left = 1;
        bounce_left = true;
      }
    }
    plan.source[static_cast<std::size_t>(dest_right)] = 2 * x;
    plan.bounced[static_cast<std::size_t>(dest_right)] = bounce_right;
    plan.source[static_cast<std::size_t>(dest_left)] = 2 * x + 1;
    plan.bounced[static_cast<std::size_t>(dest_left)] = bounce_left;
  }
  return plan;
}

}  // namespace detail

/// Motion operator: (x,0,s) -> (x+1,1,s), (x,1,s) -> (x-1,0,s). On reflective
/// chains the outward-moving boundary blocks stay in place (times bounce_phase).
inline void apply_shift(StateVector& state, Amplitude bounce_phase = 1.0) {
  const auto& basis = state.basis();
  const auto plan = detail::shift_plan(basis.lattice());
  const std::size_t block = basis.spin_states();
  const std::size_t num_blocks = plan.source.size();
  auto amps = state.amplitudes();
  auto block_ptr = [&](std::size_t b) { return amps.data() + b * block; };

  std::vector<Amplitude> saved(block);
  std::vector<bool> done(num_blocks, false);
  for (std::size_t start = 0; start < num_blocks; ++start) {
    if (done[start]) continue;
    std::copy_n(block_ptr(start), block, saved.begin());
    std::size_t current = start;
    while (true) {
      done[current] = true;
      const auto src = static_cast<std::size_t>(plan.source[current]);
      if (src == start) {
        std::copy_n(saved.begin(), block, block_ptr(current));
      } else {
        std::copy_n(block_ptr(src), block, block_ptr(current));
      }
      if (plan.bounced[current] && bounce_phase != Amplitude{1.0}) {
        for (std::size_t i = 0; i < block; ++i) block_ptr(current)[i] *= bounce_phase;
      }
      if (src == start) break;
      current = src;
    }
  }
}

namespace detail {

// Plain complex product. std::complex's operator* adds inf/nan recovery that
// blocks vectorization of the edge loop.
inline Amplitude mul(Amplitude a, Amplitude b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

}  // namespace detail

/// Applies V_xy(J) to every edge quadruple. Dangling colors of reflective
/// chains, (0,1) and (|V|-1,0), carry no edge and are left untouched.
inline void apply_interaction(StateVector& state, const Coupling& coupling) {
  const auto& basis = state.basis();
  const auto& lattice = basis.lattice();
  const auto& v = coupling.edge_matrix();
  // V(J) only couples the two middle entries of the quadruple.
  const Amplitude v00 = v(0, 0), v11 = v(1, 1), v12 = v(1, 2), v21 = v(2, 1), v22 = v(2, 2), v33 = v(3, 3);
  const std::uint64_t block = basis.spin_states();
  auto amps = state.amplitudes();
  for (int e = 0; e < lattice.num_edges(); ++e) {
    Amplitude* left = amps.data() + basis.block_offset(lattice.left_node(e), 0);
    Amplitude* right = amps.data() + basis.block_offset(lattice.right_node(e), 1);
    const std::uint64_t mask = std::uint64_t{1} << e;
    for (std::uint64_t high = 0; high < block; high += 2 * mask) {
      for (std::uint64_t s = high; s < high + mask; ++s) {
        const Amplitude a1 = left[s + mask];
        const Amplitude a2 = right[s];
        left[s] = detail::mul(v00, left[s]);
        left[s + mask] = detail::mul(v11, a1) + detail::mul(v12, a2);
        right[s] = detail::mul(v21, a1) + detail::mul(v22, a2);
        right[s + mask] = detail::mul(v33, right[s + mask]);
      }
    }
  }
}

/// psi <- V(J) M R(theta) psi.
inline void step(StateVector& state, const StepOperator& op) {
  if (!(state.lattice() == op.lattice())) throw std::invalid_argument("state and operator lattices differ");
  apply_coin(state, op.coin());
  apply_shift(state, op.bounce_phase());
  apply_interaction(state, op.coupling());
}

/// Matrices of the edge recurrence
///   q_x(t+1) = A q_{x-1}(t) + B q_x(t) + C q_{x+1}(t),
/// where q_x = (psi[x,0,0_x], psi[x,0,1_x], psi[x+1,1,0_x], psi[x+1,1,1_x]) and
/// the neighbor vectors are indexed by the spin of edge x.
struct EdgeRecurrence {
  Eigen::Matrix4cd a;
  Eigen::Matrix4cd b;
  Eigen::Matrix4cd c;
};

inline EdgeRecurrence edge_recurrence(double theta, double coupling) {
  using namespace std::complex_literals;
  const Amplitude global = std::exp(-1i * (coupling / 4.0));
  const Amplitude diagonal = std::exp(1i * (coupling / 2.0));
  const double ch = std::cos(coupling / 2.0);
  const Amplitude ish = 1i * std::sin(coupling / 2.0);
  const double ct = std::cos(theta);
  const double st = std::sin(theta);

  EdgeRecurrence m{Eigen::Matrix4cd::Zero(), Eigen::Matrix4cd::Zero(), Eigen::Matrix4cd::Zero()};
  m.a(1, 2) = -ish * st;
  m.a(2, 2) = -ch * st;
  m.a(3, 3) = -diagonal * st;

  m.c(0, 0) = diagonal * st;
  m.c(1, 1) = ch * st;
  m.c(2, 1) = ish * st;

  m.b(0, 2) = diagonal * ct;
  m.b(1, 0) = ish * ct;
  m.b(1, 3) = ch * ct;
  m.b(2, 0) = ch * ct;
  m.b(2, 3) = ish * ct;
  m.b(3, 1) = diagonal * ct;

  m.a *= global;
  m.b *= global;
  m.c *= global;
  return m;
}

/// One step through the three-term edge recurrence. Independent of the
/// in-place route; used to cross-check it. Periodic chains with a uniform coin only.
inline StateVector step_edge_basis(const StateVector& state, const StepOperator& op) {
  const auto& lattice = op.lattice();
  if (!lattice.periodic()) throw UnsupportedError("edge-basis stepper needs a periodic lattice");
  if (!op.coin().is_uniform()) throw UnsupportedError("edge-basis stepper needs a uniform coin field");
  if (!(state.lattice() == lattice)) throw std::invalid_argument("state and operator lattices differ");

  const auto m = edge_recurrence(op.coin().theta(0), op.coupling().value());
  const auto& basis = state.basis();
  const int nodes = lattice.num_nodes();
  StateVector out(basis);

  auto edge_vector = [&](int edge, std::uint64_t s, std::uint64_t mask) {
    const int x = edge;
    const int y = (edge + 1) % nodes;
    return Eigen::Vector4cd(state[basis.block_offset(x, 0) + s], state[basis.block_offset(x, 0) + (s | mask)],
                            state[basis.block_offset(y, 1) + s], state[basis.block_offset(y, 1) + (s | mask)]);
  };

  for (int x = 0; x < nodes; ++x) {
    const std::uint64_t mask = std::uint64_t{1} << x;
    const int prev = (x - 1 + nodes) % nodes;
    const int next = (x + 1) % nodes;
    for (std::uint64_t s = 0; s < basis.spin_states(); ++s) {
      if (s & mask) continue;
      const Eigen::Vector4cd q =
          m.a * edge_vector(prev, s, mask) + m.b * edge_vector(x, s, mask) + m.c * edge_vector(next, s, mask);
      out[basis.block_offset(x, 0) + s] = q(0);
      out[basis.block_offset(x, 0) + (s | mask)] = q(1);
      out[basis.block_offset(next, 1) + s] = q(2);
      out[basis.block_offset(next, 1) + (s | mask)] = q(3);
    }
  }
  return out;
}

/// Dense matrix of a linear map on the lattice's Hilbert space, built column by column.
inline Eigen::MatrixXcd materialize(const Lattice& lattice, const std::function<void(StateVector&)>& apply,
                                    std::size_t dim_cap = kDefaultMaterializeCap) {
  const BasisIndex basis(lattice);
  if (basis.dim() > dim_cap) {
    throw ResourceError("operator dimension " + std::to_string(basis.dim()) + " exceeds the materialization cap of " +
                        std::to_string(dim_cap));
  }
  const auto dim = static_cast<Eigen::Index>(basis.dim());
  Eigen::MatrixXcd u(dim, dim);
  for (Eigen::Index col = 0; col < dim; ++col) {
    StateVector v(basis);
    v[static_cast<std::size_t>(col)] = 1.0;
    apply(v);
    for (Eigen::Index row = 0; row < dim; ++row) u(row, col) = v[static_cast<std::size_t>(row)];
  }
  return u;
}

inline Eigen::MatrixXcd materialize_operator(const StepOperator& op, std::size_t dim_cap = kDefaultMaterializeCap) {
  return materialize(op.lattice(), [&](StateVector& v) { step(v, op); }, dim_cap);
}

}  // namespace qwalk
