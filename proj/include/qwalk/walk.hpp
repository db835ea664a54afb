#pragma once

// Full experiment description and the trajectory driver shared by the CLI
// and the parameter sweeps.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/evolution.hpp"
#include "qwalk/hilbert.hpp"
#include "qwalk/observables.hpp"

namespace qwalk {

struct ObservableSet {
  bool density = true;
  bool spin = false;
  bool mean_spin = true;
  bool entropy = false;
  bool spin_set = false;
  bool concurrence = false;
};

/// Uniform coin, or a two-valued coin with an interface ('t' runs).
struct CoinSpec {
  double theta = 0.0;
  std::optional<double> theta_minus;
  std::optional<double> theta_plus;
  int interface_node = 0;

  bool has_interface() const noexcept { return theta_minus.has_value(); }

  CoinField field(int num_nodes) const {
    if (has_interface()) return CoinField::interface(num_nodes, *theta_minus, *theta_plus, interface_node);
    return CoinField::uniform(num_nodes, theta);
  }
};

struct WalkConfig {
  int nodes = 13;
  Boundary boundary = Boundary::Periodic;
  CoinSpec coin;
  double coupling = 0.0;
  InitialStateSpec initial;
  int steps = 100;
  int sample_stride = 0;  // 0 selects the size-dependent default
  ObservableSet observables;
  std::vector<int> spin_set;
  std::vector<std::pair<int, int>> concurrence_pairs;
  std::optional<TimeWindow> average_window;
  Amplitude bounce_phase = 1.0;
  std::size_t memory_cap = kDefaultMemoryCap;

  Lattice lattice() const { return Lattice(nodes, boundary); }

  StepOperator step_operator() const {
    return StepOperator(lattice(), coin.field(nodes), Coupling(coupling), bounce_phase);
  }

  /// Every step up to 13 nodes, every 4th step above.
  int stride() const { return sample_stride > 0 ? sample_stride : (nodes <= 13 ? 1 : 4); }

  TimeWindow window() const { return average_window.value_or(TimeWindow::second_half(steps)); }

  void validate() const {
    const Lattice lat = lattice();
    if (steps < 0) throw ConfigError("steps", "must be non-negative");
    if (sample_stride < 0) throw ConfigError("sample_stride", "must be non-negative");
    if (!std::isfinite(coupling)) throw ConfigError("J", "must be finite");
    if (coin.has_interface()) {
      if (!coin.theta_plus) throw ConfigError("theta_plus", "required with theta_minus");
      if (coin.interface_node < 0 || coin.interface_node >= nodes) {
        throw ConfigError("interface", "interface node outside the lattice");
      }
    } else if (!std::isfinite(coin.theta)) {
      throw ConfigError("theta", "must be finite");
    }
    initial.validate(lat);
    const int edges = lat.num_edges();
    if (observables.spin_set) {
      if (spin_set.empty()) throw ConfigError("spin_set", "spin_set observable requested without edges");
      for (int e : spin_set) {
        if (e < 0 || e >= edges) throw ConfigError("spin_set", "edge " + std::to_string(e) + " out of range");
      }
    }
    for (const auto& [a, b] : concurrence_pairs) {
      if (a < 0 || b < 0 || a >= edges || b >= edges || a == b) {
        throw ConfigError("concurrence_pairs", "invalid edge pair");
      }
    }
    if (average_window && (average_window->first > average_window->last || average_window->first < 0)) {
      throw ConfigError("average_window", "empty or negative window");
    }
    check_memory(BasisIndex(lat).state_bytes(), memory_cap, "state vector");
  }
};

inline void record_sample(const WalkConfig& config, const StateVector& state, int t, ObservableSeries& series) {
  const auto& obs = config.observables;
  series.times.push_back(t);
  if (obs.density) series.density.push_back(particle_density(state));
  if (obs.spin) series.spin.push_back(spin_profile(state));
  if (obs.mean_spin) series.mean_spin.push_back(mean_spin(state));
  if (obs.entropy) {
    series.entropy.push_back({partition_entropy(state, Partition::Positions),
                              partition_entropy(state, Partition::Colors),
                              partition_entropy(state, Partition::Spins)});
  }
  if (obs.spin_set) series.spin_set_entropy.push_back(spin_set_entropy(state, config.spin_set, config.memory_cap));
  if (obs.concurrence) {
    std::vector<double> row;
    for (const auto& [a, b] : config.concurrence_pairs) row.push_back(concurrence(state, a, b));
    series.concurrence.push_back(std::move(row));
  }
}

/// Evolves the configured initial state for `steps` steps, sampling at t = 0
/// and every stride() steps. `on_step`, when set, sees the state after every step.
inline ObservableSeries run_walk(const WalkConfig& config,
                                 const std::function<void(int, const StateVector&)>& on_step = {}) {
  config.validate();
  const StepOperator op = config.step_operator();
  StateVector state = build_initial_state(config.initial, BasisIndex(op.lattice()), config.memory_cap);
  ObservableSeries series;
  const int stride = config.stride();
  record_sample(config, state, 0, series);
  for (int t = 1; t <= config.steps; ++t) {
    step(state, op);
    if (on_step) on_step(t, state);
    if (t % stride == 0) record_sample(config, state, t, series);
  }
  return series;
}

}  // namespace qwalk
