#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>

#include "qwalk/hilbert.hpp"

namespace qwalk::testing {

inline StateVector random_state(const BasisIndex& basis, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  StateVector state(basis);
  for (auto& a : state.amplitudes()) a = {normal(rng), normal(rng)};
  state.normalize();
  return state;
}

inline double max_abs_diff(std::span<const Amplitude> a, std::span<const Amplitude> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline Eigen::MatrixXcd to_column(const StateVector& state) {
  Eigen::MatrixXcd v(static_cast<Eigen::Index>(state.size()), 1);
  for (std::size_t i = 0; i < state.size(); ++i) v(static_cast<Eigen::Index>(i), 0) = state[i];
  return v;
}

}  // namespace qwalk::testing
