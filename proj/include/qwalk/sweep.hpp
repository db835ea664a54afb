#pragma once

// (theta, J) parameter scans over a thread pool, plus the curve fitting and
// peak finding used on entanglement and mean-spin series.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/observables.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

inline constexpr double kLocalizationThreshold = 1.5 / 100;

/// Cell-centred grid (i + 1/2) pi / n, staying inside the open interval (0, pi).
inline std::vector<double> open_interval_grid(int n) {
  if (n < 1) throw std::invalid_argument("grid needs at least one point");
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = (i + 0.5) * std::numbers::pi / n;
  return out;
}

struct SweepGrid {
  std::vector<double> theta_values;
  std::vector<double> coupling_values;
  WalkConfig base;  // theta and J are overwritten per cell

  std::size_t cells() const { return theta_values.size() * coupling_values.size(); }

  WalkConfig cell_config(std::size_t index) const {
    WalkConfig c = base;
    c.coin = CoinSpec{};
    c.coin.theta = theta_values[index / coupling_values.size()];
    c.coupling = coupling_values[index % coupling_values.size()];
    return c;
  }
};

struct SweepCell {
  double theta = 0.0;
  double coupling = 0.0;
  double ks = 0.0;
  std::array<double, 3> final_entropy{};  // S_x, S_c, S_s at the last step
  std::array<double, 3> mean_entropy{};   // averaged over the window
  double mean_spin_norm = 0.0;
  std::string error;  // empty on success

  bool ok() const { return error.empty(); }
};

struct SweepResult {
  std::size_t theta_count = 0;
  std::size_t coupling_count = 0;
  std::vector<SweepCell> cells;  // theta-major

  const SweepCell& at(std::size_t i_theta, std::size_t i_coupling) const {
    return cells.at(i_theta * coupling_count + i_coupling);
  }
};

/// Long-run metrics of a single walk, as computed for each sweep cell.
inline SweepCell evaluate_cell(const WalkConfig& config) {
  WalkConfig c = config;
  c.observables = ObservableSet{};
  c.observables.density = true;
  c.observables.mean_spin = true;
  c.observables.entropy = true;
  SweepCell cell;
  cell.theta = c.coin.theta;
  cell.coupling = c.coupling;
  const auto series = run_walk(c);
  const auto avg = time_average(series, c.window());
  cell.ks = ks_distance(avg.density);
  cell.final_entropy = series.entropy.back();
  cell.mean_entropy = avg.entropy;
  cell.mean_spin_norm = avg.mean_spin_norm;
  return cell;
}

/// Runs every cell on up to `workers` threads. The number of trajectories in
/// flight is also bounded by memory_cap / per-state footprint. Results do not
/// depend on the worker count.
inline SweepResult run_sweep(const SweepGrid& grid, int workers = 1) {
  if (grid.cells() == 0) throw ConfigError("grid", "empty sweep grid");
  SweepResult result;
  result.theta_count = grid.theta_values.size();
  result.coupling_count = grid.coupling_values.size();
  result.cells.resize(grid.cells());

  // One state plus the entropy scratch (a Gram matrix no larger than the state).
  const std::size_t footprint = 2 * BasisIndex(grid.base.lattice()).state_bytes();
  const std::size_t by_memory = std::max<std::size_t>(1, grid.base.memory_cap / std::max<std::size_t>(footprint, 1));
  const std::size_t threads =
      std::min({static_cast<std::size_t>(std::max(workers, 1)), by_memory, grid.cells()});

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < grid.cells(); i = next++) {
      const WalkConfig config = grid.cell_config(i);
      try {
        result.cells[i] = evaluate_cell(config);
      } catch (const std::exception& e) {
        SweepCell failed;
        failed.theta = config.coin.theta;
        failed.coupling = config.coupling;
        failed.error = e.what();
        result.cells[i] = failed;
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work);
  }
  return result;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square
  std::size_t points = 0;
};

/// Least-squares line through all samples.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("times and values differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("fit window holds fewer than two samples");
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / static_cast<double>(n), my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit window has no time spread");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = n;
  double sq = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    sq += r * r;
  }
  fit.residual = std::sqrt(sq / static_cast<double>(n));
  return fit;
}

/// Least-squares line through the samples with times in [window.first, window.last].
inline LinearFit fit_linear_slope(std::span<const double> times, std::span<const double> values, TimeWindow window) {
  if (times.size() != values.size()) throw std::invalid_argument("times and values differ in length");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < window.first || times[i] > window.last) continue;
    x.push_back(times[i]);
    y.push_back(values[i]);
  }
  return fit_line(x, y);
}

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

struct StretchedExponentialFit {
  double nu = 0.0;
  double alpha = 0.0;
  double residual = 0.0;  // root mean square
  int iterations = 0;
};

/// Fits y = 1 - exp(-nu t^alpha) to a series normalized by its saturation value.
/// Samples with t <= 0 are skipped. Levenberg-Marquardt in (log nu, alpha),
/// started from the line through log(-log(1 - y)) = log nu + alpha log t.
inline StretchedExponentialFit fit_stretched_exponential(std::span<const double> times, std::span<const double> values,
                                                         int max_iterations = 200) {
  if (times.size() != values.size()) throw std::invalid_argument("times and values differ in length");
  std::vector<double> t, y;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] > 0.0) {
      t.push_back(times[i]);
      y.push_back(values[i]);
    }
  }
  if (t.size() < 3) throw std::invalid_argument("stretched-exponential fit needs at least three samples");

  // Initial guess from the linearized form, using points strictly inside (0, 1).
  std::vector<double> lt, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (y[i] > 1e-6 && y[i] < 1.0 - 1e-6) {
      lt.push_back(std::log(t[i]));
      ly.push_back(std::log(-std::log(1.0 - y[i])));
    }
  }
  double log_nu = std::log(0.1), alpha = 0.5;
  if (lt.size() >= 2) {
    try {
      const auto line = fit_line(lt, ly);
      if (std::isfinite(line.slope) && line.slope > 0.0) {
        alpha = line.slope;
        log_nu = line.intercept;
      }
    } catch (const std::invalid_argument&) {
    }
  }

  auto cost = [&](double ln, double a) {
    double s = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double r = y[i] - (1.0 - std::exp(-std::exp(ln) * std::pow(t[i], a)));
      s += r * r;
    }
    return s;
  };

  double lambda = 1e-3;
  double current = cost(log_nu, alpha);
  int it = 0;
  bool converged = false;
  for (; it < max_iterations; ++it) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double ta = std::pow(t[i], alpha);
      const double e = std::exp(-std::exp(log_nu) * ta);
      const double r = y[i] - (1.0 - e);
      // d model / d log_nu and d model / d alpha
      const Eigen::Vector2d g(e * std::exp(log_nu) * ta, e * std::exp(log_nu) * ta * std::log(t[i]));
      jtj += g * g.transpose();
      jtr += g * r;
    }
    bool accepted = false;
    while (lambda < 1e12) {
      Eigen::Matrix2d damped = jtj;
      damped.diagonal() *= 1.0 + lambda;
      const Eigen::Vector2d delta = damped.ldlt().solve(jtr);
      const double trial = cost(log_nu + delta(0), alpha + delta(1));
      if (std::isfinite(trial) && trial <= current) {
        log_nu += delta(0);
        alpha += delta(1);
        const double improvement = current - trial;
        current = trial;
        lambda = std::max(lambda / 10.0, 1e-12);
        accepted = true;
        if (delta.norm() < 1e-12 || improvement <= 1e-15 * std::max(current, 1e-30)) converged = true;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted || converged) {
      converged = true;
      break;
    }
  }
  const double rms = std::sqrt(current / t.size());
  if (!converged || !std::isfinite(alpha) || !std::isfinite(log_nu)) {
    throw FitError("stretched-exponential fit did not converge", rms);
  }
  return {std::exp(log_nu), alpha, rms, it};
}

/// Centered moving average; the window shrinks near the ends.
inline std::vector<double> moving_average(std::span<const double> series, int width = 9) {
  if (width < 1) throw std::invalid_argument("moving-average width must be positive");
  const auto n = static_cast<std::ptrdiff_t>(series.size());
  const std::ptrdiff_t half = width / 2;
  std::vector<double> out(series.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
    const std::ptrdiff_t hi = std::min(n - 1, i + half);
    double s = 0;
    for (std::ptrdiff_t j = lo; j <= hi; ++j) s += series[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = s / static_cast<double>(hi - lo + 1);
  }
  return out;
}

struct Peak {
  std::size_t index = 0;
  double value = 0.0;
};

/// Interior local maxima that dominate every sample within `separation` on
/// both sides. Plateaus report their first sample.
inline std::vector<Peak> find_peaks(std::span<const double> series, std::size_t separation = 1) {
  std::vector<Peak> peaks;
  const std::size_t n = series.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const std::size_t lo = i >= separation ? i - separation : 0;
    const std::size_t hi = std::min(n - 1, i + separation);
    bool is_peak = true;
    for (std::size_t j = lo; j <= hi && is_peak; ++j) {
      if (j < i && series[j] >= series[i]) is_peak = false;
      if (j > i && series[j] > series[i]) is_peak = false;
    }
    if (is_peak) peaks.push_back({i, series[i]});
  }
  return peaks;
}

/// Period of the strongest oscillation in a uniformly sampled series, from a
/// scan of the periodogram over trial periods between 2 dt and the series span.
inline double dominant_period(std::span<const double> series, double dt = 1.0) {
  const std::size_t n = series.size();
  if (n < 4) throw std::invalid_argument("series too short for a period estimate");
  double mean = 0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  auto power = [&](double frequency) {
    double re = 0, im = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double phase = 2.0 * std::numbers::pi * frequency * dt * static_cast<double>(i);
      re += (series[i] - mean) * std::cos(phase);
      im += (series[i] - mean) * std::sin(phase);
    }
    return re * re + im * im;
  };

  const double span = dt * static_cast<double>(n);
  const double f_min = 1.0 / span, f_max = 0.5 / dt;
  // Coarse scan at a quarter of the Fourier resolution, then golden-section refinement.
  const double step = 0.25 / span;
  double best_f = f_min, best_p = -1.0;
  for (double f = f_min; f <= f_max; f += step) {
    const double p = power(f);
    if (p > best_p) {
      best_p = p;
      best_f = f;
    }
  }
  double a = std::max(f_min, best_f - step), b = std::min(f_max, best_f + step);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double pc = power(c), pd = power(d);
  for (int i = 0; i < 60; ++i) {
    if (pc > pd) {
      b = d;
      d = c;
      pd = pc;
      c = b - g * (b - a);
      pc = power(c);
    } else {
      a = c;
      c = d;
      pc = pd;
      d = a + g * (b - a);
      pd = power(d);
    }
  }
  return 1.0 / (0.5 * (a + b));
}

}  // namespace qwalk
