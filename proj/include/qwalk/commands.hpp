#pragma once

// The qwalk subcommands. Each takes a parsed JSON document and an output
// directory, writes CSV tables plus manifest.json, and returns the list of
// files written.

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "qwalk/analytic.hpp"
#include "qwalk/config.hpp"
#include "qwalk/errors.hpp"
#include "qwalk/semiclassical.hpp"
#include "qwalk/sweep.hpp"
#include "qwalk/walk.hpp"

namespace qwalk {

inline constexpr const char* kVersion = "1.0.0";

/// Shortest decimal string that reads back to the same double.
inline std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write '" + path.string() + "'");
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
  }

  CsvWriter& cell(double v) { return raw(format_real(v)); }
  CsvWriter& cell(int v) { return raw(std::to_string(v)); }
  CsvWriter& raw(const std::string& text) {
    if (!first_) out_ << ',';
    out_ << text;
    first_ = false;
    return *this;
  }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }

 private:
  std::ofstream out_;
  bool first_ = true;
};

struct CommandOutput {
  std::vector<std::string> files;
  Json summary;  // deterministic results, also written to summary.json
};

namespace detail {

inline void write_json(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

inline Json to_json_array(std::span<const double> values) {
  Json out = Json::array();
  for (double v : values) out.push_back(v);
  return out;
}

inline void write_evolve_tables(const WalkConfig& config, const ObservableSeries& series,
                                const std::filesystem::path& dir, CommandOutput& out) {
  const auto& obs = config.observables;
  const int nodes = config.nodes;
  const int edges = config.lattice().num_edges();
  auto open = [&](const std::string& name, const std::vector<std::string>& header) {
    out.files.push_back(name);
    return CsvWriter(dir / name, header);
  };

  if (obs.density) {
    std::vector<std::string> header{"t"};
    for (int x = 0; x < nodes; ++x) header.push_back("x" + std::to_string(x));
    auto csv = open("p.csv", header);
    for (std::size_t i = 0; i < series.times.size(); ++i) {
      csv.cell(series.times[i]);
      for (double p : series.density[i]) csv.cell(p);
      csv.end_row();
    }
  }
  if (obs.spin) {
    std::vector<std::string> header{"t"};
    for (int e = 0; e < edges; ++e) {
      for (const char* c : {"sx", "sy", "sz"}) header.push_back("e" + std::to_string(e) + "." + c);
    }
    auto csv = open("spin.csv", header);
    for (std::size_t i = 0; i < series.times.size(); ++i) {
      csv.cell(series.times[i]);
      for (const auto& s : series.spin[i]) csv.cell(s.sx).cell(s.sy).cell(s.sz);
      csv.end_row();
    }
  }
  if (obs.mean_spin) {
    auto csv = open("mean_spin.csv", {"t", "sx", "sy", "sz", "norm"});
    for (std::size_t i = 0; i < series.times.size(); ++i) {
      const auto& s = series.mean_spin[i];
      csv.cell(series.times[i]).cell(s[0]).cell(s[1]).cell(s[2]);
      csv.cell(std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]));
      csv.end_row();
    }
  }
  if (obs.entropy) {
    auto csv = open("entropy.csv", {"t", "S_x", "S_c", "S_s"});
    for (std::size_t i = 0; i < series.times.size(); ++i) {
      const auto& s = series.entropy[i];
      csv.cell(series.times[i]).cell(s[0]).cell(s[1]).cell(s[2]);
      csv.end_row();
    }
  }
  if (obs.spin_set) {
    auto csv = open("spin_set.csv", {"t", "S_A"});
    for (std::size_t i = 0; i < series.times.size(); ++i) {
      csv.cell(series.times[i]).cell(series.spin_set_entropy[i]);
      csv.end_row();
    }
  }
  if (obs.concurrence) {
    std::vector<std::string> header{"t"};
    for (const auto& [a, b] : config.concurrence_pairs) {
      header.push_back("C(e" + std::to_string(a) + ":e" + std::to_string(b) + ")");
    }
    auto csv = open("concurrence.csv", header);
    for (std::size_t i = 0; i < series.times.size(); ++i) {
      csv.cell(series.times[i]);
      for (double c : series.concurrence[i]) csv.cell(c);
      csv.end_row();
    }
  }
}

// Mean-spin component with the largest variance; its period is the one reported.
inline std::vector<double> dominant_component(const std::vector<Vec3>& series) {
  int best = 0;
  double best_var = -1.0;
  for (int k = 0; k < 3; ++k) {
    double mean = 0, sq = 0;
    for (const auto& s : series) mean += s(k);
    mean /= static_cast<double>(series.size());
    for (const auto& s : series) sq += (s(k) - mean) * (s(k) - mean);
    if (sq > best_var) {
      best_var = sq;
      best = k;
    }
  }
  std::vector<double> out;
  out.reserve(series.size());
  for (const auto& s : series) out.push_back(s(best));
  return out;
}

}  // namespace detail

/// Writes manifest.json next to the command's outputs. Wall time is the only
/// field that changes between identical runs.
inline void write_manifest(const std::filesystem::path& dir, const std::string& command, const Json& config,
                           const CommandOutput& out, double wall_seconds) {
  Json manifest;
  manifest["command"] = command;
  manifest["version"] = kVersion;
  manifest["config"] = config;
  manifest["outputs"] = out.files;
  manifest["wall_time_seconds"] = wall_seconds;
  detail::write_json(dir / "manifest.json", manifest);
}

inline CommandOutput cmd_evolve(const Json& doc, const std::filesystem::path& dir) {
  const WalkConfig config = parse_walk_config(doc);
  std::filesystem::create_directories(dir);
  const auto series = run_walk(config);
  CommandOutput out;
  detail::write_evolve_tables(config, series, dir, out);

  const TimeWindow window = config.window();
  Json summary;
  summary["window"] = {window.first, window.last};
  try {
    const auto avg = time_average(series, window);
    summary["samples"] = avg.samples;
    if (config.observables.density) {
      summary["mean_density"] = detail::to_json_array(avg.density);
      summary["ks_distance"] = ks_distance(avg.density);
    }
    if (config.observables.mean_spin) summary["mean_spin_norm"] = avg.mean_spin_norm;
    if (config.observables.entropy) summary["mean_entropy"] = {avg.entropy[0], avg.entropy[1], avg.entropy[2]};
  } catch (const std::invalid_argument&) {
    summary["samples"] = 0;
  }
  detail::write_json(dir / "summary.json", summary);
  out.files.push_back("summary.json");
  out.summary = summary;
  return out;
}

inline CommandOutput cmd_sweep(const Json& doc, const std::filesystem::path& dir, int workers) {
  const SweepGrid grid = parse_sweep_config(doc);
  std::filesystem::create_directories(dir);
  const auto result = run_sweep(grid, workers);
  CommandOutput out;
  out.files.push_back("sweep.csv");
  CsvWriter csv(dir / "sweep.csv", {"theta", "J", "D_KS", "localized", "S_x_final", "S_c_final", "S_s_final",
                                    "S_x_mean", "S_c_mean", "S_s_mean", "mean_spin_norm", "error"});
  std::size_t failures = 0;
  for (const auto& cell : result.cells) {
    csv.cell(cell.theta).cell(cell.coupling);
    if (cell.ok()) {
      csv.cell(cell.ks).cell(cell.ks > kLocalizationThreshold ? 1 : 0);
      for (double s : cell.final_entropy) csv.cell(s);
      for (double s : cell.mean_entropy) csv.cell(s);
      csv.cell(cell.mean_spin_norm).raw("");
    } else {
      ++failures;
      for (int i = 0; i < 9; ++i) csv.raw("");
      std::string message = cell.error;
      std::replace(message.begin(), message.end(), ',', ';');
      std::replace(message.begin(), message.end(), '\n', ' ');
      csv.raw(message);
    }
    csv.end_row();
  }
  Json summary;
  summary["cells"] = result.cells.size();
  summary["failures"] = failures;
  detail::write_json(dir / "summary.json", summary);
  out.files.push_back("summary.json");
  out.summary = summary;
  return out;
}

/// Bands E(k) on `points` momenta and v_g(p) on a cell-centred grid of p that
/// avoids the cone tips at p = 0 and p = pi.
inline CommandOutput cmd_dispersion(const Json& doc, const std::filesystem::path& dir) {
  detail::reject_unknown(doc, {"theta", "theta_values", "points"});
  std::vector<double> thetas;
  if (doc.contains("theta_values")) thetas = detail::get_real_list(doc, "theta_values");
  else if (doc.contains("theta")) thetas = {detail::get_real(doc, "theta")};
  else thetas = {0.0, std::numbers::pi / 8, std::numbers::pi / 4, 3 * std::numbers::pi / 8, std::numbers::pi / 2};
  int points = 256;
  if (doc.contains("points")) points = detail::get_int(doc, "points");
  if (points < 2) throw ConfigError("points", "need at least 2 points");
  std::filesystem::create_directories(dir);

  CommandOutput out;
  out.files = {"bands.csv", "velocity.csv"};
  CsvWriter bands(dir / "bands.csv", {"theta", "k", "E_plus", "E_minus", "d.x", "d.y", "d.z"});
  CsvWriter velocity(dir / "velocity.csv", {"theta", "p", "v_g", "abs_v_g"});
  const double pi = std::numbers::pi;
  for (double theta : thetas) {
    for (int i = 0; i < points; ++i) {
      const double k = -pi + 2.0 * pi * (i + 1) / points;  // (-pi, pi]
      const auto q = quasienergy(k, theta);
      bands.cell(theta).cell(k).cell(q.upper()).cell(q.lower());
      if (q.direction) {
        bands.cell((*q.direction)(0)).cell((*q.direction)(1)).cell((*q.direction)(2));
      } else {
        bands.raw("").raw("").raw("");
      }
      bands.end_row();

      const double p = -pi + 2.0 * pi * (i + 0.5) / points;
      velocity.cell(theta).cell(p);
      try {
        const double v = group_velocity(p, theta);
        velocity.cell(v).cell(std::abs(v));
      } catch (const std::domain_error&) {
        velocity.raw("").raw("");
      }
      velocity.end_row();
    }
  }
  return out;
}

/// Lattice momentum for a homogeneous comparison. Every supported start has
/// weight at k = 0 (the uniform profile has nothing else), where cos E = 0;
/// on the p branch (cos E = cos p sin theta) that is p = pi/2, rounded to the
/// nearest allowed momentum 2 pi m / |V| inside (0, pi).
inline double reference_momentum(int num_nodes) {
  const double target = std::numbers::pi / 2;
  double best = 0.0, best_gap = 1e300;
  for (int m = 1; 2 * m < num_nodes; ++m) {
    const double p = 2.0 * std::numbers::pi * m / num_nodes;
    if (std::abs(p - target) < best_gap - 1e-12) {
      best_gap = std::abs(p - target);
      best = p;
    }
  }
  if (best == 0.0) throw ConfigError("nodes", "no lattice momentum inside (0, pi)");
  return best;
}

/// Exact homogeneous walk next to the precession-only and dissipative
/// Landau-Lifshitz integrators, all started from the walk's initial mean spin.
inline CommandOutput cmd_llcompare(const Json& doc, const std::filesystem::path& dir) {
  Json walk = doc;
  walk.erase("p");
  walk.erase("dt");
  WalkConfig config = parse_walk_config(walk);
  if (config.coin.has_interface()) throw ConfigError("theta_minus", "the comparison needs a uniform coin");
  if (!config.lattice().periodic()) throw ConfigError("boundary", "the comparison needs a periodic lattice");
  double dt = 0.1;
  if (doc.contains("dt")) dt = detail::get_real(doc, "dt");
  if (dt <= 0.0 || dt > 1.0) throw ConfigError("dt", "must lie in (0, 1]");
  double p = doc.contains("p") ? detail::get_real(doc, "p") : reference_momentum(config.nodes);

  DiracCoefficients coeffs;
  double v_g = 0.0;
  try {
    coeffs = dirac_coefficients(p, config.coin.theta);
    v_g = group_velocity(p, config.coin.theta);
  } catch (const std::domain_error& e) {
    throw ConfigError("p", e.what());
  }
  if (v_g == 0.0) throw ConfigError("p", "zero group velocity");

  config.observables = ObservableSet{};
  config.observables.density = false;
  config.observables.mean_spin = true;
  config.sample_stride = 1;
  std::filesystem::create_directories(dir);
  const auto series = run_walk(config);

  std::vector<Vec3> exact;
  for (const auto& s : series.mean_spin) exact.emplace_back(s[0], s[1], s[2]);
  const Vec3 s0 = exact.front();
  const int nodes = config.nodes;
  const double j = config.coupling;
  const auto precession = integrate_per_step(s0, config.steps, dt, [&](const Vec3& s, double h) {
    return ll_precession_step(s, coeffs.d0, j, nodes, h);
  });
  const auto dissipative = integrate_per_step(s0, config.steps, dt, [&](const Vec3& s, double h) {
    return ll_dissipative_step(s, coeffs.d0, j, nodes, v_g, h);
  });

  CommandOutput out;
  out.files.push_back("llcompare.csv");
  CsvWriter csv(dir / "llcompare.csv", {"t", "exact.sx", "exact.sy", "exact.sz", "exact.norm", "precession.sx",
                                        "precession.sy", "precession.sz", "precession.norm", "dissipative.sx",
                                        "dissipative.sy", "dissipative.sz", "dissipative.norm"});
  for (std::size_t i = 0; i < exact.size(); ++i) {
    csv.cell(series.times[i]);
    for (const Vec3* v : std::array<const Vec3*, 3>{&exact[i], &precession[i], &dissipative[i]}) {
      csv.cell((*v)(0)).cell((*v)(1)).cell((*v)(2)).cell(v->norm());
    }
    csv.end_row();
  }

  Json summary;
  summary["p"] = p;
  summary["group_velocity"] = v_g;
  summary["d0"] = {coeffs.d0(0), coeffs.d0(1), coeffs.d0(2)};
  summary["predicted_period"] = 4.0 * std::numbers::pi * nodes / j;
  if (exact.size() >= 4 && j != 0.0) {
    summary["exact_period"] = dominant_period(detail::dominant_component(exact));
    summary["precession_period"] = dominant_period(detail::dominant_component(precession));
    summary["dissipative_period"] = dominant_period(detail::dominant_component(dissipative));
  }
  detail::write_json(dir / "summary.json", summary);
  out.files.push_back("summary.json");
  out.summary = summary;
  return out;
}

}  // namespace qwalk
