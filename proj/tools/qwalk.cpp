// qwalk: run walk experiments from JSON configs.
//
//   qwalk evolve     --config run.json --out out/run
//   qwalk sweep      --config grid.json --out out/grid --workers 4
//   qwalk dispersion --config bands.json --out out/bands
//   qwalk llcompare  --config ll.json --out out/ll
//
// Exit codes: 0 success, 2 config error, 3 resource cap exceeded, 1 anything else.

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "qwalk/commands.hpp"

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  int workers = 1;
  std::optional<std::uint64_t> memory_cap;
  std::optional<int> stride;
};

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "JSON experiment file")->required();
  cmd->add_option("--out", opt.out, "output directory");
  cmd->add_option("--memory-cap", opt.memory_cap, "state-vector memory cap in bytes");
  cmd->add_option("--stride", opt.stride, "sample every N steps")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact simulation of a quantum walk coupled to edge spins"};
  app.set_version_flag("--version", std::string(qwalk::kVersion));
  app.require_subcommand(1);

  Options opt;
  auto* evolve = app.add_subcommand("evolve", "evolve one configuration and write observable series");
  auto* sweep = app.add_subcommand("sweep", "scan a (theta, J) grid");
  auto* dispersion = app.add_subcommand("dispersion", "free-walk bands and group velocity tables");
  auto* llcompare = app.add_subcommand("llcompare", "exact walk against Landau-Lifshitz integrators");
  for (auto* cmd : {evolve, sweep, dispersion, llcompare}) add_common(cmd, opt);
  sweep->add_option("--workers", opt.workers, "worker threads")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto started = std::chrono::steady_clock::now();
    qwalk::Json doc = qwalk::read_json_file(opt.config);
    const bool walk_like = !dispersion->parsed();
    if (walk_like && doc.is_object()) {
      if (opt.memory_cap) doc["memory_cap"] = *opt.memory_cap;
      if (opt.stride) doc["sample_stride"] = *opt.stride;
    }

    qwalk::CommandOutput out;
    std::string name;
    if (evolve->parsed()) {
      name = "evolve";
      out = qwalk::cmd_evolve(doc, opt.out);
    } else if (sweep->parsed()) {
      name = "sweep";
      out = qwalk::cmd_sweep(doc, opt.out, opt.workers);
    } else if (dispersion->parsed()) {
      name = "dispersion";
      out = qwalk::cmd_dispersion(doc, opt.out);
    } else {
      name = "llcompare";
      out = qwalk::cmd_llcompare(doc, opt.out);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    qwalk::write_manifest(opt.out, name, doc, out, wall);
    std::cout << name << ": wrote";
    for (const auto& f : out.files) std::cout << ' ' << f;
    std::cout << " manifest.json to " << opt.out << '\n';
    return 0;
  } catch (const qwalk::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const qwalk::ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
