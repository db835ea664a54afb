#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "qwalk/commands.hpp"

using namespace qwalk;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("qwalk_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    if (!line.empty() && line.back() == ',') row.emplace_back();
    rows.push_back(std::move(row));
  }
  return rows;
}

Json minimal_config() {
  return Json{{"nodes", 5}, {"theta", 1.0}, {"J", 0.5}, {"initial", "z"}, {"steps", 100},
              {"observables", {"density", "mean_spin", "entropy"}}};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + QWALK_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST(Evolve, DensityTableShapeAndNormalization) {
  const auto dir = scratch_dir("evolve");
  cmd_evolve(minimal_config(), dir);
  const auto rows = read_csv(dir / "p.csv");
  ASSERT_EQ(rows.size(), 102u);
  ASSERT_EQ(rows[0].size(), 6u);
  EXPECT_EQ(rows[0][0], "t");
  EXPECT_EQ(rows[0][5], "x4");
  for (std::size_t r = 1; r < rows.size(); ++r) {
    ASSERT_EQ(rows[r].size(), 6u);
    EXPECT_EQ(std::stoi(rows[r][0]), static_cast<int>(r - 1));
    double total = 0.0;
    for (std::size_t c = 1; c < 6; ++c) total += std::stod(rows[r][c]);
    EXPECT_NEAR(total, 1.0, 1e-9) << r;
  }
}

TEST(Evolve, EntropiesAreNonNegative) {
  const auto dir = scratch_dir("entropy");
  cmd_evolve(minimal_config(), dir);
  const auto rows = read_csv(dir / "entropy.csv");
  ASSERT_EQ(rows.size(), 102u);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    for (std::size_t c = 1; c < rows[r].size(); ++c) EXPECT_GE(std::stod(rows[r][c]), 0.0);
  }
}

TEST(Evolve, RerunIsByteIdentical) {
  const auto a = scratch_dir("rerun_a"), b = scratch_dir("rerun_b");
  cmd_evolve(minimal_config(), a);
  cmd_evolve(minimal_config(), b);
  for (const char* name : {"p.csv", "mean_spin.csv", "entropy.csv", "summary.json"}) {
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
}

TEST(Evolve, SummaryMatchesLibrary) {
  const auto dir = scratch_dir("summary");
  const auto out = cmd_evolve(minimal_config(), dir);
  const auto config = parse_walk_config(minimal_config());
  const auto avg = time_average(run_walk(config), config.window());
  EXPECT_EQ(out.summary["ks_distance"].get<double>(), ks_distance(avg.density));
  EXPECT_EQ(out.summary["window"][0].get<int>(), 50);
}

TEST(Dispersion, UnitSpeedAtHalfPi) {
  const auto dir = scratch_dir("dispersion");
  cmd_dispersion(Json{{"theta", std::numbers::pi / 2}, {"points", 16}}, dir);
  const auto rows = read_csv(dir / "velocity.csv");
  ASSERT_EQ(rows.size(), 17u);
  for (std::size_t r = 1; r < rows.size(); ++r) EXPECT_NEAR(std::stod(rows[r][3]), 1.0, 1e-12);
  EXPECT_EQ(read_csv(dir / "bands.csv").size(), 17u);
}

TEST(Sweep, SingleCellMatchesDirectRun) {
  const auto dir = scratch_dir("sweep");
  Json doc = minimal_config();
  doc.erase("theta");
  doc.erase("J");
  doc.erase("observables");
  doc["theta_values"] = {1.0};
  doc["J_values"] = {0.5};
  cmd_sweep(doc, dir, 2);
  const auto rows = read_csv(dir / "sweep.csv");
  ASSERT_EQ(rows.size(), 2u);
  const auto avg = time_average(run_walk(parse_walk_config(minimal_config())), TimeWindow::second_half(100));
  EXPECT_NEAR(std::stod(rows[1][2]), ks_distance(avg.density), 1e-15);
  EXPECT_NEAR(std::stod(rows[1][9]), avg.entropy[2], 1e-15);
}

TEST(Config, UnknownKeyIsNamed) {
  Json doc = minimal_config();
  doc["colour"] = 1;
  try {
    parse_walk_config(doc);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "colour");
  }
}

TEST(Config, RejectsBadValues) {
  for (const auto& [key, value] : {std::pair<std::string, Json>{"nodes", 1}, {"initial", "q"}, {"x0", 9},
                                   {"steps", -1}, {"boundary", "twisted"}}) {
    Json doc = minimal_config();
    doc[key] = value;
    EXPECT_THROW(parse_walk_config(doc), ConfigError) << key;
  }
}

TEST(Binary, ExitCodes) {
  const auto dir = scratch_dir("binary");
  write_file(dir / "good.json", minimal_config().dump());
  Json bad = minimal_config();
  bad["thetaa"] = 1.0;
  write_file(dir / "bad.json", bad.dump());
  Json big = minimal_config();
  big["nodes"] = 20;
  write_file(dir / "big.json", big.dump());

  EXPECT_EQ(run_cli("evolve --config \"" + (dir / "good.json").string() + "\" --out \"" + (dir / "out").string() + "\"",
                    dir / "good.log"),
            0);
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));

  EXPECT_EQ(run_cli("evolve --config \"" + (dir / "bad.json").string() + "\" --out \"" + (dir / "o2").string() + "\"",
                    dir / "bad.log"),
            2);
  EXPECT_NE(slurp(dir / "bad.log").find("thetaa"), std::string::npos);

  EXPECT_EQ(run_cli("evolve --config \"" + (dir / "big.json").string() + "\" --memory-cap 1000000 --out \"" +
                        (dir / "o3").string() + "\"",
                    dir / "big.log"),
            3);
}
