#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "qwalk/analytic.hpp"
#include "qwalk/observables.hpp"
#include "qwalk/walk.hpp"

using namespace qwalk;

namespace {

constexpr double kPi = std::numbers::pi;

// Largest distance in a greedy nearest-neighbour matching of two multisets.
double multiset_distance(std::vector<Amplitude> a, std::vector<Amplitude> b) {
  if (a.size() != b.size()) return 1e300;
  double worst = 0.0;
  for (const auto& x : a) {
    auto best = b.begin();
    for (auto it = b.begin(); it != b.end(); ++it) {
      if (std::abs(*it - x) < std::abs(*best - x)) best = it;
    }
    worst = std::max(worst, std::abs(*best - x));
    b.erase(best);
  }
  return worst;
}

std::vector<Amplitude> engine_spectrum(double theta, double j) {
  const StepOperator op(Lattice(2, Boundary::Periodic), theta, j);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(materialize_operator(op), false);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

StateVector two_node_x_state() {
  return build_initial_state(InitialStateSpec::parse("x", 0), BasisIndex(Lattice(2, Boundary::Periodic)));
}

double correlation_after(int steps, double theta, double j) {
  const StepOperator op(Lattice(2, Boundary::Periodic), theta, j);
  auto state = two_node_x_state();
  for (int t = 0; t < steps; ++t) step(state, op);
  return spin_correlation(state, 0, 1);
}

}  // namespace

TEST(FreeWalk, TranslatesAtHalfPi) {
  const Lattice ring(11, Boundary::Periodic);
  for (int t = 0; t <= 15; ++t) {
    const auto p = free_walk_density(kPi / 2, ring, InitialStateSpec::parse("z", 5), t);
    EXPECT_NEAR(p[static_cast<std::size_t>(((5 - t) % 11 + 11) % 11)], 1.0, 1e-12) << t;
  }
}

TEST(FreeWalk, ConfinedAtZeroTheta) {
  const Lattice ring(13, Boundary::Periodic);
  for (int t = 0; t <= 40; ++t) {
    const auto p = free_walk_density(0.0, ring, InitialStateSpec::parse("z", 6), t);
    EXPECT_NEAR(p[5] + p[6] + p[7], 1.0, 1e-12) << t;
  }
}

TEST(FreeWalk, MatchesEngine) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> angle(0.0, kPi);
  for (int n : {4, 8, 13}) {
    for (int trial = 0; trial < 4; ++trial) {
      const double theta = angle(rng);
      for (const char* label : {"z", "ix"}) {
        WalkConfig c;
        c.nodes = n;
        c.coin.theta = theta;
        c.initial = InitialStateSpec::parse(label, n / 2);
        c.steps = 50;
        const auto series = run_walk(c);
        for (std::size_t i = 0; i < series.times.size(); ++i) {
          const auto oracle = free_walk_density(theta, c.lattice(), c.initial, series.times[i]);
          for (int x = 0; x < n; ++x) {
            EXPECT_NEAR(series.density[i][static_cast<std::size_t>(x)], oracle[static_cast<std::size_t>(x)], 1e-10);
          }
        }
      }
    }
  }
}

TEST(FreeWalk, RejectsReflectiveChains) {
  EXPECT_THROW(free_walk_density(1.0, Lattice(5, Boundary::Reflective), InitialStateSpec::parse("z", 2), 3),
               UnsupportedError);
}

TEST(TwoNode, SpectrumClosedForm) {
  const auto s = two_node_spectrum(1.0, 1.0);
  ASSERT_EQ(s.size(), 16u);
  int plus = 0;
  for (const auto& l : s) {
    EXPECT_NEAR(std::abs(l), 1.0, 1e-14);
    if (std::abs(l - std::polar(1.0, 0.25)) < 1e-14) ++plus;
  }
  EXPECT_EQ(plus, 4);
  // theta = 0: the lambda_n collapse onto +-e^{-iJ/4}.
  const auto flat = two_node_spectrum(0.0, 0.8);
  const Amplitude base = std::polar(1.0, -0.2);
  for (std::size_t i = 8; i < 16; ++i) {
    EXPECT_LT(std::min(std::abs(flat[i] - base), std::abs(flat[i] + base)), 1e-14);
  }
}

TEST(TwoNode, SpectrumMatchesEngineOnGrid) {
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) {
      const double theta = 0.1 + a * 0.7, j = 0.2 + b * 0.65;
      EXPECT_LT(multiset_distance(engine_spectrum(theta, j), two_node_spectrum(theta, j)), 1e-10) << theta << " " << j;
    }
  }
}

TEST(TwoNode, EdgeBasisOperatorMatchesEngine) {
  for (double theta : {0.3, 1.0, 2.4}) {
    for (double j : {0.5, 1.7}) {
      const StepOperator op(Lattice(2, Boundary::Periodic), theta, j);
      EXPECT_LT((materialize_operator(op) - two_node_operator(theta, j)).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(TwoNode, CorrelationAfterOneStep) {
  EXPECT_NEAR(two_node_correlation_t1(kPi / 4, kPi / 2), 1.0 / 16, 1e-15);
  EXPECT_EQ(two_node_correlation_t1(0.7, 0.0), 0.0);
  for (const auto& [theta, j] : {std::pair{0.3, 0.7}, std::pair{kPi / 4, kPi / 2}, std::pair{2.0, 2.5}}) {
    EXPECT_NEAR(correlation_after(1, theta, j), two_node_correlation_t1(theta, j), 1e-10);
  }
}

TEST(TwoNode, CorrelationIsQuadraticAtSmallCoupling) {
  const double theta = 0.9;
  const double lo = correlation_after(2, theta, 1e-3), hi = correlation_after(2, theta, 1e-2);
  const double slope = std::log(hi / lo) / std::log(10.0);
  EXPECT_NEAR(slope, 2.0, 0.05);
}

TEST(TwoNode, SpinEntropyAfterOneStep) {
  // Zero at J = 0 and J = pi, largest at J = pi/2 (theta = pi/2).
  const auto entropy = [](double j) {
    const StepOperator op(Lattice(2, Boundary::Periodic), kPi / 2, j);
    auto state = two_node_x_state();
    step(state, op);
    return partition_entropy(state, Partition::Spins);
  };
  EXPECT_NEAR(entropy(0.0), 0.0, 1e-10);
  EXPECT_NEAR(entropy(kPi), 0.0, 1e-10);
  const double peak = entropy(kPi / 2);
  for (double j = 0.05; j < kPi; j += 0.05) EXPECT_LE(entropy(j), peak + 1e-12);
  EXPECT_GT(peak, 0.1);
}
