#include <gtest/gtest.h>

#include <functional>
#include <numeric>
#include <random>

#include "qwalk/evolution.hpp"
#include "qwalk/observables.hpp"
#include "support.hpp"

using namespace qwalk;
using qwalk::testing::random_state;

namespace {

// Partial trace by explicit label loops: keep the part selected by `key`,
// a map from a basis label to the index of the kept subsystem.
Eigen::MatrixXcd brute_reduced(const StateVector& state, std::size_t kept_dim,
                               const std::function<std::size_t(const BasisLabel&)>& kept,
                               const std::function<std::size_t(const BasisLabel&)>& traced) {
  const auto& basis = state.basis();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(kept_dim), static_cast<Eigen::Index>(kept_dim));
  for (std::size_t i = 0; i < basis.dim(); ++i) {
    for (std::size_t j = 0; j < basis.dim(); ++j) {
      const auto a = basis.decode(i), b = basis.decode(j);
      if (traced(a) != traced(b)) continue;
      rho(static_cast<Eigen::Index>(kept(a)), static_cast<Eigen::Index>(kept(b))) += state[i] * std::conj(state[j]);
    }
  }
  return rho;
}

std::uint64_t bit(std::uint64_t s, int e) { return (s >> e) & 1u; }

void expect_density_matrix(const Eigen::MatrixXcd& rho) {
  EXPECT_LT((rho - rho.adjoint()).cwiseAbs().maxCoeff(), 1e-13);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
  EXPECT_NEAR(rho.trace().imag(), 0.0, 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
  EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12);
}

Eigen::Matrix4cd bell_density() {
  Eigen::Vector4cd psi = Eigen::Vector4cd::Zero();
  psi(1) = std::sqrt(0.5);
  psi(2) = std::sqrt(0.5);
  return psi * psi.adjoint();
}

double exact_page_bits(double m, double n) {
  // Average entropy of an m-dimensional subsystem (m <= n), in bits.
  double s = 0.0;
  for (double k = n + 1; k <= m * n; k += 1.0) s += 1.0 / k;
  return (s - (m - 1) / (2 * n)) / std::numbers::ln2;
}

}  // namespace

TEST(Density, SumsToOne) {
  std::mt19937_64 rng(1);
  const auto state = random_state(BasisIndex(Lattice(5, Boundary::Periodic)), rng);
  const auto p = particle_density(state);
  double total = 0;
  for (double v : p) total += v;
  EXPECT_NEAR(total, 1.0, 1e-13);
}

TEST(ReducedDensity, MatchesBrutePartialTrace) {
  std::mt19937_64 rng(2);
  for (const auto boundary : {Boundary::Periodic, Boundary::Reflective}) {
    const BasisIndex basis(Lattice(3, boundary));
    const auto state = random_state(basis, rng);
    const int edges = basis.num_spins();

    const std::array<int, 2> pair{edges - 1, 0};
    const auto rho = reduced_spin_density(state, pair);
    const auto oracle = brute_reduced(
        state, 4, [&](const BasisLabel& l) { return bit(l.spins, pair[0]) | (bit(l.spins, pair[1]) << 1); },
        [&](const BasisLabel& l) {
          const std::uint64_t mask = (1u << pair[0]) | (1u << pair[1]);
          return (static_cast<std::size_t>(2 * l.x + l.color) << edges) | (l.spins & ~mask);
        });
    EXPECT_LT((rho - oracle).cwiseAbs().maxCoeff(), 1e-14);

    const auto positions = brute_reduced(
        state, 3, [](const BasisLabel& l) { return static_cast<std::size_t>(l.x); },
        [](const BasisLabel& l) { return (l.spins << 1) | static_cast<std::uint64_t>(l.color); });
    EXPECT_LT((partition_density(state, Partition::Positions) - positions).cwiseAbs().maxCoeff(), 1e-14);

    const auto colors = brute_reduced(
        state, 2, [](const BasisLabel& l) { return static_cast<std::size_t>(l.color); },
        [](const BasisLabel& l) { return (l.spins << 4) | static_cast<std::uint64_t>(l.x); });
    EXPECT_LT((partition_density(state, Partition::Colors) - colors).cwiseAbs().maxCoeff(), 1e-14);

    const auto spins = brute_reduced(
        state, basis.spin_states(), [](const BasisLabel& l) { return static_cast<std::size_t>(l.spins); },
        [](const BasisLabel& l) { return static_cast<std::size_t>(2 * l.x + l.color); });
    EXPECT_NEAR(partition_entropy(state, Partition::Spins), von_neumann_entropy(spins), 1e-12);
  }
}

TEST(ReducedDensity, PropertiesOnEvolvedStates) {
  std::mt19937_64 rng(3);
  for (int n = 2; n <= 6; ++n) {
    const Lattice lattice(n, Boundary::Periodic);
    const StepOperator op(lattice, 0.9, 1.1);
    auto state = build_initial_state(InitialStateSpec::parse("x", 0), BasisIndex(lattice));
    for (int t = 0; t < 3 * n; ++t) step(state, op);
    for (const auto part : {Partition::Positions, Partition::Colors, Partition::Spins}) {
      expect_density_matrix(partition_density(state, part));
    }
    const std::array<int, 2> pair{0, n - 1};
    expect_density_matrix(reduced_spin_density(state, pair));
    const auto random = random_state(BasisIndex(lattice), rng);
    expect_density_matrix(reduced_spin_density(random, std::array<int, 1>{n / 2}));
  }
}

TEST(Entropy, PurityDuality) {
  std::mt19937_64 rng(4);
  for (int n = 2; n <= 6; ++n) {
    const BasisIndex basis(Lattice(n, Boundary::Periodic));
    auto state = random_state(basis, rng);
    // A = leading spins; complement = walker plus the remaining spins.
    for (int k = 1; k <= n; ++k) {
      std::vector<int> a(static_cast<std::size_t>(k));
      std::iota(a.begin(), a.end(), 0);
      const std::uint64_t mask = (std::uint64_t{1} << k) - 1;
      const std::size_t rest_dim = basis.dim() >> k;
      // Build the complement-side density explicitly from the state.
      Eigen::MatrixXcd m(static_cast<Eigen::Index>(rest_dim), static_cast<Eigen::Index>(std::size_t{1} << k));
      for (std::size_t i = 0; i < basis.dim(); ++i) {
        const auto l = basis.decode(i);
        const std::size_t row = (static_cast<std::size_t>(2 * l.x + l.color) << (n - k)) | (l.spins >> k);
        m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(l.spins & mask)) = state[i];
      }
      const double complement = von_neumann_entropy(m * m.adjoint());
      EXPECT_NEAR(spin_set_entropy(state, a), complement, 1e-10) << n << " " << k;
      EXPECT_LE(spin_set_entropy(state, a), k + 1e-12);
    }
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    EXPECT_NEAR(spin_set_entropy(state, all), partition_entropy(state, Partition::Spins), 1e-10);
  }
}

TEST(Entropy, BoundedBySubsystemDimension) {
  std::mt19937_64 rng(5);
  for (int n = 3; n <= 6; ++n) {
    const auto state = random_state(BasisIndex(Lattice(n, Boundary::Periodic)), rng);
    EXPECT_GE(partition_entropy(state, Partition::Colors), 0.0);
    EXPECT_LE(partition_entropy(state, Partition::Colors), 1.0 + 1e-12);
    EXPECT_LE(partition_entropy(state, Partition::Positions), std::log2(n) + 1e-12);
    EXPECT_LE(partition_entropy(state, Partition::Spins), std::log2(2.0 * n) + 1e-12);
  }
}

TEST(Entropy, ProductStatesHaveNone) {
  const BasisIndex basis(Lattice(5, Boundary::Periodic));
  for (const char* label : {"z", "x", "iz", "zx"}) {
    const auto state = build_initial_state(InitialStateSpec::parse(label, 2), basis);
    for (const auto part : {Partition::Positions, Partition::Colors, Partition::Spins}) {
      EXPECT_NEAR(partition_entropy(state, part), 0.0, 1e-12) << label;
    }
  }
  const auto e = build_initial_state(InitialStateSpec::parse("e", 0), basis);
  // Both branches differ only on the last edge, which ends up along +x.
  EXPECT_NEAR(spin_set_entropy(e, {4}), 0.0, 1e-12);
  EXPECT_NEAR(partition_entropy(e, Partition::Spins), 0.0, 1e-12);
  EXPECT_NEAR(spin_expectation(e, 4).sx, 1.0, 1e-14);
  EXPECT_NEAR(spin_expectation(e, 0).sz, 1.0, 1e-14);
}

TEST(Spin, ExpectationsOfInitialStates) {
  const BasisIndex basis(Lattice(4, Boundary::Periodic));
  const auto z = build_initial_state(InitialStateSpec::parse("z", 0), basis);
  const auto x = build_initial_state(InitialStateSpec::parse("x", 0), basis);
  for (int e = 0; e < 4; ++e) {
    EXPECT_NEAR(spin_expectation(z, e).sz, 1.0, 1e-14);
    EXPECT_NEAR(spin_expectation(x, e).sx, 1.0, 1e-14);
    EXPECT_NEAR(spin_expectation(x, e).sy, 0.0, 1e-14);
  }
  const auto m = mean_spin(x);
  EXPECT_NEAR(m[0], 1.0, 1e-14);
}

TEST(Spin, ExpectationMatchesPauliTrace) {
  std::mt19937_64 rng(6);
  const auto state = random_state(BasisIndex(Lattice(4, Boundary::Reflective)), rng);
  for (int e = 0; e < 3; ++e) {
    const Eigen::MatrixXcd rho = reduced_spin_density(state, std::array<int, 1>{e});
    const auto s = spin_expectation(state, e);
    EXPECT_NEAR(s.sx, (rho * detail::pauli(0)).trace().real(), 1e-13);
    EXPECT_NEAR(s.sy, (rho * detail::pauli(1)).trace().real(), 1e-13);
    EXPECT_NEAR(s.sz, (rho * detail::pauli(2)).trace().real(), 1e-13);
  }
}

TEST(Concurrence, ReferenceStates) {
  EXPECT_NEAR(concurrence_of(bell_density()), 1.0, 1e-12);
  Eigen::Matrix4cd product = Eigen::Matrix4cd::Zero();
  product(0, 0) = 1.0;
  EXPECT_NEAR(concurrence_of(product), 0.0, 1e-12);
  // Werner states: C = max(0, (3p - 1) / 2).
  for (double p : {0.1, 1.0 / 3.0, 0.5, 0.8}) {
    const Eigen::Matrix4cd werner = p * bell_density() + (1.0 - p) / 4.0 * Eigen::Matrix4cd::Identity();
    EXPECT_NEAR(concurrence_of(werner), std::max(0.0, (3.0 * p - 1.0) / 2.0), 1e-10) << p;
  }
}

TEST(Concurrence, StaysInUnitInterval) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto state = random_state(BasisIndex(Lattice(4, Boundary::Periodic)), rng);
    const double c = concurrence(state, 0, 2);
    EXPECT_GE(c, 0.0);
    EXPECT_LE(c, 1.0 + 1e-12);
  }
}

TEST(Correlation, VanishesOnProductsAndIsOneOnTriplet) {
  const BasisIndex basis(Lattice(4, Boundary::Periodic));
  const auto x = build_initial_state(InitialStateSpec::parse("x", 0), basis);
  EXPECT_NEAR(spin_correlation(x, 0, 2), 0.0, 1e-13);
  // Triplet m = 0 on edges 0 and 3: <s.s> = 1 and the local means vanish.
  StateVector bell(basis);
  bell.at(0, 0, 1) = std::sqrt(0.5);
  bell.at(0, 0, 8) = std::sqrt(0.5);
  EXPECT_NEAR(spin_correlation(bell, 0, 3), 1.0, 1e-13);
}

TEST(KolmogorovSmirnov, Values) {
  const std::vector<double> uniform(8, 0.125);
  EXPECT_NEAR(ks_distance(uniform), 0.0, 1e-15);
  std::vector<double> delta(4, 0.0);
  delta[0] = 1.0;
  EXPECT_NEAR(ks_distance(delta), 0.75, 1e-15);
  delta = {0.0, 0.0, 0.0, 1.0};
  EXPECT_NEAR(ks_distance(delta), 0.75, 1e-15);
  EXPECT_THROW(ks_distance(std::vector<double>{0.5, 0.4}), std::invalid_argument);
  EXPECT_THROW(ks_distance(std::vector<double>{}), std::invalid_argument);
}

TEST(KolmogorovSmirnov, Bounded) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(13);
    double total = 0;
    for (auto& v : p) total += (v = u(rng));
    for (auto& v : p) v /= total;
    const double d = ks_distance(p);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 1.0 - 1.0 / 13 + 1e-12);
  }
}

TEST(PageEntropy, CloseToExactAverage) {
  for (int a = 1; a <= 6; ++a) {
    const double m = std::exp2(a), n = 2.0 * 13 * std::exp2(13) / m;
    EXPECT_NEAR(page_entropy(a, 13), exact_page_bits(m, n), 1e-4) << a;
  }
  EXPECT_THROW(page_entropy(0, 13), std::invalid_argument);
}

TEST(TimeAverage, WindowSelection) {
  ObservableSeries series;
  for (int t = 0; t <= 4; ++t) {
    series.times.push_back(t);
    series.density.push_back({t / 4.0, 1.0 - t / 4.0});
    series.mean_spin.push_back({0.0, 0.0, 1.0});
  }
  const auto avg = time_average(series, TimeWindow::second_half(4));
  EXPECT_EQ(avg.samples, 3);
  EXPECT_NEAR(avg.density[0], 0.75, 1e-15);
  EXPECT_NEAR(avg.mean_spin_norm, 1.0, 1e-15);
  EXPECT_THROW(time_average(series, TimeWindow{10, 20}), std::invalid_argument);
}
