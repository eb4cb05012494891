#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "functionals.hpp"
#include "spectral.hpp"

using namespace nlkg;

namespace {

RadialState random_state(GridPtr g, std::mt19937& rng) {
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  RadialState s = zero_state(g);
  for (int i = 0; i + 1 < g->N; ++i) {
    const double env = std::exp(-0.1 * g->r[i] * g->r[i]);
    s.u[i] = un(rng) * env;
    s.v[i] = un(rng) * env;
  }
  return s;
}

double free_energy(const RadialState& s, double mass) {
  const RadialGrid& g = *s.grid;
  double l2 = 0.0, vel = 0.0;
  for (int i = 0; i < g.N; ++i) {
    l2 += g.w[i] * s.u[i] * s.u[i];
    vel += g.w[i] * s.v[i] * s.v[i];
  }
  return 0.5 * (vel + dirichlet_form(g, s.u) + mass * l2);
}

}  // namespace

TEST_CASE("laplacian is self-adjoint in the cell-volume inner product") {
  std::mt19937 rng(3);
  for (int d : {2, 3}) {
    auto g = make_grid(d, 250, 7.0);
    RadialState a = random_state(g, rng), b = random_state(g, rng);
    std::vector<double> la, lb;
    apply_laplacian(*g, a.u, la);
    apply_laplacian(*g, b.u, lb);
    double left = 0.0, right = 0.0;
    for (int i = 0; i < g->N; ++i) {
      left += g->w[i] * a.u[i] * lb[i];
      right += g->w[i] * la[i] * b.u[i];
    }
    CHECK(left == doctest::Approx(right).epsilon(1e-12));
  }
}

TEST_CASE("eigendecomposition reconstructs and is nonnegative") {
  auto g = make_grid(3, 180, 6.0);
  const LaplacianEigen& eig = laplacian_eigen(g);
  REQUIRE(eig.eigenvalues.size() == size_t(g->N - 1));
  CHECK(eig.eigenvalues.front() >= 0.0);
  for (size_t k = 1; k < eig.eigenvalues.size(); ++k)
    CHECK(eig.eigenvalues[k] >= eig.eigenvalues[k - 1]);

  std::mt19937 rng(5);
  RadialState s = random_state(g, rng);
  const auto coeffs = eig.to_modes(s.u);
  const auto back = eig.from_modes(coeffs);
  for (int i = 0; i + 1 < g->N; ++i)
    CHECK(back[i] == doctest::Approx(s.u[i]).epsilon(1e-11));
}

TEST_CASE("an eigenmode oscillates at its own frequency") {
  auto g = make_grid(3, 150, 6.0);
  const LaplacianEigen& eig = laplacian_eigen(g);
  const int k = 4;
  const double mass = 1.0;
  std::vector<double> coeffs(eig.eigenvalues.size(), 0.0);
  coeffs[k] = 1.0;
  RadialState s = zero_state(g);
  const auto mode = eig.from_modes(coeffs);
  for (int i = 0; i + 1 < g->N; ++i) s.u[i] = mode[i];

  const double t = 1.37;
  const double omega = std::sqrt(eig.eigenvalues[k] + mass);
  RadialState evolved = free_evolve(s, mass, t);
  double sup_u = 0.0, sup_v = 0.0;
  for (int i = 0; i + 1 < g->N; ++i) {
    sup_u = std::max(sup_u,
                     std::abs(evolved.u[i] - std::cos(omega * t) * s.u[i]));
    sup_v = std::max(
        sup_v,
        std::abs(evolved.v[i] + omega * std::sin(omega * t) * s.u[i]));
  }
  CHECK(sup_u < 1e-10);
  CHECK(sup_v < 1e-10);
}

TEST_CASE("free flow conserves the free energy exactly in time") {
  auto g = make_grid(3, 200, 7.0);
  std::mt19937 rng(9);
  RadialState s = random_state(g, rng);
  const double e0 = free_energy(s, 1.0);
  for (double t : {0.5, 3.7, 20.0}) {
    RadialState e = free_evolve(s, 1.0, t);
    CHECK(free_energy(e, 1.0) == doctest::Approx(e0).epsilon(1e-12));
  }
}

TEST_CASE("free flow composes: t1 then t2 equals t1 + t2") {
  auto g = make_grid(3, 160, 6.0);
  std::mt19937 rng(13);
  RadialState s = random_state(g, rng);
  RadialState two = free_evolve(free_evolve(s, 1.0, 0.8), 1.0, 1.9);
  RadialState one = free_evolve(s, 1.0, 2.7);
  for (int i = 0; i < g->N; ++i) {
    CHECK(two.u[i] == doctest::Approx(one.u[i]).epsilon(1e-10));
    CHECK(two.v[i] == doctest::Approx(one.v[i]).epsilon(1e-10));
  }
  RadialState id = free_evolve(s, 1.0, 0.0);
  for (int i = 0; i < g->N; ++i)
    CHECK(id.u[i] == doctest::Approx(s.u[i]).epsilon(1e-13));
}

TEST_CASE("mean kinetic split matches direct time quadrature") {
  auto g = make_grid(3, 200, 7.0);
  const LaplacianEigen& eig = laplacian_eigen(g);
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  // band-limited states: Simpson in time must resolve the fastest mode
  auto bandlimited = [&]() {
    std::vector<double> cu(eig.eigenvalues.size(), 0.0),
        cv(eig.eigenvalues.size(), 0.0);
    for (int k = 0; k < 10; ++k) {
      cu[k] = un(rng);
      cv[k] = un(rng);
    }
    RadialState s = zero_state(g);
    s.u = eig.from_modes(cu);
    s.v = eig.from_modes(cv);
    return s;
  };
  for (double L : {2.0, 5.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      RadialState s = bandlimited();
      const MeanKineticSplit split = mean_kinetic_split(s, L, 1.0);

      // composite Simpson in time on the exact free flow
      const int n = 2000;  // even
      const double dt = L / n;
      double quad = 0.0;
      for (int j = 0; j <= n; ++j) {
        const double kin =
            dirichlet_form(*g, free_evolve(s, 1.0, j * dt).u);
        const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        quad += w * kin;
      }
      quad *= dt / 3.0 / L;
      CHECK(split.total() == doctest::Approx(quad).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(mean_kinetic_split(bandlimited(), 1.0, 1.0), config_error);
}
