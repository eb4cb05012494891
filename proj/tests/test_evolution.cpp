#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "evolution.hpp"
#include "ground_state.hpp"
#include "spectral.hpp"

using namespace nlkg;

namespace {

RadialState gaussian(GridPtr g, double a, double w = 1.0) {
  RadialState s = sample(g, [&](double r) {
    return a * std::exp(-r * r / (w * w));
  });
  s.u[g->N - 1] = 0.0;
  return s;
}

double state_dist(const RadialState& a, const RadialState& b) {
  double sup = 0.0;
  for (size_t i = 0; i < a.u.size(); ++i) {
    sup = std::max(sup, std::abs(a.u[i] - b.u[i]));
    sup = std::max(sup, std::abs(a.v[i] - b.v[i]));
  }
  return sup;
}

}  // namespace

TEST_CASE("the zero state is already scattered") {
  auto g = make_grid(3, 300, 10.0);
  auto m = NonlinearityModel::critical(3);
  EvolveConfig cfg;
  cfg.T_final = 1.0;
  const EvolveResult r = evolve(zero_state(g), m, cfg, nullptr);
  CHECK(r.verdict == RunVerdict::Scattered);
}

TEST_CASE("CFL guard") {
  auto g = make_grid(3, 300, 10.0);
  auto m = NonlinearityModel::critical(3);
  EvolveConfig cfg;
  cfg.dt = g->h;  // dt > 0.5 h
  CHECK_THROWS_AS(step(gaussian(g, 0.1), m, cfg), config_error);
}

TEST_CASE("with the coupling off, leapfrog tracks the exact free flow") {
  auto g = make_grid(3, 400, 10.0);
  auto m = NonlinearityModel::subcritical(3, 3.0, 0.0, 1.0);  // λ = 0: free
  EvolveConfig cfg;
  RadialState s = gaussian(g, 1.0);
  const RadialState exact = free_evolve(s, 1.0, 1.0);
  const int n = int(std::lround(1.0 / (0.4 * g->h)));
  cfg.dt = 1.0 / n;
  for (int k = 0; k < n; ++k) s = step(s, m, cfg);
  CHECK(s.time == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(state_dist(s, exact) < 2e-3);  // O(dt²) phase error
}

TEST_CASE("leapfrog is exactly time-reversible") {
  auto g = make_grid(3, 300, 10.0);
  auto m = NonlinearityModel::critical(3);
  EvolveConfig fwd, bwd;
  fwd.dt = 0.4 * g->h;
  bwd.dt = -fwd.dt;
  const RadialState s0 = gaussian(g, 0.5);
  RadialState s = s0;
  for (int k = 0; k < 50; ++k) s = step(s, m, fwd);
  for (int k = 0; k < 50; ++k) s = step(s, m, bwd);
  CHECK(state_dist(s, s0) < 1e-10);
}

TEST_CASE("the static profile is an equilibrium of the shifted flow") {
  auto m = NonlinearityModel::subcritical(3, 3.0, 1.0, 1.0);
  auto g = make_grid(3, 2000, 30.0);
  ShootConfig scfg;
  scfg.Q0_lo = 0.5;
  scfg.Q0_hi = 8.0;
  const GroundStateResult gs = shoot(m, g, scfg);
  EvolveConfig cfg;
  cfg.eq_mass = 1.0;  // the static equation used c = 1
  RadialState s = gs.Q;
  const int n = int(std::lround(1.0 / (0.4 * g->h)));
  cfg.dt = 1.0 / n;
  for (int k = 0; k < n; ++k) s = step(s, m, cfg);
  // drift is driven by the O(h²) discretization residual of the profile
  CHECK(state_dist(s, gs.Q) < 5e-2 * gs.Q0);
}

TEST_CASE("strang splitting agrees with leapfrog to scheme order") {
  auto g = make_grid(3, 200, 8.0);
  auto m = NonlinearityModel::subcritical(3, 3.0, 1.0, 1.0);
  EvolveConfig lf, st;
  lf.dt = st.dt = 0.25 * g->h;
  st.scheme = Scheme::StrangSplit;
  RadialState a = gaussian(g, 0.8), b = a;
  const int n = 100;
  for (int k = 0; k < n; ++k) {
    a = step(a, m, lf);
    b = step_strang(b, m, st);
  }
  CHECK(state_dist(a, b) < 5e-3);
}

TEST_CASE("a small bump disperses and passes the scattering window") {
  auto g = make_grid(3, 1200, 24.0);
  auto m = NonlinearityModel::critical(3);
  EvolveConfig cfg;
  cfg.T_final = 10.0;
  cfg.gate = DetectorGate::ScatterOnly;
  DiagnosticsSeries series;
  const EvolveResult r = evolve(gaussian(g, 0.3), m, cfg, &series);
  CHECK(r.verdict == RunVerdict::Scattered);
  CHECK(r.criterion == "window");
  CHECK(r.energy_drift < 1e-4);
  CHECK_FALSE(r.near_threshold);
  REQUIRE(series.times.size() > 10);

  // recorded CSV: fixed header, one line per record
  const std::string csv = series.to_csv();
  CHECK(csv.rfind("time,y,vel_l2,kinetic,f,g0,k0_1,k0_c,kinf_1,kinf_c,"
                  "k2_1,k2_c,m_quantity,h_p,z,e,e_c,cross_uv,conc_radius\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') ==
        long(series.times.size()) + 1);
}

TEST_CASE("a supercritical bump trips the growth detector") {
  auto g = make_grid(3, 1200, 24.0);
  auto m = NonlinearityModel::critical(3);
  EvolveConfig cfg;
  cfg.T_final = 10.0;
  cfg.gate = DetectorGate::BlowupOnly;
  cfg.record_every = 1;
  DiagnosticsSeries series;
  const EvolveResult r = evolve(gaussian(g, 3.0), m, cfg, &series);
  CHECK(r.verdict == RunVerdict::BlewUp);
  // at this recording cadence either detector may fire first
  CHECK((r.criterion == "norm_growth" || r.criterion == "z_concavity"));
  CHECK(r.t_end < 5.0);

  // the recorded series satisfies the concavity differential inequality
  const Detection det = blowup_detect(series, m, cfg);
  CHECK(det.fired);
  CHECK(det.di_y_fraction >= 0.9);
}

TEST_CASE("with every detector off the collapse surfaces as instability") {
  auto g = make_grid(3, 600, 12.0);
  auto m = NonlinearityModel::critical(3);
  EvolveConfig cfg;
  cfg.T_final = 10.0;
  cfg.gate = DetectorGate::None;
  CHECK_THROWS_AS(evolve(gaussian(g, 3.0), m, cfg, nullptr),
                  instability_error);
}

TEST_CASE("saturation of the exponential model counts as blowup") {
  auto g = make_grid(2, 600, 12.0);
  auto m = NonlinearityModel::exp2d(1.0, 2.0, 0.04, 0.1);
  m.u_cap = 6.0;
  EvolveConfig cfg;
  cfg.T_final = 5.0;
  cfg.gate = DetectorGate::BlowupOnly;
  cfg.blowup_factor = 1e6;  // let saturation fire first
  const EvolveResult r = evolve(gaussian(g, 5.0), m, cfg, nullptr);
  CHECK(r.verdict == RunVerdict::BlewUp);
  CHECK(r.criterion == "saturation");
}

TEST_CASE("offline scatter scan matches the online window") {
  auto g = make_grid(3, 1200, 24.0);
  auto m = NonlinearityModel::critical(3);
  EvolveConfig cfg;
  cfg.T_final = 10.0;
  cfg.gate = DetectorGate::ScatterOnly;
  std::vector<RadialState> snaps;
  const EvolveResult r = evolve(gaussian(g, 0.3), m, cfg, nullptr, &snaps);
  REQUIRE(r.verdict == RunVerdict::Scattered);
  const Detection det = scatter_detect(snaps, m, cfg);
  CHECK(det.fired);
  CHECK(det.criterion == "window");
}

TEST_CASE("compact data keep the exterior cone quiet") {
  auto g = make_grid(3, 1000, 20.0);
  auto m = NonlinearityModel::critical(3);
  RadialState s = sample(g, [](double r) {
    return r < 2.0 ? 0.4 * std::pow(std::cos(M_PI * r / 4.0), 2) : 0.0;
  });
  s.u[g->N - 1] = 0.0;
  EvolveConfig cfg;
  cfg.T_final = 4.0;
  cfg.gate = DetectorGate::None;
  std::vector<RadialState> snaps;
  evolve(s, m, cfg, nullptr, &snaps);
  const double eps0 = 1e-10 + exterior_energy(snaps.front(), 6.0, 1.0);
  const ExteriorReport rep =
      exterior_smallness_check(snaps, 6.0, 0.0, eps0 + 1e-8);
  CHECK(rep.pass);
  CHECK(rep.C <= 2.0);
  CHECK_THROWS_AS(exterior_smallness_check(snaps, 6.0, 0.0, 0.0), config_error);
}

TEST_CASE("equipartition residual converges at second order") {
  auto g = make_grid(3, 600, 12.0);
  auto m = NonlinearityModel::critical(3);
  auto residual_at = [&](double dt) {
    EvolveConfig cfg;
    cfg.dt = dt;
    cfg.T_final = 2.0;
    cfg.record_every = 1;
    cfg.gate = DetectorGate::None;
    DiagnosticsSeries series;
    evolve(gaussian(g, 0.3), m, cfg, &series);
    return equipartition_monitor(series).max_residual;
  };
  const double coarse = residual_at(0.4 * g->h);
  const double fine = residual_at(0.2 * g->h);
  CHECK(coarse / fine >= 3.0);
  CHECK(coarse / fine <= 5.0);
}
