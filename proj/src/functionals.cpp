#include "functionals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nlkg {

double dirichlet_form(const RadialGrid& g, const std::vector<double>& u) {
  const double omega = unit_sphere_area(g.d);
  double acc = 0.0;
  for (int i = 0; i + 1 < g.N; ++i) {
    const double rf = 0.5 * (g.r[i] + g.r[i + 1]);
    const double du = (u[i + 1] - u[i]) / g.h;
    acc += omega * std::pow(rf, g.d - 1) * du * du * g.h;
  }
  return acc;
}

std::vector<double> kinetic_density(const RadialGrid& g,
                                    const std::vector<double>& u) {
  const double omega = unit_sphere_area(g.d);
  std::vector<double> k(g.N, 0.0);
  for (int i = 0; i + 1 < g.N; ++i) {
    const double rf = 0.5 * (g.r[i] + g.r[i + 1]);
    const double du = (u[i + 1] - u[i]) / g.h;
    const double face = omega * std::pow(rf, g.d - 1) * du * du * g.h;
    k[i] += 0.5 * face;
    k[i + 1] += 0.5 * face;
  }
  return k;
}

FunctionalBundle evaluate(const RadialState& s, const NonlinearityModel& m) {
  const RadialGrid& g = *s.grid;
  if (g.d != m.d) throw config_error("evaluate: state/model dimension mismatch");
  FunctionalBundle b;
  double F = 0, G0 = 0, G2 = 0, mass = 0, vel = 0;
  for (int i = 0; i < g.N; ++i) {
    const FBundle fb = f_bundle(m, s.u[i]);
    F += g.w[i] * fb.f;
    G0 += g.w[i] * fb.Df;
    G2 += g.w[i] * fb.G2_density;
    mass += g.w[i] * s.u[i] * s.u[i];
    vel += g.w[i] * s.v[i] * s.v[i];
  }
  b.F = F;
  b.G0 = G0;
  b.G2 = G2;
  b.mass_L2 = mass;
  b.vel_L2 = vel;
  b.kinetic = dirichlet_form(g, s.u);
  b.J = 0.5 * b.kinetic + 0.5 * b.mass_L2 - b.F;
  b.J_c = 0.5 * b.kinetic + 0.5 * m.c * b.mass_L2 - b.F;
  b.E = b.J + 0.5 * b.vel_L2;
  b.E_c = b.J_c + 0.5 * b.vel_L2;
  b.P = 0.0;
  b.M = b.vel_L2 + (1.0 - m.c) * b.mass_L2;
  return b;
}

std::string bundle_to_json(const FunctionalBundle& b) {
  nlohmann::json j{
      {"e", b.E},           {"e_c", b.E_c},       {"j", b.J},
      {"j_c", b.J_c},       {"f", b.F},           {"g0", b.G0},
      {"g2", b.G2},         {"kinetic", b.kinetic}, {"mass_l2", b.mass_L2},
      {"vel_l2", b.vel_L2}, {"p", b.P},           {"m_quantity", b.M},
  };
  return j.dump();
}

double K(const FunctionalBundle& b, int d, const ScalingPair& pair, double mass) {
  if (!pair.admissible(d))
    throw config_error("K: inadmissible scaling pair (alpha=" +
                       std::to_string(pair.alpha) +
                       ", beta=" + std::to_string(pair.beta) + ")");
  const double a = pair.alpha, be = pair.beta;
  return (a + be * (d - 2) / 2.0) * b.kinetic +
         (a + be * d / 2.0) * mass * b.mass_L2 - (a * b.G0 + be * d * b.F);
}

double K(const RadialState& s, const NonlinearityModel& m, const ScalingPair& pair,
         double mass) {
  return K(evaluate(s, m), m.d, pair, mass);
}

double exterior_energy(const RadialState& s, double R, double mass) {
  const RadialGrid& g = *s.grid;
  if (R < 0 || R > g.r_max)
    throw config_error("exterior_energy: R outside [0, r_max]");
  const std::vector<double> k = kinetic_density(g, s.u);
  double acc = 0.0;
  for (int i = 0; i < g.N; ++i) {
    if (g.r[i] <= R) continue;
    acc += 0.5 * k[i] +
           0.5 * g.w[i] * (s.v[i] * s.v[i] + mass * s.u[i] * s.u[i]);
  }
  return acc;
}

double concentration_radius(const RadialState& s, const NonlinearityModel& m,
                            double eps, double mass,
                            ConcentrationVariant variant, double reference) {
  if (!(eps > 0.0 && eps < 1.0))
    throw config_error("concentration_radius: eps must be in (0,1)");
  const RadialGrid& g = *s.grid;
  if (reference < 0.0) reference = evaluate(s, m).E;

  // Suffix sums of the free-energy density from the outside in.
  const std::vector<double> k = kinetic_density(g, s.u);
  std::vector<double> suffix(g.N + 1, 0.0);
  for (int i = g.N - 1; i >= 0; --i) {
    const double cell =
        0.5 * k[i] + 0.5 * g.w[i] * (s.v[i] * s.v[i] + mass * s.u[i] * s.u[i]);
    suffix[i] = suffix[i + 1] + cell;
  }
  const double threshold = (variant == ConcentrationVariant::ThresholdFraction)
                               ? eps * reference
                               : eps;
  // suffix[i+1] is the energy strictly outside node i; find the smallest node
  // radius whose exterior is within the threshold.
  for (int i = 0; i < g.N; ++i) {
    if (suffix[i + 1] <= threshold) return g.r[i];
  }
  return g.r_max;
}

}  // namespace nlkg
