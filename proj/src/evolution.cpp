#include "evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spectral.hpp"

namespace nlkg {

namespace {

// acceleration ü = Lu − eq_mass·u + f'(u); nonlinearity optional so the same
// code drives the free companion flow.
void accel(const RadialState& s, const NonlinearityModel& model, double eq_mass,
           bool nonlinear, std::vector<double>& a) {
  const RadialGrid& g = *s.grid;
  apply_laplacian(g, s.u, a);
  for (int i = 0; i + 1 < g.N; ++i) {
    a[i] -= eq_mass * s.u[i];
    if (nonlinear) a[i] += fp_value(model, s.u[i]);
  }
  a[g.N - 1] = 0.0;
}

void leapfrog_step(RadialState& s, const NonlinearityModel& model, double dt,
                   double eq_mass, bool nonlinear, std::vector<double>& a) {
  const int N = s.grid->N;
  accel(s, model, eq_mass, nonlinear, a);
  for (int i = 0; i < N; ++i) s.v[i] += 0.5 * dt * a[i];
  for (int i = 0; i < N; ++i) s.u[i] += dt * s.v[i];
  s.u[N - 1] = 0.0;
  accel(s, model, eq_mass, nonlinear, a);
  for (int i = 0; i < N; ++i) s.v[i] += 0.5 * dt * a[i];
  s.v[N - 1] = 0.0;
  s.time += dt;
}

double resolve_dt(const RadialState& s, const EvolveConfig& cfg) {
  const double h = s.grid->h;
  // negative dt is allowed: the leapfrog is reversible and stepping
  // backwards is the exact inverse
  const double dt = cfg.dt != 0.0 ? cfg.dt : 0.4 * h;
  if (std::abs(dt) > 0.5 * h + 1e-15)
    throw config_error("evolve: CFL violated, |dt| must be <= 0.5 h");
  return dt;
}

double inner_uv(const RadialState& s) {
  double acc = 0.0;
  for (int i = 0; i < s.grid->N; ++i) acc += s.grid->w[i] * s.u[i] * s.v[i];
  return acc;
}

double energy_dist(const RadialState& a, const RadialState& b) {
  const RadialGrid& g = *a.grid;
  std::vector<double> du(g.N);
  double l2 = 0.0;
  for (int i = 0; i < g.N; ++i) {
    du[i] = a.u[i] - b.u[i];
    const double dv = a.v[i] - b.v[i];
    l2 += g.w[i] * (du[i] * du[i] + dv * dv);
  }
  return std::sqrt(dirichlet_form(g, du) + l2);
}

}  // namespace

RadialState step(const RadialState& s, const NonlinearityModel& model,
                 const EvolveConfig& cfg) {
  if (s.grid->d != model.d) throw config_error("step: dimension mismatch");
  const double dt = resolve_dt(s, cfg);
  RadialState out = s;
  std::vector<double> a;
  leapfrog_step(out, model, dt, cfg.eq_mass, true, a);
  for (int i = 0; i < out.grid->N; ++i)
    if (!std::isfinite(out.u[i]) || !std::isfinite(out.v[i]))
      throw instability_error("step: non-finite state at t = " +
                              std::to_string(s.time));
  return out;
}

RadialState step_strang(const RadialState& s, const NonlinearityModel& model,
                        const EvolveConfig& cfg) {
  if (s.grid->d != model.d) throw config_error("step: dimension mismatch");
  const double dt = resolve_dt(s, cfg);
  RadialState out = free_evolve(s, cfg.eq_mass, 0.5 * dt);
  for (int i = 0; i + 1 < out.grid->N; ++i)
    out.v[i] += dt * fp_value(model, out.u[i]);
  out = free_evolve(out, cfg.eq_mass, 0.5 * dt);
  return out;
}

std::string DiagnosticsSeries::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "time,y,vel_l2,kinetic,f,g0,k0_1,k0_c,kinf_1,kinf_c,k2_1,k2_c,"
        "m_quantity,h_p,z,e,e_c,cross_uv,conc_radius";
  for (double R : ext_radii) os << ",ext_r" << R;
  os << "\n";
  for (size_t i = 0; i < times.size(); ++i) {
    os << times[i] << "," << y[i] << "," << vel[i] << "," << kinetic[i] << ","
       << F[i] << "," << G0[i] << "," << k0_1[i] << "," << k0_c[i] << ","
       << kinf_1[i] << "," << kinf_c[i] << "," << k2_1[i] << "," << k2_c[i]
       << "," << m_quantity[i] << "," << h_p[i] << "," << z[i] << ","
       << energy[i] << "," << energy_c[i] << "," << cross_uv[i] << ","
       << conc_radius[i];
    for (size_t j = 0; j < ext_radii.size(); ++j) os << "," << exterior[j][i];
    os << "\n";
  }
  return os.str();
}

namespace {

void record_row(DiagnosticsSeries& d, const RadialState& s,
                const NonlinearityModel& model, const EvolveConfig& cfg) {
  const FunctionalBundle b = evaluate(s, model);
  const int dim = model.d;
  const double c = model.c;
  const double eps = cfg.p - 2.0;
  d.times.push_back(s.time);
  d.y.push_back(b.mass_L2);
  d.vel.push_back(b.vel_L2);
  d.kinetic.push_back(b.kinetic);
  d.F.push_back(b.F);
  d.G0.push_back(b.G0);
  d.k0_1.push_back(K(b, dim, ScalingPair::K0(), 1.0));
  d.k0_c.push_back(K(b, dim, ScalingPair::K0(), c));
  d.kinf_1.push_back(K(b, dim, ScalingPair::Kinf(), 1.0));
  d.kinf_c.push_back(K(b, dim, ScalingPair::Kinf(), c));
  d.k2_1.push_back(K(b, dim, ScalingPair::K2(dim), 1.0));
  d.k2_c.push_back(K(b, dim, ScalingPair::K2(dim), c));
  d.m_quantity.push_back(b.M);
  d.h_p.push_back(b.J_c - K(b, dim, ScalingPair::K0(), c) / cfg.p);
  d.z.push_back(b.mass_L2 > 0.0 ? std::pow(b.mass_L2, -eps / 4.0) : 0.0);
  d.energy.push_back(b.E);
  d.energy_c.push_back(b.E_c);
  d.cross_uv.push_back(inner_uv(s));
  d.conc_radius.push_back(concentration_radius(s, model, cfg.conc_eps, 1.0,
                                               cfg.conc_variant, b.E));
  for (size_t j = 0; j < d.ext_radii.size(); ++j)
    d.exterior[j].push_back(exterior_energy(s, d.ext_radii[j], 1.0));
}

}  // namespace

EvolveResult evolve(const RadialState& s0, const NonlinearityModel& model,
                    const EvolveConfig& cfg, DiagnosticsSeries* series,
                    std::vector<RadialState>* snapshots, double m_threshold) {
  const double dt = resolve_dt(s0, cfg);
  const double eps = cfg.p - 2.0;
  const double rec_dt = dt * cfg.record_every;
  RadialState s = s0;
  RadialState comp = s0;  // free companion for the scattering window
  std::vector<double> a_buf, a_buf2;

  DiagnosticsSeries local;
  DiagnosticsSeries& d = series ? *series : local;
  d.ext_radii = cfg.exterior_radii;
  d.exterior.assign(d.ext_radii.size(), {});

  EvolveResult res;
  res.final_state = s0;

  auto fail_nan = [&](double t_last) {
    std::ostringstream os;
    os << "evolve: non-finite state, last valid t = " << t_last
       << " (dt/h = " << dt / s0.grid->h << ", CFL bound 0.5)";
    throw instability_error(os.str());
  };

  record_row(d, s, model, cfg);
  if (snapshots) snapshots->push_back(s);
  const double norm0 =
      std::sqrt(d.kinetic[0] + d.y[0] + d.vel[0]);
  if (norm0 == 0.0) {  // zero field: already the free solution of itself
    res.verdict = RunVerdict::Scattered;
    res.criterion = "window";
    res.t_end = s.time;
    return res;
  }
  const double E0 = 0.5 * (d.vel[0] + d.kinetic[0] + cfg.eq_mass * d.y[0]) -
                    d.F[0];
  if (m_threshold != 0.0)
    res.near_threshold =
        std::abs(m_threshold - d.energy[0]) <= 1e-8 * std::abs(m_threshold);

  double window_start = s.time;
  double window_max_dist = 0.0, window_g0f_sum = 0.0;
  int window_count = 0;
  int z_run = 0;

  const bool blowup_on =
      cfg.gate == DetectorGate::Both || cfg.gate == DetectorGate::BlowupOnly;
  const bool scatter_on =
      cfg.gate == DetectorGate::Both || cfg.gate == DetectorGate::ScatterOnly;

  const long n_steps = std::lround(std::ceil(cfg.T_final / dt));
  for (long n = 1; n <= n_steps; ++n) {
    try {
      if (cfg.scheme == Scheme::Leapfrog) {
        leapfrog_step(s, model, dt, cfg.eq_mass, true, a_buf);
        leapfrog_step(comp, model, dt, cfg.eq_mass, false, a_buf2);
      } else {
        s = step_strang(s, model, cfg);
        comp = free_evolve(comp, cfg.eq_mass, dt);
      }
    } catch (const saturation_error&) {
      if (!blowup_on) throw;
      res.verdict = RunVerdict::BlewUp;
      res.criterion = "saturation";
      res.t_end = s.time;
      res.final_state = s;
      return res;
    }
    if (blowup_on) {
      // check growth every step: a supercritical collapse can pass from
      // bounded to non-finite between two record times
      double l2 = 0.0;
      for (int i = 0; i < s.grid->N; ++i)
        l2 += s.grid->w[i] * (s.u[i] * s.u[i] + s.v[i] * s.v[i]);
      const double norm = std::sqrt(dirichlet_form(*s.grid, s.u) + l2);
      if (norm > cfg.blowup_factor * norm0) {
        record_row(d, s, model, cfg);
        if (snapshots) snapshots->push_back(s);
        res.verdict = RunVerdict::BlewUp;
        res.criterion = "norm_growth";
        res.t_end = s.time;
        res.final_state = s;
        return res;
      }
    }
    if (n % cfg.record_every != 0 && n != n_steps) continue;

    record_row(d, s, model, cfg);
    if (snapshots) snapshots->push_back(s);
    const size_t i = d.times.size() - 1;
    if (!std::isfinite(d.y[i]) || !std::isfinite(d.kinetic[i]))
      fail_nan(d.times[i - 1]);

    const double E_run =
        0.5 * (d.vel[i] + d.kinetic[i] + cfg.eq_mass * d.y[i]) - d.F[i];
    res.energy_drift = std::max(res.energy_drift, std::abs(E_run - E0));

    // blowup (c): sustained discrete concavity of z = y^{−ε/4}
    if (blowup_on && i >= 2) {
      const double zdd =
          (d.z[i] - 2.0 * d.z[i - 1] + d.z[i - 2]) / (rec_dt * rec_dt);
      const double bound = -(1.0 - model.c) * eps * eps * d.z[i - 1] / 4.0;
      z_run = (zdd <= bound + cfg.z_tol) ? z_run + 1 : 0;
      if (z_run >= cfg.z_window) {
        res.verdict = RunVerdict::BlewUp;
        res.criterion = "z_concavity";
        res.t_end = s.time;
        res.final_state = s;
        return res;
      }
    }
    // scattering window
    if (!scatter_on) continue;
    window_max_dist = std::max(window_max_dist, energy_dist(s, comp));
    window_g0f_sum += d.G0[i] + d.F[i];
    ++window_count;
    if (s.time - window_start >= cfg.scatter_window) {
      const bool pass = window_max_dist <= cfg.scatter_tol &&
                        d.conc_radius[i] >= cfg.dispersal_radius &&
                        window_g0f_sum / window_count <= cfg.nonlinear_tol;
      if (pass) {
        res.verdict = RunVerdict::Scattered;
        res.criterion = "window";
        res.t_end = s.time;
        res.final_state = s;
        return res;
      }
      comp = s;  // relaunch the free companion
      window_start = s.time;
      window_max_dist = 0.0;
      window_g0f_sum = 0.0;
      window_count = 0;
    }
  }
  res.verdict = RunVerdict::Undecided;
  res.criterion = "t_final";
  res.t_end = s.time;
  res.final_state = s;
  return res;
}

Detection blowup_detect(const DiagnosticsSeries& d,
                        const NonlinearityModel& model,
                        const EvolveConfig& cfg) {
  Detection det;
  if (d.times.size() < 2) return det;
  const double eps = cfg.p - 2.0;
  const double norm0 = std::sqrt(d.kinetic[0] + d.y[0] + d.vel[0]);
  int z_run = 0;
  for (size_t i = 1; i < d.times.size() && !det.fired; ++i) {
    const double norm = std::sqrt(d.kinetic[i] + d.y[i] + d.vel[i]);
    if (norm > cfg.blowup_factor * norm0) {
      det.fired = true;
      det.criterion = "norm_growth";
      det.time = d.times[i];
      break;
    }
    if (i >= 2) {
      const double h = d.times[i] - d.times[i - 1];
      const double zdd = (d.z[i] - 2.0 * d.z[i - 1] + d.z[i - 2]) / (h * h);
      const double bound = -(1.0 - model.c) * eps * eps * d.z[i - 1] / 4.0;
      z_run = (zdd <= bound + cfg.z_tol) ? z_run + 1 : 0;
      if (z_run >= cfg.z_window) {
        det.fired = true;
        det.criterion = "z_concavity";
        det.time = d.times[i];
      }
    }
  }
  // (DI y) spot check: ÿ ≥ (1 + ε/4) ẏ²/y + (1 − c) ε y at interior samples
  int ok = 0, total = 0;
  for (size_t i = 1; i + 1 < d.times.size(); ++i) {
    const double h = d.times[i] - d.times[i - 1];
    if (d.y[i] <= 0.0) continue;
    const double ydd = (d.y[i + 1] - 2.0 * d.y[i] + d.y[i - 1]) / (h * h);
    const double yd = (d.y[i + 1] - d.y[i - 1]) / (2.0 * h);
    const double rhs = (1.0 + eps / 4.0) * yd * yd / d.y[i] +
                       (1.0 - model.c) * eps * d.y[i];
    ++total;
    if (ydd >= rhs - 1e-6 - 1e-3 * std::abs(ydd)) ++ok;
  }
  det.di_y_fraction = total > 0 ? double(ok) / total : 0.0;
  return det;
}

Detection scatter_detect(const std::vector<RadialState>& history,
                         const NonlinearityModel& model,
                         const EvolveConfig& cfg) {
  Detection det;
  if (history.size() < 2) return det;
  const double dt = resolve_dt(history[0], cfg);
  std::vector<double> a_buf;
  size_t start = 0;
  while (start + 1 < history.size()) {
    RadialState comp = history[start];
    double max_dist = 0.0, g0f = 0.0;
    int count = 0;
    size_t end = start;
    for (size_t i = start + 1; i < history.size(); ++i) {
      // free companion advanced by whole leapfrog steps to the snapshot time
      while (comp.time < history[i].time - 0.5 * dt)
        leapfrog_step(comp, model, dt, cfg.eq_mass, false, a_buf);
      max_dist = std::max(max_dist, energy_dist(history[i], comp));
      const FunctionalBundle b = evaluate(history[i], model);
      g0f += b.G0 + b.F;
      ++count;
      if (history[i].time - history[start].time >= cfg.scatter_window) {
        end = i;
        break;
      }
    }
    if (end == start) break;  // history too short for a full window
    const double conc =
        concentration_radius(history[end], model, cfg.conc_eps, 1.0,
                             cfg.conc_variant);
    if (max_dist <= cfg.scatter_tol && conc >= cfg.dispersal_radius &&
        g0f / count <= cfg.nonlinear_tol) {
      det.fired = true;
      det.criterion = "window";
      det.time = history[end].time;
      return det;
    }
    start = end;
  }
  return det;
}

ExteriorReport exterior_smallness_check(const std::vector<RadialState>& history,
                                        double R, double T, double eps,
                                        double mass, double C_cap) {
  if (!(eps > 0.0)) throw config_error("exterior_smallness_check: eps <= 0");
  ExteriorReport rep;
  for (const auto& s : history) {
    const double Rt = R + std::abs(s.time - T);
    if (Rt >= s.grid->r_max) continue;
    rep.C = std::max(rep.C, exterior_energy(s, Rt, mass) / eps);
  }
  rep.pass = rep.C <= C_cap;
  if (!rep.pass)
    throw invariant_error(
        "exterior_smallness_check: empirical C = " + std::to_string(rep.C) +
        " exceeds cap " + std::to_string(C_cap) +
        " (finite-propagation breach)");
  return rep;
}

EquipartitionReport equipartition_monitor(const DiagnosticsSeries& d) {
  EquipartitionReport rep;
  const size_t n = d.times.size();
  for (size_t i = 0; i < n; ++i) {
    rep.mean_vel += d.vel[i];
    rep.mean_kin += d.kinetic[i];
    rep.mean_mass += d.y[i];
    rep.mean_G0 += d.G0[i];
  }
  if (n > 0) {
    rep.mean_vel /= n;
    rep.mean_kin /= n;
    rep.mean_mass /= n;
    rep.mean_G0 /= n;
  }
  for (size_t i = 1; i + 1 < n; ++i) {
    const double h = d.times[i + 1] - d.times[i - 1];
    const double lhs = (d.cross_uv[i + 1] - d.cross_uv[i - 1]) / h;
    const double rhs = d.vel[i] - d.kinetic[i] - d.y[i] + d.G0[i];
    rep.max_residual = std::max(rep.max_residual, std::abs(lhs - rhs));
  }
  return rep;
}

}  // namespace nlkg
