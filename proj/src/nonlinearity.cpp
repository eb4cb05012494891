#include "nonlinearity.hpp"

#include <algorithm>
#include <cmath>

namespace nlkg {

namespace {

// e^x − 1 − x, accurate for small x (direct formula cancels below x ~ 1).
double expm1m(double x) {
  if (x >= 0.5) return std::expm1(x) - x;
  double term = x * x / 2.0, acc = term;
  for (int n = 3; n < 40; ++n) {
    term *= x / n;
    acc += term;
    if (std::abs(term) < 1e-20 * std::abs(acc)) break;
  }
  return acc;
}

// e^x − 1 − x − x²/2, accurate for small x.
double expm1mq(double x) {
  if (x >= 0.5) return std::expm1(x) - x - 0.5 * x * x;
  double term = x * x * x / 6.0, acc = term;
  for (int n = 4; n < 42; ++n) {
    term *= x / n;
    acc += term;
    if (std::abs(term) < 1e-20 * std::abs(acc)) break;
  }
  return acc;
}

void check_cap(const NonlinearityModel& m, double u) {
  if (m.kind == ModelKind::Exp2D && std::abs(u) > m.effective_cap())
    throw saturation_error("Exp2D amplitude " + std::to_string(std::abs(u)) +
                           " beyond saturation cap " +
                           std::to_string(m.effective_cap()));
}

}  // namespace

double NonlinearityModel::effective_cap() const {
  // exp(κ₀ u²) must stay below DBL_MAX (~e^709); keep a margin.
  return std::min(u_cap, std::sqrt(700.0 / kappa0));
}

NonlinearityModel NonlinearityModel::critical(int d) {
  if (d < 3) throw config_error("CriticalPower requires d >= 3");
  NonlinearityModel m;
  m.kind = ModelKind::CriticalPower;
  m.d = d;
  m.c = 0.0;
  return m;
}

NonlinearityModel NonlinearityModel::exp2d(double kappa0, double beta,
                                           double lambda, double c, double p) {
  if (!(kappa0 > 0) || !(beta >= 2) || !(lambda > 0))
    throw config_error("Exp2D requires kappa0 > 0, beta >= 2, lambda > 0");
  if (!(c >= 0.0 && c < 1.0)) throw config_error("Exp2D mass shift must be in [0,1)");
  NonlinearityModel m;
  m.kind = ModelKind::Exp2D;
  m.d = 2;
  m.c = c;
  m.kappa0 = kappa0;
  m.beta = beta;
  m.lambda = lambda;
  m.p = p;
  return m;
}

NonlinearityModel NonlinearityModel::subcritical(int d, double power, double amp,
                                                 double c) {
  if (!(power > 2)) throw config_error("SubcriticalPower requires p > 2");
  NonlinearityModel m;
  m.kind = ModelKind::SubcriticalPower;
  m.d = d;
  m.c = c;
  m.power = power;
  m.amp = amp;
  return m;
}

double f_value(const NonlinearityModel& m, double u) {
  switch (m.kind) {
    case ModelKind::CriticalPower: {
      const double ts = m.two_star();
      return std::pow(std::abs(u), ts) / ts;
    }
    case ModelKind::SubcriticalPower:
      return m.amp * std::pow(std::abs(u), m.power) / m.power;
    case ModelKind::Exp2D: {
      check_cap(m, u);
      const double x = m.kappa0 * u * u;
      return m.lambda * expm1mq(x) / (1.0 + std::pow(std::abs(u), m.beta));
    }
  }
  return 0.0;
}

double fp_value(const NonlinearityModel& m, double u) {
  switch (m.kind) {
    case ModelKind::CriticalPower: {
      const double ts = m.two_star();
      return u == 0.0 ? 0.0 : std::pow(std::abs(u), ts - 2.0) * u;
    }
    case ModelKind::SubcriticalPower:
      return u == 0.0 ? 0.0 : m.amp * std::pow(std::abs(u), m.power - 2.0) * u;
    case ModelKind::Exp2D: {
      check_cap(m, u);
      if (u == 0.0) return 0.0;
      const double x = m.kappa0 * u * u;
      const double au = std::abs(u);
      const double N = expm1mq(x);
      const double Np = 2.0 * m.kappa0 * u * expm1m(x);
      const double Dn = 1.0 + std::pow(au, m.beta);
      const double Dnp = m.beta * std::pow(au, m.beta - 1.0) * (u > 0 ? 1.0 : -1.0);
      return m.lambda * (Np * Dn - N * Dnp) / (Dn * Dn);
    }
  }
  return 0.0;
}

double fpp_value(const NonlinearityModel& m, double u) {
  switch (m.kind) {
    case ModelKind::CriticalPower: {
      const double ts = m.two_star();
      return (ts - 1.0) * std::pow(std::abs(u), ts - 2.0);
    }
    case ModelKind::SubcriticalPower:
      return m.amp * (m.power - 1.0) * std::pow(std::abs(u), m.power - 2.0);
    case ModelKind::Exp2D: {
      check_cap(m, u);
      if (u == 0.0) return 0.0;
      const double x = m.kappa0 * u * u;
      const double au = std::abs(u);
      const double ex1 = std::expm1(x);  // e^x − 1
      const double N = expm1mq(x);
      const double Np = 2.0 * m.kappa0 * u * expm1m(x);
      const double Npp =
          2.0 * m.kappa0 * expm1m(x) + 4.0 * m.kappa0 * m.kappa0 * u * u * ex1;
      const double sg = u > 0 ? 1.0 : -1.0;
      const double Dn = 1.0 + std::pow(au, m.beta);
      const double Dnp = m.beta * std::pow(au, m.beta - 1.0) * sg;
      const double Dnpp = m.beta * (m.beta - 1.0) * std::pow(au, m.beta - 2.0);
      return m.lambda *
             ((Npp * Dn - N * Dnpp) * Dn - 2.0 * Dnp * (Np * Dn - N * Dnp)) /
             (Dn * Dn * Dn);
    }
  }
  return 0.0;
}

FBundle f_bundle(const NonlinearityModel& m, double u) {
  FBundle b;
  b.f = f_value(m, u);
  b.fp = fp_value(m, u);
  b.Df = u * b.fp;
  b.G2_density = m.d * (b.Df - 2.0 * b.f);
  return b;
}

std::vector<double> log_samples(double lo, double hi, int n) {
  if (!(lo > 0 && hi > lo) || n < 2) throw config_error("log_samples: bad range");
  std::vector<double> out(n);
  const double L0 = std::log(lo), L1 = std::log(hi);
  for (int i = 0; i < n; ++i)
    out[i] = std::exp(L0 + (L1 - L0) * i / (n - 1));
  return out;
}

AuditReport assumption_audit(const NonlinearityModel& m,
                             const std::vector<double>& u_samples) {
  AuditReport rep;
  if (m.kind == ModelKind::CriticalPower) {
    rep.applicable = false;
    rep.all_pass = true;
    return rep;
  }
  rep.applicable = true;

  const double p = (m.kind == ModelKind::Exp2D) ? m.p : m.power;
  const double tol = 1e-12;

  AuditItem p_range;
  p_range.pass = p > 4.0;
  p_range.worst = p;
  p_range.note = "growth certificate exponent must exceed 4";
  rep.items["p_gt_4"] = p_range;

  // (D − p)f >= 0 and (D − 2)(D − p)f >= 0 with D = u d/du:
  //   (D − p)f       = u f' − p f
  //   (D − 2)(D − p)f = u²f'' − (1 + p) u f' + 2 p f
  AuditItem mono, conv;
  mono.pass = conv.pass = true;
  mono.worst = conv.worst = 0.0;
  for (double u : u_samples) {
    const double f = f_value(m, u), fp = fp_value(m, u), fpp = fpp_value(m, u);
    const double g1 = u * fp - p * f;
    const double g2 = u * u * fpp - (1.0 + p) * u * fp + 2.0 * p * f;
    const double scale = std::max(1.0, std::abs(u * fp));
    if (g1 < -tol * scale) mono.pass = false;
    if (g2 < -tol * scale) conv.pass = false;
    mono.worst = std::min(mono.worst, g1);
    conv.worst = std::min(conv.worst, g2);
  }
  mono.note = "(D-p)f >= 0 on samples";
  conv.note = "(D-2)(D-p)f >= 0 on samples";
  rep.items["monotonicity"] = mono;
  rep.items["convexity"] = conv;

  // Small-u decay: |u|^{-p} |D²f| bounded near u = 0 (D²f = u f' + u² f'').
  AuditItem decay;
  decay.pass = true;
  decay.worst = 0.0;
  for (double u : u_samples) {
    if (u > 0.5) continue;
    const double D2f = u * fp_value(m, u) + u * u * fpp_value(m, u);
    decay.worst = std::max(decay.worst, std::pow(u, -p) * std::abs(D2f));
  }
  decay.pass = std::isfinite(decay.worst) && decay.worst < 1e6;
  decay.note = "sampled sup of |u|^{-p}|D^2 f| near 0 (finite-limsup proxy)";
  rep.items["small_u_decay"] = decay;

  if (m.kind == ModelKind::Exp2D) {
    // Exponential-rate sandwich at the sampled tail (heuristic for the
    // |u| -> inf limits): e^{-κ u²} f'' -> 0 for κ > κ₀, e^{-κ u²} f -> ∞
    // for κ < κ₀, and e^{-κ₀u²} Df bounded.
    const double cap = m.effective_cap();
    std::vector<double> tail;
    for (double u : u_samples)
      if (u > 0.5 * cap && u <= cap) tail.push_back(u);
    if (tail.size() < 2) tail = {0.6 * cap, 0.8 * cap, 0.95 * cap};

    AuditItem above, below, dfb;
    const double ka = 1.1 * m.kappa0, kb = 0.9 * m.kappa0;
    double prev_a = -1.0, prev_b = -1.0;
    above.pass = below.pass = true;
    for (double u : tail) {
      const double va = std::exp(-ka * u * u) * std::abs(fpp_value(m, u));
      const double vb = std::exp(-kb * u * u) * f_value(m, u);
      if (prev_a >= 0 && va > prev_a) above.pass = false;  // must decay
      if (prev_b >= 0 && vb < prev_b) below.pass = false;  // must grow
      prev_a = va;
      prev_b = vb;
      above.worst = va;
      below.worst = vb;
      const double vdf = std::exp(-m.kappa0 * u * u) * u * fp_value(m, u);
      dfb.worst = std::max(dfb.worst, vdf);
    }
    above.note = "e^{-1.1 k0 u^2} f'' decreasing on sampled tail";
    below.note = "e^{-0.9 k0 u^2} f increasing on sampled tail";
    dfb.pass = std::isfinite(dfb.worst) && dfb.worst < 1e6;
    dfb.note = "sampled sup of e^{-k0 u^2} Df (boundedness proxy)";
    rep.items["exp_rate_above"] = above;
    rep.items["exp_rate_below"] = below;
    rep.items["Df_exp_bound"] = dfb;
  }

  rep.all_pass = true;
  for (const auto& [k, v] : rep.items) rep.all_pass = rep.all_pass && v.pass;
  return rep;
}

}  // namespace nlkg
