#include "classifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace nlkg {

std::string pair_label(const ScalingPair& p) {
  std::ostringstream os;
  os << "K_" << p.alpha << "," << p.beta;
  return os.str();
}

const char* Verdict::set_name(Set s) {
  switch (s) {
    case Set::K_plus: return "K_plus";
    case Set::K_minus: return "K_minus";
    case Set::above_threshold: return "above_threshold";
    case Set::boundary_unresolved: return "boundary_unresolved";
  }
  return "?";
}

std::string Verdict::to_json() const {
  nlohmann::json j;
  j["set"] = set_name(set);
  j["energy_margin"] = energy_margin;
  j["mass_used"] = mass_used;
  j["k_values"] = K_values;
  return j.dump();
}

namespace {

bool has_pair(const std::vector<ScalingPair>& pairs, const ScalingPair& q) {
  for (const auto& p : pairs)
    if (p.alpha == q.alpha && p.beta == q.beta) return true;
  return false;
}

}  // namespace

Verdict classify(const RadialState& state, const NonlinearityModel& model,
                 double m, const std::vector<ScalingPair>& pairs,
                 const ClassifyOptions& opt) {
  const int d = model.d;
  if (pairs.empty()) throw config_error("classify: no scaling pairs");
  for (const auto& p : pairs)
    if (!p.admissible(d))
      throw config_error("classify: inadmissible pair " + pair_label(p));
  if (!has_pair(pairs, ScalingPair::K0()) ||
      !has_pair(pairs, ScalingPair::Kinf()) ||
      !has_pair(pairs, ScalingPair::K2(d)))
    throw config_error("classify: pairs must include the canonical (1,0), "
                       "(0,1) and (d,-2) specializations");

  const FunctionalBundle b = evaluate(state, model);
  Verdict v;
  v.mass_used = opt.mass;
  const double E = 0.5 * b.kinetic + 0.5 * opt.mass * b.mass_L2 - b.F +
                   0.5 * b.vel_L2;
  v.energy_margin = m - E;
  for (const auto& p : pairs) v.K_values[pair_label(p)] = K(b, d, p, opt.mass);

  if (E > m + opt.energy_tol_scale * std::abs(m)) {
    v.set = Verdict::Set::above_threshold;
    return v;
  }
  const double sign_tol = opt.sign_tol_scale * (b.kinetic + b.mass_L2);
  bool any_band = false, any_pos = false, any_neg = false;
  for (const auto& kv : v.K_values) {
    if (std::abs(kv.second) < sign_tol)
      any_band = true;
    else if (kv.second >= 0.0)
      any_pos = true;
    else
      any_neg = true;
  }
  if (any_band) {
    v.set = Verdict::Set::boundary_unresolved;
    return v;
  }
  if (any_pos && any_neg) {
    std::ostringstream os;
    os << "classify: mixed K signs below threshold (sign independence "
          "violated by the discretization):";
    for (const auto& kv : v.K_values) os << " " << kv.first << "=" << kv.second;
    throw invariant_error(os.str());
  }
  v.set = any_neg ? Verdict::Set::K_minus : Verdict::Set::K_plus;
  return v;
}

SignAuditReport sign_independence_audit(const std::vector<RadialState>& states,
                                        const NonlinearityModel& model, double m,
                                        int n_pairs, unsigned seed,
                                        const ClassifyOptions& opt) {
  const int d = model.d;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  SignAuditReport rep;
  for (int si = 0; si < int(states.size()); ++si) {
    const FunctionalBundle b = evaluate(states[si], model);
    const double E = 0.5 * b.kinetic + 0.5 * opt.mass * b.mass_L2 - b.F +
                     0.5 * b.vel_L2;
    if (!(E < m)) continue;  // audit is defined below threshold only
    std::vector<ScalingPair> pairs = {ScalingPair::K0(), ScalingPair::Kinf(),
                                      ScalingPair::K2(d)};
    const int n_canon = int(pairs.size());
    while (int(pairs.size()) < n_canon + n_pairs) {
      // α ≥ 0 with β free in the admissible wedge 2α + (d−2)β ≥ 0, 2α + dβ ≥ 0
      ScalingPair p{2.0 * U(rng), 4.0 * U(rng) - 2.0};
      if (p.admissible(d)) pairs.push_back(p);
    }
    const double sign_tol = opt.sign_tol_scale * (b.kinetic + b.mass_L2);
    bool any_band = false, any_pos = false, any_neg = false;
    for (int pi = 0; pi < int(pairs.size()); ++pi) {
      SignAuditRow row;
      row.state_index = si;
      row.pair = pairs[pi];
      row.canonical = pi < n_canon;
      row.K = K(b, d, pairs[pi], opt.mass);
      if (std::abs(row.K) < sign_tol) {
        row.sign = 0;
        any_band = true;
      } else {
        row.sign = row.K >= 0.0 ? 1 : -1;
        (row.sign > 0 ? any_pos : any_neg) = true;
      }
      rep.rows.push_back(row);
    }
    if (any_band) ++rep.boundary_states;
    if (any_pos && any_neg) ++rep.disagreements;
  }
  return rep;
}

std::string SignAuditReport::to_csv() const {
  std::ostringstream os;
  os << "state_index,alpha,beta,canonical,k_value,sign\n";
  os.precision(17);
  for (const auto& r : rows)
    os << r.state_index << "," << r.pair.alpha << "," << r.pair.beta << ","
       << (r.canonical ? 1 : 0) << "," << r.K << "," << r.sign << "\n";
  return os.str();
}

K2BoundReport k2_lower_bound_probe(const std::vector<RadialState>& states,
                                   const NonlinearityModel& model, double m,
                                   double tol) {
  if (model.d != 2 || !(model.c > 0.0 && model.c < 1.0))
    throw config_error("k2_lower_bound_probe: requires d = 2, c in (0,1)");
  K2BoundReport rep;
  rep.n_input = int(states.size());
  rep.min_ratio = std::numeric_limits<double>::infinity();
  const ScalingPair k2 = ScalingPair::K2(2);
  for (const auto& s : states) {
    const FunctionalBundle b = evaluate(s, model);
    const double K2v = K(b, 2, k2, 1.0);  // mass-1 functionals
    if (!(b.J <= m) || !(K2v >= 0.0)) continue;
    if (!(b.kinetic > 0.0)) continue;  // zero field: 0 ≥ 0 vacuously
    ++rep.n_filtered;
    rep.min_ratio = std::min(rep.min_ratio, K2v / b.kinetic);
  }
  if (rep.n_filtered == 0) rep.min_ratio = 1.0 - model.c;  // vacuous
  rep.all_pass = rep.min_ratio >= (1.0 - model.c) - tol;
  if (!rep.all_pass)
    throw invariant_error("k2_lower_bound_probe: ratio " +
                          std::to_string(rep.min_ratio) + " below 1-c = " +
                          std::to_string(1.0 - model.c));
  return rep;
}

BdKReport bdK_probe(const std::vector<RadialState>& states,
                    const NonlinearityModel& model, double m,
                    const ScalingPair& pair, const ClassifyOptions& opt) {
  const int d = model.d;
  if (d == 2 && pair.alpha == 0.0)
    throw config_error("bdK_probe: (d, alpha) = (2, 0) excluded");
  if (!pair.admissible(d))
    throw config_error("bdK_probe: inadmissible pair " + pair_label(pair));
  const double mu = pair.mu_bar(d);
  BdKReport rep;
  rep.minus_margin = std::numeric_limits<double>::infinity();
  std::vector<ScalingPair> canon = {ScalingPair::K0(), ScalingPair::Kinf(),
                                    ScalingPair::K2(d)};
  // δ̂ sweep: the largest value in (0,1] every K⁺ sample survives.
  std::vector<double> plus_K, plus_KQ, plus_M;
  for (const auto& s : states) {
    const Verdict v = classify(s, model, m, canon, opt);
    const FunctionalBundle b = evaluate(s, model);
    const double Kv = K(b, d, pair, opt.mass);
    const double KQ = (pair.alpha + pair.beta * (d - 2) / 2.0) * b.kinetic +
                      (pair.alpha + pair.beta * d / 2.0) * opt.mass * b.mass_L2;
    const double M = b.vel_L2 + (1.0 - opt.mass) * b.mass_L2;
    if (v.set == Verdict::Set::K_plus) {
      ++rep.n_plus;
      plus_K.push_back(Kv);
      plus_KQ.push_back(KQ);
      plus_M.push_back(M);
    } else if (v.set == Verdict::Set::K_minus) {
      ++rep.n_minus;
      rep.minus_margin = std::min(rep.minus_margin, -mu * M / 2.0 - Kv);
    }
  }
  rep.minus_pass = rep.n_minus == 0 || rep.minus_margin >= -1e-12;
  if (!rep.minus_pass)
    throw invariant_error("bdK_probe: a K-minus sample violates K <= -mu*M/2 "
                          "by " + std::to_string(-rep.minus_margin));
  for (double delta = 1.0; delta > 0.0; delta -= 0.01) {
    bool ok = true;
    for (size_t i = 0; i < plus_K.size(); ++i) {
      const double bound = std::min(delta * plus_KQ[i], mu * plus_M[i] / 2.0);
      if (plus_K[i] < bound - 1e-12) { ok = false; break; }
    }
    if (ok) { rep.delta_hat = delta; break; }
  }
  return rep;
}

EnergyMomentum lorentz_boost(const EnergyMomentum& ep,
                             const std::vector<double>& beta) {
  if (ep.P.size() != beta.size())
    throw config_error("lorentz_boost: dimension mismatch");
  double b2 = 0.0;
  for (double b : beta) b2 += b * b;
  if (!std::isfinite(b2)) throw config_error("lorentz_boost: non-finite beta");
  const double alpha = std::sqrt(1.0 + b2);
  EnergyMomentum out;
  double bP = 0.0;
  for (size_t i = 0; i < beta.size(); ++i) bP += beta[i] * ep.P[i];
  out.E = alpha * ep.E + bP;
  out.P.resize(ep.P.size());
  // only the component of P along β is mixed; the orthogonal part rides along
  const double mix = b2 > 0.0 ? bP * (alpha - 1.0) / b2 + ep.E : 0.0;
  for (size_t i = 0; i < beta.size(); ++i)
    out.P[i] = ep.P[i] + beta[i] * mix;
  return out;
}

std::pair<std::vector<double>, EnergyMomentum> zero_momentum_reduce(
    const EnergyMomentum& ep) {
  double p2 = 0.0;
  for (double p : ep.P) p2 += p * p;
  const double s = ep.E * ep.E - p2;
  if (!(s > 0.0))
    throw config_error("zero_momentum_reduce: requires E > |P|");
  const double inv = 1.0 / std::sqrt(s);
  std::vector<double> beta(ep.P.size());
  for (size_t i = 0; i < ep.P.size(); ++i) beta[i] = -ep.P[i] * inv;
  EnergyMomentum out = lorentz_boost(ep, beta);
  // the boosted momentum vanishes identically; clear the rounding residue
  for (double& p : out.P) p = (std::abs(p) < 1e-12 * std::abs(ep.E)) ? 0.0 : p;
  return {beta, out};
}

}  // namespace nlkg
