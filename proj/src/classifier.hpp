#pragma once
#include <map>
#include <string>
#include <vector>

#include "functionals.hpp"
#include "grid.hpp"
#include "nonlinearity.hpp"

namespace nlkg {

std::string pair_label(const ScalingPair& p);

// Membership verdict for the invariant sets split by the virial signs.
struct Verdict {
  enum class Set { K_plus, K_minus, above_threshold, boundary_unresolved };
  Set set = Set::boundary_unresolved;
  double energy_margin = 0.0;             // m − E (at the mass used)
  std::map<std::string, double> K_values; // audited pair → K value
  double mass_used = 1.0;                 // mass coefficient of the K's and E

  std::string to_json() const;
  static const char* set_name(Set s);
};

struct ClassifyOptions {
  double mass = 1.0;              // mass coefficient a for E and K_{α,β}^{(a)}
  double sign_tol_scale = 1e-9;   // dead band: |K| < scale·‖φ‖²_{H¹}
  double energy_tol_scale = 1e-8; // threshold slack: E ≤ m + scale·m
};

// Splits phase space at the threshold m: above_threshold when E > m (+tol);
// otherwise K_plus/K_minus by the common sign of all audited K values, with a
// dead band |K| < sign_tol returning boundary_unresolved.  Mixed clear signs
// below threshold contradict the sign-independence of (α,β) and throw an
// invariant_error carrying every K value (a discretization failure signal).
// `pairs` must include the three canonical specializations (1,0), (0,1),
// (d,−2) and be admissible throughout.
Verdict classify(const RadialState& state, const NonlinearityModel& model,
                 double m, const std::vector<ScalingPair>& pairs,
                 const ClassifyOptions& opt = {});

// One audited (state, pair) evaluation.
struct SignAuditRow {
  int state_index = 0;
  ScalingPair pair;
  double K = 0.0;
  int sign = 0;        // −1, 0 (inside the dead band), +1
  bool canonical = false;
};

struct SignAuditReport {
  std::vector<SignAuditRow> rows;
  int disagreements = 0;           // states whose clear signs disagree
  int boundary_states = 0;         // states with some pair inside the dead band
  std::string to_csv() const;      // one row per (state, pair)
};

// For each below-threshold state, evaluates sign(K_{α,β}) over n_pairs random
// admissible pairs plus the canonical ones, and tallies disagreements (the
// sign is predicted to be independent of the pair).
SignAuditReport sign_independence_audit(const std::vector<RadialState>& states,
                                        const NonlinearityModel& model, double m,
                                        int n_pairs, unsigned seed,
                                        const ClassifyOptions& opt = {});

struct K2BoundReport {
  int n_input = 0;
  int n_filtered = 0;      // J ≤ m and K₂ ≥ 0 (mass-1 functionals)
  double min_ratio = 0.0;  // min K₂/‖∇φ‖² over the filtered states
  bool all_pass = false;   // min_ratio ≥ (1−c) − tol
};

// Uniform lower bound K₂(φ) ≥ (1−c)‖∇φ‖₂² on {J(φ) ≤ m, K₂(φ) ≥ 0} for the
// mass-shifted 2D model.  A violation beyond tolerance throws invariant_error.
K2BoundReport k2_lower_bound_probe(const std::vector<RadialState>& states,
                                   const NonlinearityModel& model, double m,
                                   double tol = 1e-9);

struct BdKReport {
  int n_plus = 0;
  int n_minus = 0;
  double delta_hat = 0.0;    // largest δ̂ ∈ (0,1] making every K⁺ sample pass
  double minus_margin = 0.0; // min over K⁻ samples of (−μ̄M/2 − K) ≥ 0
  bool minus_pass = false;
};

// Quantitative virial bounds away from zero:  K⁺-states satisfy
// K ≥ min(δ̂·K^Q, μ̄M/2) with K^Q the quadratic part of K, and K⁻-states
// satisfy K ≤ −μ̄M/2.  The K⁻ inequality failing throws invariant_error.
// Requires (d, α) ≠ (2, 0).
BdKReport bdK_probe(const std::vector<RadialState>& states,
                    const NonlinearityModel& model, double m,
                    const ScalingPair& pair, const ClassifyOptions& opt = {});

// Energy–momentum algebra of the boost reduction.  P is a d-vector supplied
// externally (radial states carry P = 0; boosted fields themselves are
// non-radial and out of scope).
struct EnergyMomentum {
  double E = 0.0;
  std::vector<double> P;
};

// Boost law E′ = αE + β·P and P′ = P + β̂ (β̂·P)(α−1) + βE with
// α = √(1 + |β|²), the hyperbolic normalization: the composition with (−β)
// is the exact identity and E² − |P|² is preserved.
EnergyMomentum lorentz_boost(const EnergyMomentum& ep,
                             const std::vector<double>& beta);

// Finds β with P′ = 0; then E′ = √(E² − |P|²).  Requires E > |P|.
std::pair<std::vector<double>, EnergyMomentum> zero_momentum_reduce(
    const EnergyMomentum& ep);

}  // namespace nlkg
