#pragma once
#include <map>
#include <string>
#include <vector>

#include "functionals.hpp"
#include "grid.hpp"
#include "nonlinearity.hpp"

namespace nlkg {

// Aubin–Talenti profile W(r) = (1 + r²/(d(d−2)))^{−(d−2)/2}, the closed-form
// ground state of the massless critical equation −ΔW = W^{2*−1}, d ≥ 3.
double closed_form_W_value(int d, double r);
RadialState closed_form_W(int d, GridPtr grid);

struct ShootConfig {
  double Q0_lo = 0.0;      // shooting bracket on Q(0); ignored when c = 0
  double Q0_hi = 0.0;
  double r_end = 100.0;    // integration horizon for classification
  double h0 = 2e-3;        // base step
  int bisect_iters = 80;
  double tail_eps = 1e-12; // truncate the decaying tail at |Q| < tail_eps·Q(0)
  double r_far = 1e8;      // far-field continuation horizon (c = 0 only)
};

struct GroundStateResult {
  RadialState Q;          // profile on the grid, v ≡ 0
  double Q0 = 0.0;        // shooting amplitude Q(0)
  double m = 0.0;         // threshold J^{(c)}(Q)
  double c = 0.0;         // mass shift used
  double residual_Linf = 0.0;
  std::map<std::string, double> nehari;  // canonical + random admissible pairs

  // Solver-level quadrature of the ODE trajectory (independent of the grid;
  // includes the far-field continuation for c = 0, where ‖Q‖₂² diverges and
  // mass_L2 below is the grid-truncated value only).
  double kinetic = 0.0;
  double mass_L2 = 0.0;
  double F_int = 0.0;
  double G0_int = 0.0;
  double h1_norm_sq = 0.0;  // kinetic + grid-truncated mass, scale for K tests
};

// Shooting solver for −Q'' − (d−1)Q'/r + cQ = f'(Q), Q'(0) = 0.
// c > 0: bisection on Q(0) between "crosses zero" and "turns back up".
// c = 0 (CriticalPower): the equation has a scaling family; Q(0) is pinned
// to 1 and the far field is integrated to cfg.r_far with geometric steps.
GroundStateResult shoot(const NonlinearityModel& model, GridPtr grid,
                        const ShootConfig& cfg);

// m = J^{(c)}(Q) from the solver-level quadrature.
double compute_m(const GroundStateResult& res);

// Minimax cross-check: rescale φ onto the Nehari surface K^{(c)}_{1,0} = 0 by
// amplitude scaling (returns the scale factor s with K(sφ) = 0, s > 0).
// Throws config_error when no positive root exists (e.g. defocusing data).
double nehari_rescale_amplitude(const RadialState& phi,
                                const NonlinearityModel& model);

// Runs the minimax sampling check: n random bumps rescaled onto the Nehari
// surface; returns the minimum of J^{(c)} over the rescaled samples (the
// minimax property predicts min ≥ m).
double minimax_check(const GroundStateResult& res, const NonlinearityModel& model,
                     GridPtr grid, int n_samples, unsigned seed);

// Trudinger–Moser-type constant of the 2D model:
//   c = sup{ 2F(φ)/‖φ‖₂² : κ₀‖∇φ‖₂² ≤ 4π }
// by multi-start H¹-preconditioned projected gradient ascent.  The objective
// is evaluated with sub-cell quadrature (piecewise-linear interpolation of φ
// sub-sampled inside each cell) so single-node spikes gain nothing from the
// discretization.
struct TmConfig {
  double r_max = 15.0;
  int N = 600;
  int n_starts = 5;
  int max_iters = 600;
  int n_sub = 8;  // sub-samples per cell for the objective quadrature
  unsigned seed = 7;
};

struct TmResult {
  double c = 0.0;                  // best ratio found
  std::vector<double> per_start;   // converged value of each start
  double spread = 0.0;             // (max − min)/max over starts
  bool constraint_active = false;  // κ₀‖∇φ‖² at the ball boundary at optimum
  int iterations = 0;
};

TmResult tm_constant(const NonlinearityModel& model, const TmConfig& cfg);

}  // namespace nlkg
