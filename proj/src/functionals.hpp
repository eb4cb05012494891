#pragma once
#include <string>
#include <vector>

#include "grid.hpp"
#include "nonlinearity.hpp"

namespace nlkg {

// Scaling direction (α, β) for the family e^{αλ} φ(x / e^{βλ}).
struct ScalingPair {
  double alpha = 1.0;
  double beta = 0.0;

  bool admissible(int d) const {
    const bool nonzero = alpha != 0.0 || beta != 0.0;
    return alpha >= 0.0 && 2 * alpha + d * beta >= 0.0 &&
           2 * alpha + (d - 2) * beta >= 0.0 && nonzero;
  }
  double mu_bar(int d) const {
    return 2 * alpha + std::max(beta * d, beta * (d - 2));
  }

  static ScalingPair K0() { return {1.0, 0.0}; }
  static ScalingPair Kinf() { return {0.0, 1.0}; }
  static ScalingPair K2(int d) { return {double(d), -2.0}; }
};

// Every scalar the proofs track, evaluated at one phase-space point.
struct FunctionalBundle {
  double E = 0.0;       // energy at mass 1
  double E_c = 0.0;     // mass-shifted energy
  double J = 0.0;       // static energy at mass 1
  double J_c = 0.0;     // mass-shifted static energy
  double F = 0.0;       // ∫ f(u)
  double G0 = 0.0;      // ∫ Df(u) = ∫ u f'(u)
  double G2 = 0.0;      // d ∫ (Df − 2f)
  double kinetic = 0.0; // ‖∇u‖₂² (discrete Dirichlet form)
  double mass_L2 = 0.0; // ‖u‖₂²
  double vel_L2 = 0.0;  // ‖u̇‖₂²
  double P = 0.0;       // radial momentum component (0 for radial states)
  double M = 0.0;       // vel_L2 + (1−c)·mass_L2
};

FunctionalBundle evaluate(const RadialState& s, const NonlinearityModel& m);

// Flat JSON object, snake_case keys.
std::string bundle_to_json(const FunctionalBundle& b);

// K_{α,β}^{(a)}(φ) = [α + β(d−2)/2]·kin + [α + βd/2]·a·‖φ‖₂² − ∫(α Df + βd f).
// `mass` is the mass coefficient a ∈ [c, 1].
double K(const RadialState& s, const NonlinearityModel& m, const ScalingPair& pair,
         double mass);
double K(const FunctionalBundle& b, int d, const ScalingPair& pair, double mass);

// Discrete ‖∇u‖₂² via face fluxes: Σ ω_d r_{i+1/2}^{d−1} ((u_{i+1}−u_i)/h)² h.
// Exactly equals −⟨u, Lu⟩_w for the flux-form Laplacian (summation by parts).
double dirichlet_form(const RadialGrid& g, const std::vector<double>& u);

// Per-node split of the Dirichlet form (half of each adjacent face term);
// sums exactly to dirichlet_form.
std::vector<double> kinetic_density(const RadialGrid& g,
                                    const std::vector<double>& u);

// ∫_{|x|>R} e_F dx with e_F = (|u̇|² + |∇u|² + mass·|u|²)/2.
double exterior_energy(const RadialState& s, double R, double mass);

enum class ConcentrationVariant {
  ThresholdFraction,  // smallest R with exterior e_F ≤ ε · reference (d ≥ 3 style)
  AbsoluteEps,        // smallest R with exterior e_F ≤ ε (2D style)
};

double concentration_radius(const RadialState& s, const NonlinearityModel& m,
                            double eps, double mass,
                            ConcentrationVariant variant,
                            double reference = -1.0 /* default: E(u) */);

}  // namespace nlkg
