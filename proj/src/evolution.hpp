#pragma once
#include <string>
#include <vector>

#include "functionals.hpp"
#include "grid.hpp"
#include "nonlinearity.hpp"

namespace nlkg {

enum class Scheme { Leapfrog, StrangSplit };

// Which detectors run; set from the input's classification (blowup detectors
// are meaningful on K⁻ trajectories, the scattering window on K⁺).
enum class DetectorGate { Both, BlowupOnly, ScatterOnly, None };

struct EvolveConfig {
  double dt = 0.0;             // 0 → 0.4·h (CFL requires dt ≤ 0.5·h)
  DetectorGate gate = DetectorGate::Both;
  double T_final = 50.0;
  Scheme scheme = Scheme::Leapfrog;
  double eq_mass = 1.0;        // mass coefficient of the evolved equation

  // detectors
  double blowup_factor = 10.0; // H¹×L² growth factor
  double scatter_window = 2.0; // window length L ≥ 2
  double scatter_tol = 1e-3;   // energy-norm distance to the free companion
  double nonlinear_tol = 1e-3; // windowed mean of G₀ + F
  double dispersal_radius = 5.0;
  double p = 2.5;              // H_p exponent; ε = p − 2 drives the z series
  double z_tol = 1e-8;         // slack in the z-concavity test
  int z_window = 5;            // consecutive records of concave z to fire

  // recording
  int record_every = 10;
  std::vector<double> exterior_radii;
  double conc_eps = 0.01;
  ConcentrationVariant conc_variant = ConcentrationVariant::ThresholdFraction;
  double drift_tol = 1e-6;
};

// One fixed-column row per recorded time.
struct DiagnosticsSeries {
  std::vector<double> times, y, vel, kinetic, F, G0;
  std::vector<double> k0_1, k0_c, kinf_1, kinf_c, k2_1, k2_c;
  std::vector<double> m_quantity, h_p, z, energy, energy_c, cross_uv;
  std::vector<double> conc_radius;
  std::vector<double> ext_radii;              // configured R list
  std::vector<std::vector<double>> exterior;  // exterior[j][i] at R = ext_radii[j]

  std::string to_csv() const;
};

// One leapfrog (velocity-Verlet) step of ü = Δu − eq_mass·u + f'(u) with the
// flux-form radial Laplacian, Dirichlet at r_max.  Exactly time-reversible:
// stepping with −dt returns the input up to roundoff.
RadialState step(const RadialState& s, const NonlinearityModel& model,
                 const EvolveConfig& cfg);

// Strang splitting cross-check: half spectral free flow, full nonlinear kick,
// half free flow.  Requires the grid eigendecomposition (small grids).
RadialState step_strang(const RadialState& s, const NonlinearityModel& model,
                        const EvolveConfig& cfg);

struct Detection {
  bool fired = false;
  std::string criterion;  // norm_growth | saturation | z_concavity | window
  double time = 0.0;
  double di_y_fraction = 0.0;  // fraction of sampled times satisfying (DI y)
};

enum class RunVerdict { Scattered, BlewUp, Undecided };

struct EvolveResult {
  RunVerdict verdict = RunVerdict::Undecided;
  std::string criterion;   // detector provenance
  double t_end = 0.0;
  double energy_drift = 0.0;  // max |E(t) − E(0)| over the run
  bool near_threshold = false;
  RadialState final_state;
};

// Runs until T_final, blowup detection, or scatter detection.  The scattering
// companion is the same leapfrog with the nonlinearity dropped, relaunched
// from the current state whenever a window fails.  Optionally collects state
// snapshots at the record cadence into *snapshots.
EvolveResult evolve(const RadialState& s0, const NonlinearityModel& model,
                    const EvolveConfig& cfg, DiagnosticsSeries* series,
                    std::vector<RadialState>* snapshots = nullptr,
                    double m_threshold = 0.0);

// Offline detector scans over a recorded series.
Detection blowup_detect(const DiagnosticsSeries& series,
                        const NonlinearityModel& model,
                        const EvolveConfig& cfg);

// Offline scatter check over a snapshot history: tiles windows of length L
// and applies the three window criteria (free-companion distance, dispersal,
// vanishing nonlinearity).
Detection scatter_detect(const std::vector<RadialState>& history,
                         const NonlinearityModel& model,
                         const EvolveConfig& cfg);

struct ExteriorReport {
  double C = 0.0;   // max over records of exterior(R + |t−T|) / ε
  bool pass = false;
};

// Finite-speed propagation of exterior smallness: checks
// ∫_{|x|>R+|t−T|} e_F(t) dx ≤ C·ε over the history and reports the empirical
// C; C beyond C_cap throws invariant_error (a scheme bug, not physics).
ExteriorReport exterior_smallness_check(const std::vector<RadialState>& history,
                                        double R, double T, double eps,
                                        double mass = 1.0, double C_cap = 2.0);

struct EquipartitionReport {
  double max_residual = 0.0;  // |d/dt⟨u|u̇⟩ − (vel − kin − mass + G₀)|
  double mean_vel = 0.0, mean_kin = 0.0, mean_mass = 0.0, mean_G0 = 0.0;
};

// Checks the discrete time derivative of ⟨u|u̇⟩ against
// vel_L2 − kinetic − mass_L2 + G₀ (central differences, O(dt²)).
EquipartitionReport equipartition_monitor(const DiagnosticsSeries& series);

}  // namespace nlkg
