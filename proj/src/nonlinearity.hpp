#pragma once
#include <map>
#include <string>
#include <vector>

#include "errors.hpp"

namespace nlkg {

enum class ModelKind { CriticalPower, Exp2D, SubcriticalPower };

// The nonlinearity family:
//   CriticalPower     f(u) = |u|^{2*}/2*,  2* = 2d/(d-2), d >= 3, c = 0
//   Exp2D             f(u) = λ (e^{κ₀u²} − 1 − κ₀u² − κ₀²u⁴/2)/(1 + |u|^β), d = 2
//   SubcriticalPower  f(u) = λ|u|^p/p (sanity model)
struct NonlinearityModel {
  ModelKind kind = ModelKind::CriticalPower;
  int d = 3;
  double c = 0.0;  // mass shift of the static equation, in [0,1)

  // Exp2D parameters (κ₀ > 0, β ≥ 2, λ > 0); p is the growth-certificate
  // exponent used by assumption_audit (p > 4 required by the model class).
  double kappa0 = 1.0;
  double beta = 2.0;
  double lambda = 1.0;
  double p = 5.5;
  double u_cap = 30.0;  // saturation cap: |u| beyond this aborts the run

  // SubcriticalPower parameters
  double power = 3.0;
  double amp = 1.0;  // λ for the power models

  double two_star() const { return 2.0 * d / (d - 2.0); }
  // Cap actually enforced for Exp2D: never allow exp() overflow.
  double effective_cap() const;

  static NonlinearityModel critical(int d);
  static NonlinearityModel exp2d(double kappa0, double beta, double lambda,
                                 double c, double p = 5.5);
  static NonlinearityModel subcritical(int d, double power, double amp,
                                       double c);
};

// f(u), f'(u), Df = u f'(u), and the K₂ density d·(Df − 2f).
struct FBundle {
  double f = 0.0;
  double fp = 0.0;
  double Df = 0.0;
  double G2_density = 0.0;
};

double f_value(const NonlinearityModel& m, double u);
double fp_value(const NonlinearityModel& m, double u);
double fpp_value(const NonlinearityModel& m, double u);
FBundle f_bundle(const NonlinearityModel& m, double u);

// Numeric certification of the 2D model-class conditions on a sample set.
struct AuditItem {
  bool pass = false;
  double worst = 0.0;  // most extreme sampled value (sign or bound proxy)
  std::string note;
};

struct AuditReport {
  bool applicable = false;  // false for CriticalPower (conditions are 2D-specific)
  bool all_pass = false;
  std::map<std::string, AuditItem> items;
};

AuditReport assumption_audit(const NonlinearityModel& m,
                             const std::vector<double>& u_samples);

// Log-spaced default sample set on (lo, hi].
std::vector<double> log_samples(double lo, double hi, int n);

}  // namespace nlkg
