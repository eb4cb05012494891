#pragma once
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"

namespace nlkg {

enum class QuadRule { Trapezoid, Simpson };

// ω_d: surface area of the unit sphere in R^d.
double unit_sphere_area(int d);

// Uniform radial grid on [0, r_max] with quadrature weights such that
//   ∫_{R^d} g(|x|) dx ≈ Σ_i w_i g(r_i).
//
// Trapezoid attaches finite-volume cell weights w_i = ω_d (r_{i+1/2}^d −
// r_{i−1/2}^d)/d: exact for constants (the cells tile the ball) and matched
// to the flux-form Laplacian so that summation-by-parts holds exactly.
// Simpson attaches product-Simpson weights (piecewise-quadratic Lagrange
// interpolation integrated against ω_d r^{d−1} dr), fourth order for smooth
// integrands.
struct RadialGrid {
  int d = 3;
  int N = 0;
  double r_max = 0.0;
  double h = 0.0;
  bool staggered = false;
  QuadRule rule = QuadRule::Trapezoid;
  std::vector<double> r;  // nodes, strictly increasing, r.back() == r_max (non-staggered)
  std::vector<double> w;  // quadrature weights, all positive

  double integrate(const std::vector<double>& g) const;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

GridPtr make_grid(int d, int N, double r_max, bool staggered = false,
                  QuadRule rule = QuadRule::Trapezoid);

// Phase-space point (u, u̇) on a radial grid.
struct RadialState {
  GridPtr grid;
  std::vector<double> u;
  std::vector<double> v;
  double time = 0.0;
};

RadialState zero_state(GridPtr grid);
RadialState sample(GridPtr grid, const std::function<double(double)>& profile);

// CSV persistence: header "r,u,v", IEEE round-trip decimals.
void write_profile_csv(const RadialState& s, const std::string& path);
// Rebuilds the grid from the r column (d and rule are not stored in the CSV).
RadialState read_profile_csv(int d, const std::string& path,
                             QuadRule rule = QuadRule::Trapezoid);

}  // namespace nlkg
