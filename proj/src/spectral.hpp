#pragma once
#include <memory>
#include <vector>

#include "grid.hpp"

namespace nlkg {

// Flux-form radial Laplacian: (Lu)_i = (flux_{i+1/2} − flux_{i−1/2}) / w_i
// with flux_{i+1/2} = ω_d r_{i+1/2}^{d−1} (u_{i+1} − u_i)/h.  Self-adjoint in
// the cell-volume inner product; −⟨u, Lu⟩_w equals dirichlet_form exactly for
// states with u(r_max) = 0.  The r = 0 node needs no special casing: its
// inner face has zero area in d ≥ 2.
void apply_laplacian(const RadialGrid& g, const std::vector<double>& u,
                     std::vector<double>& out);

// Eigendecomposition of −L on the interior nodes (Dirichlet at r_max),
// computed once per grid and cached.  Eigenvalues are nonnegative; the
// eigenvectors are orthonormal in the w-weighted inner product.
struct LaplacianEigen {
  int N = 0;                       // total grid nodes (last one pinned to 0)
  std::vector<double> eigenvalues; // size N−1, ascending
  // Dense column-major eigenvector matrix of the symmetrized operator,
  // (N−1)×(N−1); kept opaque here, accessed through the helpers below.
  std::vector<double> vs;
  std::vector<double> sqrt_w;      // √w_i, interior nodes

  // Coefficients of u in the w-orthonormal eigenbasis.
  std::vector<double> to_modes(const std::vector<double>& u) const;
  std::vector<double> from_modes(const std::vector<double>& coeffs) const;
};

const LaplacianEigen& laplacian_eigen(GridPtr grid);

// Exact-in-time discrete free Klein-Gordon flow with mass coefficient `mass`:
//   u(t) = cos(t√(−L+mass)) u₀ + sin(t√(−L+mass)) (−L+mass)^{−1/2} v₀.
RadialState free_evolve(const RadialState& s, double mass, double t);

// Time-averaged kinetic energy of the free flow over [0, L], split into the
// forward-wave, backward-wave, and oscillatory cross terms:
//   (1/L)∫₀^L ‖∇u(t)‖₂² dt = forward + backward + cross.
struct MeanKineticSplit {
  double forward = 0.0;
  double backward = 0.0;
  double cross = 0.0;
  double total() const { return forward + backward + cross; }
};

MeanKineticSplit mean_kinetic_split(const RadialState& s, double L, double mass);

}  // namespace nlkg
