#include "spectral.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include <Eigen/Dense>

namespace nlkg {

void apply_laplacian(const RadialGrid& g, const std::vector<double>& u,
                     std::vector<double>& out) {
  const double omega = unit_sphere_area(g.d);
  out.assign(g.N, 0.0);
  double flux_prev = 0.0;  // zero-area face at the origin side
  for (int i = 0; i + 1 < g.N; ++i) {
    const double rf = 0.5 * (g.r[i] + g.r[i + 1]);
    const double flux = omega * std::pow(rf, g.d - 1) * (u[i + 1] - u[i]) / g.h;
    out[i] = (flux - flux_prev) / g.w[i];
    flux_prev = flux;
  }
  out[g.N - 1] = 0.0;  // Dirichlet node is pinned
}

namespace {

// keyed by the grid parameters, not the grid address: addresses get recycled
using EigenKey = std::tuple<int, int, double, bool, int>;

EigenKey key_of(const RadialGrid& g) {
  return {g.d, g.N, g.r_max, g.staggered, int(g.rule)};
}

std::mutex cache_mutex;
std::map<EigenKey, std::shared_ptr<LaplacianEigen>> eigen_cache;

std::shared_ptr<LaplacianEigen> build_eigen(const RadialGrid& g) {
  const int n = g.N - 1;  // interior nodes (Dirichlet at r_max)
  const double omega = unit_sphere_area(g.d);
  // face conductances fc_i between nodes i and i+1
  std::vector<double> fc(g.N - 1);
  for (int i = 0; i + 1 < g.N; ++i) {
    const double rf = 0.5 * (g.r[i] + g.r[i + 1]);
    fc[i] = omega * std::pow(rf, g.d - 1) / g.h;
  }
  // A = −L on interior nodes; symmetrize S = D^{1/2} A D^{−1/2}, D = diag(w).
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double left = (i > 0) ? fc[i - 1] : 0.0;
    S(i, i) = (fc[i] + left) / g.w[i];
    if (i + 1 < n)
      S(i, i + 1) = S(i + 1, i) = -fc[i] / std::sqrt(g.w[i] * g.w[i + 1]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(S);
  auto out = std::make_shared<LaplacianEigen>();
  out->N = g.N;
  out->eigenvalues.assign(solver.eigenvalues().data(),
                          solver.eigenvalues().data() + n);
  for (double& ev : out->eigenvalues) ev = std::max(ev, 0.0);
  out->vs.assign(solver.eigenvectors().data(),
                 solver.eigenvectors().data() + size_t(n) * n);
  out->sqrt_w.resize(n);
  for (int i = 0; i < n; ++i) out->sqrt_w[i] = std::sqrt(g.w[i]);
  return out;
}

}  // namespace

std::vector<double> LaplacianEigen::to_modes(const std::vector<double>& u) const {
  const int n = N - 1;
  Eigen::Map<const Eigen::MatrixXd> V(vs.data(), n, n);
  Eigen::VectorXd scaled(n);
  for (int i = 0; i < n; ++i) scaled[i] = sqrt_w[i] * u[i];
  Eigen::VectorXd c = V.transpose() * scaled;
  return {c.data(), c.data() + n};
}

std::vector<double> LaplacianEigen::from_modes(
    const std::vector<double>& coeffs) const {
  const int n = N - 1;
  Eigen::Map<const Eigen::MatrixXd> V(vs.data(), n, n);
  Eigen::Map<const Eigen::VectorXd> c(coeffs.data(), n);
  Eigen::VectorXd scaled = V * c;
  std::vector<double> u(N, 0.0);
  for (int i = 0; i < n; ++i) u[i] = scaled[i] / sqrt_w[i];
  return u;
}

const LaplacianEigen& laplacian_eigen(GridPtr grid) {
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = eigen_cache.find(key_of(*grid));
  if (it == eigen_cache.end())
    it = eigen_cache.emplace(key_of(*grid), build_eigen(*grid)).first;
  return *it->second;
}

RadialState free_evolve(const RadialState& s, double mass, double t) {
  const LaplacianEigen& eig = laplacian_eigen(s.grid);
  const int n = eig.N - 1;
  std::vector<double> cu = eig.to_modes(s.u);
  std::vector<double> cv = eig.to_modes(s.v);
  std::vector<double> nu(n), nv(n);
  for (int k = 0; k < n; ++k) {
    const double om = std::sqrt(eig.eigenvalues[k] + mass);
    const double co = std::cos(om * t), si = std::sin(om * t);
    if (om > 0) {
      nu[k] = co * cu[k] + si / om * cv[k];
      nv[k] = -om * si * cu[k] + co * cv[k];
    } else {  // massless zero mode: linear drift
      nu[k] = cu[k] + t * cv[k];
      nv[k] = cv[k];
    }
  }
  RadialState out = s;
  out.u = eig.from_modes(nu);
  out.v = eig.from_modes(nv);
  out.time = s.time + t;
  return out;
}

MeanKineticSplit mean_kinetic_split(const RadialState& s, double L, double mass) {
  if (!(L >= 2.0)) throw config_error("mean_kinetic_split: window L must be >= 2");
  const LaplacianEigen& eig = laplacian_eigen(s.grid);
  const int n = eig.N - 1;
  std::vector<double> cu = eig.to_modes(s.u);
  std::vector<double> cv = eig.to_modes(s.v);
  MeanKineticSplit out;
  for (int k = 0; k < n; ++k) {
    const double lam = eig.eigenvalues[k];
    const double om = std::sqrt(lam + mass);
    if (om == 0.0) continue;
    // u_k(t) = a e^{iωt} + b e^{−iωt}, a = (û − i v̂/ω)/2, b = conj(a) for
    // real data.  |a|² = |b|² = (û² + v̂²/ω²)/4.
    const double a_re = 0.5 * cu[k], a_im = -0.5 * cv[k] / om;
    const double asq = a_re * a_re + a_im * a_im;
    out.forward += lam * asq;
    out.backward += lam * asq;
    // ∫₀^L 2 Re[a b̄ e^{2iωt}] dt = Re[a² (e^{2iωL} − 1)/(iω)]
    const double a2_re = a_re * a_re - a_im * a_im;
    const double a2_im = 2.0 * a_re * a_im;
    const double ph_re = std::cos(2 * om * L) - 1.0, ph_im = std::sin(2 * om * L);
    // (ph_re + i ph_im)/(i ω) = (ph_im − i ph_re)/ω
    const double int_re = (a2_re * ph_im + a2_im * ph_re) / om;
    out.cross += lam * int_re / L;
  }
  return out;
}

}  // namespace nlkg
