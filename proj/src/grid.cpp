#include "grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace nlkg {

double unit_sphere_area(int d) {
  // ω_d = 2 π^{d/2} / Γ(d/2)
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

namespace {

// ∫_a^b r^k dr, k ≥ 0
double power_moment(double a, double b, int k) {
  return (std::pow(b, k + 1) - std::pow(a, k + 1)) / (k + 1);
}

std::vector<double> fv_cell_weights(const std::vector<double>& r, int d,
                                    double h, double cell_rmax) {
  const double omega = unit_sphere_area(d);
  std::vector<double> w(r.size());
  for (size_t i = 0; i < r.size(); ++i) {
    const double rp = std::min(r[i] + 0.5 * h, cell_rmax);
    const double rm = std::max(r[i] - 0.5 * h, 0.0);
    w[i] = omega * (std::pow(rp, d) - std::pow(rm, d)) / d;
  }
  return w;
}

std::vector<double> product_simpson_weights(const std::vector<double>& r, int d) {
  const double omega = unit_sphere_area(d);
  const size_t N = r.size();
  std::vector<double> w(N, 0.0);
  size_t i = 0;
  while (i + 2 < N) {
    const double a = r[i], m = r[i + 1], b = r[i + 2];
    const double mom0 = power_moment(a, b, d - 1);
    const double mom1 = power_moment(a, b, d);
    const double mom2 = power_moment(a, b, d + 1);
    const double xs[3][3] = {{a, m, b}, {m, a, b}, {b, a, m}};
    for (int j = 0; j < 3; ++j) {
      const double x0 = xs[j][0], x1 = xs[j][1], x2 = xs[j][2];
      const double den = (x0 - x1) * (x0 - x2);
      w[i + j] += omega * (mom2 - (x1 + x2) * mom1 + x1 * x2 * mom0) / den;
    }
    i += 2;
  }
  if (i + 1 < N) {  // odd trailing interval: product trapezoid
    const double a = r[i], b = r[i + 1], h = b - a;
    const double m0 = power_moment(a, b, d - 1), m1 = power_moment(a, b, d);
    w[i] += omega * (b * m0 - m1) / h;
    w[i + 1] += omega * (m1 - a * m0) / h;
  }
  return w;
}

}  // namespace

double RadialGrid::integrate(const std::vector<double>& g) const {
  if (g.size() != w.size())
    throw config_error("integrate: length mismatch with grid");
  double acc = 0.0;
  for (size_t i = 0; i < g.size(); ++i) acc += w[i] * g[i];
  return acc;
}

GridPtr make_grid(int d, int N, double r_max, bool staggered, QuadRule rule) {
  if (d < 2) throw config_error("make_grid: dimension must be >= 2");
  if (N < 3) throw config_error("make_grid: need at least 3 nodes");
  if (!(r_max > 0.0)) throw config_error("make_grid: r_max must be positive");

  auto g = std::make_shared<RadialGrid>();
  g->d = d;
  g->N = N;
  g->r_max = r_max;
  g->staggered = staggered;
  g->rule = rule;
  g->r.resize(N);
  if (staggered) {
    g->h = r_max / N;
    for (int i = 0; i < N; ++i) g->r[i] = (i + 0.5) * g->h;
  } else {
    g->h = r_max / (N - 1);
    for (int i = 0; i < N; ++i) g->r[i] = i * g->h;
    g->r[N - 1] = r_max;
  }
  switch (rule) {
    case QuadRule::Trapezoid:
      g->w = fv_cell_weights(g->r, d, g->h, r_max);
      break;
    case QuadRule::Simpson:
      g->w = product_simpson_weights(g->r, d);
      break;
  }
  return g;
}

RadialState zero_state(GridPtr grid) {
  RadialState s;
  s.grid = std::move(grid);
  s.u.assign(s.grid->N, 0.0);
  s.v.assign(s.grid->N, 0.0);
  return s;
}

RadialState sample(GridPtr grid, const std::function<double(double)>& profile) {
  RadialState s = zero_state(std::move(grid));
  for (int i = 0; i < s.grid->N; ++i) {
    const double val = profile(s.grid->r[i]);
    if (!std::isfinite(val))
      throw config_error("sample: profile not finite at r=" +
                         std::to_string(s.grid->r[i]));
    s.u[i] = val;
  }
  return s;
}

void write_profile_csv(const RadialState& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot open for writing: " + path);
  out << "r,u,v\n";
  char buf[96];
  for (int i = 0; i < s.grid->N; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.grid->r[i], s.u[i],
                  s.v[i]);
    out << buf;
  }
}

RadialState read_profile_csv(int d, const std::string& path, QuadRule rule) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open profile CSV: " + path);
  std::string line;
  if (!std::getline(in, line)) throw config_error("empty profile CSV: " + path);
  std::vector<double> rs, us, vs;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    double vals[3];
    for (int k = 0; k < 3; ++k) {
      if (!std::getline(ss, cell, ','))
        throw config_error("profile CSV row with fewer than 3 columns");
      vals[k] = std::stod(cell);
    }
    rs.push_back(vals[0]);
    us.push_back(vals[1]);
    vs.push_back(vals[2]);
  }
  const int N = static_cast<int>(rs.size());
  if (N < 3) throw config_error("profile CSV has fewer than 3 rows");
  const bool staggered = rs[0] > 0.0;
  const double h = rs[1] - rs[0];
  if (!(h > 0)) throw config_error("profile CSV radii not increasing");
  for (int i = 1; i < N; ++i)
    if (std::abs(rs[i] - rs[i - 1] - h) > 1e-9 * h)
      throw config_error("profile CSV radii not uniformly spaced");
  const double r_max = staggered ? rs.back() + 0.5 * h : rs.back();
  auto grid = make_grid(d, N, r_max, staggered, rule);
  RadialState s = zero_state(grid);
  for (int i = 0; i < N; ++i) {
    if (!std::isfinite(us[i]) || !std::isfinite(vs[i]))
      throw config_error("profile CSV contains non-finite values");
    s.u[i] = us[i];
    s.v[i] = vs[i];
  }
  return s;
}

}  // namespace nlkg
