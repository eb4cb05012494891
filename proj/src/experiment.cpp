#include "experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

namespace nlkg {

namespace fs = std::filesystem;
using nlohmann::json;

std::string config_hash(const json& cfg) {
  // FNV-1a over the canonical (key-sorted) serialization
  const std::string s = cfg.dump();
  uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
  return buf;
}

std::string output_root() {
  const char* env = std::getenv("NLKG_OUTPUT_ROOT");
  return env && *env ? env : ".";
}

namespace {

fs::path out_dir(const json& cfg) {
  fs::path dir = fs::path(output_root()) /
                 cfg.value("output_dir", std::string("out"));
  fs::create_directories(dir);
  return dir;
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw config_error("cannot write " + tmp.string());
    os << text;
  }
  fs::rename(tmp, path);
}

const json& sub(const json& cfg, const char* key) {
  static const json empty = json::object();
  auto it = cfg.find(key);
  return it != cfg.end() ? *it : empty;
}

}  // namespace

NonlinearityModel model_from_config(const json& cfg) {
  const json& m = sub(cfg, "model");
  const std::string kind = m.value("kind", std::string("critical"));
  const int d = m.value("d", kind == "exp2d" ? 2 : 3);
  if (kind == "critical") return NonlinearityModel::critical(d);
  if (kind == "subcritical")
    return NonlinearityModel::subcritical(d, m.value("power", 3.0),
                                          m.value("lambda", 1.0),
                                          m.value("c", 1.0));
  if (kind == "exp2d") {
    const double kappa0 = m.value("kappa0", 1.0);
    const double beta = m.value("beta", 2.0);
    const double lambda = m.value("lambda", 0.04);
    const double p = m.value("p", 5.5);
    double c;
    if (!m.contains("c") || (m["c"].is_string() &&
                             m["c"].get<std::string>() == "computed")) {
      TmConfig tc;
      tc.seed = cfg.value("seed", 7u);
      auto probe = NonlinearityModel::exp2d(kappa0, beta, lambda, 0.1, p);
      c = tm_constant(probe, tc).c;
    } else {
      c = m["c"].get<double>();
    }
    return NonlinearityModel::exp2d(kappa0, beta, lambda, c, p);
  }
  throw config_error("unknown model kind '" + kind + "'");
}

GridPtr grid_from_config(const json& cfg) {
  const json& g = sub(cfg, "grid");
  const NonlinearityModel m = model_from_config(cfg);
  const int N = g.value("n", 2000);
  const double r_max = g.value("r_max", 30.0);
  const bool staggered = g.value("staggered", false);
  const std::string rule = g.value("quadrature", std::string("trapezoid"));
  if (rule != "trapezoid" && rule != "simpson")
    throw config_error("unknown quadrature '" + rule + "'");
  return make_grid(m.d, N, r_max, staggered,
                   rule == "simpson" ? QuadRule::Simpson : QuadRule::Trapezoid);
}

ShootConfig shoot_from_config(const json& cfg) {
  const json& s = sub(cfg, "shoot");
  const NonlinearityModel m = model_from_config(cfg);
  ShootConfig out;
  // model-specific default brackets; the critical model ignores them
  if (m.kind == ModelKind::Exp2D) {
    out.Q0_lo = 1.5;
    out.Q0_hi = 4.5;
  } else {
    out.Q0_lo = 0.5;
    out.Q0_hi = 8.0;
  }
  out.Q0_lo = s.value("q0_lo", out.Q0_lo);
  out.Q0_hi = s.value("q0_hi", out.Q0_hi);
  out.r_end = s.value("r_end", 100.0);
  out.h0 = s.value("h0", 2e-3);
  out.bisect_iters = s.value("bisect_iters", 80);
  out.tail_eps = s.value("tail_eps", 1e-12);
  out.r_far = s.value("r_far", 1e8);
  return out;
}

EvolveConfig evolve_from_config(const json& cfg, const RadialGrid& g) {
  const json& e = sub(cfg, "evolve");
  EvolveConfig out;
  out.dt = e.value("dt", 0.0);
  out.T_final = e.value("t_final", 50.0);
  const std::string scheme = e.value("scheme", std::string("leapfrog"));
  if (scheme == "leapfrog")
    out.scheme = Scheme::Leapfrog;
  else if (scheme == "strang")
    out.scheme = Scheme::StrangSplit;
  else
    throw config_error("unknown scheme '" + scheme + "'");
  out.eq_mass = e.value("eq_mass", 1.0);
  out.blowup_factor = e.value("blowup_factor", 10.0);
  out.scatter_window = e.value("scatter_window", 2.0);
  out.scatter_tol = e.value("scatter_tol", 1e-3);
  out.nonlinear_tol = e.value("nonlinear_tol", 1e-3);
  out.dispersal_radius = e.value("dispersal_radius", 5.0);
  out.p = e.value("p", 2.5);
  out.z_tol = e.value("z_tol", 1e-8);
  out.z_window = e.value("z_window", 5);
  out.record_every = e.value("record_every", 10);
  if (e.contains("exterior_radii"))
    out.exterior_radii = e["exterior_radii"].get<std::vector<double>>();
  out.conc_eps = e.value("conc_eps", 0.01);
  const std::string cv =
      e.value("conc_variant", g.d == 2 ? std::string("absolute")
                                       : std::string("fraction"));
  if (cv == "fraction")
    out.conc_variant = ConcentrationVariant::ThresholdFraction;
  else if (cv == "absolute")
    out.conc_variant = ConcentrationVariant::AbsoluteEps;
  else
    throw config_error("unknown conc_variant '" + cv + "'");
  out.drift_tol = e.value("drift_tol", 1e-6);
  return out;
}

RadialState initial_from_config(const json& cfg, const NonlinearityModel& model,
                                GridPtr grid) {
  const json& ini = sub(cfg, "initial");
  const std::string kind = ini.value("kind", std::string("zero"));
  const double amp = ini.value("amplitude", 1.0);
  if (kind == "zero") return zero_state(grid);
  if (kind == "gaussian") {
    const double center = ini.value("center", 0.0);
    const double width = ini.value("width", 1.0);
    RadialState s = sample(grid, [&](double r) {
      const double z = (r - center) / width;
      return amp * std::exp(-z * z);
    });
    s.u[grid->N - 1] = 0.0;
    return s;
  }
  if (kind == "closed_form_w") {
    const double sigma = ini.value("sigma", 1.0);
    const double r1 = ini.value("taper_r1", 0.0);
    const double r2 = ini.value("taper_r2", 0.0);
    const int d = model.d;
    if (d < 3) throw config_error("closed_form_w initial data needs d >= 3");
    RadialState s = sample(grid, [&](double r) {
      const double x = r / sigma;
      double chi = 1.0;
      if (r2 > r1 && r1 > 0.0) {
        if (x >= r2)
          chi = 0.0;
        else if (x > r1)
          chi = 0.5 * (1.0 + std::cos(M_PI * (x - r1) / (r2 - r1)));
      }
      return amp / std::sqrt(sigma) * chi * closed_form_W_value(d, x);
    });
    s.u[grid->N - 1] = 0.0;
    return s;
  }
  if (kind == "ground_state") {
    const GroundStateResult gs =
        shoot(model, grid, shoot_from_config(cfg));
    const double mu = ini.value("space_scale", 1.0);
    RadialState s = zero_state(grid);
    const RadialGrid& g = *grid;
    // the critical profile decays only algebraically, so a hard zero at the
    // boundary node would put an O(1/r_max) jump into one cell and swamp the
    // Dirichlet form; taper it smoothly instead (off by default for models
    // whose ground states decay exponentially)
    const bool algebraic_tail = model.kind == ModelKind::CriticalPower;
    const double r1 = ini.value("taper_r1", algebraic_tail ? 0.5 * g.r_max : 0.0);
    const double r2 = ini.value("taper_r2", algebraic_tail ? g.r_max : 0.0);
    for (int i = 0; i < g.N; ++i) {
      const double rs = g.r[i] / mu;  // linear interpolation of Q at r/μ
      const double x = rs / g.h;
      const int j = std::min(int(x), g.N - 2);
      const double t = std::clamp(x - j, 0.0, 1.0);
      double q = rs >= g.r_max ? 0.0
                               : (1.0 - t) * gs.Q.u[j] + t * gs.Q.u[j + 1];
      if (r2 > r1) {
        if (g.r[i] >= r2)
          q = 0.0;
        else if (g.r[i] > r1)
          q *= 0.5 * (1.0 + std::cos(M_PI * (g.r[i] - r1) / (r2 - r1)));
      }
      s.u[i] = amp * q;
    }
    s.u[g.N - 1] = 0.0;
    return s;
  }
  if (kind == "csv") {
    fs::path p = ini.value("path", std::string());
    if (p.empty()) throw config_error("csv initial data needs a path");
    if (p.is_relative()) p = fs::path(output_root()) / p;
    return read_profile_csv(model.d, p.string());
  }
  throw config_error("unknown initial-data kind '" + kind + "'");
}

double threshold_from_config(const json& cfg, const NonlinearityModel& model,
                             GridPtr grid) {
  const json& t = sub(cfg, "threshold");
  if (t.contains("m")) return t["m"].get<double>();
  return shoot(model, grid, shoot_from_config(cfg)).m;
}

json cmd_groundstate(const json& cfg) {
  const auto model = model_from_config(cfg);
  auto grid = grid_from_config(cfg);
  const GroundStateResult res = shoot(model, grid, shoot_from_config(cfg));
  const fs::path dir = out_dir(cfg);

  json gj{{"config_hash", config_hash(cfg)},
          {"m", res.m},
          {"c", res.c},
          {"q0", res.Q0},
          {"residual_linf", res.residual_Linf},
          {"kinetic", res.kinetic},
          {"mass_l2", res.mass_L2},
          {"f_int", res.F_int},
          {"g0_int", res.G0_int},
          {"h1_norm_sq", res.h1_norm_sq},
          {"grad_sq_over_d", res.kinetic / model.d},
          {"nehari", res.nehari}};
  write_text_atomic(dir / "groundstate.json", gj.dump(2) + "\n");
  write_profile_csv(res.Q, (dir / "profile.csv").string());
  gj["files"] = {{"groundstate", (dir / "groundstate.json").string()},
                 {"profile", (dir / "profile.csv").string()}};
  return gj;
}

namespace {

std::vector<ScalingPair> pairs_from_config(const json& cfg, int d) {
  std::vector<ScalingPair> pairs = {ScalingPair::K0(), ScalingPair::Kinf(),
                                    ScalingPair::K2(d)};
  const json& c = sub(cfg, "classify");
  if (c.contains("extra_pairs"))
    for (const auto& p : c["extra_pairs"])
      pairs.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  return pairs;
}

ClassifyOptions classify_opts(const json& cfg, const NonlinearityModel& model) {
  const json& c = sub(cfg, "classify");
  ClassifyOptions opt;
  // the massless critical model is classified with its own (c = 0)
  // functionals: the mass-1 energy of W-like data diverges with r_max
  opt.mass = c.value(
      "mass", model.kind == ModelKind::CriticalPower ? model.c : 1.0);
  opt.sign_tol_scale = c.value("sign_tol_scale", 1e-9);
  opt.energy_tol_scale = c.value("energy_tol_scale", 1e-8);
  return opt;
}

json verdict_json(const Verdict& v) { return json::parse(v.to_json()); }

// classify + (gated) evolve for one config; shared by cmd_evolve and sweep
// points.  Writes series.csv / plot.csv / run.json into `dir`.
json run_point(const json& cfg, const NonlinearityModel& model, GridPtr grid,
               double m, const fs::path& dir) {
  fs::create_directories(dir);
  const auto t0 = std::chrono::steady_clock::now();
  const RadialState s0 = initial_from_config(cfg, model, grid);
  const Verdict v = classify(s0, model, m, pairs_from_config(cfg, model.d),
                             classify_opts(cfg, model));
  json rec{{"config_hash", config_hash(cfg)},
           {"m", m},
           {"c", model.c},
           {"verdict", verdict_json(v)},
           {"run_verdict", nullptr},
           {"criterion", nullptr}};
  if (v.set == Verdict::Set::above_threshold) {
    // classifier gate: the dichotomy theorem says nothing here; no run
    rec["run_verdict"] = "not_run";
  } else {
    EvolveConfig ecfg = evolve_from_config(cfg, *grid);
    ecfg.gate = v.set == Verdict::Set::K_minus  ? DetectorGate::BlowupOnly
                : v.set == Verdict::Set::K_plus ? DetectorGate::ScatterOnly
                                                : DetectorGate::Both;
    DiagnosticsSeries series;
    const EvolveResult r = evolve(s0, model, ecfg, &series, nullptr, m);
    const char* names[] = {"scattered", "blew_up", "undecided"};
    rec["run_verdict"] = names[int(r.verdict)];
    rec["criterion"] = r.criterion;
    rec["t_end"] = r.t_end;
    rec["energy_drift"] = r.energy_drift;
    rec["near_threshold"] = r.near_threshold;
    write_text_atomic(dir / "series.csv", series.to_csv());
    // downsampled plot data: time vs y, K₀, concentration radius
    {
      std::ostringstream os;
      os.precision(17);
      os << "time,y,k0_1,conc_radius\n";
      const size_t stride = std::max<size_t>(1, series.times.size() / 200);
      for (size_t i = 0; i < series.times.size(); i += stride)
        os << series.times[i] << "," << series.y[i] << "," << series.k0_1[i]
           << "," << series.conc_radius[i] << "\n";
      write_text_atomic(dir / "plot.csv", os.str());
    }
    rec["files"] = {{"series", (dir / "series.csv").string()},
                    {"plot", (dir / "plot.csv").string()}};
  }
  rec["timing_s"] = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
  write_text_atomic(dir / "run.json", rec.dump(2) + "\n");
  return rec;
}

}  // namespace

json cmd_classify(const json& cfg) {
  const auto model = model_from_config(cfg);
  auto grid = grid_from_config(cfg);
  const double m = threshold_from_config(cfg, model, grid);
  const RadialState s = initial_from_config(cfg, model, grid);
  const Verdict v = classify(s, model, m, pairs_from_config(cfg, model.d),
                             classify_opts(cfg, model));
  json out{{"config_hash", config_hash(cfg)},
           {"m", m},
           {"verdict", verdict_json(v)}};
  const fs::path dir = out_dir(cfg);
  write_text_atomic(dir / "verdict.json", out.dump(2) + "\n");
  out["files"] = {{"verdict", (dir / "verdict.json").string()}};
  return out;
}

json cmd_evolve(const json& cfg) {
  const auto model = model_from_config(cfg);
  auto grid = grid_from_config(cfg);
  const double m = threshold_from_config(cfg, model, grid);
  return run_point(cfg, model, grid, m, out_dir(cfg));
}

json cmd_sweep(const json& cfg) {
  const json& sw = sub(cfg, "sweep");
  if (!sw.contains("values") || sw["values"].empty())
    throw config_error("sweep: axis values required");
  std::string param = sw.value("parameter", std::string("initial.amplitude"));
  std::replace(param.begin(), param.end(), '.', '/');
  const json::json_pointer ptr("/" + param);
  const std::vector<double> values = sw["values"].get<std::vector<double>>();
  const int workers =
      std::max(1, std::min<int>(sw.value("workers", 4), int(values.size())));

  const auto model = model_from_config(cfg);
  auto grid = grid_from_config(cfg);
  const double m = threshold_from_config(cfg, model, grid);
  const fs::path dir = out_dir(cfg);

  std::vector<json> rows(values.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= values.size()) return;
      json pcfg = cfg;
      pcfg.erase("sweep");
      pcfg[ptr] = values[i];
      const fs::path pdir = dir / ("point_" + std::to_string(i));
      json rec;
      try {
        const fs::path done = pdir / "run.json";
        if (fs::exists(done)) {  // crash-safe resume: completed points stand
          std::ifstream is(done);
          rec = json::parse(is);
        } else {
          rec = run_point(pcfg, model, grid, m, pdir);
        }
      } catch (const std::exception& e) {
        rec = {{"run_verdict", "error"}, {"error", e.what()}};
      }
      rec["parameter"] = values[i];
      rows[i] = rec;
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<size_t> order(values.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });

  std::ostringstream os;
  os.precision(17);
  os << "parameter,e,k2_sign,verdict,criterion\n";
  json summary{{"config_hash", config_hash(cfg)}, {"m", m}, {"points", {}}};
  for (size_t oi : order) {
    const json& r = rows[oi];
    double E = 0.0;
    int k2_sign = 0;
    std::string verdict = r.value("run_verdict", std::string("error"));
    std::string criterion = r.value("criterion", std::string());
    if (r.contains("verdict")) {
      const json& v = r["verdict"];
      E = m - v.value("energy_margin", 0.0);
      for (auto& kv : v["k_values"].items())
        if (kv.key().rfind("K_" + std::to_string(model.d), 0) == 0)
          k2_sign = kv.value().get<double>() >= 0 ? 1 : -1;
      if (verdict == "not_run") verdict = v.value("set", verdict);
    }
    os << values[oi] << "," << E << "," << k2_sign << "," << verdict << ","
       << criterion << "\n";
    summary["points"].push_back(r);
  }
  write_text_atomic(dir / "summary.csv", os.str());
  write_text_atomic(dir / "sweep.json", summary.dump(2) + "\n");
  summary["files"] = {{"summary", (dir / "summary.csv").string()},
                      {"sweep", (dir / "sweep.json").string()}};
  return summary;
}

json cmd_audit(const json& cfg) {
  const auto model = model_from_config(cfg);
  const double hi = model.kind == ModelKind::Exp2D
                        ? 0.99 * model.effective_cap()
                        : 10.0;
  const AuditReport rep = assumption_audit(model, log_samples(1e-3, hi, 400));
  json items = json::object();
  for (const auto& kv : rep.items)
    items[kv.first] = {{"pass", kv.second.pass},
                       {"worst", kv.second.worst},
                       {"note", kv.second.note}};
  // energy–momentum algebra spot checks (seeded)
  std::mt19937 rng(cfg.value("seed", 7u));
  std::uniform_real_distribution<double> U(0.0, 1.0);
  double worst_round = 0.0, worst_reduce = 0.0;
  for (int i = 0; i < 200; ++i) {
    EnergyMomentum ep;
    ep.E = 0.5 + 4.0 * U(rng);
    ep.P = {ep.E * (2.0 * U(rng) - 1.0) * 0.99};
    std::vector<double> beta = {2.0 * U(rng) - 1.0};
    const EnergyMomentum fwd = lorentz_boost(ep, beta);
    const EnergyMomentum back = lorentz_boost(fwd, {-beta[0]});
    worst_round = std::max(worst_round, std::abs(back.E - ep.E));
    const auto red = zero_momentum_reduce(ep);
    const double want = std::sqrt(ep.E * ep.E - ep.P[0] * ep.P[0]);
    worst_reduce = std::max(worst_reduce, std::abs(red.second.E - want));
  }
  const bool algebra_pass = worst_round <= 1e-12 && worst_reduce <= 1e-12;
  items["lorentz_roundtrip"] = {{"pass", worst_round <= 1e-12},
                                {"worst", worst_round},
                                {"note", "boost then inverse boost"}};
  items["momentum_reduction"] = {{"pass", worst_reduce <= 1e-12},
                                 {"worst", worst_reduce},
                                 {"note", "E' = sqrt(E^2 - |P|^2)"}};
  json out{{"config_hash", config_hash(cfg)},
           {"applicable", rep.applicable},
           {"all_pass", (!rep.applicable || rep.all_pass) && algebra_pass},
           {"items", items}};
  const fs::path dir = out_dir(cfg);
  write_text_atomic(dir / "audit.json", out.dump(2) + "\n");
  out["files"] = {{"audit", (dir / "audit.json").string()}};
  if (!out["all_pass"].get<bool>())
    throw invariant_error("audit: model-class conditions failed; see " +
                          (dir / "audit.json").string());
  return out;
}

json run_command(const std::string& command, const json& cfg) {
  if (command == "groundstate") return cmd_groundstate(cfg);
  if (command == "classify") return cmd_classify(cfg);
  if (command == "evolve") return cmd_evolve(cfg);
  if (command == "sweep") return cmd_sweep(cfg);
  if (command == "audit") return cmd_audit(cfg);
  throw config_error("unknown command '" + command + "'");
}

}  // namespace nlkg
