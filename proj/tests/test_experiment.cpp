#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "experiment.hpp"

using namespace nlkg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempRoot {
  fs::path dir;
  TempRoot() {
    dir = fs::temp_directory_path() /
          ("nlkg_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(rand()));
    fs::create_directories(dir);
    ::setenv("NLKG_OUTPUT_ROOT", dir.c_str(), 1);
  }
  ~TempRoot() {
    ::unsetenv("NLKG_OUTPUT_ROOT");
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("config hash is deterministic and key-order independent") {
  const json a = {{"model", {{"kind", "critical"}, {"d", 3}}}, {"seed", 7}};
  const json b = {{"seed", 7}, {"model", {{"d", 3}, {"kind", "critical"}}}};
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a).size() == 16);
  const json c = {{"seed", 8}};
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("model and grid assembly from config") {
  CHECK(model_from_config({}).kind == ModelKind::CriticalPower);
  CHECK(model_from_config({{"model", {{"kind", "exp2d"}, {"c", 0.1}}}}).d == 2);
  CHECK_THROWS_AS(model_from_config({{"model", {{"kind", "pentagonal"}}}}),
                  config_error);
  auto g = grid_from_config({{"grid", {{"n", 123}, {"r_max", 9.0}}}});
  CHECK(g->N == 123);
  CHECK(g->r_max == 9.0);
  CHECK_THROWS_AS(grid_from_config({{"grid", {{"quadrature", "gauss"}}}}),
                  config_error);
}

TEST_CASE("initial data kinds") {
  const json cfg = {{"grid", {{"n", 400}, {"r_max", 15.0}}}};
  auto model = model_from_config(cfg);
  auto g = grid_from_config(cfg);

  json z = cfg;
  z["initial"] = {{"kind", "zero"}};
  CHECK(evaluate(initial_from_config(z, model, g), model).kinetic == 0.0);

  json ga = cfg;
  ga["initial"] = {{"kind", "gaussian"}, {"amplitude", 2.0}, {"width", 0.5}};
  const RadialState s = initial_from_config(ga, model, g);
  CHECK(s.u[0] == doctest::Approx(2.0));
  CHECK(evaluate(s, model).kinetic > 0.0);

  json bad = cfg;
  bad["initial"] = {{"kind", "nope"}};
  CHECK_THROWS_AS(initial_from_config(bad, model, g), config_error);
}

TEST_CASE("threshold override short-circuits the solver") {
  const json cfg = {{"threshold", {{"m", 3.5}}}};
  auto model = model_from_config(cfg);
  auto g = grid_from_config(cfg);
  CHECK(threshold_from_config(cfg, model, g) == 3.5);
}

TEST_CASE("groundstate command writes reproducible artifacts") {
  TempRoot root;
  const json cfg = {{"model",
                     {{"kind", "subcritical"}, {"power", 3.0}, {"c", 1.0}}},
                    {"grid", {{"n", 1000}, {"r_max", 25.0}}},
                    {"output_dir", "gs"}};
  const json out1 = run_command("groundstate", cfg);
  CHECK(out1["m"].get<double>() == doctest::Approx(43.66023671625544).epsilon(1e-4));
  CHECK(fs::exists(root.dir / "gs" / "groundstate.json"));
  CHECK(fs::exists(root.dir / "gs" / "profile.csv"));

  const std::string first = slurp(root.dir / "gs" / "groundstate.json");
  const json out2 = run_command("groundstate", cfg);
  CHECK(slurp(root.dir / "gs" / "groundstate.json") == first);  // byte-identical
  CHECK(out2["m"] == out1["m"]);

  // the profile CSV round-trips through the csv initial kind
  json reload = cfg;
  reload["initial"] = {{"kind", "csv"}, {"path", "gs/profile.csv"}};
  auto model = model_from_config(reload);
  auto g = grid_from_config(reload);
  const RadialState q = initial_from_config(reload, model, g);
  CHECK(q.u[0] == doctest::Approx(out1["q0"].get<double>()).epsilon(1e-12));
}

TEST_CASE("classify command gates on the threshold") {
  TempRoot root;
  json cfg = {{"grid", {{"n", 1500}, {"r_max", 30.0}}},
              {"initial", {{"kind", "ground_state"}, {"amplitude", 0.5}}},
              {"output_dir", "cl"}};
  const json out = run_command("classify", cfg);
  CHECK(out["verdict"]["set"] == "K_plus");
  CHECK(out["verdict"]["mass_used"].get<double>() == 0.0);
  CHECK(fs::exists(root.dir / "cl" / "verdict.json"));

  cfg["initial"]["amplitude"] = 1.2;
  CHECK(run_command("classify", cfg)["verdict"]["set"] == "above_threshold");
}

TEST_CASE("evolve command: gated run with series artifacts") {
  TempRoot root;
  const json cfg = {{"grid", {{"n", 800}, {"r_max", 16.0}}},
                    {"initial", {{"kind", "gaussian"}, {"amplitude", 0.3}}},
                    {"threshold", {{"m", 4.273664068323042}}},
                    {"evolve", {{"t_final", 8.0}}},
                    {"output_dir", "ev"}};
  const json out = run_command("evolve", cfg);
  CHECK(out["verdict"]["set"] == "K_plus");
  CHECK(out["run_verdict"] == "scattered");
  CHECK(fs::exists(root.dir / "ev" / "series.csv"));
  CHECK(fs::exists(root.dir / "ev" / "plot.csv"));
  CHECK(fs::exists(root.dir / "ev" / "run.json"));
  const std::string series = slurp(root.dir / "ev" / "series.csv");
  CHECK(series.rfind("time,y,", 0) == 0);
}

TEST_CASE("sweep: verdicts flip with the virial sign, points resumable") {
  TempRoot root;
  const json cfg = {{"grid", {{"n", 800}, {"r_max", 16.0}}},
                    {"initial", {{"kind", "gaussian"}}},
                    {"threshold", {{"m", 4.273664068323042}}},
                    {"evolve", {{"t_final", 8.0}}},
                    {"sweep", {{"values", {0.3, 3.0}}, {"workers", 2}}},
                    {"output_dir", "sw"}};
  const json out = run_command("sweep", cfg);
  REQUIRE(out["points"].size() == 2);
  CHECK(out["points"][0]["run_verdict"] == "scattered");
  CHECK(out["points"][1]["run_verdict"] == "blew_up");
  CHECK(fs::exists(root.dir / "sw" / "summary.csv"));
  const std::string summary = slurp(root.dir / "sw" / "summary.csv");
  CHECK(summary.rfind("parameter,e,k2_sign,verdict,criterion\n", 0) == 0);

  // completed points are reused verbatim on a rerun
  json rec = json::parse(slurp(root.dir / "sw" / "point_0" / "run.json"));
  rec["run_verdict"] = "sentinel";
  {
    std::ofstream os(root.dir / "sw" / "point_0" / "run.json");
    os << rec.dump(2);
  }
  const json again = run_command("sweep", cfg);
  CHECK(again["points"][0]["run_verdict"] == "sentinel");
  CHECK(again["points"][1]["run_verdict"] == "blew_up");

  CHECK_THROWS_AS(run_command("sweep", json{{"sweep", json::object()}}),
                  config_error);
}

TEST_CASE("audit command certifies the 2D model class") {
  TempRoot root;
  const json cfg = {{"model", {{"kind", "exp2d"}, {"c", 0.12}}},
                    {"output_dir", "au"}};
  const json out = run_command("audit", cfg);
  CHECK(out["all_pass"].get<bool>());
  CHECK(fs::exists(root.dir / "au" / "audit.json"));

  json bad = cfg;
  bad["model"]["p"] = 6.0;  // beyond inf Df/f ≈ 5.56 for β = 2
  CHECK_THROWS_AS(run_command("audit", bad), invariant_error);
}

TEST_CASE("unknown command is a config error") {
  CHECK_THROWS_AS(run_command("frobnicate", json::object()), config_error);
}
