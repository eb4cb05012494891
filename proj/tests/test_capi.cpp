#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "nlkg.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempRoot {
  fs::path dir;
  TempRoot() {
    dir = fs::temp_directory_path() /
          ("nlkg_capi_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    ::setenv("NLKG_OUTPUT_ROOT", dir.c_str(), 1);
  }
  ~TempRoot() {
    ::unsetenv("NLKG_OUTPUT_ROOT");
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
};

}  // namespace

TEST_CASE("session lifecycle and a successful run") {
  TempRoot root;
  nlkg_session* s = nlkg_session_new();
  REQUIRE(s != nullptr);
  CHECK(std::string(nlkg_last_error(s)).empty());

  const char* cfg =
      R"({"model":{"kind":"subcritical","power":3.0,"c":1.0},)"
      R"("grid":{"n":800,"r_max":25.0},"output_dir":"capi_gs"})";
  char* result = nullptr;
  const int rc = nlkg_run(s, "groundstate", cfg, &result);
  CHECK(rc == NLKG_OK);
  REQUIRE(result != nullptr);
  const json out = json::parse(result);
  CHECK(out["m"].get<double>() ==
        doctest::Approx(43.66023671625544).epsilon(1e-3));
  nlkg_free_string(result);

  // result pointer is optional
  CHECK(nlkg_run(s, "groundstate", cfg, nullptr) == NLKG_OK);
  nlkg_session_free(s);
}

TEST_CASE("config errors map to exit code 2") {
  nlkg_session* s = nlkg_session_new();
  char* result = nullptr;

  CHECK(nlkg_run(s, "groundstate", "{not json", &result) == NLKG_ERR_CONFIG);
  CHECK(std::strlen(nlkg_last_error(s)) > 0);
  CHECK(result == nullptr);

  CHECK(nlkg_run(s, "frobnicate", "{}", &result) == NLKG_ERR_CONFIG);
  CHECK(nlkg_run(s, "groundstate",
                 R"({"model":{"kind":"pentagonal"}})", &result) ==
        NLKG_ERR_CONFIG);
  CHECK(nlkg_run(s, nullptr, "{}", &result) == NLKG_ERR_CONFIG);
  CHECK(nlkg_run(s, "groundstate", nullptr, &result) == NLKG_ERR_CONFIG);
  CHECK(nlkg_run(nullptr, "groundstate", "{}", &result) == NLKG_ERR_CONFIG);
  nlkg_session_free(s);
}

TEST_CASE("an empty config string means defaults") {
  TempRoot root;
  nlkg_session* s = nlkg_session_new();
  char* result = nullptr;
  // zero initial data classifies instantly with every default
  const int rc = nlkg_run(
      s, "classify",
      R"({"initial":{"kind":"zero"},"threshold":{"m":4.2736640683},)"
      R"("grid":{"n":300,"r_max":10.0},"output_dir":"capi_cl"})",
      &result);
  CHECK(rc == NLKG_OK);
  const json out = json::parse(result);
  CHECK(out["verdict"]["set"] == "K_plus");
  nlkg_free_string(result);
  nlkg_session_free(s);
}

TEST_CASE("invariant failures map to exit code 4") {
  TempRoot root;
  nlkg_session* s = nlkg_session_new();
  char* result = nullptr;
  const int rc = nlkg_run(
      s, "audit",
      R"({"model":{"kind":"exp2d","c":0.12,"p":6.0},"output_dir":"capi_au"})",
      &result);
  CHECK(rc == NLKG_ERR_INVARIANT);
  CHECK(std::strlen(nlkg_last_error(s)) > 0);
  nlkg_session_free(s);
}

TEST_CASE("numerical instability maps to exit code 3") {
  TempRoot root;
  nlkg_session* s = nlkg_session_new();
  char* result = nullptr;
  // 2D exponential data beyond the saturation cap: evaluating the
  // functionals overflows the exponential, a numerical (not config) failure
  const int rc = nlkg_run(
      s, "classify",
      R"({"model":{"kind":"exp2d","c":0.1},)"
      R"("grid":{"n":400,"r_max":10.0},)"
      R"("initial":{"kind":"gaussian","amplitude":40.0},)"
      R"("threshold":{"m":5.0},"output_dir":"capi_ev"})",
      &result);
  INFO(nlkg_last_error(s));
  CHECK(rc == NLKG_ERR_INSTABILITY);
  nlkg_session_free(s);
}

TEST_CASE("errors reset between calls") {
  TempRoot root;
  nlkg_session* s = nlkg_session_new();
  char* result = nullptr;
  CHECK(nlkg_run(s, "bogus", "{}", &result) == NLKG_ERR_CONFIG);
  CHECK(std::strlen(nlkg_last_error(s)) > 0);
  CHECK(nlkg_run(s, "classify",
                 R"({"initial":{"kind":"zero"},"threshold":{"m":1.0},)"
                 R"("grid":{"n":300,"r_max":10.0},"output_dir":"capi_r"})",
                 &result) == NLKG_OK);
  CHECK(std::string(nlkg_last_error(s)).empty());
  nlkg_free_string(result);
  nlkg_session_free(s);
}
