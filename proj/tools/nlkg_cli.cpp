#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nlkg.h"

namespace {

using nlohmann::json;

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream is(path);
  if (!is) throw CLI::ValidationError("--config", "cannot open " + path);
  return json::parse(is);
}

// --set a.b.c=VALUE overrides; VALUE parsed as JSON when possible, else kept
// as a string (precedence: flags over config file).
void apply_overrides(json& cfg, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--set", "expected key=value, got " + kv);
    std::string key = kv.substr(0, eq);
    for (char& ch : key)
      if (ch == '.') ch = '/';
    const std::string raw = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::exception&) {
      value = raw;
    }
    cfg[json::json_pointer("/" + key)] = value;
  }
}

int run(const std::string& command, const json& cfg) {
  nlkg_session* session = nlkg_session_new();
  char* result = nullptr;
  const int rc = nlkg_run(session, command.c_str(), cfg.dump().c_str(), &result);
  if (rc == NLKG_OK) {
    std::printf("%s\n", result ? result : "{}");
  } else {
    std::fprintf(stderr, "error (%d): %s\n", rc, nlkg_last_error(session));
  }
  nlkg_free_string(result);
  nlkg_session_free(session);
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial Klein-Gordon laboratory: ground states, virial "
               "classification, and dichotomy evolution runs"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("-c,--config", config_path, "JSON config file");
  app.add_option("-s,--set", sets,
                 "override config keys, e.g. --set initial.amplitude=0.5");

  for (const char* name : {"groundstate", "classify", "evolve", "sweep",
                           "audit"})
    app.add_subcommand(name)->fallthrough();

  CLI11_PARSE(app, argc, argv);

  json cfg;
  try {
    cfg = load_config(config_path);
    apply_overrides(cfg, sets);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error (2): %s\n", e.what());
    return NLKG_ERR_CONFIG;
  }
  return run(app.get_subcommands().front()->get_name(), cfg);
}
