#include "nlkg.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "errors.hpp"
#include "experiment.hpp"

struct nlkg_session {
  std::string last_error;
};

extern "C" {

nlkg_session* nlkg_session_new(void) { return new (std::nothrow) nlkg_session; }

void nlkg_session_free(nlkg_session* s) { delete s; }

const char* nlkg_last_error(const nlkg_session* s) {
  return s ? s->last_error.c_str() : "null session";
}

void nlkg_free_string(char* buf) { std::free(buf); }

int nlkg_run(nlkg_session* s, const char* command, const char* config_json,
             char** result_json) {
  if (!s) return NLKG_ERR_CONFIG;
  s->last_error.clear();
  if (result_json) *result_json = nullptr;
  if (!command || !config_json) {
    s->last_error = "null command or config";
    return NLKG_ERR_CONFIG;
  }
  try {
    const nlohmann::json cfg =
        *config_json ? nlohmann::json::parse(config_json)
                     : nlohmann::json::object();
    const nlohmann::json out = nlkg::run_command(command, cfg);
    if (result_json) {
      const std::string text = out.dump(2);
      *result_json = static_cast<char*>(std::malloc(text.size() + 1));
      if (!*result_json) {
        s->last_error = "out of memory";
        return NLKG_ERR_CONFIG;
      }
      std::memcpy(*result_json, text.c_str(), text.size() + 1);
    }
    return NLKG_OK;
  } catch (const nlohmann::json::exception& e) {
    s->last_error = std::string("config parse: ") + e.what();
    return NLKG_ERR_CONFIG;
  } catch (const nlkg::invariant_error& e) {
    s->last_error = e.what();
    return NLKG_ERR_INVARIANT;
  } catch (const nlkg::instability_error& e) {
    s->last_error = e.what();
    return NLKG_ERR_INSTABILITY;
  } catch (const nlkg::config_error& e) {
    s->last_error = e.what();
    return NLKG_ERR_CONFIG;
  } catch (const std::exception& e) {
    s->last_error = e.what();
    return NLKG_ERR_CONFIG;
  }
}

}  // extern "C"
