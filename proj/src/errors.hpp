#pragma once
#include <stdexcept>
#include <string>

namespace nlkg {

// Error taxonomy mirrored by the C API / CLI exit codes:
//   config_error      -> 2 (bad configuration or domain violation)
//   instability_error -> 3 (numerical blow-through: NaN, overflow, CFL)
//   invariant_error   -> 4 (a certified invariant failed hard)
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct instability_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exp2D amplitude beyond the saturation cap: the exponential would overflow.
struct saturation_error : instability_error {
  using instability_error::instability_error;
};

struct invariant_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nlkg
