#pragma once

#include <stdexcept>
#include <string>

namespace nwtk {

// All library failures are reported as Error with a stable machine-readable
// code ("NotWellNested", "ResourceLimit", ...) plus a human message.
struct Error : std::runtime_error {
  std::string code;
  Error(std::string c, const std::string& msg)
      : std::runtime_error(c + ": " + msg), code(std::move(c)) {}
};

}  // namespace nwtk
