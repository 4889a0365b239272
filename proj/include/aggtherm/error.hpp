#pragma once

#include <stdexcept>
#include <string>

namespace aggtherm {

// Every precondition or validation failure in this library throws Error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace aggtherm
