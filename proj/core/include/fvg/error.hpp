#pragma once

#include <stdexcept>
#include <string>

namespace fvg {

/// Bad input: wrong dimensions, invalid parameters, malformed files.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical routine could not produce a valid result (non-PD matrix,
/// vanishing Schur complement, ...).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ValidationError(msg);
}

} // namespace fvg
