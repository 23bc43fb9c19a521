#pragma once

#include <stdexcept>
#include <string>

namespace pfgamma {

/// Invalid or inconsistent configuration. The message names the offending key
/// or the violated invariant.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A solve produced a non-finite energy or gradient.
class NumericalAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pfgamma
