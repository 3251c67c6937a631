#ifndef FPT_ERROR_HPP
#define FPT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace fpt {

// Error taxonomy mirrors the CLI exit codes: anything derived from
// domain_error maps to exit 2 (bad inputs, unusable configuration),
// accuracy_error maps to exit 3 (the computation ran but self-checks
// rejected the result).

struct domain_error : std::runtime_error {
  explicit domain_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Input is outside the representable range (overflow of an unscaled value,
// interpolation beyond a solved horizon, ...).
struct range_error : domain_error {
  explicit range_error(const std::string& msg) : domain_error(msg) {}
};

// A truncated-integral check needs more horizon than the solution provides.
struct horizon_error : domain_error {
  explicit horizon_error(const std::string& msg) : domain_error(msg) {}
};

// Evaluation requested at (or numerically on top of) a pole.
struct pole_error : domain_error {
  explicit pole_error(const std::string& msg) : domain_error(msg) {}
};

struct accuracy_error : std::runtime_error {
  explicit accuracy_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fpt

#endif
