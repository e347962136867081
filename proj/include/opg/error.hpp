#pragma once

#include <stdexcept>
#include <string>

namespace opg {

// Raised for malformed input: bad ids, inconsistent rankings, unknown
// models, infeasible configurations. The CLI maps it to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace opg
