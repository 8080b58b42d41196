#ifndef ADHINT_ERRORS_HPP_
#define ADHINT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace adhint {

// Three error families, each mapped to a CLI exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw ContractViolation(what);
}

}  // namespace adhint

#endif  // ADHINT_ERRORS_HPP_
