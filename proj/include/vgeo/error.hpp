#pragma once

#include <stdexcept>
#include <string>

namespace vgeo {

// Raised when an input violates an operation's precondition or when a
// numerical routine cannot produce a trustworthy result.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace vgeo
