#pragma once

#include <stdexcept>
#include <string>

namespace netdiag {

// Thrown when an enumeration or matrix size exceeds the configured cap.
class BudgetExceeded : public std::runtime_error {
 public:
  explicit BudgetExceeded(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace netdiag
