#pragma once

#include <stdexcept>
#include <string>

namespace whimp {

// Error categories map 1:1 onto CLI exit codes (2, 3, 4).
struct validation_error : std::runtime_error {
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

struct internal_error : std::runtime_error {
  explicit internal_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace whimp
