#pragma once

#include <stdexcept>
#include <string>

namespace patpoisson {

// Precondition violated by caller-supplied data (CLI exit status 2).
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

// A configured size guard would be exceeded (CLI exit status 3).
class ResourceLimit : public std::runtime_error {
 public:
  explicit ResourceLimit(const std::string& what) : std::runtime_error(what) {}
};

// Parameters fall outside the range a closed form was derived for.
class UnsupportedRange : public InvalidInput {
 public:
  explicit UnsupportedRange(const std::string& what) : InvalidInput(what) {}
};

}  // namespace patpoisson
