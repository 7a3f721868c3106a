#pragma once

#include <stdexcept>
#include <string>

namespace webrl {

// Root of the library's exception hierarchy. Modules derive narrower types so
// callers can distinguish infrastructure faults from data-level conditions.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Numeric-domain violation (invalid counts, scales, combinatorial bounds).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Out-of-range index into a caller-supplied table (e.g. dataset weights).
class IndexError : public Error {
 public:
  using Error::Error;
};

}  // namespace webrl
