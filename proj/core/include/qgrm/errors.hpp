#pragma once

#include <stdexcept>
#include <string>

namespace qgrm {

// Invalid user-supplied parameter (bad q, c, word, malformed file contents).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configured size or resource cap would be exceeded.
class ResourceError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Argument outside the mathematical domain of a formula (e.g. q = 1 for the density).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qgrm
