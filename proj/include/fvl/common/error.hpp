#pragma once

#include <stdexcept>
#include <string>

namespace fvl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Array shapes disagree with what an operation requires.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller violated an operation's precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Input values are out of their valid domain.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A model was asked to run with streams or sizes it was not configured for.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents. Carries the offending file and byte offset or line.
class FormatError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered during training or optimization.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace fvl
