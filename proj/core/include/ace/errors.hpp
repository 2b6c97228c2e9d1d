#pragma once

#include <stdexcept>
#include <string>

namespace ace {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Operand shapes incompatible with an operation.
class DimensionError : public Error {
public:
  using Error::Error;
};

// Invalid run/optimizer/dataset configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

// A documented call contract was violated (bad labels, non-finite values...).
class ContractError : public Error {
public:
  using Error::Error;
};

}  // namespace ace
