#pragma once

#include <stdexcept>
#include <string>

namespace reldet {

// Error taxonomy shared across the library. The CLI maps these to exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad option values, parameters or precondition violations.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed or inconsistent input data (corpus records, keyword specs, ...).
struct DataError : Error {
  using Error::Error;
};

// Model persistence and model/feature compatibility problems.
struct ModelError : Error {
  using Error::Error;
};

}  // namespace reldet
