#pragma once

#include <stdexcept>
#include <string>

namespace pire {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the domain of the function (e.g. a negative
// input to a penalty defined on the nonnegative orthant).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A model or solver parameter is out of range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Malformed configuration document or incompatible option combination.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (CSV files, datasets).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace pire
