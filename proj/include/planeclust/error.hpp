#ifndef PLANECLUST_ERROR_HPP
#define PLANECLUST_ERROR_HPP

#include <stdexcept>
#include <string>

namespace planeclust {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable input (CSV, label files, model files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A parameter outside its admissible range or an inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Operands whose shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace planeclust

#endif  // PLANECLUST_ERROR_HPP
