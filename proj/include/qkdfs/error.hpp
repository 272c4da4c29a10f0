#pragma once

#include <stdexcept>
#include <string>

namespace qkdfs {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the domain where an operation is defined (tabular curve
// extrapolation, efficiency outside [0,1], non-finite control value).
class DomainError : public Error {
 public:
  using Error::Error;
};

// No grid point carries a usable detection signal.
class NoSignalError : public Error {
 public:
  using Error::Error;
};

// A ratio whose denominator vanishes (QBER with zero arrival probability).
class UndefinedError : public Error {
 public:
  using Error::Error;
};

// Construction rejected because an object invariant would be violated.
class ConstructionError : public Error {
 public:
  using Error::Error;
};

// Input is valid but outside the model this operation supports.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Scenario configuration problem; carries the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& message)
      : Error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace qkdfs
