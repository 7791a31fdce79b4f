#pragma once

#include <stdexcept>
#include <string>

namespace bhlr {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent experiment configuration; path names the field.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& msg)
      : Error(path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, double residual)
      : Error(msg + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Basis or dense matrix larger than the configured limit.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Operator acts outside its declared support.
class SupportError : public Error {
 public:
  using Error::Error;
};

// A parameter constraint of a bound (p > 2D+2 etc.) or an audit precondition.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

}  // namespace bhlr
